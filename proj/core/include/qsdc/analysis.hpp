#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "qsdc/attack.hpp"
#include "qsdc/qubit.hpp"
#include "qsdc/random.hpp"

namespace qsdc {

// (1 - 2^-k)^x.
double worst_case_probability(std::size_t k, std::size_t x);

// ceil((1 - (3/4)^k) * t), evaluated exactly in integers.
std::size_t expected_corrected(std::size_t k, std::size_t t);

// worst_case_probability(k, u - expected_corrected(k, u/2)). u must be even.
double average_case_probability(std::size_t k, std::size_t u);

// Exact-recovery probability of scene 1 from a uniformly random candidate on
// an ideal channel: every bit starts wrong with probability 1/2 and a wrong
// bit survives an iteration with probability 1/2, so (1 - 2^-(k+1))^u.
double full_recovery_probability(std::size_t k, std::size_t u);

// Largest mismatch count m with m / received <= threshold.
std::size_t tolerated_mismatches(std::size_t received, double threshold);

// P(Bin(n, p_mismatch) <= tolerated_mismatches(n, threshold)): the accept
// probability of a check whose n qubits each mismatch independently. With
// p_mismatch = 1/4 this is a random-id_B impostor against Alice; with 1/2 a
// random S_IDA against Bob.
double threshold_accept_probability(std::size_t n, double p_mismatch, double threshold);

enum class TableKind { worst, average };

inline constexpr std::size_t kTableIterations[] = {10, 11, 12, 13};
inline constexpr std::size_t kTableLengths[] = {32, 64, 128};

struct TableRow {
  std::size_t k = 0;
  std::map<std::size_t, double> probabilities;
};

std::vector<TableRow> generate_table(TableKind kind);

// Percentage truncated (not rounded) to one decimal: 0.99197 -> "99.1".
std::string format_percent_truncated(double probability);

struct ConfidenceInterval {
  double low = 0.0;
  double high = 1.0;
};

inline constexpr double kZ99 = 2.5758293035489004;

ConfidenceInterval wilson_interval(std::size_t successes, std::size_t trials, double z = kZ99);

struct MonteCarloReport {
  std::string label;
  std::size_t trials = 0;
  std::size_t successes = 0;
  double point_estimate = 0.0;
  ConfidenceInterval confidence_interval;
  double confidence_level = 0.99;
  std::optional<double> oracle_value;
  std::uint64_t seed = 0;
  std::string config_hash;

  bool oracle_in_interval() const;
};

// The (3/4)^k correction model next to what simulation shows.
struct CorrectionComparison {
  double mean_initial_wrong = 0.0;
  double simulated_mean_corrected = 0.0;
  // ceil((1 - (3/4)^k) * u/2), the average-case formula's credit.
  std::size_t paper_formula_corrected = 0;
  // Fraction of (wrong bit, iteration) pairs in which the bit flipped.
  double simulated_detection_rate = 0.0;
  // Per-iteration detection rate implied by the (3/4)^k factor.
  double paper_detection_rate = 0.25;
};

struct Scene1MonteCarlo {
  MonteCarloReport recovery;
  CorrectionComparison correction;
};

// Report with point estimate and 99% Wilson interval; config_hash is taken
// over the canonical string.
MonteCarloReport make_report(std::string label, std::size_t trials, std::size_t successes,
                             std::uint64_t seed, const std::string& canonical);

// Hex FNV-1a of a canonical configuration string.
std::string config_hash(const std::string& canonical_config);

unsigned default_thread_count() noexcept;

// Runs trials [0, trials) split into contiguous chunks across threads. Trial
// i receives RandomSource(derive_seed(seed, i)) and adds into the chunk's
// accumulator; accumulators are merged in chunk order. Accum must provide
// merge(const Accum&); with integer sums the result is independent of the
// thread count.
template <class Accum, class Trial>
Accum run_trials(std::size_t trials, std::uint64_t seed, unsigned threads, Trial trial) {
  threads = std::max(1U, threads);
  const std::size_t workers = std::min<std::size_t>(threads, std::max<std::size_t>(trials, 1));
  std::vector<Accum> partial(workers);
  auto work = [&](std::size_t w) {
    const std::size_t begin = trials * w / workers;
    const std::size_t end = trials * (w + 1) / workers;
    for (std::size_t i = begin; i < end; ++i) {
      RandomSource rng(derive_seed(seed, i));
      trial(i, rng, partial[w]);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  Accum total{};
  for (const auto& p : partial) total.merge(p);
  return total;
}

// Scene 1 from a random ID_B and random initial candidate per trial. The
// oracle is attached only for the ideal channel with first-mismatch flips.
Scene1MonteCarlo monte_carlo_scene1(std::size_t u, std::size_t k, std::size_t trials,
                                    const ChannelConfig& channel, const Scene1Options& options,
                                    std::uint64_t seed, unsigned threads = 1);

// Per-iteration flip frequency of a single wrong candidate bit; oracle 1/2
// on the ideal channel.
MonteCarloReport measure_wrong_bit_flip_rate(std::size_t iterations, const ChannelConfig& channel,
                                             std::uint64_t seed, unsigned threads = 1);

}  // namespace qsdc
