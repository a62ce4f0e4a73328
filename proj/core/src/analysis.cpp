#include "qsdc/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "qsdc/errors.hpp"

namespace qsdc {
namespace {

__extension__ using u128 = unsigned __int128;

}  // namespace

double worst_case_probability(std::size_t k, std::size_t x) {
  if (x == 0) return 1.0;
  if (k == 0) return 0.0;
  const int exponent = static_cast<int>(std::min<std::size_t>(k, 100000));
  const long double per_bit = std::log1p(-std::ldexp(1.0L, -exponent));
  return static_cast<double>(std::exp(static_cast<long double>(x) * per_bit));
}

std::size_t expected_corrected(std::size_t k, std::size_t t) {
  if (k == 0 || t == 0) return 0;
  // ceil(t - t*3^k/4^k) = t - floor(t*3^k / 4^k).
  if (k <= 40) {
    u128 pow3 = 1;
    for (std::size_t i = 0; i < k; ++i) pow3 *= 3;
    const u128 remaining = (pow3 * static_cast<u128>(t)) >> (2 * k);
    return t - static_cast<std::size_t>(remaining);
  }
  const long double remaining = std::floor(std::pow(0.75L, static_cast<long double>(k)) * t);
  return t - static_cast<std::size_t>(remaining);
}

double average_case_probability(std::size_t k, std::size_t u) {
  if (u % 2 != 0) throw ConfigError("average_case_probability: u must be even (t = u/2)");
  return worst_case_probability(k, u - expected_corrected(k, u / 2));
}

double full_recovery_probability(std::size_t k, std::size_t u) {
  return worst_case_probability(k + 1, u);
}

std::size_t tolerated_mismatches(std::size_t received, double threshold) {
  std::size_t m = 0;
  while (m < received &&
         static_cast<double>(m + 1) / static_cast<double>(received) <= threshold)
    ++m;
  return m;
}

double threshold_accept_probability(std::size_t n, double p_mismatch, double threshold) {
  if (!(p_mismatch >= 0.0 && p_mismatch <= 1.0))
    throw ConfigError("threshold_accept_probability: p_mismatch outside [0,1]");
  if (n == 0) return 0.0;
  const std::size_t m = tolerated_mismatches(n, threshold);
  if (p_mismatch == 0.0) return 1.0;
  if (p_mismatch == 1.0) return m >= n ? 1.0 : 0.0;
  const long double p = p_mismatch;
  const long double ln_p = std::log(p);
  const long double ln_q = std::log1p(-p);
  const long double nn = static_cast<long double>(n);
  long double sum = 0.0L;
  for (std::size_t j = 0; j <= m; ++j) {
    const long double jj = static_cast<long double>(j);
    const long double ln_c = std::lgamma(nn + 1) - std::lgamma(jj + 1) - std::lgamma(nn - jj + 1);
    sum += std::exp(ln_c + jj * ln_p + (nn - jj) * ln_q);
  }
  return static_cast<double>(std::min(sum, 1.0L));
}

std::vector<TableRow> generate_table(TableKind kind) {
  std::vector<TableRow> rows;
  for (std::size_t k : kTableIterations) {
    TableRow row{k, {}};
    for (std::size_t u : kTableLengths)
      row.probabilities[u] =
          kind == TableKind::worst ? worst_case_probability(k, u) : average_case_probability(k, u);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_percent_truncated(double probability) {
  if (!(probability >= 0.0 && probability <= 1.0))
    throw ConfigError("format_percent_truncated: probability outside [0,1]");
  // Tenths of a percent; the epsilon absorbs representation error at exact
  // boundaries such as 0.5 -> 500.
  const auto tenths = static_cast<long long>(std::floor(probability * 1000.0 + 1e-9));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%lld.%lld", tenths / 10, tenths % 10);
  return buf;
}

ConfidenceInterval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (successes > trials) throw ConfigError("wilson_interval: successes exceed trials");
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  ConfidenceInterval ci{std::max(0.0, center - half), std::min(1.0, center + half)};
  if (successes == 0) ci.low = 0.0;
  if (successes == trials) ci.high = 1.0;
  return ci;
}

MonteCarloReport make_report(std::string label, std::size_t trials, std::size_t successes,
                             std::uint64_t seed, const std::string& canonical) {
  MonteCarloReport r;
  r.label = std::move(label);
  r.trials = trials;
  r.successes = successes;
  r.point_estimate = trials ? static_cast<double>(successes) / static_cast<double>(trials) : 0.0;
  r.confidence_interval = wilson_interval(successes, trials);
  r.seed = seed;
  r.config_hash = config_hash(canonical);
  return r;
}

bool MonteCarloReport::oracle_in_interval() const {
  return oracle_value && confidence_interval.low <= *oracle_value &&
         *oracle_value <= confidence_interval.high;
}

std::string config_hash(const std::string& canonical_config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_config) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

unsigned default_thread_count() noexcept {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

namespace {

struct Scene1Accum {
  std::size_t successes = 0;
  std::size_t initial_wrong = 0;
  std::size_t corrected = 0;
  std::size_t wrong_bit_iterations = 0;
  std::size_t wrong_bit_flips = 0;

  void merge(const Scene1Accum& o) {
    successes += o.successes;
    initial_wrong += o.initial_wrong;
    corrected += o.corrected;
    wrong_bit_iterations += o.wrong_bit_iterations;
    wrong_bit_flips += o.wrong_bit_flips;
  }
};

struct CountAccum {
  std::size_t successes = 0;
  void merge(const CountAccum& o) { successes += o.successes; }
};

std::string describe(const ChannelConfig& c, const Scene1Options& o) {
  std::ostringstream s;
  s.precision(17);
  s << "p_loss=" << c.p_loss << "|p_flip=" << c.p_flip << "|policy="
    << (o.flip_policy.kind == FlipPolicyKind::first_mismatch ? "first-mismatch" : "majority")
    << "|fraction=" << o.flip_policy.mismatch_fraction
    << "|min_obs=" << o.flip_policy.min_observations << "|decoys=" << o.decoy_length;
  return s.str();
}

}  // namespace

Scene1MonteCarlo monte_carlo_scene1(std::size_t u, std::size_t k, std::size_t trials,
                                    const ChannelConfig& channel, const Scene1Options& options,
                                    std::uint64_t seed, unsigned threads) {
  if (trials == 0) throw ConfigError("monte_carlo_scene1: trials must be at least 1");
  channel.validate();
  options.flip_policy.validate();

  const auto total = run_trials<Scene1Accum>(
      trials, seed, threads, [&](std::size_t, RandomSource& rng, Scene1Accum& acc) {
        const auto truth = BitString::random(u, rng);
        auto state = AttackState::fresh(BitString::random(u, rng));
        const std::vector<std::uint8_t> initial = state.candidate.bits();
        for (std::size_t i = 0; i < u; ++i) acc.initial_wrong += initial[i] != truth[i];

        for (std::size_t it = 0; it < k; ++it) {
          const BitString before = state.candidate;
          state = scene1_iteration(std::move(state), truth, channel, rng, options);
          for (std::size_t i = 0; i < u; ++i) {
            if (before[i] == truth[i]) continue;
            ++acc.wrong_bit_iterations;
            acc.wrong_bit_flips += state.candidate[i] != before[i];
          }
        }
        for (std::size_t i = 0; i < u; ++i)
          acc.corrected += initial[i] != truth[i] && state.candidate[i] == truth[i];
        acc.successes += state.candidate == truth;
      });

  std::ostringstream canonical;
  canonical << "scene1|u=" << u << "|k=" << k << "|trials=" << trials << "|"
            << describe(channel, options) << "|seed=" << seed;

  Scene1MonteCarlo out;
  out.recovery = make_report("scene1_full_recovery", trials, total.successes, seed, canonical.str());
  if (channel.is_ideal() && options.flip_policy.kind == FlipPolicyKind::first_mismatch)
    out.recovery.oracle_value = full_recovery_probability(k, u);

  const double n = static_cast<double>(trials);
  out.correction.mean_initial_wrong = static_cast<double>(total.initial_wrong) / n;
  out.correction.simulated_mean_corrected = static_cast<double>(total.corrected) / n;
  out.correction.paper_formula_corrected = expected_corrected(k, u / 2);
  out.correction.simulated_detection_rate =
      total.wrong_bit_iterations
          ? static_cast<double>(total.wrong_bit_flips) / static_cast<double>(total.wrong_bit_iterations)
          : 0.0;
  return out;
}

MonteCarloReport measure_wrong_bit_flip_rate(std::size_t iterations, const ChannelConfig& channel,
                                             std::uint64_t seed, unsigned threads) {
  if (iterations == 0) throw ConfigError("measure_wrong_bit_flip_rate: iterations must be at least 1");
  channel.validate();
  const auto total = run_trials<CountAccum>(
      iterations, seed, threads, [&](std::size_t, RandomSource& rng, CountAccum& acc) {
        BitString truth(1, rng.coin());
        BitString wrong(1, static_cast<std::uint8_t>(truth[0] ^ 1U));
        const auto after = scene1_iteration(AttackState::fresh(wrong), truth, channel, rng);
        acc.successes += after.total_flips;
      });

  std::ostringstream canonical;
  canonical.precision(17);
  canonical << "wrong_bit_flip_rate|iterations=" << iterations << "|p_loss=" << channel.p_loss
            << "|p_flip=" << channel.p_flip << "|seed=" << seed;
  auto r = make_report("wrong_bit_flip_rate", iterations, total.successes, seed, canonical.str());
  if (channel.is_ideal()) r.oracle_value = 0.5;
  return r;
}

}  // namespace qsdc
