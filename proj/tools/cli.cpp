#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "qsdc/analysis.hpp"
#include "qsdc/errors.hpp"
#include "qsdc/modified_protocol.hpp"
#include "qsdc/serialize.hpp"

namespace qsdc::cli {
namespace {

using nlohmann::json;

struct Common {
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 0;
  double p_loss = 0.0;
  double p_flip = 0.0;
  double threshold = 0.02;
  std::string format = "pretty";
  std::string output;

  ChannelConfig channel() const { return {p_loss, p_flip}; }
  VerificationPolicy policy() const { return {threshold}; }
  unsigned worker_count() const { return threads ? threads : default_thread_count(); }

  // Everything that changes results; threads and output path do not.
  std::string canonical() const {
    std::ostringstream s;
    s.precision(17);
    s << "seed=" << seed << "|p_loss=" << p_loss << "|p_flip=" << p_flip << "|threshold=" << threshold;
    return s.str();
  }

  json to_json() const {
    return json{{"seed", seed}, {"p_loss", p_loss}, {"p_flip", p_flip}, {"error_threshold", threshold}};
  }
};

struct Params {
  std::string kind = "worst";
  std::size_t u = 64;
  std::size_t n = 64;
  std::size_t ell = 16;
  std::size_t k = 13;
  std::size_t trials = 10000;
  std::string flip_policy = "first-mismatch";
  std::string plaintext = "known";
  double bias = 0.9;
  std::size_t ciphertexts = 25;
  std::string trace_csv;

  Scene1Options scene1_options() const {
    Scene1Options o;
    o.flip_policy.kind = flip_policy == "majority" ? FlipPolicyKind::majority : FlipPolicyKind::first_mismatch;
    return o;
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string describe(const MonteCarloReport& r) {
  std::string s = std::to_string(r.successes) + "/" + std::to_string(r.trials) + " = " +
                  fmt(r.point_estimate) + "  99% CI [" + fmt(r.confidence_interval.low) + ", " +
                  fmt(r.confidence_interval.high) + "]";
  s += r.oracle_value ? "  oracle " + fmt(*r.oracle_value) : "  oracle n/a";
  return s;
}

// Flattened "metric,value" rows of a JSON report.
std::string flat_csv(const json& report) {
  std::ostringstream out;
  out << "metric,value\n";
  const json flat = report.flatten();
  for (const auto& [key, value] : flat.items())
    out << key << ',' << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
  return out.str();
}

struct Rendered {
  json report;
  std::string pretty;
  std::string csv;  // empty means "flatten report"
};

std::string select(const Rendered& r, const std::string& format) {
  if (format == "json") return r.report.dump(2) + "\n";
  if (format == "csv") return r.csv.empty() ? flat_csv(r.report) : r.csv;
  return r.pretty;
}

// tables ---------------------------------------------------------------------

Rendered cmd_tables(const Params& p) {
  const TableKind kind = p.kind == "average" ? TableKind::average : TableKind::worst;
  const auto rows = generate_table(kind);
  std::ostringstream pretty;
  pretty << (kind == TableKind::worst ? "worst case" : "average case")
         << " success probability (%) after k iterations, truncated to one decimal\n";
  pretty << "k, u=32, u=64, u=128\n";
  for (const auto& row : rows) {
    pretty << row.k;
    for (const auto& [u, prob] : row.probabilities) pretty << ", " << format_percent_truncated(prob);
    pretty << '\n';
  }
  return {table_json(kind, rows), pretty.str(), table_csv(rows)};
}

// simulate -------------------------------------------------------------------

struct SimulateAccum {
  std::size_t accepts = 0;
  std::size_t round_trips = 0;
  std::map<std::size_t, std::size_t> histogram;

  void merge(const SimulateAccum& o) {
    accepts += o.accepts;
    round_trips += o.round_trips;
    for (const auto& [m, c] : o.histogram) histogram[m] += c;
  }
};

Rendered cmd_simulate(const Params& p, const Common& c) {
  const auto channel = c.channel();
  const auto policy = c.policy();
  channel.validate();
  policy.validate();
  const auto total = run_trials<SimulateAccum>(
      p.trials, c.seed, c.worker_count(), [&](std::size_t, RandomSource& rng, SimulateAccum& acc) {
        const auto m = BitString::random(p.n, rng);
        const auto id_a = BitString::random(p.n, rng);
        const auto id_b = BitString::random(p.u, rng);
        const auto rec = run_session(m, id_a, id_b, channel, policy, rng);
        acc.accepts += rec.alice_verdict == Verdict::accept;
        acc.round_trips += rec.decrypted_message && *rec.decrypted_message == m;
        const auto received = static_cast<double>(
            std::count(rec.received_mask.begin(), rec.received_mask.end(), true));
        ++acc.histogram[static_cast<std::size_t>(std::llround(rec.mismatch_rate * received))];
      });

  const std::string canonical = "simulate|u=" + std::to_string(p.u) + "|n=" + std::to_string(p.n) +
                                "|trials=" + std::to_string(p.trials) + "|" + c.canonical();
  auto accept = make_report("accept_rate", p.trials, total.accepts, c.seed, canonical);
  // Honest mismatches are Bin(u, p_flip) when nothing is lost.
  if (channel.p_loss == 0.0) accept.oracle_value = threshold_accept_probability(p.u, channel.p_flip, c.threshold);
  auto round_trip = make_report("round_trip", p.trials, total.round_trips, c.seed, canonical);

  json hist = json::array();
  for (const auto& [m, count] : total.histogram) hist.push_back({{"mismatches", m}, {"count", count}});

  json report{{"schema_version", kSchemaVersion},
              {"record_type", "simulate"},
              {"config", c.to_json()},
              {"config_hash", config_hash(canonical)},
              {"accept", accept},
              {"round_trip", round_trip},
              {"mismatch_histogram", hist}};
  report["config"].update({{"u", p.u}, {"n", p.n}, {"trials", p.trials}});

  std::ostringstream pretty;
  pretty << "honest sessions: " << p.trials << " (u=" << p.u << ", n=" << p.n << ")\n"
         << "accept rate: " << describe(accept) << "\n"
         << "round-trip success: " << describe(round_trip) << "\n"
         << "mismatch histogram (mismatches: sessions)\n";
  for (const auto& [m, count] : total.histogram) pretty << "  " << m << ": " << count << "\n";
  return {report, pretty.str(), ""};
}

// attack ---------------------------------------------------------------------

struct AttackAccum {
  std::size_t id_b_recovered = 0;
  std::size_t deceived = 0;
  std::size_t id_a_recovered = 0;
  std::size_t hamming = 0;
  std::size_t initial_wrong = 0;
  std::size_t corrected = 0;
  std::size_t wrong_bit_iterations = 0;
  std::size_t wrong_bit_flips = 0;

  void merge(const AttackAccum& o) {
    id_b_recovered += o.id_b_recovered;
    deceived += o.deceived;
    id_a_recovered += o.id_a_recovered;
    hamming += o.hamming;
    initial_wrong += o.initial_wrong;
    corrected += o.corrected;
    wrong_bit_iterations += o.wrong_bit_iterations;
    wrong_bit_flips += o.wrong_bit_flips;
  }
};

Rendered cmd_attack(const Params& p, const Common& c) {
  const auto channel = c.channel();
  const auto policy = c.policy();
  const auto options = p.scene1_options();
  const PlaintextModel model{p.plaintext == "biased" ? PlaintextModelKind::biased_bits
                                                     : PlaintextModelKind::known_plaintext,
                             p.bias};
  channel.validate();
  policy.validate();
  options.flip_policy.validate();
  model.validate();
  const std::size_t sessions = model.kind == PlaintextModelKind::known_plaintext ? 1 : p.ciphertexts;
  if (sessions == 0) throw ConfigError("attack: --ciphertexts must be at least 1");

  // Only trial 0 writes these; it always runs on the first worker.
  IterationLog trace;
  json first_trial;

  const auto total = run_trials<AttackAccum>(
      p.trials, c.seed, c.worker_count(), [&](std::size_t i, RandomSource& rng, AttackAccum& acc) {
        const auto id_b = BitString::random(p.u, rng);
        const auto id_a = BitString::random(p.n, rng);
        const auto initial = BitString::random(p.u, rng);

        auto state = AttackState::fresh(initial);
        for (std::size_t it = 0; it < p.k; ++it) {
          const BitString before = state.candidate;
          state = scene1_iteration(std::move(state), id_b, channel, rng, options, i == 0 ? &trace : nullptr);
          for (std::size_t b = 0; b < p.u; ++b) {
            if (before[b] == id_b[b]) continue;
            ++acc.wrong_bit_iterations;
            acc.wrong_bit_flips += state.candidate[b] != before[b];
          }
        }
        for (std::size_t b = 0; b < p.u; ++b) {
          acc.initial_wrong += initial[b] != id_b[b];
          acc.corrected += initial[b] != id_b[b] && state.candidate[b] == id_b[b];
        }
        const std::size_t distance = hamming_distance(state.candidate, id_b);
        acc.hamming += distance;
        acc.id_b_recovered += distance == 0;

        bool deceived = false;
        std::optional<BitString> recovered_id_a;
        std::vector<BitString> ciphertexts;
        BitString last_message;
        for (std::size_t s = 0; s < sessions; ++s) {
          const auto m = model.kind == PlaintextModelKind::known_plaintext
                             ? BitString::random(p.n, rng)
                             : BitString::biased(p.n, model.bias, rng);
          const auto r = scene2_intercept(m, id_a, id_b, state.candidate, channel, policy, rng);
          if (s == 0) deceived = r.alice_verdict == Verdict::accept;
          if (r.recovered_ciphertext) ciphertexts.push_back(*r.recovered_ciphertext);
          last_message = m;
        }
        if (!ciphertexts.empty()) {
          recovered_id_a = model.kind == PlaintextModelKind::known_plaintext
                               ? xor_recover_known_plaintext(ciphertexts.front(), last_message)
                               : xor_recover_biased(ciphertexts, model).key_estimate;
        }
        acc.deceived += deceived;
        const bool id_a_ok = recovered_id_a && *recovered_id_a == id_a;
        acc.id_a_recovered += id_a_ok;

        if (i == 0) {
          first_trial = json{{"true_id_b", id_b},
                             {"initial_candidate", initial},
                             {"recovered_id_b", state.candidate},
                             {"hamming_distance", distance},
                             {"confidence", confidence_report(state)},
                             {"alice_deceived", deceived},
                             {"true_id_a", id_a},
                             {"recovered_id_a", recovered_id_a ? json(*recovered_id_a) : json(nullptr)},
                             {"id_a_recovered", id_a_ok}};
        }
      });

  std::ostringstream canon;
  canon.precision(17);
  canon << "attack|u=" << p.u << "|n=" << p.n << "|k=" << p.k << "|trials=" << p.trials
        << "|policy=" << p.flip_policy << "|plaintext=" << p.plaintext << "|bias=" << p.bias
        << "|ciphertexts=" << sessions << "|" << c.canonical();
  const std::string canonical = canon.str();

  const bool ideal_first = channel.is_ideal() && options.flip_policy.kind == FlipPolicyKind::first_mismatch;
  auto recovery = make_report("scene1_full_recovery", p.trials, total.id_b_recovered, c.seed, canonical);
  if (ideal_first) recovery.oracle_value = full_recovery_probability(p.k, p.u);
  auto deception = make_report("alice_deceived", p.trials, total.deceived, c.seed, canonical);
  // Without refinement the candidate is uniform: each bit mismatches with 1/4.
  if (p.k == 0 && channel.is_ideal()) deception.oracle_value = threshold_accept_probability(p.u, 0.25, c.threshold);
  auto end_to_end = make_report("id_a_recovered", p.trials, total.id_a_recovered, c.seed, canonical);

  const double trials = static_cast<double>(p.trials);
  CorrectionComparison correction;
  correction.mean_initial_wrong = static_cast<double>(total.initial_wrong) / trials;
  correction.simulated_mean_corrected = static_cast<double>(total.corrected) / trials;
  correction.paper_formula_corrected = expected_corrected(p.k, p.u / 2);
  correction.simulated_detection_rate =
      total.wrong_bit_iterations ? static_cast<double>(total.wrong_bit_flips) /
                                       static_cast<double>(total.wrong_bit_iterations)
                                 : 0.0;

  json report{{"schema_version", kSchemaVersion},
              {"record_type", "attack"},
              {"config", c.to_json()},
              {"config_hash", config_hash(canonical)},
              {"scene1_recovery", recovery},
              {"mean_hamming_distance", static_cast<double>(total.hamming) / trials},
              {"alice_deception", deception},
              {"id_a_recovery", end_to_end},
              {"correction", correction},
              {"first_trial", first_trial}};
  report["config"].update({{"u", p.u},
                           {"n", p.n},
                           {"k", p.k},
                           {"trials", p.trials},
                           {"flip_policy", p.flip_policy},
                           {"plaintext", p.plaintext},
                           {"bias", p.bias},
                           {"ciphertexts", sessions}});

  if (!p.trace_csv.empty()) {
    std::ofstream f(p.trace_csv);
    if (!f) throw ConfigError("cannot open --trace-csv path: " + p.trace_csv);
    f << iteration_log_csv(trace);
  }

  std::ostringstream pretty;
  pretty << "attack trials: " << p.trials << " (u=" << p.u << ", n=" << p.n << ", k=" << p.k << ")\n"
         << "scene 1 exact id_B recovery: " << describe(recovery) << "\n"
         << "mean Hamming distance to ID_B: " << fmt(static_cast<double>(total.hamming) / trials) << "\n"
         << "scene 2 Alice deceived: " << describe(deception) << "\n"
         << "ID_A recovered (" << p.plaintext << " plaintext): " << describe(end_to_end) << "\n"
         << "wrong bits corrected, paper formula: " << correction.paper_formula_corrected
         << "  simulated mean: " << fmt(correction.simulated_mean_corrected)
         << " of " << fmt(correction.mean_initial_wrong) << " initially wrong\n"
         << "per-iteration detection of a wrong bit, paper formula: " << fmt(correction.paper_detection_rate)
         << "  simulated: " << fmt(correction.simulated_detection_rate) << "\n"
         << "first trial: distance " << first_trial["hamming_distance"].get<std::size_t>()
         << ", confidence " << fmt(first_trial["confidence"]["overall_confidence"].get<double>())
         << ", deceived " << (first_trial["alice_deceived"].get<bool>() ? "yes" : "no")
         << ", ID_A recovered " << (first_trial["id_a_recovered"].get<bool>() ? "yes" : "no") << "\n";
  return {report, pretty.str(), ""};
}

// modified-demo --------------------------------------------------------------

struct AbortAccum {
  std::size_t aborts = 0;
  std::size_t leaks = 0;
  void merge(const AbortAccum& o) {
    aborts += o.aborts;
    leaks += o.leaks;
  }
};

struct HonestAccum {
  std::size_t round_trips = 0;
  void merge(const HonestAccum& o) { round_trips += o.round_trips; }
};

Rendered cmd_modified_demo(const Params& p, const Common& c) {
  const auto channel = c.channel();
  const auto policy = c.policy();
  const auto options = p.scene1_options();
  channel.validate();
  policy.validate();
  options.flip_policy.validate();

  RandomSource setup(derive_seed(c.seed, 0));
  const auto secrets = MutualSecrets::random(p.ell, p.u, p.n, setup);
  const auto initial = BitString::random(p.u, setup);

  // Scene 1 against both protocols from the same seed.
  RandomSource original_rng(derive_seed(c.seed, 1));
  const auto original = scene1_run(p.u, p.k, secrets.id_b, initial, channel, original_rng, options);
  RandomSource modified_rng(derive_seed(c.seed, 1));
  const auto modified =
      scene1_attack_modified(p.u, p.k, secrets, initial, channel, policy, modified_rng, options);

  const auto abort_total = run_trials<AbortAccum>(
      p.trials, derive_seed(c.seed, 2), c.worker_count(), [&](std::size_t, RandomSource& rng, AbortAccum& acc) {
        const auto s = MutualSecrets::random(p.ell, p.u, p.n, rng);
        const auto rec = oscar_as_alice_session(s, BitString::random(p.u, rng), 0, channel, policy, rng);
        const bool aborted = rec.bob_verdict == Verdict::reject;
        acc.aborts += aborted;
        acc.leaks += aborted && rec.bob_announcement.has_value();
      });
  const auto honest_total = run_trials<HonestAccum>(
      p.trials, derive_seed(c.seed, 3), c.worker_count(), [&](std::size_t, RandomSource& rng, HonestAccum& acc) {
        const auto s = MutualSecrets::random(p.ell, p.u, p.n, rng);
        const auto m = BitString::random(p.n, rng);
        const auto rec = run_modified_session(m, s, channel, policy, rng);
        const bool bob_ok = !rec.bob_verdict || *rec.bob_verdict == Verdict::accept;
        acc.round_trips += bob_ok && rec.alice_verdict == Verdict::accept && rec.decrypted_message &&
                           *rec.decrypted_message == m;
      });

  std::ostringstream canon;
  canon << "modified-demo|u=" << p.u << "|n=" << p.n << "|ell=" << p.ell << "|k=" << p.k
        << "|trials=" << p.trials << "|policy=" << p.flip_policy << "|" << c.canonical();
  const std::string canonical = canon.str();

  auto aborts = make_report("oscar_as_alice_abort", p.trials, abort_total.aborts, c.seed, canonical);
  if (channel.is_ideal())
    aborts.oracle_value = p.ell == 0 ? 0.0 : 1.0 - threshold_accept_probability(p.ell, 0.5, c.threshold);
  auto honest = make_report("honest_round_trip", p.trials, honest_total.round_trips, c.seed, canonical);
  if (channel.is_ideal()) honest.oracle_value = 1.0;

  const json original_json{{"sessions", p.k},
                           {"bits_learned", original.state.bits_observed},
                           {"aborts", 0},
                           {"abort_rate", 0.0},
                           {"id_b_recovered", original.state.candidate == secrets.id_b}};
  const json modified_json{{"sessions", modified.sessions},
                           {"bits_learned", modified.bits_learned},
                           {"aborts", modified.aborts},
                           {"abort_rate", modified.abort_rate},
                           {"leaks_after_abort", modified.leaks_after_abort},
                           {"id_b_recovered", modified.final_state.candidate == secrets.id_b}};
  json report{{"schema_version", kSchemaVersion},
              {"record_type", "modified_demo"},
              {"config", c.to_json()},
              {"config_hash", config_hash(canonical)},
              {"original", original_json},
              {"modified", modified_json},
              {"oscar_as_alice", aborts},
              {"leaks_after_abort", abort_total.leaks},
              {"honest_round_trip", honest}};
  report["config"].update(
      {{"u", p.u}, {"n", p.n}, {"ell", p.ell}, {"k", p.k}, {"trials", p.trials}, {"flip_policy", p.flip_policy}});

  std::ostringstream pretty;
  pretty << "scene 1, " << p.k << " fake sessions (u=" << p.u << ", ell=" << p.ell << ")\n"
         << "                 original   modified\n";
  char line[128];
  std::snprintf(line, sizeof line, "bits learned     %-10zu %zu\n", original.state.bits_observed,
                modified.bits_learned);
  pretty << line;
  std::snprintf(line, sizeof line, "abort rate       %-10s %s\n", "0", fmt(modified.abort_rate).c_str());
  pretty << line;
  std::snprintf(line, sizeof line, "id_B recovered   %-10s %s\n",
                original.state.candidate == secrets.id_b ? "yes" : "no",
                modified.final_state.candidate == secrets.id_b ? "yes" : "no");
  pretty << line;
  pretty << "Oscar-as-Alice abort rate: " << describe(aborts) << "\n"
         << "announcements leaked after abort: " << abort_total.leaks << "\n"
         << "honest modified round-trip: " << describe(honest) << "\n";
  return {report, pretty.str(), ""};
}

void add_common(CLI::App* app, Common& c, bool channel) {
  app->add_option("--seed", c.seed, "Base seed")->capture_default_str();
  app->add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"pretty", "csv", "json"}))
      ->capture_default_str();
  app->add_option("--output", c.output, "Write output to this file instead of stdout");
  if (!channel) return;
  app->add_option("--threads", c.threads, "Worker threads (0 = hardware concurrency)");
  app->add_option("--p-loss", c.p_loss, "Photon loss probability")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  app->add_option("--p-flip", c.p_flip, "Same-basis flip probability")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app->add_option("--threshold", c.threshold, "Mismatch-rate threshold for verification")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
}

void add_sizes(CLI::App* app, Params& p, bool with_k) {
  app->add_option("--u", p.u, "Length of ID_B")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--n", p.n, "Message length")->check(CLI::NonNegativeNumber)->capture_default_str();
  app->add_option("--trials", p.trials, "Number of trials")->check(CLI::PositiveNumber)->capture_default_str();
  if (!with_k) return;
  app->add_option("--k", p.k, "Scene 1 iterations")->check(CLI::NonNegativeNumber)->capture_default_str();
  app->add_option("--flip-policy", p.flip_policy, "Candidate update rule")
      ->check(CLI::IsMember({"first-mismatch", "majority"}))
      ->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulator for single-photon QSDC with authentication and the two-scene attack"};
  app.name("qsdc-lab");
  app.require_subcommand(1);

  Common common;
  Params params;

  auto* tables = app.add_subcommand("tables", "Print the success-probability tables");
  tables->add_option("--kind", params.kind, "worst or average")
      ->check(CLI::IsMember({"worst", "average"}))
      ->capture_default_str();
  add_common(tables, common, false);

  auto* simulate = app.add_subcommand("simulate", "Run honest sessions of the original protocol");
  add_sizes(simulate, params, false);
  add_common(simulate, common, true);

  auto* attack = app.add_subcommand("attack", "Run scene 1 then scene 2 of the attack");
  add_sizes(attack, params, true);
  add_common(attack, common, true);
  attack->add_option("--plaintext", params.plaintext, "Plaintext model for XOR recovery")
      ->check(CLI::IsMember({"known", "biased"}))
      ->capture_default_str();
  attack->add_option("--bias", params.bias, "P(plaintext bit = 0) for the biased model")->capture_default_str();
  attack->add_option("--ciphertexts", params.ciphertexts, "Intercepted sessions for the biased model")
      ->capture_default_str();
  attack->add_option("--trace-csv", params.trace_csv, "Write the first trial's mismatch log as CSV");

  auto* modified = app.add_subcommand("modified-demo", "Scene 1 against the original and the modified protocol");
  add_sizes(modified, params, true);
  add_common(modified, common, true);
  modified->add_option("--ell", params.ell, "Alice verification qubits (ID_A has 2*ell bits)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    Rendered rendered;
    if (*tables) rendered = cmd_tables(params);
    else if (*simulate) rendered = cmd_simulate(params, common);
    else if (*attack) rendered = cmd_attack(params, common);
    else rendered = cmd_modified_demo(params, common);

    const std::string text = select(rendered, common.format);
    if (common.output.empty()) {
      out << text;
    } else {
      std::ofstream f(common.output);
      if (!f) {
        err << "error: cannot open --output path: " << common.output << "\n";
        return 2;
      }
      f << text;
    }
    return 0;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace qsdc::cli
