/*
 * Copyright 2026 The FheFL Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"
#include "fhefl/error.hpp"
#include "fhefl/he.hpp"
#include "fhefl/multikey.hpp"
#include "fhefl/params.hpp"
#include "fhefl/robust_agg.hpp"
#include "fhefl/sim/bounds.hpp"
#include "fhefl/sim/config.hpp"
#include "fhefl/sim/simulator.hpp"
#include "json.hpp"

namespace fhefl::cli {

namespace {

using Clock = std::chrono::steady_clock;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int cmd_params(const std::string& name, std::ostream& out) {
  const HeParams& p = preset(name);
  const auto& ring = *p.ring;
  std::string chain;
  for (std::size_t i = 0; i < ring.chain_size(); ++i) {
    chain += (i ? "," : "") + std::to_string(ring.modulus(i).bit_count());
  }
  if (ring.has_special()) chain += " | special " + std::to_string(ring.modulus(ring.special_index()).bit_count());
  out << "preset          " << p.name << '\n'
      << "N               " << p.degree() << '\n'
      << "logq            " << ring.total_bits() << '\n'
      << "chain bits      " << chain << '\n'
      << "delta bits      " << p.scale_bits << '\n'
      << "L               " << p.max_level() << '\n'
      << "slot capacity   " << p.slot_capacity() << '\n'
      << "block capacity  " << p.block_capacity() << '\n'
      << "security        " << security_label(p) << '\n';
  return kExitOk;
}

int cmd_check_bound(std::size_t b, std::size_t m, double g_sq, double z_sq, std::ostream& out) {
  if (m == 0 || b == 0) throw UsageError("check-bound needs --B >= 1 and --M >= 1");
  const auto r = sim::poisoning_bound_report(b, m, g_sq, z_sq);
  const nlohmann::json doc = {{"B", r.benign},         {"M", r.malicious}, {"Gsq", r.g_sq},
                              {"Zsq", r.z_sq},         {"threshold", r.threshold},
                              {"satisfied", r.satisfied}};
  out << doc.dump(2) << '\n';
  return kExitOk;
}

struct SimulateFlags {
  std::string config;
  std::vector<std::uint64_t> seeds;
  std::string mode;
  std::string aggregator;
  std::string out_dir = "fhefl-out";
  bool override_cap = false;
};

int cmd_simulate(const SimulateFlags& flags, std::ostream& out) {
  if (!std::filesystem::exists(flags.config)) throw UsageError("config file '" + flags.config + "' does not exist");
  sim::ExperimentConfig cfg;
  std::string text;
  {
    std::ifstream in(flags.config);
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  try {
    auto doc = nlohmann::json::parse(text);
    if (flags.override_cap) doc["override_attacker_cap"] = true;
    if (!flags.mode.empty()) doc["mode"] = flags.mode;
    if (!flags.aggregator.empty()) doc["aggregator"] = flags.aggregator;
    if (!flags.seeds.empty()) doc["seeds"] = flags.seeds;
    cfg = sim::parse_config(doc.dump());
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("config is not valid JSON: ") + e.what());
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  const bool timing = cfg.mode == sim::Mode::kEncrypted;
  std::vector<sim::ExperimentResult> results;
  for (std::uint64_t seed : cfg.seeds) {
    sim::Simulator simulator(cfg, seed);
    auto result = simulator.run([&](const sim::RoundMetrics& m) {
      out << "seed " << seed << " round " << m.epoch << "/" << cfg.rounds << " accuracy " << m.accuracy
          << " aasr " << m.aasr << '\n';
    });
    std::ostringstream csv;
    sim::write_metrics_csv(csv, result, simulator.spec().classes, timing);
    const auto base = std::filesystem::path(flags.out_dir);
    sim::write_file_atomic((base / ("metrics_seed" + std::to_string(seed) + ".csv")).string(), csv.str());
    sim::write_file_atomic((base / ("summary_seed" + std::to_string(seed) + ".json")).string(),
                           sim::summary_json(result, cfg));
    results.push_back(std::move(result));
  }
  sim::write_file_atomic((std::filesystem::path(flags.out_dir) / "summary.json").string(),
                         sim::aggregate_summary_json(results, cfg));
  out << "wrote " << results.size() << " run(s) to " << flags.out_dir << '\n';
  return kExitOk;
}

int cmd_bench(const std::string& name, std::size_t reps, std::ostream& out) {
  if (reps == 0) throw UsageError("--reps must be at least 1");
  const auto rows = bench(name, reps);
  out << "op,mean_us,p95_us\n";
  for (const auto& r : rows) out << r.op << ',' << r.mean_us << ',' << r.p95_us << '\n';
  return kExitOk;
}

BenchRow summarize(std::string op, std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
  const auto idx = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(samples.size()))) - 1;
  return BenchRow{std::move(op), mean, samples[std::min(idx, samples.size() - 1)]};
}

template <typename F>
double time_us(F&& f) {
  const auto start = Clock::now();
  f();
  return std::chrono::duration<double, std::micro>(Clock::now() - start).count();
}

}  // namespace

std::vector<BenchRow> bench(const std::string& preset_name, std::size_t reps) {
  require(reps > 0, ErrorCode::kInvalidArgument, "reps must be positive");
  const HeParams& params = preset(preset_name);
  constexpr std::size_t kUsers = 10;
  std::vector<std::uint64_t> ids(kUsers);
  std::iota(ids.begin(), ids.end(), std::uint64_t{0});
  const auto keyrings = setup_pairwise(params, ids, seed_from_u64(1));
  Prng prng(seed_from_u64(2));
  const Seed round_seed = seed_from_u64(3);
  const std::size_t width = params.block_capacity();
  std::vector<double> values(width);
  for (double& v : values) v = prng.normal() * 0.01;
  const PlainVector plain{values};

  std::vector<double> enc_t, add_t, mul_t, round_t;
  Ciphertext a, b;
  for (std::size_t r = 0; r < reps; ++r) {
    enc_t.push_back(time_us([&] {
      a = encrypt(plain, keyrings[0].secret, common_poly(params, round_seed, r, 0), params.scale(), prng);
    }));
    b = encrypt(plain, keyrings[0].secret, common_poly(params, round_seed, r, 1), params.scale(), prng);
    Ciphertext sum;
    add_t.push_back(time_us([&] { sum = he_add(a, b); }));
    Ciphertext prod;
    mul_t.push_back(time_us([&] { prod = he_mult_relin(a, b, keyrings[0].eval_key); }));
  }
  for (std::size_t r = 0; r < reps; ++r) {
    std::vector<EncryptedUpdate> updates;
    for (std::size_t u = 0; u < kUsers; ++u) {
      updates.push_back(encrypt_update(GradientUpdate{ids[u], values, 0.1}, keyrings[u].secret, params, round_seed, r, prng));
    }
    const std::vector<double> w(width, 0.0);
    SecureRoundOptions options;
    options.round_base = r << 20;
    round_t.push_back(time_us([&] { secure_aggregate_round(updates, keyrings, w, 0.1, options); }));
  }
  return {summarize("encrypt", enc_t), summarize("add", add_t), summarize("mult_relin", mul_t),
          summarize("secure_round_10", round_t)};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-key homomorphic federated aggregation toolkit", "fhefl"};
  app.require_subcommand(1);

  std::string params_preset;
  auto* params = app.add_subcommand("params", "Print an encryption parameter preset");
  params->add_option("--preset", params_preset, "Preset name")->required();

  SimulateFlags sim_flags;
  std::uint64_t seed = 0;
  auto* simulate = app.add_subcommand("simulate", "Run a federated-learning experiment");
  simulate->add_option("--config", sim_flags.config, "Experiment JSON")->required();
  auto* seed_opt = simulate->add_option("--seed", seed, "Run a single seed instead of the configured list");
  simulate->add_option("--mode", sim_flags.mode, "plain|encrypted");
  simulate->add_option("--aggregator", sim_flags.aggregator, "fhefl|fedavg|median|trimmed_mean|krum");
  simulate->add_option("--out", sim_flags.out_dir, "Output directory");
  simulate->add_flag("--override-attacker-cap", sim_flags.override_cap, "Allow attacker fractions above 0.2");

  std::string bench_preset = "test-1024";
  std::size_t reps = 10;
  auto* bench_cmd = app.add_subcommand("bench", "Time homomorphic operations");
  bench_cmd->add_option("--preset", bench_preset, "Preset name");
  bench_cmd->add_option("--reps", reps, "Repetitions per operation");

  std::size_t b = 0, m = 0;
  double g_sq = 0.0, z_sq = 0.0;
  auto* bound = app.add_subcommand("check-bound", "Evaluate the malicious-weight bound");
  bound->add_option("--B", b, "Benign users per round")->required();
  bound->add_option("--M", m, "Malicious users per round")->required();
  bound->add_option("--Gsq", g_sq, "Benign squared-gradient bound")->required();
  bound->add_option("--Zsq", z_sq, "Malicious excess squared-gradient bound")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "fhefl: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*params) return cmd_params(params_preset, out);
    if (*simulate) {
      if (*seed_opt) sim_flags.seeds = {seed};
      return cmd_simulate(sim_flags, out);
    }
    if (*bench_cmd) return cmd_bench(bench_preset, reps, out);
    if (*bound) return cmd_check_bound(b, m, g_sq, z_sq, out);
  } catch (const UsageError& e) {
    err << "fhefl: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "fhefl: " << e.what() << '\n';
    return e.code() == ErrorCode::kUnknownPreset ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    err << "fhefl: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace fhefl::cli
