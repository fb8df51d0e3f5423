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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fhefl/sim/bounds.hpp"
#include "fhefl/sim/config.hpp"
#include "fhefl/sim/dataset.hpp"
#include "fhefl/sim/model.hpp"

namespace fhefl::sim {

struct RoundMetrics {
  std::size_t epoch = 0;
  double accuracy = 0.0;
  double aasr = 0.0;
  std::vector<double> per_class_accuracy;
  std::vector<std::uint64_t> roster;
  std::vector<bool> malicious;
  /// Non-poisoning rates from the plaintext norms (diagnostic in encrypted mode).
  std::vector<double> rates;
  std::vector<double> sq_norms;
  double update_norm = 0.0;
  std::map<std::string, double> stage_ms;

  /// Mean rate over roster members of one role; NaN when the role is absent.
  double mean_rate(bool of_malicious) const;
};

struct ExperimentResult {
  std::uint64_t seed = 0;
  std::vector<RoundMetrics> rounds;
  std::vector<double> final_model;
  double final_accuracy = 0.0;
  /// AASR averaged over the last min(10, rounds) rounds.
  double mean_aasr = 0.0;
  bool converged = false;
  std::optional<BoundReport> bound;
};

/// One federated run: fixed user population and attacker set, a fresh roster per round.
class Simulator {
 public:
  Simulator(ExperimentConfig cfg, std::uint64_t seed);
  /// Uses caller-provided shards (one per user) and test split instead of the configured dataset.
  Simulator(ExperimentConfig cfg, std::uint64_t seed, std::vector<Dataset> shards, Dataset test);

  RoundMetrics run_round();
  ExperimentResult run(const std::function<void(const RoundMetrics&)>& progress = {});

  const ModelSpec& spec() const noexcept { return spec_; }
  const std::vector<double>& model() const noexcept { return model_; }
  std::size_t rounds_done() const noexcept { return round_; }
  bool is_malicious(std::uint64_t user) const { return malicious_.at(user); }
  std::size_t malicious_count() const;
  /// Attackers placed in each roster when the roster mode is pinned.
  std::size_t pinned_attackers() const;

 private:
  void setup(std::vector<Dataset> shards, Dataset test);
  std::vector<std::uint64_t> select_roster();
  std::vector<double> aggregate(std::span<const GradientUpdate> updates, RoundMetrics& metrics);
  std::vector<double> aggregate_encrypted(std::span<const GradientUpdate> updates, RoundMetrics& metrics);

  ExperimentConfig cfg_;
  std::uint64_t seed_;
  Seed root_{};
  ModelSpec spec_;
  std::vector<Dataset> shards_;
  Dataset test_;
  std::vector<bool> malicious_;
  std::vector<double> model_;
  std::size_t round_ = 0;
  std::map<std::uint64_t, std::vector<double>> norm_history_;
};

/// Header starts "epoch,accuracy,aasr,". Timing columns are emitted only when
/// `with_timing`, so plain-mode files are reproducible byte for byte.
void write_metrics_csv(std::ostream& out, const ExperimentResult& result, std::size_t classes, bool with_timing);
std::string summary_json(const ExperimentResult& result, const ExperimentConfig& cfg);
std::string aggregate_summary_json(std::span<const ExperimentResult> results, const ExperimentConfig& cfg);

/// Writes to a temporary sibling, then renames over `path`.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace fhefl::sim
