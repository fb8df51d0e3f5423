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

#include "fhefl/sim/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>

#include "fhefl/error.hpp"
#include "fhefl/multikey.hpp"
#include "fhefl/parallel.hpp"
#include "fhefl/params.hpp"
#include "fhefl/robust_agg.hpp"
#include "fhefl/sim/attack.hpp"
#include "json.hpp"

namespace fhefl::sim {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

template <typename F>
auto annotate(std::size_t epoch, const char* stage, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.code(), "round " + std::to_string(epoch) + " [" + stage + "]: " + e.what());
  }
}

void shuffle(std::vector<std::uint64_t>& v, Prng& prng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[prng.uniform_below(i)]);
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T, typename F>
std::string join(const std::vector<T>& values, F&& format) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ';';
    out += format(values[i]);
  }
  return out;
}

}  // namespace

double RoundMetrics::mean_rate(bool of_malicious) const {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < rates.size() && i < malicious.size(); ++i) {
    if (malicious[i] == of_malicious) {
      sum += rates[i];
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

Simulator::Simulator(ExperimentConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)), seed_(seed) {
  cfg_.validate();
  TrainTest data;
  if (cfg_.dataset.kind == "csv") {
    data.train = load_csv(cfg_.dataset.train_path, cfg_.dataset.classes);
    data.test = load_csv(cfg_.dataset.test_path, std::max(cfg_.dataset.classes, data.train.classes));
    require(data.train.features == data.test.features, ErrorCode::kDimensionMismatch,
            "train and test CSV files have different feature counts");
    data.train.classes = data.test.classes = std::max(data.train.classes, data.test.classes);
  } else {
    data = make_synthetic(cfg_.dataset.synthetic, seed);
  }
  auto shards = shard_iid(data.train, cfg_.users, seed);
  setup(std::move(shards), std::move(data.test));
}

Simulator::Simulator(ExperimentConfig cfg, std::uint64_t seed, std::vector<Dataset> shards, Dataset test)
    : cfg_(std::move(cfg)), seed_(seed) {
  cfg_.validate();
  setup(std::move(shards), std::move(test));
}

void Simulator::setup(std::vector<Dataset> shards, Dataset test) {
  require(shards.size() == cfg_.users, ErrorCode::kInvalidArgument,
          "expected " + std::to_string(cfg_.users) + " shards, got " + std::to_string(shards.size()));
  require(!test.empty(), ErrorCode::kInvalidArgument, "test split is empty");
  root_ = derive_seed(seed_from_u64(seed_), "experiment", {});
  spec_ = ModelSpec{cfg_.architecture, test.features, test.classes, cfg_.hidden};
  require(static_cast<std::size_t>(std::max(cfg_.attack.source, cfg_.attack.target)) < spec_.classes,
          ErrorCode::kInvalidArgument, "attack labels exceed the class count");

  // Attackers are a fixed random subset of the population.
  const auto attackers = static_cast<std::size_t>(std::llround(cfg_.attack.fraction * static_cast<double>(cfg_.users)));
  std::vector<std::uint64_t> ids(cfg_.users);
  std::iota(ids.begin(), ids.end(), std::uint64_t{0});
  Prng role_prng(derive_seed(root_, "attackers", {}));
  shuffle(ids, role_prng);
  malicious_.assign(cfg_.users, false);
  for (std::size_t i = 0; i < attackers; ++i) malicious_[ids[i]] = true;

  for (std::size_t u = 0; u < shards.size(); ++u) {
    require(!shards[u].empty(), ErrorCode::kInvalidArgument, "user " + std::to_string(u) + " has an empty shard");
    if (malicious_[u]) shards[u] = flip_labels(std::move(shards[u]), cfg_.attack);
  }
  shards_ = std::move(shards);
  test_ = std::move(test);

  Prng init_prng(derive_seed(root_, "init", {}));
  model_ = init_parameters(spec_, init_prng);
}

std::size_t Simulator::malicious_count() const {
  return static_cast<std::size_t>(std::count(malicious_.begin(), malicious_.end(), true));
}

std::size_t Simulator::pinned_attackers() const {
  const auto wanted =
      static_cast<std::size_t>(std::llround(cfg_.attack.fraction * static_cast<double>(cfg_.roster_size)));
  return std::min(wanted, malicious_count());
}

std::vector<std::uint64_t> Simulator::select_roster() {
  Prng prng(derive_seed(root_, "roster", {round_}));
  std::vector<std::uint64_t> roster;
  if (cfg_.roster_mode == RosterMode::kRandom) {
    std::vector<std::uint64_t> ids(cfg_.users);
    std::iota(ids.begin(), ids.end(), std::uint64_t{0});
    shuffle(ids, prng);
    roster.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(cfg_.roster_size));
  } else {
    std::vector<std::uint64_t> bad;
    std::vector<std::uint64_t> good;
    for (std::uint64_t u = 0; u < cfg_.users; ++u) (malicious_[u] ? bad : good).push_back(u);
    shuffle(bad, prng);
    shuffle(good, prng);
    const std::size_t nbad = pinned_attackers();
    require(cfg_.roster_size - nbad <= good.size(), ErrorCode::kInfeasible, "not enough benign users for the roster");
    roster.assign(bad.begin(), bad.begin() + static_cast<std::ptrdiff_t>(nbad));
    roster.insert(roster.end(), good.begin(), good.begin() + static_cast<std::ptrdiff_t>(cfg_.roster_size - nbad));
  }
  std::sort(roster.begin(), roster.end());
  return roster;
}

std::vector<double> Simulator::aggregate_encrypted(std::span<const GradientUpdate> updates,
                                                   RoundMetrics& metrics) {
  const HeParams& params = preset(cfg_.preset);
  const std::size_t dim = spec_.parameter_count();
  const std::size_t encrypted_dim =
      cfg_.encrypt_scope == EncryptScope::kFirstLayer ? spec_.first_layer_size() : dim;

  std::vector<GradientUpdate> head(updates.size());
  for (std::size_t u = 0; u < updates.size(); ++u) {
    head[u].user_id = updates[u].user_id;
    head[u].values.assign(updates[u].values.begin(),
                          updates[u].values.begin() + static_cast<std::ptrdiff_t>(encrypted_dim));
  }

  auto start = Clock::now();
  const auto keyrings = setup_pairwise(params, metrics.roster, derive_seed(root_, "keys", {round_}), round_);
  const Seed round_seed = derive_seed(root_, "common", {round_});
  std::vector<EncryptedUpdate> encrypted(updates.size());
  parallel_for(updates.size(), [&](std::size_t u) {
    Prng prng(derive_seed(root_, "encrypt", {round_, updates[u].user_id}));
    encrypted[u] = encrypt_update(head[u], keyrings[u].secret, params, round_seed, round_, prng);
  });
  metrics.stage_ms["encrypt"] = ms_since(start);

  SecureRoundOptions options;
  options.round_base = static_cast<std::uint64_t>(round_) << 20;
  const std::vector<double> zeros(encrypted_dim, 0.0);
  // eta = 1 against a zero model: the result's aggregate is what we need.
  const auto secure = secure_aggregate_round(encrypted, keyrings, zeros, 1.0, options);
  for (const auto& [stage, ms] : secure.stage_ms) metrics.stage_ms["he_" + stage] = ms;

  std::vector<double> agg = secure.aggregate;
  if (encrypted_dim < dim) {
    // Layers outside the encrypted scope: same rule on their own plaintext norms.
    std::vector<GradientUpdate> tail(updates.size());
    std::vector<double> tail_norms(updates.size());
    for (std::size_t u = 0; u < updates.size(); ++u) {
      tail[u].user_id = updates[u].user_id;
      tail[u].values.assign(updates[u].values.begin() + static_cast<std::ptrdiff_t>(encrypted_dim),
                            updates[u].values.end());
      tail_norms[u] = sq_norm_plain(tail[u].values);
    }
    const auto rest = weighted_sum(tail, non_poisoning_rates(tail_norms));
    agg.insert(agg.end(), rest.begin(), rest.end());
  }
  return agg;
}

std::vector<double> Simulator::aggregate(std::span<const GradientUpdate> updates, RoundMetrics& metrics) {
  metrics.sq_norms.resize(updates.size());
  for (std::size_t u = 0; u < updates.size(); ++u) metrics.sq_norms[u] = sq_norm_plain(updates[u].values);
  metrics.rates = non_poisoning_rates(metrics.sq_norms);

  if (cfg_.mode == Mode::kEncrypted) return aggregate_encrypted(updates, metrics);
  switch (cfg_.aggregator) {
    case Aggregator::kFheFL: return weighted_sum(updates, metrics.rates);
    case Aggregator::kFedAvg:
      metrics.rates.assign(updates.size(), 1.0 / static_cast<double>(updates.size()));
      return fedavg(updates);
    case Aggregator::kMedian: return coordinate_median(updates);
    case Aggregator::kTrimmedMean: return trimmed_mean(updates, cfg_.trim_beta);
    case Aggregator::kKrum: return krum(updates, cfg_.krum_f);
  }
  fail(ErrorCode::kInvalidArgument, "unhandled aggregator");
}

RoundMetrics Simulator::run_round() {
  RoundMetrics metrics;
  metrics.epoch = round_ + 1;
  metrics.roster = annotate(metrics.epoch, "roster", [&] { return select_roster(); });
  for (auto u : metrics.roster) metrics.malicious.push_back(malicious_[u]);

  auto start = Clock::now();
  std::vector<GradientUpdate> updates(metrics.roster.size());
  annotate(metrics.epoch, "train", [&] {
    parallel_for(metrics.roster.size(), [&](std::size_t i) {
      const std::uint64_t u = metrics.roster[i];
      TrainOptions options{cfg_.learning_rate, malicious_[u] ? cfg_.attack.local_epochs : cfg_.local_epochs,
                           cfg_.batch_size};
      Prng prng(derive_seed(root_, "train", {round_, u}));
      updates[i] = local_train(spec_, model_, shards_[u], options, prng, u);
    });
    return 0;
  });
  metrics.stage_ms["train"] = ms_since(start);

  start = Clock::now();
  const auto agg = annotate(metrics.epoch, "aggregate", [&] { return aggregate(updates, metrics); });
  metrics.stage_ms["aggregate"] = ms_since(start);

  double step_sq = 0.0;
  for (std::size_t k = 0; k < model_.size(); ++k) {
    const double step = cfg_.learning_rate * agg[k];
    model_[k] -= step;
    step_sq += step * step;
  }
  metrics.update_norm = std::sqrt(step_sq);
  for (std::size_t i = 0; i < metrics.roster.size(); ++i) norm_history_[metrics.roster[i]].push_back(metrics.sq_norms[i]);

  metrics.accuracy = accuracy(spec_, model_, test_);
  metrics.per_class_accuracy = per_class_accuracy(spec_, model_, test_);
  metrics.aasr = annotate(metrics.epoch, "metrics", [&] { return attack_success_rate(spec_, model_, test_, cfg_.attack); });
  ++round_;
  return metrics;
}

ExperimentResult Simulator::run(const std::function<void(const RoundMetrics&)>& progress) {
  ExperimentResult result;
  result.seed = seed_;
  while (round_ < cfg_.rounds) {
    result.rounds.push_back(run_round());
    if (progress) progress(result.rounds.back());
    if (cfg_.epsilon > 0.0 && result.rounds.back().update_norm <= cfg_.epsilon) {
      result.converged = true;
      break;
    }
  }
  result.final_model = model_;
  result.final_accuracy = result.rounds.back().accuracy;
  const std::size_t tail = std::min<std::size_t>(10, result.rounds.size());
  for (std::size_t i = result.rounds.size() - tail; i < result.rounds.size(); ++i) result.mean_aasr += result.rounds[i].aasr;
  result.mean_aasr /= static_cast<double>(tail);

  const std::size_t bad = pinned_attackers();
  if (bad > 0 && bad < cfg_.roster_size) {
    std::vector<UserHistory> history;
    for (const auto& [user, norms] : norm_history_) history.push_back({user, malicious_[user], norms});
    const bool both_roles = std::any_of(history.begin(), history.end(), [](const auto& h) { return h.malicious; }) &&
                            std::any_of(history.begin(), history.end(), [](const auto& h) { return !h.malicious; });
    if (both_roles) result.bound = poisoning_bound_check(history, cfg_.roster_size - bad, bad);
  }
  return result;
}

void write_metrics_csv(std::ostream& out, const ExperimentResult& result, std::size_t classes, bool with_timing) {
  out << "epoch,accuracy,aasr,update_norm,mean_rate_benign,mean_rate_malicious";
  for (std::size_t c = 0; c < classes; ++c) out << ",acc_class_" << c;
  out << ",roster,malicious,rates,sq_norms";
  std::vector<std::string> stages;
  if (with_timing) {
    for (const auto& r : result.rounds) {
      for (const auto& [name, ms] : r.stage_ms) {
        if (std::find(stages.begin(), stages.end(), name) == stages.end()) stages.push_back(name);
      }
    }
    for (const auto& s : stages) out << ",ms_" << s;
  }
  out << '\n';
  for (const auto& r : result.rounds) {
    out << r.epoch << ',' << fmt(r.accuracy) << ',' << fmt(r.aasr) << ',' << fmt(r.update_norm) << ','
        << fmt(r.mean_rate(false)) << ',' << fmt(r.mean_rate(true));
    for (std::size_t c = 0; c < classes; ++c) {
      out << ',' << fmt(c < r.per_class_accuracy.size() ? r.per_class_accuracy[c] : 0.0);
    }
    out << ',' << join(r.roster, [](std::uint64_t v) { return std::to_string(v); }) << ','
        << join(r.malicious, [](bool v) { return std::string(v ? "1" : "0"); }) << ','
        << join(r.rates, fmt) << ',' << join(r.sq_norms, fmt);
    for (const auto& s : stages) {
      const auto it = r.stage_ms.find(s);
      out << ',' << (it == r.stage_ms.end() ? std::string("0") : fmt(it->second));
    }
    out << '\n';
  }
}

namespace {

nlohmann::json bound_json(const std::optional<BoundReport>& b) {
  if (!b) return nullptr;
  return {{"benign", b->benign},       {"malicious", b->malicious}, {"g_sq", b->g_sq},
          {"z_sq", b->z_sq},           {"threshold", b->threshold}, {"satisfied", b->satisfied}};
}

double mean_malicious_rate(const ExperimentResult& r, std::size_t skip) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = skip; i < r.rounds.size(); ++i) {
    const double v = r.rounds[i].mean_rate(true);
    if (!std::isnan(v)) {
      sum += v;
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

nlohmann::json number_or_null(double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); }

}  // namespace

std::string summary_json(const ExperimentResult& result, const ExperimentConfig& cfg) {
  nlohmann::json doc = {
      {"seed", result.seed},
      {"aggregator", aggregator_name(cfg.aggregator)},
      {"mode", mode_name(cfg.mode)},
      {"rounds_run", result.rounds.size()},
      {"converged", result.converged},
      {"final_accuracy", result.final_accuracy},
      {"mean_aasr", result.mean_aasr},
      {"mean_malicious_rate", number_or_null(mean_malicious_rate(result, 5))},
      {"bound", bound_json(result.bound)},
  };
  return doc.dump(2) + "\n";
}

std::string aggregate_summary_json(std::span<const ExperimentResult> results, const ExperimentConfig& cfg) {
  require(!results.empty(), ErrorCode::kInvalidArgument, "no results to summarise");
  auto stats = [&](auto field) {
    double sum = 0.0;
    for (const auto& r : results) sum += field(r);
    const double mean = sum / static_cast<double>(results.size());
    double var = 0.0;
    for (const auto& r : results) var += (field(r) - mean) * (field(r) - mean);
    return nlohmann::json{{"mean", mean}, {"std", std::sqrt(var / static_cast<double>(results.size()))}};
  };
  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& r : results) seeds.push_back(nlohmann::json::parse(summary_json(r, cfg)));
  nlohmann::json doc = {
      {"aggregator", aggregator_name(cfg.aggregator)},
      {"mode", mode_name(cfg.mode)},
      {"seeds", results.size()},
      {"final_accuracy", stats([](const ExperimentResult& r) { return r.final_accuracy; })},
      {"mean_aasr", stats([](const ExperimentResult& r) { return r.mean_aasr; })},
      {"runs", seeds},
  };
  return doc.dump(2) + "\n";
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorCode::kInvalidArgument, "cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    require(out.good(), ErrorCode::kInvalidArgument, "short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  require(!ec, ErrorCode::kInvalidArgument, "cannot rename onto '" + path + "': " + ec.message());
}

}  // namespace fhefl::sim
