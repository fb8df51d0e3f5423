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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fhefl/error.hpp"
#include "fhefl/sim/config.hpp"
#include "fhefl/sim/simulator.hpp"

namespace fhefl::sim {
namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.dataset.synthetic.features = 16;
  cfg.dataset.synthetic.train_samples = 600;
  cfg.dataset.synthetic.test_samples = 200;
  cfg.users = 20;
  cfg.roster_size = 5;
  cfg.rounds = 5;
  cfg.local_epochs = 1;
  cfg.attack.fraction = 0.2;
  cfg.attack.local_epochs = 3;
  return cfg;
}

std::string csv_of(const ExperimentResult& r, std::size_t classes, bool timing = false) {
  std::ostringstream out;
  write_metrics_csv(out, r, classes, timing);
  return out.str();
}

TEST(Config, ParsesAndValidates) {
  const auto cfg = parse_config(R"({
    "dataset": {"kind": "synthetic", "features": 8, "train_samples": 100, "test_samples": 50},
    "architecture": "mlp", "hidden": 4, "users": 10, "roster_size": 4,
    "attack": {"fraction": 0.2, "source": 2, "target": 3, "local_epochs": 7},
    "aggregator": "krum", "krum_f": 1, "rounds": 3, "seeds": [1, 2, 3]
  })");
  EXPECT_EQ(cfg.architecture, Architecture::kMlp);
  EXPECT_EQ(cfg.aggregator, Aggregator::kKrum);
  EXPECT_EQ(cfg.attack.local_epochs, 7u);
  EXPECT_EQ(cfg.seeds.size(), 3u);
  EXPECT_EQ(parse_config(to_json(cfg)).seeds, cfg.seeds);

  EXPECT_THROW(parse_config(R"({"attack": {"fraction": 0.3}})"), Error);
  EXPECT_NO_THROW(parse_config(R"({"attack": {"fraction": 0.3}, "override_attacker_cap": true})"));
  EXPECT_THROW(parse_config(R"({"preset": "nope"})"), Error);
  EXPECT_THROW(parse_config(R"({"colour": "red"})"), Error);
  EXPECT_THROW(parse_config(R"({"mode": "encrypted", "aggregator": "median"})"), Error);
  EXPECT_THROW(parse_config("{not json"), Error);
  EXPECT_THROW(parse_config(R"({"users": "many"})"), Error);
}

TEST(Simulator, PlainRunsAreBitReproducible) {
  const auto cfg = small_config();
  Simulator a(cfg, 7), b(cfg, 7);
  const auto ra = a.run();
  const auto rb = b.run();
  EXPECT_EQ(csv_of(ra, 10), csv_of(rb, 10));
  EXPECT_EQ(ra.final_model, rb.final_model);
  Simulator c(cfg, 8);
  EXPECT_NE(c.run().final_model, ra.final_model);
}

TEST(Simulator, PinnedRosterHoldsConfiguredAttackers) {
  auto cfg = small_config();
  Simulator sim(cfg, 3);
  EXPECT_EQ(sim.malicious_count(), 4u);
  for (int i = 0; i < 5; ++i) {
    const auto m = sim.run_round();
    EXPECT_EQ(m.roster.size(), 5u);
    EXPECT_EQ(std::count(m.malicious.begin(), m.malicious.end(), true), 1);
    EXPECT_GE(m.accuracy, 0.0);
    EXPECT_LE(m.accuracy, 1.0);
    EXPECT_GE(m.aasr, 0.0);
    EXPECT_LE(m.aasr, 1.0);
  }
}

TEST(Simulator, IdenticalShardsMakeFheflEqualFedavg) {
  auto cfg = small_config();
  cfg.attack.fraction = 0.0;
  cfg.users = 6;
  cfg.roster_size = 4;
  const auto data = make_synthetic(cfg.dataset.synthetic, 1);
  Dataset shard;
  shard.features = data.train.features;
  shard.classes = data.train.classes;
  for (std::size_t i = 0; i < 40; ++i) shard.push(data.train.row(i), data.train.y[i]);
  const std::vector<Dataset> shards(cfg.users, shard);

  // Same seed per user id is what makes identical shards train identically;
  // different user ids draw different minibatch orders, so use full batches.
  cfg.batch_size = 40;
  cfg.aggregator = Aggregator::kFheFL;
  Simulator fhefl(cfg, 5, shards, data.test);
  cfg.aggregator = Aggregator::kFedAvg;
  Simulator fedavg(cfg, 5, shards, data.test);
  for (int i = 0; i < 5; ++i) {
    fhefl.run_round();
    fedavg.run_round();
    ASSERT_EQ(fhefl.model(), fedavg.model()) << "round " << i;
  }
}

TEST(Simulator, EncryptedModeTracksPlainMode) {
  auto cfg = small_config();
  cfg.users = 8;
  cfg.roster_size = 4;
  cfg.rounds = 2;
  cfg.dataset.synthetic.features = 8;
  cfg.attack.fraction = 0.0;
  ExperimentConfig enc = cfg;
  enc.mode = Mode::kEncrypted;
  Simulator plain(cfg, 11), secure(enc, 11);
  for (int i = 0; i < 2; ++i) {
    plain.run_round();
    const auto m = secure.run_round();
    EXPECT_TRUE(m.stage_ms.contains("encrypt"));
    EXPECT_TRUE(m.stage_ms.contains("he_final_decrypt"));
  }
  double diff = 0, ref = 0;
  for (std::size_t k = 0; k < plain.model().size(); ++k) {
    diff += std::pow(plain.model()[k] - secure.model()[k], 2);
    ref += std::pow(plain.model()[k], 2);
  }
  EXPECT_LT(std::sqrt(diff / ref), 1e-2);
}

TEST(Simulator, FirstLayerScopeRuns) {
  auto cfg = small_config();
  cfg.architecture = Architecture::kMlp;
  cfg.hidden = 4;
  cfg.dataset.synthetic.features = 6;
  cfg.users = 6;
  cfg.roster_size = 3;
  cfg.rounds = 1;
  cfg.attack.fraction = 0.0;
  cfg.mode = Mode::kEncrypted;
  cfg.encrypt_scope = EncryptScope::kFirstLayer;
  Simulator sim(cfg, 2);
  const auto before = sim.model();
  sim.run_round();
  EXPECT_NE(sim.model(), before);
}

TEST(Simulator, StopsWhenUpdateIsSmall) {
  auto cfg = small_config();
  cfg.rounds = 50;
  cfg.epsilon = 1e9;
  Simulator sim(cfg, 1);
  const auto r = sim.run();
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.rounds.size(), 1u);
}

TEST(Simulator, ReportsAndCsv) {
  auto cfg = small_config();
  Simulator sim(cfg, 4);
  const auto r = sim.run();
  const auto csv = csv_of(r, 10);
  EXPECT_EQ(csv.rfind("epoch,accuracy,aasr,", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
  EXPECT_EQ(csv.find("ms_"), std::string::npos);
  EXPECT_NE(csv_of(r, 10, true).find("ms_train"), std::string::npos);
  ASSERT_TRUE(r.bound.has_value());
  EXPECT_EQ(r.bound->benign, 4u);
  EXPECT_EQ(r.bound->malicious, 1u);
  EXPECT_NE(summary_json(r, cfg).find("\"final_accuracy\""), std::string::npos);
  const std::vector<ExperimentResult> all{r, r};
  EXPECT_NE(aggregate_summary_json(all, cfg).find("\"runs\""), std::string::npos);
}

TEST(Simulator, ErrorsNameTheRound) {
  auto cfg = small_config();
  cfg.users = 4;
  cfg.roster_size = 4;
  cfg.attack.fraction = 0.0;
  auto data = make_synthetic(cfg.dataset.synthetic, 1);
  auto shards = shard_iid(data.train, cfg.users, 1);
  shards[2].x[0] = std::nan("");
  Simulator sim(cfg, 1, shards, data.test);
  try {
    sim.run_round();
    FAIL() << "expected a numerical error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNumerical);
    EXPECT_NE(std::string(e.what()).find("round 1 [train]"), std::string::npos);
  }
}

TEST(Files, AtomicWrite) {
  const auto dir = std::filesystem::temp_directory_path() / "fhefl_atomic_test";
  std::filesystem::remove_all(dir);
  const auto path = (dir / "sub" / "out.txt").string();
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  std::ifstream in(path);
  std::string text;
  std::getline(in, text);
  EXPECT_EQ(text, "second");
  EXPECT_FALSE(std::filesystem::exists(path + ".tmp"));
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace fhefl::sim
