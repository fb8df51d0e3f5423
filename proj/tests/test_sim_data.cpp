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

#include <algorithm>
#include <sstream>

#include "fhefl/error.hpp"
#include "fhefl/sim/attack.hpp"
#include "fhefl/sim/bounds.hpp"
#include "fhefl/sim/dataset.hpp"

namespace fhefl::sim {
namespace {

TEST(Dataset, ParsesCsv) {
  std::istringstream in("# comment\n1.0,2.0,0\n\n-3.5, 4e-1 ,2\n");
  const auto d = parse_csv(in, "mem");
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d.features, 2u);
  EXPECT_EQ(d.classes, 3u);
  EXPECT_DOUBLE_EQ(d.row(1)[1], 0.4);
  EXPECT_EQ(d.y[1], 2);
}

TEST(Dataset, ParseErrorsCarryLineNumbers) {
  auto message = [](const std::string& text) {
    std::istringstream in(text);
    try {
      parse_csv(in, "data.csv");
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kParse);
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("1,2,0\n3,4,cat\n").find("data.csv:2"), std::string::npos);
  EXPECT_NE(message("1,2,0\n3,x,1\n").find("data.csv:2"), std::string::npos);
  EXPECT_NE(message("1,2,0\n1,0\n").find("data.csv:2"), std::string::npos);
  EXPECT_NE(message("").find("no data rows"), std::string::npos);
}

TEST(Dataset, SyntheticIsDeterministic) {
  SyntheticSpec spec;
  spec.train_samples = 500;
  spec.test_samples = 100;
  const auto a = make_synthetic(spec, 3);
  const auto b = make_synthetic(spec, 3);
  EXPECT_EQ(a.train.x, b.train.x);
  EXPECT_EQ(a.test.y, b.test.y);
  EXPECT_NE(make_synthetic(spec, 4).train.x, a.train.x);
  EXPECT_EQ(a.train.size(), 500u);
  EXPECT_EQ(a.train.features, 64u);
  EXPECT_EQ(shard_iid(a.train, 5, 1)[2].x, shard_iid(b.train, 5, 1)[2].x);
}

TEST(Dataset, ShardsAreEqualAndDisjoint) {
  SyntheticSpec spec;
  spec.train_samples = 1000;
  spec.features = 4;
  const auto data = make_synthetic(spec, 1).train;
  const auto shards = shard_iid(data, 10, 2);
  ASSERT_EQ(shards.size(), 10u);
  std::vector<std::vector<double>> rows;
  for (const auto& s : shards) {
    EXPECT_EQ(s.size(), 100u);
    for (std::size_t i = 0; i < s.size(); ++i) rows.emplace_back(s.row(i).begin(), s.row(i).end());
  }
  std::sort(rows.begin(), rows.end());
  EXPECT_EQ(std::adjacent_find(rows.begin(), rows.end()), rows.end());
  EXPECT_THROW(shard_iid(data, 1001, 2), Error);
}

TEST(Attack, FlipLabels) {
  Dataset d;
  d.features = 1;
  d.classes = 10;
  for (int label : {1, 7, 3, 1, 7, 7, 0}) d.push(std::vector<double>{0.0}, label);
  const AttackConfig cfg{1, 7, 0.2, 5};
  const auto flipped = flip_labels(d, cfg);
  EXPECT_EQ(flipped.y, (std::vector<int>{7, 1, 3, 7, 1, 1, 0}));
  EXPECT_EQ(flip_labels(flipped, cfg).y, d.y);
  auto pair_count = [](const std::vector<int>& y) {
    return std::count_if(y.begin(), y.end(), [](int v) { return v == 1 || v == 7; });
  };
  EXPECT_EQ(pair_count(flipped.y), pair_count(d.y));
  EXPECT_EQ(std::count(flipped.y.begin(), flipped.y.end(), 1), std::count(d.y.begin(), d.y.end(), 7));

  Dataset other;
  other.features = 1;
  other.classes = 10;
  for (int label : {0, 2, 3}) other.push(std::vector<double>{0.0}, label);
  EXPECT_EQ(flip_labels(other, cfg).y, other.y);
}

TEST(Attack, SuccessRateExtremes) {
  // One-hot features; an identity logistic model predicts the hot index.
  const ModelSpec spec{Architecture::kLogistic, 10, 10, 0};
  std::vector<double> identity(spec.parameter_count(), 0.0);
  for (std::size_t c = 0; c < 10; ++c) identity[c * 10 + c] = 1.0;
  const AttackConfig cfg{1, 7, 0.2, 5};

  Dataset perfect, fooled;
  perfect.features = fooled.features = 10;
  perfect.classes = fooled.classes = 10;
  for (int i = 0; i < 50; ++i) {
    std::vector<double> x(10, 0.0);
    x[1] = 1.0;
    perfect.push(x, 1);
    std::vector<double> t(10, 0.0);
    t[7] = 1.0;
    fooled.push(t, 1);
  }
  EXPECT_DOUBLE_EQ(attack_success_rate(spec, identity, perfect, cfg), 0.0);
  EXPECT_DOUBLE_EQ(attack_success_rate(spec, identity, fooled, cfg), 1.0);

  // Features carry a uniformly random hot index independent of the label: chance level.
  Dataset chance;
  chance.features = 10;
  chance.classes = 10;
  Prng prng(seed_from_u64(3));
  for (int i = 0; i < 20000; ++i) {
    std::vector<double> x(10, 0.0);
    x[prng.uniform_below(10)] = 1.0;
    chance.push(x, static_cast<int>(prng.uniform_below(10)));
  }
  EXPECT_NEAR(attack_success_rate(spec, identity, chance, cfg), 0.1, 0.02);

  Dataset empty;
  empty.features = 10;
  empty.classes = 10;
  empty.push(std::vector<double>(10, 0.0), 2);
  EXPECT_THROW(attack_success_rate(spec, identity, empty, cfg), Error);
}

TEST(Bounds, Threshold) {
  EXPECT_NEAR(poisoning_bound_threshold(8, 2, 1.0), 54.0 / 14.0, 1e-12);
  EXPECT_DOUBLE_EQ(poisoning_bound_threshold(5, 5, 2.0), 0.0);
  EXPECT_THROW(poisoning_bound_threshold(8, 0, 1.0), Error);
  EXPECT_TRUE(poisoning_bound_report(8, 2, 1.0, 3.0).satisfied);
  EXPECT_FALSE(poisoning_bound_report(8, 2, 1.0, 4.0).satisfied);
  EXPECT_FALSE(poisoning_bound_report(2, 2, 1.0, 0.5).satisfied);
  for (std::size_t b = 2; b < 10; ++b) {
    for (std::size_t m = 1; m < b; ++m) EXPECT_TRUE(poisoning_bound_report(b, m, 1.0, 0.0).satisfied);
  }
}

TEST(Bounds, EstimatesFromHistory) {
  const std::vector<UserHistory> h{
      {0, false, {1.0, 3.0}},   // mean 2
      {1, false, {1.0, 1.0}},   // mean 1
      {2, true, {5.0, 7.0}},    // mean 6
      {3, true, {0.5}},
  };
  const auto r = poisoning_bound_check(h);
  EXPECT_EQ(r.benign, 2u);
  EXPECT_EQ(r.malicious, 2u);
  EXPECT_DOUBLE_EQ(r.g_sq, 2.0);
  EXPECT_DOUBLE_EQ(r.z_sq, 4.0);
  EXPECT_DOUBLE_EQ(r.threshold, 0.0);
  const auto roster = poisoning_bound_check(h, 8, 2);
  EXPECT_NEAR(roster.threshold, 2.0 * 54.0 / 14.0, 1e-12);
  EXPECT_TRUE(roster.satisfied);

  const std::vector<UserHistory> calm{{0, false, {4.0}}, {1, true, {1.0}}};
  EXPECT_DOUBLE_EQ(poisoning_bound_check(calm).z_sq, 0.0);
  const std::vector<UserHistory> benign_only{{0, false, {1.0}}};
  EXPECT_THROW(poisoning_bound_check(benign_only), Error);
}

}  // namespace
}  // namespace fhefl::sim
