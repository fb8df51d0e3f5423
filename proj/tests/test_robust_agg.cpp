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
#include <numeric>
#include <random>

#include "fhefl/error.hpp"
#include "fhefl/robust_agg.hpp"

namespace fhefl {
namespace {

std::vector<GradientUpdate> scalars(std::initializer_list<double> xs) {
  std::vector<GradientUpdate> out;
  std::uint64_t id = 0;
  for (double x : xs) out.push_back({id++, {x}, 0.1});
  return out;
}

TEST(SqNorm, Plain) {
  EXPECT_DOUBLE_EQ(sq_norm_plain(std::vector<double>{3, 4}), 25.0);
  EXPECT_DOUBLE_EQ(sq_norm_plain(std::vector<double>{0, 0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(sq_norm_plain(std::vector<double>{1, 2, 3}), 14.0);
}

TEST(Rates, HandCases) {
  const auto p = non_poisoning_rates(std::vector<double>{1, 3});
  EXPECT_DOUBLE_EQ(p[0], 0.75);
  EXPECT_DOUBLE_EQ(p[1], 0.25);
  for (std::size_t users : {2u, 5u, 10u}) {
    const auto q = non_poisoning_rates(std::vector<double>(users, 2.5));
    for (double r : q) EXPECT_EQ(r, 1.0 / static_cast<double>(users));
  }
  const auto z = non_poisoning_rates(std::vector<double>{0, 0, 0, 0});
  for (double r : z) EXPECT_EQ(r, 0.25);
  EXPECT_THROW(non_poisoning_rates(std::vector<double>{1.0}), Error);
  EXPECT_THROW(non_poisoning_rates(std::vector<double>{1.0, -1.0}), Error);
}

TEST(Rates, Properties) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> dist(0.0, 50.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t users = 2 + rng() % 20;
    std::vector<double> d(users);
    for (double& x : d) x = dist(rng);
    const auto p = non_poisoning_rates(d);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
    for (std::size_t u = 0; u < users; ++u) {
      EXPECT_GE(p[u], 0.0);
      EXPECT_LE(p[u], 1.0 / static_cast<double>(users - 1) + 1e-15);
      for (std::size_t v = 0; v < users; ++v) {
        if (d[u] < d[v]) EXPECT_GT(p[u], p[v]);
      }
    }
    // Scaling every distance by a power of two leaves the rates bit-identical.
    std::vector<double> scaled(d);
    for (double& x : scaled) x *= 8.0;
    EXPECT_EQ(non_poisoning_rates(scaled), p);
  }
}

TEST(WeightedAggregate, PlainCases) {
  const std::vector<double> w{1.0, 1.0};
  const std::vector<GradientUpdate> ups{{0, {2.0, 4.0}, 0.5}, {1, {-2.0, 8.0}, 0.5}};
  const std::vector<double> rates{0.75, 0.25};
  const auto out = weighted_aggregate_plain(w, ups, rates, 0.5);
  // 1 - 0.5 * (0.75 * 2 + 0.25 * -2) = 0.5;  1 - 0.5 * (3 + 2) = -1.5
  EXPECT_DOUBLE_EQ(out[0], 0.5);
  EXPECT_DOUBLE_EQ(out[1], -1.5);

  const std::vector<double> uniform{0.5, 0.5};
  const auto avg = fedavg(ups);
  EXPECT_EQ(weighted_sum(ups, uniform), avg);

  const std::vector<GradientUpdate> lone{{0, {0.0, 0.0}, 1}, {1, {3.0, -1.0}, 1}, {2, {0.0, 0.0}, 1}};
  const std::vector<double> p{0.2, 0.3, 0.5};
  const auto single = weighted_aggregate_plain(w, lone, p, 2.0);
  EXPECT_DOUBLE_EQ(single[0], 1.0 - 2.0 * 0.3 * 3.0);
  EXPECT_DOUBLE_EQ(single[1], 1.0 + 2.0 * 0.3);

  const std::vector<GradientUpdate> bad{{0, {1.0}, 1}, {1, {1.0, 2.0}, 1}};
  EXPECT_THROW(fedavg(bad), Error);
}

TEST(Baselines, IdenticalUpdatesAreFixedPoints) {
  std::vector<GradientUpdate> ups(5, GradientUpdate{0, {1.5, -2.0, 3.0}, 0.1});
  for (std::size_t i = 0; i < ups.size(); ++i) ups[i].user_id = i;
  const auto avg = fedavg(ups);
  for (std::size_t k = 0; k < avg.size(); ++k) EXPECT_NEAR(avg[k], ups[0].values[k], 1e-12);
  EXPECT_EQ(coordinate_median(ups), ups[0].values);
  EXPECT_EQ(trimmed_mean(ups, 0.2), ups[0].values);
  EXPECT_EQ(krum(ups, 1), ups[0].values);
}

TEST(Baselines, HandCases) {
  EXPECT_DOUBLE_EQ(trimmed_mean(scalars({1, 2, 3, 4, 100}), 0.2)[0], 3.0);
  EXPECT_DOUBLE_EQ(coordinate_median(scalars({5, 1, 100, 2, 3}))[0], 3.0);
  EXPECT_DOUBLE_EQ(coordinate_median(scalars({1, 2, 3, 10}))[0], 2.5);
  EXPECT_DOUBLE_EQ(krum(scalars({0, 0, 0, 10}), 1)[0], 0.0);
  EXPECT_THROW(krum(scalars({0, 1, 2}), 1), Error);
  EXPECT_THROW(trimmed_mean(scalars({1, 2}), 0.5), Error);
}

TEST(Baselines, KrumMatchesBruteForce) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<GradientUpdate> ups(7);
    for (std::size_t i = 0; i < ups.size(); ++i) {
      ups[i].user_id = i;
      ups[i].values = {dist(rng), dist(rng), dist(rng)};
    }
    const std::size_t f = 2;
    double best = INFINITY;
    std::vector<double> expected;
    for (std::size_t i = 0; i < ups.size(); ++i) {
      std::vector<double> dists;
      for (std::size_t j = 0; j < ups.size(); ++j) {
        if (i == j) continue;
        double d = 0;
        for (int k = 0; k < 3; ++k) d += std::pow(ups[i].values[k] - ups[j].values[k], 2);
        dists.push_back(d);
      }
      std::sort(dists.begin(), dists.end());
      const double score = std::accumulate(dists.begin(), dists.begin() + (ups.size() - f - 2), 0.0);
      if (score < best) {
        best = score;
        expected = ups[i].values;
      }
    }
    EXPECT_EQ(krum(ups, f), expected);
  }
}

TEST(AggregatorNames, RoundTrip) {
  for (auto name : {"fhefl", "fedavg", "median", "trimmed_mean", "krum"}) {
    EXPECT_EQ(aggregator_name(parse_aggregator(name)), name);
  }
  EXPECT_THROW(parse_aggregator("mean"), Error);
}

class EncryptedAgg : public ::testing::Test {
 protected:
  const HeParams& params = preset("test-1024");

  std::vector<UserKeyring> keyrings(std::size_t users, std::uint64_t seed) {
    std::vector<std::uint64_t> ids(users);
    std::iota(ids.begin(), ids.end(), std::uint64_t{0});
    return setup_pairwise(params, ids, seed_from_u64(seed));
  }
  EncryptedUpdate enc(const GradientUpdate& u, const UserKeyring& k) {
    Prng prng(seed_from_u64(1000 + u.user_id));
    return encrypt_update(u, k.secret, params, seed_from_u64(77), 0, prng);
  }
};

TEST_F(EncryptedAgg, SquaredNormOfSmallVector) {
  const auto ks = keyrings(2, 1);
  const auto eu = enc(GradientUpdate{0, {1, 2, 3}, 0.1}, ks[0]);
  EXPECT_EQ(eu.width, 3u);
  EXPECT_EQ(eu.blocks.size(), 1u);
  const auto d = sq_norm_encrypted(eu, ks[0].eval_key);
  EXPECT_NEAR(decrypt_coefficients(d, ks[0].secret.s)[2], 14.0, 1e-2);
  const auto zero = sq_norm_encrypted(enc(GradientUpdate{0, {0, 0, 0}, 0.1}, ks[0]), ks[0].eval_key);
  EXPECT_NEAR(decrypt_coefficients(zero, ks[0].secret.s)[2], 0.0, 1e-3);
}

TEST_F(EncryptedAgg, SquaredNormAcrossBlocks) {
  const auto ks = keyrings(2, 2);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  GradientUpdate g{0, std::vector<double>(1024), 0.1};
  for (double& x : g.values) x = dist(rng);
  const auto eu = enc(g, ks[0]);
  EXPECT_EQ(eu.width, params.block_capacity());
  EXPECT_EQ(eu.blocks.size(), (1024 + eu.width - 1) / eu.width);
  const auto d = sq_norm_encrypted(eu, ks[0].eval_key);
  const double expected = sq_norm_plain(g.values);
  EXPECT_NEAR(decrypt_coefficients(d, ks[0].secret.s)[eu.norm_index()], expected, 1e-3 * expected);
}

TEST_F(EncryptedAgg, RatesEncrypted) {
  const auto ks = keyrings(2, 3);
  Prng prng(seed_from_u64(4));
  auto one = [&](double v) {
    return encrypt(PlainVector{{v}}, ks[0].secret, common_poly(params, seed_from_u64(5), 0, 0), params.scale(), prng);
  };
  auto rate = [&](const Ciphertext& ct) { return decrypt(ct, ks[0].secret).values[0]; };
  EXPECT_NEAR(rate(rates_encrypted(one(1.0), 4.0, 2)), 0.75, 1e-2);
  EXPECT_NEAR(rate(rates_encrypted(one(4.0), 4.0, 2)), 0.0, 1e-2);
  EXPECT_NEAR(rate(rates_encrypted(one(2.0), 20.0, 10)), 0.1, 1e-2);
  EXPECT_THROW(rates_encrypted(one(1.0), 0.0, 2), Error);
}

TEST_F(EncryptedAgg, SecureRoundMatchesPlain) {
  const std::size_t users = 4;
  const std::size_t dim = 64;
  const auto ks = keyrings(users, 5);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> dist;
  std::vector<GradientUpdate> ups(users);
  std::vector<EncryptedUpdate> encs;
  std::vector<double> norms;
  for (std::size_t u = 0; u < users; ++u) {
    ups[u] = {u, std::vector<double>(dim), 0.1};
    for (double& x : ups[u].values) x = dist(rng) * static_cast<double>(u + 1);
    encs.push_back(enc(ups[u], ks[u]));
    norms.push_back(sq_norm_plain(ups[u].values));
  }
  std::vector<double> w(dim);
  for (double& x : w) x = dist(rng);
  const auto rates = non_poisoning_rates(norms);
  const auto plain = weighted_aggregate_plain(w, ups, rates, 0.1);
  const auto secure = secure_aggregate_round(encs, ks, w, 0.1);
  double diff = 0, ref = 0;
  for (std::size_t k = 0; k < dim; ++k) {
    diff += std::pow(secure.model[k] - plain[k], 2);
    ref += std::pow(plain[k], 2);
  }
  EXPECT_LT(std::sqrt(diff / ref), 1e-2);
  EXPECT_NEAR(secure.sum_distances, std::accumulate(norms.begin(), norms.end(), 0.0), 1e-2 * secure.sum_distances);
  EXPECT_NEAR(secure.rate_sum, 1.0, 1e-2);
  EXPECT_TRUE(secure.stage_ms.contains("final_decrypt"));
}

TEST_F(EncryptedAgg, IdenticalGradientsGiveFedAvg) {
  const auto ks = keyrings(3, 7);
  std::vector<GradientUpdate> ups;
  std::vector<EncryptedUpdate> encs;
  for (std::uint64_t u = 0; u < 3; ++u) {
    ups.push_back({u, {0.5, -1.0, 2.0, 0.25}, 0.1});
    encs.push_back(enc(ups.back(), ks[u]));
  }
  const std::vector<double> w(4, 0.0);
  const auto secure = secure_aggregate_round(encs, ks, w, 1.0);
  const auto avg = fedavg(ups);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(secure.aggregate[k], avg[k], 1e-2);
}

TEST_F(EncryptedAgg, LargeGradientIsDownWeighted) {
  const auto ks = keyrings(4, 8);
  std::vector<GradientUpdate> ups;
  std::vector<EncryptedUpdate> encs;
  for (std::uint64_t u = 0; u < 4; ++u) {
    const double s = u == 0 ? 10.0 : 1.0;
    ups.push_back({u, {s * 1.0, s * -0.5, s * 0.25}, 0.1});
    encs.push_back(enc(ups.back(), ks[u]));
  }
  const std::vector<double> w(3, 0.0);
  const auto secure = secure_aggregate_round(encs, ks, w, 1.0);
  // aggregate[0] = 10 p_0 + (1 - p_0), so p_0 can be read back directly.
  const double p0 = (secure.aggregate[0] - 1.0) / 9.0;
  EXPECT_LT(p0, 0.25);
  EXPECT_NEAR(p0, non_poisoning_rates(std::vector<double>{131.25, 1.3125, 1.3125, 1.3125})[0], 1e-2);
}

TEST_F(EncryptedAgg, StageErrorsAreAnnotated) {
  const auto ks = keyrings(2, 9);
  const auto e0 = enc(GradientUpdate{0, {1.0, 2.0}, 0.1}, ks[0]);
  const std::vector<EncryptedUpdate> encs{e0};
  const std::vector<double> w(2, 0.0);
  EXPECT_THROW(secure_aggregate_round(encs, ks, w, 1.0), Error);
  const std::vector<UserKeyring> one{ks[0]};
  const std::vector<EncryptedUpdate> two{e0, enc(GradientUpdate{1, {1.0, 2.0}, 0.1}, ks[1])};
  try {
    secure_aggregate_round(two, one, w, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIncompleteRoster);
  }
}

}  // namespace
}  // namespace fhefl
