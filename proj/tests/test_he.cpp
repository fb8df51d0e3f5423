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
#include <random>

#include "fhefl/error.hpp"
#include "fhefl/he.hpp"
#include "oracles.hpp"

namespace fhefl {
namespace {

class HeTest : public ::testing::Test {
 protected:
  const HeParams& params = preset("test-1024");
  Prng prng{seed_from_u64(11)};
  SecretKey sk = generate_secret_key(params, prng);
  EvalKey evk = generate_eval_key(params, sk, prng);
  Seed round_seed = seed_from_u64(99);
  std::uint64_t next_index = 0;

  Ciphertext enc(std::vector<double> v, Layout layout = Layout::kForward, std::size_t span = 0) {
    return encrypt(PlainVector{std::move(v), layout, span}, sk, common_poly(params, round_seed, 0, next_index++),
                   params.scale(), prng);
  }
  double value(const Ciphertext& ct, std::size_t k = 0) { return decrypt(ct, sk).values.at(k); }
};

TEST(Encode, HandFixedPoint) {
  const auto& params = preset("test-16");
  const auto e = encode(PlainVector{{1.5, -2.25}}, 1024.0, params.ring, 0);
  const u64 q = e.modulus(0).value();
  const auto r = e.residues(0);
  EXPECT_EQ(r[0], 1536u);
  EXPECT_EQ(r[1], q - 2304);
  for (std::size_t i = 2; i < 16; ++i) EXPECT_EQ(r[i], 0u);
}

TEST(Encode, ZeroAndRoundTrip) {
  const auto& params = preset("test-1024");
  EXPECT_TRUE(encode(PlainVector{std::vector<double>(100, 0.0)}, params.scale(), params.ring, 2).is_zero());
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> dist(-100.0, 100.0);
  std::vector<double> v(300);
  for (double& x : v) x = dist(rng);
  for (Layout layout : {Layout::kForward, Layout::kReversed}) {
    const auto e = encode(PlainVector{v, layout}, params.scale(), params.ring, params.max_level());
    const auto d = decode(e, params.scale(), v.size(), layout);
    for (std::size_t k = 0; k < v.size(); ++k) EXPECT_LE(std::fabs(d.values[k] - v[k]), 0.5 / params.scale());
  }
}

TEST(Encode, ReversedAndStridedPositions) {
  PlainVector rev{{1, 2, 3}, Layout::kReversed};
  EXPECT_EQ(rev.position(0), 2u);
  EXPECT_EQ(rev.position(2), 0u);
  PlainVector strided{{1, 2, 3}, Layout::kStrided, 5};
  EXPECT_EQ(strided.position(2), 10u);
  EXPECT_EQ(strided.extent(), 11u);
}

TEST(Encode, Errors) {
  const auto& params = preset("test-16");
  EXPECT_THROW(encode(PlainVector{std::vector<double>(9, 1.0)}, params.scale(), params.ring, 0), Error);
  try {
    encode(PlainVector{{1e9}}, params.scale(), params.ring, 0);
    FAIL() << "expected overflow";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOverflow);
  }
}

TEST_F(HeTest, RoundTrip) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> dist(-10.0, 10.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(512);
    for (double& x : v) x = dist(rng);
    const auto d = decrypt(enc(v), sk);
    for (std::size_t k = 0; k < v.size(); ++k) ASSERT_LT(std::fabs(d.values[k] - v[k]), 1e-3);
  }
}

TEST_F(HeTest, ZeroEncryptsNearZero) {
  const auto d = decrypt(enc(std::vector<double>(16, 0.0)), sk);
  for (double x : d.values) EXPECT_LT(std::fabs(x), 1e-6);
}

TEST_F(HeTest, EncryptionIsProbabilistic) {
  const auto a = common_poly(params, round_seed, 0, 1234);
  const PlainVector v{{1.0, 2.0}};
  const auto c1 = encrypt(v, sk, a, params.scale(), prng);
  const auto c2 = encrypt(v, sk, a, params.scale(), prng);
  EXPECT_EQ(c1.c1, c2.c1);
  EXPECT_FALSE(c1.c0 == c2.c0);
}

TEST_F(HeTest, Addition) {
  const auto a = enc({1.25, -3.0, 7.5});
  const auto b = enc({2.0, 0.5, -1.5});
  const auto sum = decrypt(he_add(a, b), sk);
  EXPECT_NEAR(sum.values[0], 3.25, 1e-6);
  EXPECT_NEAR(sum.values[1], -2.5, 1e-6);
  EXPECT_NEAR(sum.values[2], 6.0, 1e-6);
  EXPECT_NEAR(value(he_sub(a, b), 2), 9.0, 1e-6);
  EXPECT_NEAR(value(he_add(a, enc({0.0, 0.0, 0.0}))), 1.25, 1e-6);

  Ciphertext acc = enc({1.0});
  for (int i = 1; i < 10; ++i) acc = he_add(acc, enc({1.0}));
  EXPECT_NEAR(value(acc), 10.0, 1e-3);
}

TEST_F(HeTest, AdditionRequiresMatchingLevelAndScale) {
  const auto a = enc({1.0});
  const auto b = plain_affine(enc({1.0}), 1.0, 0.0);
  try {
    he_add(a, b);
    FAIL() << "expected level mismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLevelMismatch);
  }
  EXPECT_NEAR(value(he_add(match_level(a, b.level), b)), 2.0, 1e-6);
}

TEST_F(HeTest, MultiplyScalars) {
  const auto prod = he_mult_relin(enc({2.0}), enc({3.0}), evk);
  EXPECT_EQ(prod.level, params.max_level() - 1);
  EXPECT_NEAR(prod.scale / params.scale(), 1.0, 1e-3);
  EXPECT_NEAR(value(prod), 6.0, 1e-2);
}

TEST_F(HeTest, MultiplyByPackedOne) {
  const std::vector<double> v{0.5, -1.5, 2.25, 4.0};
  const auto prod = with_layout(he_mult_relin(enc(v), enc({1.0}), evk), Layout::kForward, v.size());
  const auto d = decrypt(prod, sk);
  for (std::size_t k = 0; k < v.size(); ++k) EXPECT_NEAR(d.values[k], v[k], 1e-4);
}

TEST_F(HeTest, ForwardTimesReversedGivesSquaredNorm) {
  const auto prod = he_mult_relin(enc({1, 2, 3}), enc({1, 2, 3}, Layout::kReversed), evk);
  const auto coeffs = decrypt_coefficients(prod, sk.s);
  EXPECT_NEAR(coeffs[2], 14.0, 1e-2);
  // Whole product against the real negacyclic oracle.
  std::vector<double> a(params.degree(), 0.0), b(params.degree(), 0.0);
  a[0] = 1; a[1] = 2; a[2] = 3;
  b[0] = 3; b[1] = 2; b[2] = 1;
  const auto expected = testing::negacyclic_real(a, b);
  for (std::size_t k = 0; k < 8; ++k) EXPECT_NEAR(coeffs[k], expected[k], 1e-2);
}

TEST_F(HeTest, ThreeComponentDecryptionAgreesWithRelinearized) {
  const auto raw = he_mult_raw(enc({1.5, -2.0}), enc({4.0, 0.5}));
  ASSERT_EQ(raw.size(), 3u);
  const auto direct = decrypt_coefficients(raw, sk.s);
  const auto relin = decrypt_coefficients(relinearize(raw, evk), sk.s);
  const auto ref = testing::negacyclic_real(
      [&] { std::vector<double> x(params.degree(), 0.0); x[0] = 1.5; x[1] = -2.0; return x; }(),
      [&] { std::vector<double> x(params.degree(), 0.0); x[0] = 4.0; x[1] = 0.5; return x; }());
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_NEAR(direct[k], ref[k], 1e-3);
    EXPECT_NEAR(relin[k], direct[k], 1e-3);
  }
}

TEST_F(HeTest, PlainAffine) {
  EXPECT_NEAR(value(plain_affine(enc({4.0}), -0.25, 1.0)), 0.0, 1e-2);
  EXPECT_NEAR(value(plain_affine(enc({3.5}), 1.0, 0.0)), 3.5, 1e-2);
  EXPECT_NEAR(value(plain_affine(enc({0.0}), 7.0, -2.0)), -2.0, 1e-2);
  const auto at_index = plain_affine(enc({0.0, 0.0, 5.0}), 2.0, 1.0, 2);
  EXPECT_NEAR(decrypt_coefficients(at_index, sk.s)[2], 11.0, 1e-2);
}

TEST_F(HeTest, DepthBudgetCoversPipeline) {
  const auto norm = he_mult_relin(enc({1, 2}), enc({1, 2}, Layout::kReversed), evk);
  const auto rate = plain_affine(norm, -0.1, 1.0, 1);
  const auto strided = enc({1, 2}, Layout::kStrided, 3);
  const auto prod = he_mult_relin(rate, match_level(strided, rate.level), evk);
  EXPECT_GE(prod.level, 1u);
  const auto coeffs = decrypt_coefficients(prod, sk.s);
  // rate = 1 - 0.1 * 5 = 0.5, landing at 1 + 3k.
  EXPECT_NEAR(coeffs[1], 0.5, 1e-2);
  EXPECT_NEAR(coeffs[4], 1.0, 1e-2);
  EXPECT_THROW(he_mult_relin(plain_affine(prod, 1.0, 0.0), plain_affine(prod, 1.0, 0.0), evk), Error);
}

TEST_F(HeTest, SerializationRoundTrip) {
  const auto ct = enc({1.0, 2.0, 3.0});
  const auto back = deserialize_ciphertext(serialize(ct, params));
  EXPECT_EQ(back.c0, ct.c0);
  EXPECT_EQ(back.c1, ct.c1);
  EXPECT_EQ(back.level, ct.level);
  EXPECT_DOUBLE_EQ(back.scale, ct.scale);
  EXPECT_NEAR(value(back, 2), 3.0, 1e-6);
  EXPECT_EQ(deserialize_secret_key(serialize(sk, params)).s, sk.s);
  const auto evk2 = deserialize_eval_key(serialize(evk, params));
  ASSERT_EQ(evk2.parts.size(), evk.parts.size());
  EXPECT_EQ(evk2.parts[0].first, evk.parts[0].first);
  auto bytes = serialize(ct, params);
  bytes[0] = 'X';
  EXPECT_THROW(deserialize_ciphertext(bytes), Error);
}

}  // namespace
}  // namespace fhefl
