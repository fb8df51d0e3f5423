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

#include "fhefl/prng.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstring>
#include <numbers>

#include "fhefl/error.hpp"

namespace fhefl {

namespace {

constexpr std::size_t kBufferBytes = 4096;

void append_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

Seed seed_from_u64(std::uint64_t value) {
  Seed seed{};
  for (int i = 0; i < 8; ++i) seed[i] = static_cast<std::uint8_t>(value >> (8 * i));
  return seed;
}

Seed derive_seed(const Seed& parent, std::string_view label,
                 std::initializer_list<std::uint64_t> ids) {
  std::vector<std::uint8_t> input(parent.begin(), parent.end());
  append_u64(input, label.size());
  input.insert(input.end(), label.begin(), label.end());
  append_u64(input, ids.size());
  for (std::uint64_t id : ids) append_u64(input, id);

  Seed out{};
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  bool ok = ctx != nullptr && EVP_DigestInit_ex(ctx, EVP_shake256(), nullptr) == 1 &&
            EVP_DigestUpdate(ctx, input.data(), input.size()) == 1 &&
            EVP_DigestFinalXOF(ctx, out.data(), out.size()) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) fail(ErrorCode::kInvalidArgument, "SHAKE256 seed derivation failed");
  return out;
}

struct Prng::Cipher {
  EVP_CIPHER_CTX* ctx = nullptr;
  ~Cipher() { EVP_CIPHER_CTX_free(ctx); }
};

Prng::Prng(const Seed& seed) : cipher_(std::make_unique<Cipher>()) {
  cipher_->ctx = EVP_CIPHER_CTX_new();
  std::array<std::uint8_t, 16> iv{};
  if (cipher_->ctx == nullptr ||
      EVP_EncryptInit_ex(cipher_->ctx, EVP_chacha20(), nullptr, seed.data(), iv.data()) != 1) {
    fail(ErrorCode::kInvalidArgument, "ChaCha20 initialisation failed");
  }
  buffer_.resize(kBufferBytes);
  offset_ = kBufferBytes;
}

Prng::~Prng() = default;
Prng::Prng(Prng&&) noexcept = default;
Prng& Prng::operator=(Prng&&) noexcept = default;

void Prng::refill() {
  std::vector<std::uint8_t> zeros(kBufferBytes, 0);
  int written = 0;
  if (EVP_EncryptUpdate(cipher_->ctx, buffer_.data(), &written, zeros.data(),
                        static_cast<int>(zeros.size())) != 1 ||
      written != static_cast<int>(kBufferBytes)) {
    fail(ErrorCode::kInvalidArgument, "ChaCha20 keystream failed");
  }
  offset_ = 0;
}

std::uint64_t Prng::next_u64() {
  if (offset_ + 8 > buffer_.size()) refill();
  std::uint64_t v = 0;
  std::memcpy(&v, buffer_.data() + offset_, 8);
  offset_ += 8;
  return v;
}

std::uint64_t Prng::uniform_below(std::uint64_t bound) {
  if (bound == 0) fail(ErrorCode::kInvalidArgument, "uniform_below: bound must be positive");
  // Largest multiple of bound that fits; values at or above it are rejected.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound + 1) % bound;
  for (;;) {
    std::uint64_t v = next_u64();
    if (v <= limit) return v % bound;
  }
}

double Prng::uniform_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Prng::normal() {
  if (has_spare_normal_) {
    has_spare_normal_ = false;
    return spare_normal_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform_unit();
  } while (u1 <= 0.0);
  const double u2 = uniform_unit();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(angle);
  has_spare_normal_ = true;
  return radius * std::cos(angle);
}

}  // namespace fhefl
