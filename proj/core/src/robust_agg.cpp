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

#include "fhefl/robust_agg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "fhefl/error.hpp"
#include "fhefl/parallel.hpp"

namespace fhefl {

namespace {

constexpr double kMinDistanceSum = 1e-9;

std::size_t check_dimensions(std::span<const GradientUpdate> updates) {
  require(!updates.empty(), ErrorCode::kInvalidArgument, "no updates to aggregate");
  const std::size_t dim = updates.front().values.size();
  for (const auto& u : updates) {
    require(u.values.size() == dim, ErrorCode::kDimensionMismatch,
            "update of user " + std::to_string(u.user_id) + " has dimension " +
                std::to_string(u.values.size()) + ", expected " + std::to_string(dim));
  }
  return dim;
}

class StageTimer {
 public:
  StageTimer(std::map<std::string, double>& sink, std::string name)
      : sink_(sink), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    const auto elapsed = std::chrono::steady_clock::now() - start_;
    sink_[name_] += std::chrono::duration<double, std::milli>(elapsed).count();
  }

 private:
  std::map<std::string, double>& sink_;
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

template <typename F>
auto run_stage(std::map<std::string, double>& timings, const std::string& stage, F&& body) {
  StageTimer timer(timings, stage);
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.code(), "secure_aggregate_round[" + stage + "]: " + e.what());
  }
}

}  // namespace

double sq_norm_plain(std::span<const double> g) {
  return std::inner_product(g.begin(), g.end(), g.begin(), 0.0);
}

EncryptedUpdate encrypt_update(const GradientUpdate& update, const SecretKey& sk, const HeParams& params,
                               const Seed& round_seed, std::uint64_t epoch, Prng& prng) {
  require(!update.values.empty(), ErrorCode::kInvalidArgument, "cannot encrypt an empty gradient");
  EncryptedUpdate out;
  out.user_id = update.user_id;
  out.epoch = epoch;
  out.dimension = update.values.size();
  out.width = std::min(out.dimension, params.block_capacity());
  const std::size_t blocks = (out.dimension + out.width - 1) / out.width;
  const double scale = params.scale();

  std::uint64_t index = 0;
  for (std::size_t b = 0; b < blocks; ++b) {
    const auto begin = update.values.begin() + static_cast<std::ptrdiff_t>(b * out.width);
    const auto end = update.values.begin() +
                     static_cast<std::ptrdiff_t>(std::min(out.dimension, (b + 1) * out.width));
    std::vector<double> chunk(begin, end);
    EncryptedBlock block;
    block.forward = encrypt(PlainVector{chunk, Layout::kForward, 0}, sk,
                            common_poly(params, round_seed, epoch, index++), scale, prng);
    block.reversed = encrypt(PlainVector{chunk, Layout::kReversed, out.width}, sk,
                             common_poly(params, round_seed, epoch, index++), scale, prng);
    block.strided = encrypt(PlainVector{chunk, Layout::kStrided, out.stride()}, sk,
                            common_poly(params, round_seed, epoch, index++), scale, prng);
    out.blocks.push_back(std::move(block));
  }
  return out;
}

Ciphertext sq_norm_encrypted(const EncryptedUpdate& update, const EvalKey& evk) {
  require(!update.blocks.empty(), ErrorCode::kInvalidArgument, "encrypted update has no blocks");
  Ciphertext sum;
  for (std::size_t b = 0; b < update.blocks.size(); ++b) {
    const auto& block = update.blocks[b];
    Ciphertext partial = he_mult_relin(block.forward, block.reversed, evk);
    sum = b == 0 ? std::move(partial) : he_add(sum, partial);
  }
  const std::size_t degree = sum.c0.degree();
  return with_layout(std::move(sum), Layout::kRaw, degree);
}

std::vector<double> non_poisoning_rates(std::span<const double> distances) {
  const std::size_t users = distances.size();
  require(users >= 2, ErrorCode::kInvalidArgument, "non-poisoning rates need at least two users");
  double total = 0.0;
  for (double d : distances) {
    require(std::isfinite(d) && d >= 0.0, ErrorCode::kInvalidArgument,
            "squared distances must be finite and non-negative");
    total += d;
  }
  std::vector<double> rates(users);
  const bool all_equal = std::all_of(distances.begin(), distances.end(),
                                     [&](double d) { return d == distances.front(); });
  if (total <= 0.0 || all_equal) {
    std::fill(rates.begin(), rates.end(), 1.0 / static_cast<double>(users));
    return rates;
  }
  const double inv = 1.0 / static_cast<double>(users - 1);
  for (std::size_t u = 0; u < users; ++u) rates[u] = inv * (1.0 - distances[u] / total);
  return rates;
}

Ciphertext rates_encrypted(const Ciphertext& d_ct, double sum_d, std::size_t users, std::size_t index) {
  require(users >= 2, ErrorCode::kInvalidArgument, "encrypted rates need at least two users");
  require(std::isfinite(sum_d) && sum_d > 0.0, ErrorCode::kInvalidArgument,
          "sum of squared distances must be positive");
  const double inv = 1.0 / static_cast<double>(users - 1);
  return plain_affine(d_ct, -inv / sum_d, inv, index);
}

std::vector<double> weighted_aggregate_plain(std::span<const double> w_prev,
                                             std::span<const GradientUpdate> updates,
                                             std::span<const double> rates, double eta) {
  const std::size_t dim = check_dimensions(updates);
  require(w_prev.size() == dim, ErrorCode::kDimensionMismatch, "model and update dimensions differ");
  require(rates.size() == updates.size(), ErrorCode::kDimensionMismatch, "one rate per update required");
  std::vector<double> out(w_prev.begin(), w_prev.end());
  for (std::size_t u = 0; u < updates.size(); ++u) {
    const double weight = eta * rates[u];
    for (std::size_t k = 0; k < dim; ++k) out[k] -= weight * updates[u].values[k];
  }
  return out;
}

SecureRoundResult secure_aggregate_round(std::span<const EncryptedUpdate> updates,
                                         std::span<const UserKeyring> keyrings,
                                         std::span<const double> w_prev, double eta,
                                         const SecureRoundOptions& options) {
  const std::size_t users = updates.size();
  require(users >= 2, ErrorCode::kInvalidArgument, "secure aggregation needs at least two users");
  require(keyrings.size() == users, ErrorCode::kIncompleteRoster, "one keyring per update required");
  const EncryptedUpdate& first = updates.front();
  require(w_prev.size() == first.dimension, ErrorCode::kDimensionMismatch,
          "model and update dimensions differ");

  std::vector<std::uint64_t> roster;
  std::vector<const UserKeyring*> keyring_of(users, nullptr);
  for (std::size_t u = 0; u < users; ++u) {
    const auto& up = updates[u];
    require(up.dimension == first.dimension && up.width == first.width &&
                up.blocks.size() == first.blocks.size(),
            ErrorCode::kDimensionMismatch, "encrypted updates disagree on shape");
    roster.push_back(up.user_id);
    for (const auto& k : keyrings) {
      if (k.user_id == up.user_id) keyring_of[u] = &k;
    }
    require(keyring_of[u] != nullptr, ErrorCode::kIncompleteRoster,
            "no keyring for user " + std::to_string(up.user_id));
  }

  SecureRoundResult result;
  auto& timings = result.stage_ms;
  std::uint64_t round = options.round_base;

  // Masked two-round decryption of sum_u cts[u]; users answer on their own c1.
  auto masked_decrypt = [&](const std::vector<Ciphertext>& cts) {
    const std::uint64_t this_round = round++;
    std::vector<PartialDecryption> partials(users);
    parallel_for(users, [&](std::size_t u) {
      partials[u] = masked_partial_decrypt(*keyring_of[u], cts[u].c1, this_round, options.flood_sigma);
    });
    return combine_partials_coefficients(cts, partials, roster);
  };

  const std::size_t norm_index = first.norm_index();
  const std::size_t stride = first.stride();

  // [d_u] per user, under s_u.
  std::vector<Ciphertext> distances(users);
  run_stage(timings, "norm", [&] {
    parallel_for(users, [&](std::size_t u) {
      distances[u] = sq_norm_encrypted(updates[u], keyring_of[u]->eval_key);
    });
    return 0;
  });

  result.sum_distances = run_stage(timings, "sum_norm_decrypt", [&] {
    return masked_decrypt(distances).at(norm_index);
  });

  std::vector<Ciphertext> rates(users);
  run_stage(timings, "rates", [&] {
    result.uniform_fallback = !(result.sum_distances > kMinDistanceSum);
    parallel_for(users, [&](std::size_t u) {
      rates[u] = result.uniform_fallback
                     ? plain_affine(distances[u], 0.0, 1.0 / static_cast<double>(users), norm_index)
                     : rates_encrypted(distances[u], result.sum_distances, users, norm_index);
    });
    return 0;
  });

  result.rate_sum = run_stage(timings, "rate_sum_decrypt", [&] {
    return masked_decrypt(rates).at(norm_index);
  });

  // [p_u * g_u] per block, then one masked decryption per block.
  const std::size_t blocks = first.blocks.size();
  std::vector<std::vector<Ciphertext>> products(blocks, std::vector<Ciphertext>(users));
  run_stage(timings, "product", [&] {
    parallel_for(users, [&](std::size_t u) {
      const Ciphertext& rate = rates[u];
      for (std::size_t b = 0; b < blocks; ++b) {
        const Ciphertext strided = match_level(updates[u].blocks[b].strided, rate.level);
        products[b][u] = he_mult_relin(rate, strided, keyring_of[u]->eval_key);
      }
    });
    return 0;
  });

  result.aggregate.assign(first.dimension, 0.0);
  run_stage(timings, "final_decrypt", [&] {
    for (std::size_t b = 0; b < blocks; ++b) {
      const auto coeffs = masked_decrypt(products[b]);
      const std::size_t begin = b * first.width;
      const std::size_t count = std::min(first.width, first.dimension - begin);
      for (std::size_t k = 0; k < count; ++k) {
        result.aggregate[begin + k] = coeffs.at(norm_index + k * stride);
      }
    }
    return 0;
  });

  if (options.renormalize) {
    require(result.rate_sum > 0.0, ErrorCode::kNumerical,
            "secure_aggregate_round[renormalize]: decrypted rate sum is not positive");
    for (double& v : result.aggregate) v /= result.rate_sum;
  }
  result.model.assign(w_prev.begin(), w_prev.end());
  for (std::size_t k = 0; k < result.model.size(); ++k) result.model[k] -= eta * result.aggregate[k];
  return result;
}

std::vector<double> weighted_sum(std::span<const GradientUpdate> updates, std::span<const double> weights) {
  const std::size_t dim = check_dimensions(updates);
  require(weights.size() == updates.size(), ErrorCode::kDimensionMismatch, "one weight per update required");
  std::vector<double> out(dim, 0.0);
  for (std::size_t u = 0; u < updates.size(); ++u) {
    for (std::size_t k = 0; k < dim; ++k) out[k] += weights[u] * updates[u].values[k];
  }
  return out;
}

std::vector<double> fedavg(std::span<const GradientUpdate> updates) {
  const std::vector<double> uniform(updates.size(), 1.0 / static_cast<double>(updates.size()));
  return weighted_sum(updates, uniform);
}

std::vector<double> coordinate_median(std::span<const GradientUpdate> updates) {
  const std::size_t dim = check_dimensions(updates);
  const std::size_t n = updates.size();
  std::vector<double> out(dim);
  std::vector<double> column(n);
  for (std::size_t k = 0; k < dim; ++k) {
    for (std::size_t u = 0; u < n; ++u) column[u] = updates[u].values[k];
    std::sort(column.begin(), column.end());
    out[k] = n % 2 == 1 ? column[n / 2] : 0.5 * (column[n / 2 - 1] + column[n / 2]);
  }
  return out;
}

std::vector<double> trimmed_mean(std::span<const GradientUpdate> updates, double beta) {
  const std::size_t dim = check_dimensions(updates);
  const std::size_t n = updates.size();
  require(beta >= 0.0 && beta < 0.5, ErrorCode::kInfeasible, "trim fraction must lie in [0, 0.5)");
  // Guard against 0.2 * 5 evaluating to 1.0000000000000002.
  const auto trim = static_cast<std::size_t>(std::ceil(beta * static_cast<double>(n) - 1e-9));
  require(2 * trim < n, ErrorCode::kInfeasible, "trimming removes every update");
  std::vector<double> out(dim);
  std::vector<double> column(n);
  for (std::size_t k = 0; k < dim; ++k) {
    for (std::size_t u = 0; u < n; ++u) column[u] = updates[u].values[k];
    std::sort(column.begin(), column.end());
    const double sum = std::accumulate(column.begin() + static_cast<std::ptrdiff_t>(trim),
                                       column.end() - static_cast<std::ptrdiff_t>(trim), 0.0);
    out[k] = sum / static_cast<double>(n - 2 * trim);
  }
  return out;
}

std::vector<double> krum(std::span<const GradientUpdate> updates, std::size_t f) {
  const std::size_t dim = check_dimensions(updates);
  const std::size_t n = updates.size();
  require(n >= f + 3, ErrorCode::kInfeasible,
          "krum needs at least f + 3 updates to score each against U - f - 2 neighbours");
  const std::size_t neighbours = n - f - 2;
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double d = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double diff = updates[i].values[k] - updates[j].values[k];
        d += diff * diff;
      }
      dist[i][j] = dist[j][i] = d;
    }
  }
  std::size_t best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  std::vector<double> others;
  for (std::size_t i = 0; i < n; ++i) {
    others.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) others.push_back(dist[i][j]);
    }
    std::partial_sort(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(neighbours), others.end());
    const double score = std::accumulate(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(neighbours), 0.0);
    if (score < best_score) {
      best_score = score;
      best = i;
    }
  }
  return updates[best].values;
}

Aggregator parse_aggregator(std::string_view name) {
  if (name == "fhefl") return Aggregator::kFheFL;
  if (name == "fedavg") return Aggregator::kFedAvg;
  if (name == "median") return Aggregator::kMedian;
  if (name == "trimmed_mean") return Aggregator::kTrimmedMean;
  if (name == "krum") return Aggregator::kKrum;
  fail(ErrorCode::kInvalidArgument, "unknown aggregator '" + std::string(name) + "'");
}

std::string_view aggregator_name(Aggregator a) {
  switch (a) {
    case Aggregator::kFheFL: return "fhefl";
    case Aggregator::kFedAvg: return "fedavg";
    case Aggregator::kMedian: return "median";
    case Aggregator::kTrimmedMean: return "trimmed_mean";
    case Aggregator::kKrum: return "krum";
  }
  return "unknown";
}

}  // namespace fhefl
