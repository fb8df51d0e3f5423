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

// Reference implementations the library is checked against. Deliberately naive.

#include <cstdint>
#include <functional>
#include <vector>

namespace fhefl::testing {

/// Schoolbook product in Z_q[X]/(X^n + 1): O(n^2), sign flip on wrap-around.
inline std::vector<std::uint64_t> schoolbook_negacyclic(const std::vector<std::uint64_t>& a,
                                                        const std::vector<std::uint64_t>& b,
                                                        std::uint64_t q) {
  const std::size_t n = a.size();
  std::vector<unsigned __int128> pos(n, 0), neg(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const unsigned __int128 p = static_cast<unsigned __int128>(a[i]) * b[j] % q;
      if (i + j < n) {
        pos[i + j] = (pos[i + j] + p) % q;
      } else {
        neg[i + j - n] = (neg[i + j - n] + p) % q;
      }
    }
  }
  std::vector<std::uint64_t> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = static_cast<std::uint64_t>((pos[k] + q - neg[k]) % q);
  }
  return out;
}

/// Real-coefficient negacyclic product.
inline std::vector<double> negacyclic_real(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i + j < n) {
        out[i + j] += a[i] * b[j];
      } else {
        out[i + j - n] -= a[i] * b[j];
      }
    }
  }
  return out;
}

/// Central finite differences of f at w, step h.
inline std::vector<double> finite_difference_gradient(const std::function<double(const std::vector<double>&)>& f,
                                                      std::vector<double> w, double h) {
  std::vector<double> grad(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double saved = w[k];
    w[k] = saved + h;
    const double up = f(w);
    w[k] = saved - h;
    const double down = f(w);
    w[k] = saved;
    grad[k] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace fhefl::testing
