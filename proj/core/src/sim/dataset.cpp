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

#include "fhefl/sim/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

#include "fhefl/error.hpp"
#include "fhefl/prng.hpp"

namespace fhefl::sim {

void Dataset::push(std::span<const double> features_row, int label) {
  require(features_row.size() == features, ErrorCode::kDimensionMismatch, "row has the wrong feature count");
  x.insert(x.end(), features_row.begin(), features_row.end());
  y.push_back(label);
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void parse_error(const std::string& source, std::size_t line, const std::string& what) {
  fail(ErrorCode::kParse, source + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

Dataset parse_csv(std::istream& in, const std::string& source_name, std::size_t classes) {
  Dataset out;
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> row;
  int max_label = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = text.find(',', start);
      cells.push_back(trim(text.substr(start, comma == std::string_view::npos ? comma : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cells.size() < 2) parse_error(source_name, line_no, "expected at least one feature and a label");

    row.clear();
    for (std::size_t c = 0; c + 1 < cells.size(); ++c) {
      double v = 0.0;
      const auto cell = cells[c];
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        parse_error(source_name, line_no, "column " + std::to_string(c + 1) + " is not a number: '" +
                                              std::string(cell) + "'");
      }
      row.push_back(v);
    }
    int label = 0;
    const auto cell = cells.back();
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), label);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || label < 0) {
      parse_error(source_name, line_no, "label is not a non-negative integer: '" + std::string(cell) + "'");
    }
    if (out.features == 0) out.features = row.size();
    if (row.size() != out.features) {
      parse_error(source_name, line_no,
                  "expected " + std::to_string(out.features) + " features, got " + std::to_string(row.size()));
    }
    out.push(row, label);
    max_label = std::max(max_label, label);
  }
  require(!out.empty(), ErrorCode::kParse, source_name + ": no data rows");
  out.classes = classes == 0 ? static_cast<std::size_t>(max_label + 1) : classes;
  require(static_cast<std::size_t>(max_label) < out.classes, ErrorCode::kParse,
          source_name + ": label " + std::to_string(max_label) + " exceeds class count");
  return out;
}

Dataset load_csv(const std::string& path, std::size_t classes) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kParse, "cannot open dataset '" + path + "'");
  return parse_csv(in, path, classes);
}

TrainTest make_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  require(spec.classes >= 2 && spec.features >= 1, ErrorCode::kInvalidArgument,
          "synthetic data needs at least two classes and one feature");
  require(spec.train_samples > 0 && spec.test_samples > 0, ErrorCode::kInvalidArgument,
          "synthetic data needs non-empty splits");
  const Seed root = derive_seed(seed_from_u64(seed), "synthetic", {});
  Prng mean_prng(derive_seed(root, "means", {}));
  std::vector<double> means(spec.classes * spec.features);
  for (double& m : means) m = spec.separation * mean_prng.normal();

  auto draw = [&](std::size_t count, std::string_view label) {
    Dataset d;
    d.features = spec.features;
    d.classes = spec.classes;
    d.x.reserve(count * spec.features);
    Prng prng(derive_seed(root, label, {}));
    std::vector<double> row(spec.features);
    for (std::size_t i = 0; i < count; ++i) {
      const auto c = static_cast<int>(prng.uniform_below(spec.classes));
      for (std::size_t f = 0; f < spec.features; ++f) {
        row[f] = means[static_cast<std::size_t>(c) * spec.features + f] + prng.normal();
      }
      d.push(row, c);
    }
    return d;
  };
  return TrainTest{draw(spec.train_samples, "train"), draw(spec.test_samples, "test")};
}

std::vector<Dataset> shard_iid(const Dataset& data, std::size_t users, std::uint64_t seed) {
  require(users >= 1, ErrorCode::kInvalidArgument, "need at least one user");
  require(data.size() >= users, ErrorCode::kInfeasible,
          std::to_string(data.size()) + " samples cannot be split across " + std::to_string(users) + " users");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Prng prng(derive_seed(seed_from_u64(seed), "shard", {}));
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[prng.uniform_below(i)]);
  }
  const std::size_t per_user = data.size() / users;
  std::vector<Dataset> shards(users);
  for (std::size_t u = 0; u < users; ++u) {
    shards[u].features = data.features;
    shards[u].classes = data.classes;
    for (std::size_t i = 0; i < per_user; ++i) {
      const std::size_t idx = order[u * per_user + i];
      shards[u].push(data.row(idx), data.y[idx]);
    }
  }
  return shards;
}

}  // namespace fhefl::sim
