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

#include "fhefl/sim/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fhefl/error.hpp"
#include "fhefl/params.hpp"
#include "json.hpp"

namespace fhefl::sim {

using nlohmann::json;

Mode parse_mode(std::string_view name) {
  if (name == "plain") return Mode::kPlain;
  if (name == "encrypted") return Mode::kEncrypted;
  fail(ErrorCode::kInvalidArgument, "unknown mode '" + std::string(name) + "' (plain|encrypted)");
}

std::string_view mode_name(Mode m) { return m == Mode::kPlain ? "plain" : "encrypted"; }

namespace {

RosterMode parse_roster_mode(const std::string& s) {
  if (s == "pinned") return RosterMode::kPinned;
  if (s == "random") return RosterMode::kRandom;
  fail(ErrorCode::kInvalidArgument, "unknown roster_mode '" + s + "' (pinned|random)");
}

EncryptScope parse_scope(const std::string& s) {
  if (s == "full") return EncryptScope::kFull;
  if (s == "first_layer") return EncryptScope::kFirstLayer;
  fail(ErrorCode::kInvalidArgument, "unknown encrypt_scope '" + s + "' (full|first_layer)");
}

void reject_unknown(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  require(obj.is_object(), ErrorCode::kParse, where + " must be a JSON object");
  std::set<std::string> known(keys.begin(), keys.end());
  for (const auto& [key, value] : obj.items()) {
    require(known.contains(key), ErrorCode::kParse, where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  auto check = [](bool ok, const std::string& what) { require(ok, ErrorCode::kInvalidArgument, what); };
  check(dataset.kind == "synthetic" || dataset.kind == "csv", "dataset.kind must be synthetic or csv");
  check(dataset.kind != "csv" || (!dataset.train_path.empty() && !dataset.test_path.empty()),
        "csv datasets need train and test paths");
  check(architecture == Architecture::kLogistic || hidden > 0, "mlp needs hidden > 0");
  check(users >= 2, "users must be at least 2");
  check(roster_size >= 2 && roster_size <= users, "roster_size must lie in [2, users]");
  check(attack.fraction >= 0.0 && attack.fraction <= 1.0, "attack.fraction must lie in [0, 1]");
  check(override_attacker_cap || attack.fraction <= 0.2 + 1e-12,
        "attack.fraction above 0.2 needs the explicit attacker-cap override");
  check(attack.source != attack.target, "attack.source and attack.target must differ");
  check(attack.source >= 0 && attack.target >= 0, "attack labels must be non-negative");
  check(attack.local_epochs >= 1, "attack.local_epochs must be positive");
  check(trim_beta >= 0.0 && trim_beta < 0.5, "trim_beta must lie in [0, 0.5)");
  check(mode == Mode::kPlain || aggregator == Aggregator::kFheFL, "encrypted mode supports only the fhefl aggregator");
  check(std::isfinite(learning_rate) && learning_rate > 0.0, "learning_rate must be positive");
  check(local_epochs >= 1 && batch_size >= 1 && rounds >= 1, "local_epochs, batch_size and rounds must be positive");
  check(epsilon >= 0.0, "epsilon must be non-negative");
  check(!seeds.empty(), "seeds must not be empty");
  const auto names = preset_names();
  check(std::find(names.begin(), names.end(), preset) != names.end(), "unknown preset '" + preset + "'");
}

ExperimentConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParse, std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(doc,
                 {"dataset", "architecture", "hidden", "users", "roster_size", "roster_mode", "attack",
                  "aggregator", "trim_beta", "krum_f", "mode", "preset", "encrypt_scope", "learning_rate",
                  "local_epochs", "batch_size", "rounds", "epsilon", "seeds", "override_attacker_cap"},
                 "config");
  ExperimentConfig cfg;
  if (doc.contains("dataset")) {
    const json& d = doc["dataset"];
    reject_unknown(d, {"kind", "classes", "features", "train_samples", "test_samples", "separation", "train", "test"},
                   "dataset");
    read(d, "kind", cfg.dataset.kind);
    read(d, "classes", cfg.dataset.classes);
    if (cfg.dataset.classes != 0) cfg.dataset.synthetic.classes = cfg.dataset.classes;
    read(d, "features", cfg.dataset.synthetic.features);
    read(d, "train_samples", cfg.dataset.synthetic.train_samples);
    read(d, "test_samples", cfg.dataset.synthetic.test_samples);
    read(d, "separation", cfg.dataset.synthetic.separation);
    read(d, "train", cfg.dataset.train_path);
    read(d, "test", cfg.dataset.test_path);
  }
  std::string text;
  if (doc.contains("architecture")) {
    read(doc, "architecture", text);
    cfg.architecture = parse_architecture(text);
  }
  read(doc, "hidden", cfg.hidden);
  read(doc, "users", cfg.users);
  read(doc, "roster_size", cfg.roster_size);
  if (doc.contains("roster_mode")) {
    read(doc, "roster_mode", text);
    cfg.roster_mode = parse_roster_mode(text);
  }
  if (doc.contains("attack")) {
    const json& a = doc["attack"];
    reject_unknown(a, {"fraction", "source", "target", "local_epochs"}, "attack");
    read(a, "fraction", cfg.attack.fraction);
    read(a, "source", cfg.attack.source);
    read(a, "target", cfg.attack.target);
    read(a, "local_epochs", cfg.attack.local_epochs);
  }
  if (doc.contains("aggregator")) {
    read(doc, "aggregator", text);
    cfg.aggregator = parse_aggregator(text);
  }
  read(doc, "trim_beta", cfg.trim_beta);
  read(doc, "krum_f", cfg.krum_f);
  if (doc.contains("mode")) {
    read(doc, "mode", text);
    cfg.mode = parse_mode(text);
  }
  read(doc, "preset", cfg.preset);
  if (doc.contains("encrypt_scope")) {
    read(doc, "encrypt_scope", text);
    cfg.encrypt_scope = parse_scope(text);
  }
  read(doc, "learning_rate", cfg.learning_rate);
  read(doc, "local_epochs", cfg.local_epochs);
  read(doc, "batch_size", cfg.batch_size);
  read(doc, "rounds", cfg.rounds);
  read(doc, "epsilon", cfg.epsilon);
  read(doc, "seeds", cfg.seeds);
  read(doc, "override_attacker_cap", cfg.override_attacker_cap);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kParse, "cannot open config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string to_json(const ExperimentConfig& cfg) {
  json d = {{"kind", cfg.dataset.kind}};
  if (cfg.dataset.kind == "synthetic") {
    d["classes"] = cfg.dataset.synthetic.classes;
    d["features"] = cfg.dataset.synthetic.features;
    d["train_samples"] = cfg.dataset.synthetic.train_samples;
    d["test_samples"] = cfg.dataset.synthetic.test_samples;
    d["separation"] = cfg.dataset.synthetic.separation;
  } else {
    d["train"] = cfg.dataset.train_path;
    d["test"] = cfg.dataset.test_path;
    d["classes"] = cfg.dataset.classes;
  }
  json doc = {
      {"dataset", d},
      {"architecture", architecture_name(cfg.architecture)},
      {"hidden", cfg.hidden},
      {"users", cfg.users},
      {"roster_size", cfg.roster_size},
      {"roster_mode", cfg.roster_mode == RosterMode::kPinned ? "pinned" : "random"},
      {"attack",
       {{"fraction", cfg.attack.fraction},
        {"source", cfg.attack.source},
        {"target", cfg.attack.target},
        {"local_epochs", cfg.attack.local_epochs}}},
      {"aggregator", aggregator_name(cfg.aggregator)},
      {"trim_beta", cfg.trim_beta},
      {"krum_f", cfg.krum_f},
      {"mode", mode_name(cfg.mode)},
      {"preset", cfg.preset},
      {"encrypt_scope", cfg.encrypt_scope == EncryptScope::kFull ? "full" : "first_layer"},
      {"learning_rate", cfg.learning_rate},
      {"local_epochs", cfg.local_epochs},
      {"batch_size", cfg.batch_size},
      {"rounds", cfg.rounds},
      {"epsilon", cfg.epsilon},
      {"seeds", cfg.seeds},
      {"override_attacker_cap", cfg.override_attacker_cap},
  };
  return doc.dump(2);
}

}  // namespace fhefl::sim
