// Copyright 2026 The sqkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "sqkit/splits.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"
#include "sqkit/error.hpp"
#include "sqkit/rng.hpp"

namespace sqkit {

namespace {

using nlohmann::json;

std::string required_string(const json& obj, const char* key, int line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw InputError("manifest line " + std::to_string(line) + ": missing string field '" +
                     key + "'");
  }
  return it->get<std::string>();
}

Fold build_fold(const Manifest& manifest, std::string name,
                std::vector<std::string> held_out) {
  Fold fold{std::move(name), std::move(held_out), {}, {}};
  const std::set<std::string> held(fold.held_out.begin(), fold.held_out.end());
  for (const SequenceRecord& r : manifest) {
    (held.count(r.noun) ? fold.test_ids : fold.train_ids).push_back(r.id);
  }
  return fold;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ", ";
    out += s;
  }
  return out;
}

}  // namespace

Manifest parse_manifest(std::istream& in) {
  Manifest manifest;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw InputError("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!obj.is_object()) {
      throw InputError("manifest line " + std::to_string(line_no) + ": expected an object");
    }
    SequenceRecord r;
    r.id = required_string(obj, "id", line_no);
    r.subject = required_string(obj, "subject", line_no);
    r.verb = required_string(obj, "verb", line_no);
    r.noun = required_string(obj, "noun", line_no);
    r.path = required_string(obj, "path", line_no);
    if (auto it = obj.find("frame_count"); it != obj.end() && !it->is_null()) {
      if (!it->is_number_integer() || it->get<std::int64_t>() < 0) {
        throw InputError("manifest line " + std::to_string(line_no) +
                         ": frame_count must be a non-negative integer");
      }
      r.frame_count = it->get<std::int64_t>();
    }
    manifest.push_back(std::move(r));
  }
  validate_manifest(manifest);
  return manifest;
}

void validate_manifest(const Manifest& manifest) {
  if (manifest.empty()) throw InputError("manifest is empty");
  std::set<std::string> ids;
  for (const SequenceRecord& r : manifest) {
    if (!ids.insert(r.id).second) throw InputError("duplicate sequence id '" + r.id + "'");
    if (r.verb.empty() || r.noun.empty()) {
      throw InputError("sequence '" + r.id + "' has an empty verb or noun");
    }
  }
}

std::vector<std::string> distinct_nouns(const Manifest& manifest) {
  std::set<std::string> nouns;
  for (const SequenceRecord& r : manifest) nouns.insert(r.noun);
  return {nouns.begin(), nouns.end()};
}

std::vector<Fold> make_s1(const Manifest& manifest,
                          const std::optional<std::vector<std::string>>& only) {
  validate_manifest(manifest);
  const auto nouns = distinct_nouns(manifest);
  if (nouns.size() < 2) throw AlgorithmError("cannot compose split: fewer than two nouns");
  std::vector<std::string> selected = nouns;
  if (only) {
    for (const auto& n : *only) {
      if (!std::binary_search(nouns.begin(), nouns.end(), n)) {
        throw InputError("unknown noun '" + n + "'");
      }
    }
    selected = *only;
    std::sort(selected.begin(), selected.end());
    selected.erase(std::unique(selected.begin(), selected.end()), selected.end());
  }
  std::vector<Fold> folds;
  for (const auto& noun : selected) folds.push_back(build_fold(manifest, noun, {noun}));
  return folds;
}

std::vector<Fold> make_s2(const Manifest& manifest, const std::vector<NounPair>& pairs) {
  validate_manifest(manifest);
  const auto nouns = distinct_nouns(manifest);
  if (nouns.size() < 3) throw AlgorithmError("cannot compose split: fewer than three nouns");
  std::vector<Fold> folds;
  for (const auto& [a, b] : pairs) {
    for (const auto* n : {&a, &b}) {
      if (!std::binary_search(nouns.begin(), nouns.end(), *n)) {
        throw InputError("unknown noun '" + *n + "'");
      }
    }
    if (a == b) throw InputError("pair holds the same noun twice: '" + a + "'");
    folds.push_back(build_fold(manifest, a + "+" + b, {a, b}));
  }
  return folds;
}

std::vector<Fold> make_s2(const Manifest& manifest, std::uint64_t seed, std::size_t count) {
  validate_manifest(manifest);
  const auto nouns = distinct_nouns(manifest);
  if (nouns.size() < 3) throw AlgorithmError("cannot compose split: fewer than three nouns");
  std::vector<NounPair> all;
  for (std::size_t i = 0; i < nouns.size(); ++i) {
    for (std::size_t j = i + 1; j < nouns.size(); ++j) all.emplace_back(nouns[i], nouns[j]);
  }
  const std::size_t draws = std::min(count, all.size());
  Rng rng(seed);
  for (std::size_t i = 0; i < draws; ++i) {
    std::swap(all[i], all[i + rng.below(all.size() - i)]);
  }
  all.resize(draws);
  return make_s2(manifest, all);
}

Labels labels_from_manifest(const Manifest& manifest) {
  Labels labels;
  for (const SequenceRecord& r : manifest) labels[r.id] = r.action_label();
  return labels;
}

ScoreSummary score_folds(const std::vector<Fold>& folds, const Predictions& predictions,
                         const Labels& labels) {
  if (folds.empty()) throw ContractError("no folds to score");
  std::set<std::string> fold_names;
  for (const Fold& f : folds) fold_names.insert(f.name);
  for (const auto& [name, _] : predictions) {
    if (!fold_names.count(name)) throw InputError("predictions for unknown fold '" + name + "'");
  }

  ScoreSummary summary;
  for (const Fold& fold : folds) {
    auto it = predictions.find(fold.name);
    static const std::map<std::string, std::string> kEmpty;
    const auto& predicted = it == predictions.end() ? kEmpty : it->second;
    const std::set<std::string> expected(fold.test_ids.begin(), fold.test_ids.end());
    std::vector<std::string> missing, extra;
    for (const auto& id : fold.test_ids) {
      if (!predicted.count(id)) missing.push_back(id);
    }
    for (const auto& [id, _] : predicted) {
      if (!expected.count(id)) extra.push_back(id);
    }
    if (!missing.empty() || !extra.empty()) {
      std::string msg = "fold '" + fold.name + "':";
      if (!missing.empty()) msg += " missing predictions for [" + join(missing) + "]";
      if (!extra.empty()) msg += " unexpected predictions for [" + join(extra) + "]";
      throw InputError(msg);
    }
    if (fold.test_ids.empty()) throw ContractError("fold '" + fold.name + "' has no test ids");
    std::size_t correct = 0;
    for (const auto& id : fold.test_ids) {
      auto label = labels.find(id);
      if (label == labels.end()) throw InputError("no ground-truth label for '" + id + "'");
      if (predicted.at(id) == label->second) ++correct;
    }
    summary.per_fold.emplace_back(
        fold.name, static_cast<double>(correct) / static_cast<double>(fold.test_ids.size()));
  }
  const double n = static_cast<double>(summary.per_fold.size());
  double sum = 0;
  for (const auto& [_, v] : summary.per_fold) sum += v;
  summary.mean = sum / n;
  double ss = 0;
  for (const auto& [_, v] : summary.per_fold) ss += (v - summary.mean) * (v - summary.mean);
  summary.std = std::sqrt(ss / n);
  return summary;
}

std::string folds_to_json(const std::vector<Fold>& folds) {
  json arr = json::array();
  for (const Fold& f : folds) {
    arr.push_back({{"name", f.name},
                   {"held_out", f.held_out},
                   {"train_ids", f.train_ids},
                   {"test_ids", f.test_ids}});
  }
  return json{{"folds", arr}}.dump(2) + "\n";
}

std::vector<Fold> folds_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    std::vector<Fold> folds;
    for (const json& f : doc.at("folds")) {
      folds.push_back({f.at("name").get<std::string>(),
                       f.at("held_out").get<std::vector<std::string>>(),
                       f.at("train_ids").get<std::vector<std::string>>(),
                       f.at("test_ids").get<std::vector<std::string>>()});
    }
    return folds;
  } catch (const json::exception& e) {
    throw InputError(std::string("invalid folds file: ") + e.what());
  }
}

Predictions parse_predictions(std::istream& in) {
  Predictions predictions;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json obj = json::parse(line);
      const auto fold = obj.at("fold").get<std::string>();
      const auto id = obj.at("id").get<std::string>();
      const auto label = obj.at("label").get<std::string>();
      if (!predictions[fold].emplace(id, label).second) {
        throw InputError("predictions line " + std::to_string(line_no) +
                         ": duplicate prediction for '" + id + "' in fold '" + fold + "'");
      }
    } catch (const json::exception& e) {
      throw InputError("predictions line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return predictions;
}

std::string summary_to_json(const ScoreSummary& summary) {
  json per_fold = json::array();
  for (const auto& [name, value] : summary.per_fold) {
    per_fold.push_back({{"fold", name}, {"accuracy", value}});
  }
  return json{{"per_fold", per_fold}, {"mean", summary.mean}, {"std", summary.std}}.dump(2) +
         "\n";
}

}  // namespace sqkit
