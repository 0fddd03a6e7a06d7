// Copyright 2026 The sqkit Authors
// SPDX-License-Identifier: Apache-2.0

// Compositional train/test splits over sequence manifests.
//
// S1 holds out one object category (noun) per fold, S2 holds out a pair. Every
// sequence whose noun is held out goes to test, everything else to train, so
// no verb-noun combination of the test set is ever seen during training.

#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sqkit {

struct SequenceRecord {
  std::string id;
  std::string subject;
  std::string verb;
  std::string noun;
  std::string path;
  std::optional<std::int64_t> frame_count;

  // Ground-truth action label used for scoring: "<verb> <noun>".
  std::string action_label() const { return verb + " " + noun; }
};

using Manifest = std::vector<SequenceRecord>;

struct Fold {
  std::string name;
  std::vector<std::string> held_out;
  std::vector<std::string> train_ids;  // manifest order
  std::vector<std::string> test_ids;   // manifest order
};

struct ScoreSummary {
  std::vector<std::pair<std::string, double>> per_fold;
  double mean = 0;
  double std = 0;  // population standard deviation
};

using NounPair = std::pair<std::string, std::string>;
// fold name -> (sequence id -> predicted action label)
using Predictions = std::map<std::string, std::map<std::string, std::string>>;
// sequence id -> true action label
using Labels = std::map<std::string, std::string>;

// JSON-lines, one record per line; blank lines are skipped.
Manifest parse_manifest(std::istream& in);
void validate_manifest(const Manifest& manifest);

// Distinct nouns in lexicographic order.
std::vector<std::string> distinct_nouns(const Manifest& manifest);

// One fold per noun, in lexicographic order. `only` restricts the folds to a
// subset of the nouns (all still count as categories of the manifest).
std::vector<Fold> make_s1(const Manifest& manifest,
                          const std::optional<std::vector<std::string>>& only = std::nullopt);

// One fold per explicit pair, order preserved.
std::vector<Fold> make_s2(const Manifest& manifest, const std::vector<NounPair>& pairs);

// `count` distinct unordered pairs drawn with the given seed (fewer if the
// manifest does not have that many).
std::vector<Fold> make_s2(const Manifest& manifest, std::uint64_t seed,
                          std::size_t count = 8);

Labels labels_from_manifest(const Manifest& manifest);

ScoreSummary score_folds(const std::vector<Fold>& folds, const Predictions& predictions,
                         const Labels& labels);

std::string folds_to_json(const std::vector<Fold>& folds);
std::vector<Fold> folds_from_json(const std::string& text);
// JSON-lines of {"fold", "id", "label"}.
Predictions parse_predictions(std::istream& in);
std::string summary_to_json(const ScoreSummary& summary);

}  // namespace sqkit
