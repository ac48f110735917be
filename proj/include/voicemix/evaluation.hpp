// include/voicemix/evaluation.hpp

// Copyright 2026  The voicemix Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "voicemix/manifest.hpp"

namespace voicemix {

struct WerBreakdown {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t reference_words = 0;

  std::size_t errors() const { return substitutions + deletions + insertions; }
  /// (S + D + I) / N; 0 when N = 0.
  double wer() const;
  WerBreakdown& operator+=(const WerBreakdown& other);
  Json to_json() const;
};

struct TextNormalization {
  bool lowercase = true;
  bool strip_punctuation = false;
};

/// Whitespace tokenization after optional lowercasing (ASCII) and
/// punctuation removal. Non-ASCII bytes pass through untouched.
std::vector<std::string> tokenize(std::string_view text, const TextNormalization& norm = {});

/// Minimum edit alignment with unit costs. On ties the backtrace prefers
/// substitution, then insertion, then deletion.
WerBreakdown align_words(const std::vector<std::string>& reference,
                         const std::vector<std::string>& hypothesis);

/// Throws kEmptyReference when the normalized reference has no words.
WerBreakdown wer(std::string_view reference, std::string_view hypothesis,
                 const TextNormalization& norm = {});

struct WerPair {
  std::string utt_id;
  std::string reference;
  std::string hypothesis;
};

/// Pooled over all pairs: sum(S + D + I) / sum(N). Throws kEmptyCorpus or,
/// when every reference is empty, kEmptyReference.
WerBreakdown corpus_wer(const std::vector<WerPair>& pairs, const TextNormalization& norm = {});

/// JSON Lines with `reference`, `hypothesis` and optional `utt_id`.
std::vector<WerPair> read_pairs(const std::filesystem::path& path);

/// Joins two JSON Lines files on `utt_id`; each row carries its words in
/// `text`, `reference` or `hypothesis`. A reference without hypothesis
/// counts as an empty hypothesis. Throws kSchemaViolation.
std::vector<WerPair> join_pairs(const std::filesystem::path& refs,
                                const std::filesystem::path& hyps);

struct GapReport {
  double wer_low = 0.0;
  double wer_high = 0.0;
  double gap = 0.0;  // wer_low - wer_high

  Json to_json() const;
};

GapReport gap_from_rates(double wer_low, double wer_high);
GapReport gap(const std::vector<WerPair>& low, const std::vector<WerPair>& high,
              const TextNormalization& norm = {});

/// DTW over frame sequences (rows) with Euclidean local cost and a
/// Sakoe-Chiba band of `band_fraction` of the longer length (widened to the
/// length difference). Normalized by n + m.
double dtw_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                    double band_fraction = 0.1);

struct ProxyItem {
  std::string label;
  std::string speaker;         // speaker whose content the item carries
  Eigen::MatrixXd features;    // frames x coefficients
};

struct ProxyResult {
  std::size_t correct = 0;
  std::size_t total = 0;
  std::size_t folds = 0;

  double accuracy() const {
    return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
  }
  Json to_json() const;
};

/// Leave-one-speaker-out 1-NN word classification. Each fold tests one
/// speaker's originals against the other speakers' originals plus every
/// augmented item whose content does not come from the held-out speaker.
/// Ties go to the earliest pool item. Throws kInsufficientSpeakers or
/// kInsufficientClasses.
ProxyResult proxy_eval(const std::vector<ProxyItem>& originals,
                       const std::vector<ProxyItem>& augmented);

struct ProxyCorpus {
  std::vector<ProxyItem> originals;
  std::vector<ProxyItem> augmented;
};

/// MFCC items from a manifest, split by whether a row carries an
/// augmentation record. The label is the `word` field when present, else the
/// transcript; augmented rows take the record's source speaker. Feature-only
/// rows are skipped.
ProxyCorpus proxy_items_from_manifest(const std::filesystem::path& manifest);

}  // namespace voicemix
