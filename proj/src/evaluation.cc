// src/evaluation.cc

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

#include "voicemix/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "voicemix/audio.hpp"
#include "voicemix/dsp.hpp"
#include "voicemix/errors.hpp"

namespace voicemix {

namespace {

namespace fs = std::filesystem;

std::vector<Json> read_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kMissingFile, path.string());
  std::vector<Json> rows;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(Json::parse(line));
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorKind::kSchemaViolation,
                  path.string() + " line " + std::to_string(n) + ": invalid JSON");
    }
  }
  return rows;
}

std::string words_of(const Json& row, const fs::path& path) {
  for (const char* key : {"text", "reference", "hypothesis"}) {
    if (row.contains(key) && row[key].is_string()) return row[key].get<std::string>();
  }
  throw Error(ErrorKind::kSchemaViolation, path.string() + ": row without words");
}

}  // namespace

double WerBreakdown::wer() const {
  return reference_words == 0
             ? 0.0
             : static_cast<double>(errors()) / static_cast<double>(reference_words);
}

WerBreakdown& WerBreakdown::operator+=(const WerBreakdown& other) {
  substitutions += other.substitutions;
  deletions += other.deletions;
  insertions += other.insertions;
  reference_words += other.reference_words;
  return *this;
}

Json WerBreakdown::to_json() const {
  return {{"substitutions", substitutions}, {"deletions", deletions},
          {"insertions", insertions},       {"reference_words", reference_words},
          {"wer", wer()}};
}

std::vector<std::string> tokenize(std::string_view text, const TextNormalization& norm) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      if (!cur.empty()) tokens.push_back(std::move(cur));
      cur.clear();
      continue;
    }
    if (c < 0x80 && norm.strip_punctuation && std::ispunct(c)) continue;
    cur += (c < 0x80 && norm.lowercase) ? static_cast<char>(std::tolower(c)) : ch;
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

WerBreakdown align_words(const std::vector<std::string>& ref,
                         const std::vector<std::string>& hyp) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  std::vector<std::size_t> d((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return d[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = at(i - 1, j - 1) + (ref[i - 1] != hyp[j - 1]);
      at(i, j) = std::min({diag, at(i, j - 1) + 1, at(i - 1, j) + 1});
    }
  }

  WerBreakdown out;
  out.reference_words = n;
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && at(i, j) == at(i - 1, j - 1) + (ref[i - 1] != hyp[j - 1])) {
      out.substitutions += ref[i - 1] != hyp[j - 1];
      --i;
      --j;
    } else if (j > 0 && at(i, j) == at(i, j - 1) + 1) {
      ++out.insertions;
      --j;
    } else {
      ++out.deletions;
      --i;
    }
  }
  return out;
}

WerBreakdown wer(std::string_view reference, std::string_view hypothesis,
                 const TextNormalization& norm) {
  const auto ref = tokenize(reference, norm);
  if (ref.empty()) throw Error(ErrorKind::kEmptyReference, "reference has no words");
  return align_words(ref, tokenize(hypothesis, norm));
}

WerBreakdown corpus_wer(const std::vector<WerPair>& pairs, const TextNormalization& norm) {
  if (pairs.empty()) throw Error(ErrorKind::kEmptyCorpus, "no reference/hypothesis pairs");
  WerBreakdown total;
  for (const auto& p : pairs) {
    total += align_words(tokenize(p.reference, norm), tokenize(p.hypothesis, norm));
  }
  if (total.reference_words == 0) {
    throw Error(ErrorKind::kEmptyReference, "every reference is empty");
  }
  return total;
}

std::vector<WerPair> read_pairs(const fs::path& path) {
  std::vector<WerPair> pairs;
  for (const auto& row : read_jsonl(path)) {
    if (!row.is_object() || !row.contains("reference") || !row["reference"].is_string() ||
        !row.contains("hypothesis") || !row["hypothesis"].is_string()) {
      throw Error(ErrorKind::kSchemaViolation,
                  path.string() + ": pair " + std::to_string(pairs.size() + 1) +
                      " needs string reference and hypothesis");
    }
    pairs.push_back({row.value("utt_id", ""), row["reference"].get<std::string>(),
                     row["hypothesis"].get<std::string>()});
  }
  return pairs;
}

std::vector<WerPair> join_pairs(const fs::path& refs, const fs::path& hyps) {
  std::map<std::string, std::string> hyp_by_id;
  for (const auto& row : read_jsonl(hyps)) {
    if (!row.contains("utt_id")) {
      throw Error(ErrorKind::kSchemaViolation, hyps.string() + ": row without utt_id");
    }
    hyp_by_id[row["utt_id"].get<std::string>()] = words_of(row, hyps);
  }
  std::vector<WerPair> pairs;
  for (const auto& row : read_jsonl(refs)) {
    if (!row.contains("utt_id")) {
      throw Error(ErrorKind::kSchemaViolation, refs.string() + ": row without utt_id");
    }
    const std::string id = row["utt_id"].get<std::string>();
    auto it = hyp_by_id.find(id);
    pairs.push_back({id, words_of(row, refs), it == hyp_by_id.end() ? "" : it->second});
  }
  return pairs;
}

Json GapReport::to_json() const {
  return {{"wer_low", wer_low}, {"wer_high", wer_high}, {"gap", gap}};
}

GapReport gap_from_rates(double wer_low, double wer_high) {
  return {wer_low, wer_high, wer_low - wer_high};
}

GapReport gap(const std::vector<WerPair>& low, const std::vector<WerPair>& high,
              const TextNormalization& norm) {
  return gap_from_rates(corpus_wer(low, norm).wer(), corpus_wer(high, norm).wer());
}

double dtw_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                    double band_fraction) {
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.rows();
  if (a.cols() != b.cols()) {
    throw Error(ErrorKind::kDimensionMismatch, "DTW feature widths differ");
  }
  if (n == 0 || m == 0) {
    throw Error(ErrorKind::kInvalidArgument, "DTW needs non-empty sequences");
  }
  const auto band = std::max<Eigen::Index>(
      static_cast<Eigen::Index>(std::ceil(band_fraction * static_cast<double>(std::max(n, m)))),
      std::abs(n - m));
  constexpr double kInf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Constant(n + 1, m + 1, kInf);
  acc(0, 0) = 0.0;
  for (Eigen::Index i = 1; i <= n; ++i) {
    const Eigen::Index lo = std::max<Eigen::Index>(1, i - band);
    const Eigen::Index hi = std::min<Eigen::Index>(m, i + band);
    for (Eigen::Index j = lo; j <= hi; ++j) {
      const double cost = (a.row(i - 1) - b.row(j - 1)).norm();
      acc(i, j) = cost + std::min({acc(i - 1, j - 1), acc(i - 1, j), acc(i, j - 1)});
    }
  }
  return acc(n, m) / static_cast<double>(n + m);
}

Json ProxyResult::to_json() const {
  return {{"accuracy", accuracy()}, {"correct", correct}, {"total", total}, {"folds", folds}};
}

ProxyResult proxy_eval(const std::vector<ProxyItem>& originals,
                       const std::vector<ProxyItem>& augmented) {
  std::set<std::string> speakers;
  std::set<std::string> labels;
  for (const auto& it : originals) {
    speakers.insert(it.speaker);
    labels.insert(it.label);
  }
  if (speakers.size() < 2) {
    throw Error(ErrorKind::kInsufficientSpeakers,
                "leave-one-speaker-out needs at least 2 speakers");
  }
  if (labels.size() < 2) {
    throw Error(ErrorKind::kInsufficientClasses, "need at least 2 word classes");
  }

  ProxyResult result;
  for (const auto& held_out : speakers) {
    std::vector<const ProxyItem*> pool;
    for (const auto& it : originals) {
      if (it.speaker != held_out) pool.push_back(&it);
    }
    for (const auto& it : augmented) {
      if (it.speaker != held_out) pool.push_back(&it);
    }
    ++result.folds;
    for (const auto& test : originals) {
      if (test.speaker != held_out) continue;
      double best = std::numeric_limits<double>::infinity();
      const ProxyItem* nearest = nullptr;
      for (const ProxyItem* cand : pool) {
        const double d = dtw_distance(test.features, cand->features);
        if (d < best) {
          best = d;
          nearest = cand;
        }
      }
      ++result.total;
      if (nearest != nullptr && nearest->label == test.label) ++result.correct;
    }
  }
  return result;
}

ProxyCorpus proxy_items_from_manifest(const fs::path& manifest) {
  ProxyCorpus corpus;
  for (const auto& e : read_manifest(manifest)) {
    if (e.audio_filepath.empty()) continue;
    ProxyItem item;
    item.label = e.extra.contains("word") && e.extra["word"].is_string()
                     ? e.extra["word"].get<std::string>()
                     : e.text;
    item.speaker = e.augmentation ? e.augmentation->source_speaker : e.speaker_id;
    item.features = mfcc(load_canonical(resolve_entry_path(manifest, e.audio_filepath)));
    (e.augmentation ? corpus.augmented : corpus.originals).push_back(std::move(item));
  }
  return corpus;
}

}  // namespace voicemix
