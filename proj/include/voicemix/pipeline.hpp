// include/voicemix/pipeline.hpp

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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "voicemix/backend.hpp"
#include "voicemix/baseline.hpp"
#include "voicemix/manifest.hpp"
#include "voicemix/mixup.hpp"

namespace voicemix {

inline constexpr double kMaxFailureRate = 0.05;
inline constexpr const char* kStoreIndexName = "index.jsonl";

struct StoreEntry {
  std::string utt_id;
  std::string speaker_id;
  std::string file;  // relative to the store directory
};

/// A directory of <utt_id>.timb files plus index.jsonl. All timbres are
/// read when the store is opened.
class TimbreStore {
 public:
  /// Throws kMissingFile, kSchemaViolation or kStoreCorrupt.
  static TimbreStore open(const std::filesystem::path& dir);

  const std::filesystem::path& dir() const { return dir_; }
  const std::vector<StoreEntry>& entries() const { return entries_; }
  CorpusIndex corpus() const;
  bool contains(const std::string& utt_id) const;
  /// Throws kInvalidArgument for unknown ids.
  const TimbreVector& timbre(const std::string& utt_id) const;
  TimbreLookup lookup() const;

 private:
  std::filesystem::path dir_;
  std::vector<StoreEntry> entries_;  // sorted by utt_id
  std::vector<TimbreVector> timbres_;
};

struct StoreBuildReport {
  std::size_t total = 0;
  std::size_t written = 0;
  std::size_t reused = 0;
  std::vector<std::string> failures;  // "<utt_id>: <reason>"

  Json to_json() const;
};

/// One timbre per manifest utterance, extracted after denoising. Existing
/// files are validated and left untouched, and the index is rewritten only
/// when its content changes. Throws kStoreCorrupt for an existing file that
/// fails to load and kFailureRateExceeded when more than `max_failure_rate`
/// of the utterances fail.
StoreBuildReport build_timbre_store(const std::filesystem::path& manifest,
                                    const CodecBackend& backend,
                                    const std::filesystem::path& store_dir, int workers = 1,
                                    double max_failure_rate = kMaxFailureRate);

enum class AugmentMethod { kMixup, kWaveform, kSpecAugment, kVoiceConversion };

std::string_view to_string(AugmentMethod method);
/// Throws kInvalidArgument.
AugmentMethod parse_method(std::string_view name);

struct RunConfig {
  std::optional<std::uint64_t> seed;
  double ratio = 0.33;
  AugmentMethod method = AugmentMethod::kMixup;
  MixupConfig mixup;
  WaveformAugConfig waveform;
  SpecAugConfig specaugment;
  CodecBackend backend;
  int workers = 1;
  std::filesystem::path output_dir;
  std::filesystem::path store_dir;
  double max_failure_rate = kMaxFailureRate;

  /// Throws kInvalidArgument for out-of-range values and for ablation flags
  /// that do not apply to the chosen method.
  void validate() const;

  /// Machine name and human label of the ablation variant, e.g.
  /// ("proposed_mixup", "Proposed Mixup").
  std::pair<std::string, std::string> preset() const;

  Json to_json() const;
  /// Missing keys keep their defaults; unknown keys throw kSchemaViolation.
  static RunConfig from_json(const Json& j);
};

/// Deterministic part of one synthetic output.
struct PlannedJob {
  std::size_t index = 0;         // output index j
  std::size_t source = 0;        // position in the input manifest
  PartnerSelection selection;    // mixup and voice conversion only
  MixDraw draw;
};

/// Output j is drawn from the original at position j mod N of the
/// utt_id-sorted list, with all randomness from derive_rng(seed, j).
std::vector<std::size_t> allocate_outputs(const std::vector<ManifestEntry>& originals,
                                          double ratio);

/// Partner selection and mixing coefficients for every output, without
/// synthesis. Throws kInsufficientSpeakers.
std::vector<PlannedJob> plan_augmentation(const std::vector<ManifestEntry>& originals,
                                          const CorpusIndex& corpus, const RunConfig& config);

/// The record a planned mixup or conversion job will carry.
AugmentationRecord planned_record(const PlannedJob& job, const RunConfig& config);

struct RunSummary {
  std::size_t originals = 0;
  std::size_t planned = 0;
  std::size_t emitted = 0;
  std::vector<std::string> failures;
  std::filesystem::path manifest;

  Json to_json() const;
};

/// Writes <output_dir>/manifest.jsonl (originals with absolute paths, then
/// synthetic entries in output order with paths relative to the manifest),
/// audio/, features/, timbres/ and run_metadata.json. Output bytes do not
/// depend on the worker count. Throws kFailureRateExceeded after writing
/// when too many outputs fail.
RunSummary run_augmentation(const std::filesystem::path& manifest, const RunConfig& config);

/// Mixed timbres recomputed in double precision from each mixup or
/// conversion record and the stored parents, one row per record. Other
/// methods are skipped.
Eigen::MatrixXd constructed_timbres(const std::vector<AugmentationRecord>& records,
                                    const TimbreStore& store);

/// Git blob id ("blob <size>\0" + bytes, SHA-1) of a file.
std::string git_blob_hash(const std::filesystem::path& path);

}  // namespace voicemix
