// include/voicemix/manifest.hpp

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
#include <vector>

#include "json.hpp"

namespace voicemix {

using Json = nlohmann::ordered_json;

/// Provenance attached to every synthetic utterance. Mixup records carry
/// either `lambda` (two-way) or `weights` (three-way); voice conversion
/// records carry lambda = 1 and no mixup partners.
struct AugmentationRecord {
  std::string method;
  std::optional<double> lambda;
  std::vector<double> weights;
  std::string source_utt_id;
  std::string source_speaker;
  std::string target_utt_id;
  std::string target_speaker;
  std::vector<std::string> mixup_utt_ids;
  std::vector<std::string> mixup_speakers;
  bool source_equals_target = false;
  bool post_denoise = false;
  Json params = Json::object();  // method-specific drawn parameters

  Json to_json() const;
  static AugmentationRecord from_json(const Json& j);
};

/// Speaker constraints a record must satisfy; empty when it is clean.
std::vector<std::string> audit_record(const AugmentationRecord& record);

/// One JSON Lines row. Exactly one of audio_filepath / features_filepath is
/// set. Unknown keys survive a read/write cycle through `extra`.
struct ManifestEntry {
  std::string audio_filepath;
  std::string features_filepath;
  std::string text;
  std::string speaker_id;
  std::string language;
  std::optional<double> duration;
  std::string utt_id;
  std::optional<std::string> source_utt_id;
  std::optional<AugmentationRecord> augmentation;
  Json extra = Json::object();

  const std::string& path() const {
    return audio_filepath.empty() ? features_filepath : audio_filepath;
  }

  Json to_json() const;
  /// Throws kSchemaViolation naming the offending field.
  static ManifestEntry from_json(const Json& j);
};

/// 16 hex digits of FNV-1a-64 over the bytes of `relative_path`.
std::string stable_utt_id(const std::string& relative_path);

/// Reads a JSON Lines manifest, skipping blank lines. Missing utt_ids are
/// derived from the path as written. Throws kMissingFile or
/// kSchemaViolation ("line N: ...").
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

/// One compact JSON object per line, keys in declaration order.
std::string manifest_line(const ManifestEntry& entry);
void write_manifest(const std::vector<ManifestEntry>& entries,
                    const std::filesystem::path& path);

/// Relative paths are taken relative to the manifest's directory.
std::filesystem::path resolve_entry_path(const std::filesystem::path& manifest,
                                         const std::string& entry_path);

struct ManifestIssue {
  std::size_t line = 0;  // 1-based; 0 for file-level issues
  std::string field;
  std::string message;
};

struct ValidationReport {
  std::size_t num_entries = 0;
  std::vector<ManifestIssue> issues;

  bool ok() const { return issues.empty(); }
  Json to_json() const;
};

inline constexpr double kDurationTolerance = 0.05;

/// Schema, path existence, duration agreement, duplicate ids, provenance
/// resolution, inherited transcripts and record constraints.
ValidationReport validate_manifest(const std::filesystem::path& path);

}  // namespace voicemix
