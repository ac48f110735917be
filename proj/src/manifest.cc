// src/manifest.cc

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

#include "voicemix/manifest.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <unordered_map>

#include "voicemix/audio.hpp"
#include "voicemix/errors.hpp"

namespace voicemix {

namespace {

namespace fs = std::filesystem;

constexpr double kSimplexTolerance = 1e-9;

bool is_synthesis(const std::string& method) {
  return method == "mixup" || method == "voice_conversion";
}

// Returns the first schema problem as (field, message), or nullopt.
std::optional<std::pair<std::string, std::string>> schema_problem(const Json& j) {
  if (!j.is_object()) return std::pair<std::string, std::string>{"", "not a JSON object"};
  auto need_string = [&](const char* key, bool required, bool non_empty)
      -> std::optional<std::pair<std::string, std::string>> {
    if (!j.contains(key)) {
      if (required) return std::pair<std::string, std::string>{key, "missing"};
      return std::nullopt;
    }
    if (!j[key].is_string()) return std::pair<std::string, std::string>{key, "not a string"};
    if (non_empty && j[key].get_ref<const std::string&>().empty()) {
      return std::pair<std::string, std::string>{key, "empty"};
    }
    return std::nullopt;
  };
  if (auto p = need_string("text", true, true)) return p;
  if (auto p = need_string("speaker_id", true, true)) return p;
  if (auto p = need_string("language", false, false)) return p;
  if (auto p = need_string("utt_id", false, true)) return p;
  if (auto p = need_string("source_utt_id", false, true)) return p;
  const bool has_audio = j.contains("audio_filepath");
  const bool has_feat = j.contains("features_filepath");
  if (has_audio == has_feat) {
    return std::pair<std::string, std::string>{
        "audio_filepath", "exactly one of audio_filepath, features_filepath required"};
  }
  if (auto p = need_string(has_audio ? "audio_filepath" : "features_filepath", true, true)) {
    return p;
  }
  if (j.contains("duration")) {
    const Json& d = j["duration"];
    if (!d.is_number() || !(d.get<double>() > 0.0) || !std::isfinite(d.get<double>())) {
      return std::pair<std::string, std::string>{"duration", "must be a positive number"};
    }
  }
  if (j.contains("augmentation") && !j["augmentation"].is_object()) {
    return std::pair<std::string, std::string>{"augmentation", "not a JSON object"};
  }
  return std::nullopt;
}

std::vector<std::string> string_list(const Json& j, const char* key) {
  std::vector<std::string> out;
  if (j.contains(key)) {
    for (const auto& v : j.at(key)) out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

Json AugmentationRecord::to_json() const {
  Json j;
  j["method"] = method;
  if (lambda) j["lambda"] = *lambda;
  if (!weights.empty()) j["weights"] = weights;
  j["source_utt_id"] = source_utt_id;
  j["source_speaker"] = source_speaker;
  if (!target_utt_id.empty()) j["target_utt_id"] = target_utt_id;
  if (!target_speaker.empty()) j["target_speaker"] = target_speaker;
  if (!mixup_utt_ids.empty()) j["mixup_utt_ids"] = mixup_utt_ids;
  if (!mixup_speakers.empty()) j["mixup_speakers"] = mixup_speakers;
  if (is_synthesis(method)) {
    j["source_equals_target"] = source_equals_target;
    j["post_denoise"] = post_denoise;
  }
  if (!params.empty()) j["params"] = params;
  return j;
}

AugmentationRecord AugmentationRecord::from_json(const Json& j) {
  AugmentationRecord r;
  try {
    r.method = j.at("method").get<std::string>();
    if (j.contains("lambda")) r.lambda = j["lambda"].get<double>();
    if (j.contains("weights")) r.weights = j["weights"].get<std::vector<double>>();
    r.source_utt_id = j.value("source_utt_id", "");
    r.source_speaker = j.value("source_speaker", "");
    r.target_utt_id = j.value("target_utt_id", "");
    r.target_speaker = j.value("target_speaker", "");
    r.mixup_utt_ids = string_list(j, "mixup_utt_ids");
    r.mixup_speakers = string_list(j, "mixup_speakers");
    r.source_equals_target = j.value("source_equals_target", false);
    r.post_denoise = j.value("post_denoise", false);
    if (j.contains("params")) r.params = j["params"];
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchemaViolation, std::string("augmentation: ") + e.what());
  }
  return r;
}

std::vector<std::string> audit_record(const AugmentationRecord& r) {
  std::vector<std::string> problems;
  if (r.method.empty()) problems.push_back("method is empty");
  if (!is_synthesis(r.method)) return problems;

  if (r.source_speaker.empty()) problems.push_back("source speaker missing");
  if (r.target_speaker.empty()) problems.push_back("target speaker missing");
  if (r.source_equals_target) {
    if (r.target_speaker != r.source_speaker) {
      problems.push_back("source_equals_target but target speaker differs");
    }
  } else if (r.target_speaker == r.source_speaker) {
    problems.push_back("target speaker equals source speaker");
  }
  if (r.mixup_speakers.size() != r.mixup_utt_ids.size()) {
    problems.push_back("mixup utterance and speaker lists differ in length");
  }
  std::set<std::string> seen{r.source_speaker, r.target_speaker};
  for (const auto& s : r.mixup_speakers) {
    if (!seen.insert(s).second) {
      problems.push_back("mixup speaker " + s + " is not distinct");
    }
  }

  const std::size_t partners = r.mixup_speakers.size();
  if (r.method == "voice_conversion") {
    if (partners != 0) problems.push_back("voice conversion has mixup partners");
    if (!r.lambda || *r.lambda != 1.0) problems.push_back("voice conversion needs lambda 1");
    return problems;
  }
  if (partners == 1) {
    if (!r.lambda || !(*r.lambda >= 0.0 && *r.lambda <= 1.0)) {
      problems.push_back("lambda missing or outside [0, 1]");
    }
  } else if (partners == 2) {
    double sum = 0.0;
    bool nonneg = r.weights.size() == 3;
    for (double w : r.weights) {
      nonneg = nonneg && w >= 0.0;
      sum += w;
    }
    if (!nonneg || std::abs(sum - 1.0) > kSimplexTolerance) {
      problems.push_back("weights are not a 3-simplex point");
    }
  } else {
    problems.push_back("mixup needs one or two partners");
  }
  return problems;
}

Json ManifestEntry::to_json() const {
  Json j;
  if (!audio_filepath.empty()) j["audio_filepath"] = audio_filepath;
  if (!features_filepath.empty()) j["features_filepath"] = features_filepath;
  j["text"] = text;
  j["speaker_id"] = speaker_id;
  j["language"] = language;
  if (duration) j["duration"] = *duration;
  j["utt_id"] = utt_id;
  if (source_utt_id) j["source_utt_id"] = *source_utt_id;
  if (augmentation) j["augmentation"] = augmentation->to_json();
  for (const auto& [k, v] : extra.items()) j[k] = v;
  return j;
}

ManifestEntry ManifestEntry::from_json(const Json& j) {
  if (auto problem = schema_problem(j)) {
    throw Error(ErrorKind::kSchemaViolation, problem->first + ": " + problem->second);
  }
  static const std::set<std::string> known = {
      "audio_filepath", "features_filepath", "text", "speaker_id", "language",
      "duration", "utt_id", "source_utt_id", "augmentation"};
  ManifestEntry e;
  e.audio_filepath = j.value("audio_filepath", "");
  e.features_filepath = j.value("features_filepath", "");
  e.text = j["text"].get<std::string>();
  e.speaker_id = j["speaker_id"].get<std::string>();
  e.language = j.value("language", "");
  if (j.contains("duration")) e.duration = j["duration"].get<double>();
  e.utt_id = j.contains("utt_id") ? j["utt_id"].get<std::string>()
                                  : stable_utt_id(e.path());
  if (j.contains("source_utt_id")) e.source_utt_id = j["source_utt_id"].get<std::string>();
  if (j.contains("augmentation")) {
    e.augmentation = AugmentationRecord::from_json(j["augmentation"]);
  }
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) e.extra[k] = v;
  }
  return e;
}

std::string stable_utt_id(const std::string& relative_path) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : relative_path) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kMissingFile, path.string());
  std::vector<ManifestEntry> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(ManifestEntry::from_json(Json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kSchemaViolation,
                  "line " + std::to_string(n) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorKind::kSchemaViolation,
                  "line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::string manifest_line(const ManifestEntry& entry) { return entry.to_json().dump(); }

void write_manifest(const std::vector<ManifestEntry>& entries, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::kUnwritablePath, path.string());
  for (const auto& e : entries) out << manifest_line(e) << '\n';
  if (!out) throw Error(ErrorKind::kUnwritablePath, path.string());
}

fs::path resolve_entry_path(const fs::path& manifest, const std::string& entry_path) {
  const fs::path p(entry_path);
  if (p.is_absolute()) return p;
  return manifest.parent_path() / p;
}

Json ValidationReport::to_json() const {
  Json j;
  j["entries"] = num_entries;
  j["ok"] = ok();
  Json list = Json::array();
  for (const auto& issue : issues) {
    list.push_back({{"line", issue.line}, {"field", issue.field}, {"message", issue.message}});
  }
  j["issues"] = std::move(list);
  return j;
}

ValidationReport validate_manifest(const fs::path& path) {
  ValidationReport report;
  std::ifstream in(path);
  if (!in) {
    report.issues.push_back({0, "", "cannot open " + path.string()});
    return report;
  }

  struct Row {
    std::size_t line;
    ManifestEntry entry;
  };
  std::vector<Row> rows;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++report.num_entries;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::exception&) {
      report.issues.push_back({n, "", "invalid JSON"});
      continue;
    }
    if (auto problem = schema_problem(j)) {
      report.issues.push_back({n, problem->first, problem->second});
      continue;
    }
    try {
      rows.push_back({n, ManifestEntry::from_json(j)});
    } catch (const Error& e) {
      report.issues.push_back({n, "augmentation", e.what()});
    }
  }

  std::unordered_map<std::string, const Row*> by_id;
  for (const auto& row : rows) {
    const ManifestEntry& e = row.entry;
    if (!by_id.emplace(e.utt_id, &row).second) {
      report.issues.push_back({row.line, "utt_id", "duplicate utt_id " + e.utt_id});
    }
    const fs::path file = resolve_entry_path(path, e.path());
    const char* path_field = e.audio_filepath.empty() ? "features_filepath" : "audio_filepath";
    if (!fs::exists(file)) {
      report.issues.push_back({row.line, path_field, "no such file " + file.string()});
    } else if (!e.audio_filepath.empty() && e.duration) {
      try {
        const double actual = read_wav_info(file).duration();
        if (std::abs(actual - *e.duration) > kDurationTolerance) {
          report.issues.push_back(
              {row.line, "duration",
               "duration mismatch: recorded " + std::to_string(*e.duration) +
                   " s, actual " + std::to_string(actual) + " s"});
        }
      } catch (const Error& err) {
        report.issues.push_back({row.line, path_field, err.what()});
      }
    }
    if (e.augmentation) {
      for (const auto& problem : audit_record(*e.augmentation)) {
        report.issues.push_back({row.line, "augmentation", problem});
      }
    }
  }

  for (const auto& row : rows) {
    const ManifestEntry& e = row.entry;
    if (!e.source_utt_id) continue;
    auto it = by_id.find(*e.source_utt_id);
    if (it == by_id.end()) {
      report.issues.push_back(
          {row.line, "source_utt_id", "unresolved source " + *e.source_utt_id});
    } else if (it->second->entry.text != e.text) {
      report.issues.push_back({row.line, "text", "differs from source transcript"});
    }
  }
  return report;
}

}  // namespace voicemix
