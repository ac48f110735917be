// src/pipeline.cc

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

#include "voicemix/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include "voicemix/audio.hpp"
#include "voicemix/denoise.hpp"
#include "voicemix/errors.hpp"

namespace voicemix {

namespace {

namespace fs = std::filesystem;

std::string index_name(std::size_t j) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06zu", j);
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kMissingFile, path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kUnwritablePath, path.string());
  out << text;
  if (!out) throw Error(ErrorKind::kUnwritablePath, path.string());
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorKind::kUnwritablePath, dir.string() + ": " + ec.message());
  }
}

// Runs job(i) for i in [0, n) on `workers` threads and hands the results to
// consume(i, result) on the calling thread in index order.
template <typename Result, typename Job, typename Consume>
void run_ordered(std::size_t n, int workers, Job job, Consume consume) {
  std::vector<std::optional<Result>> slots(n);
  std::mutex mu;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      Result r = job(i);
      {
        std::lock_guard<std::mutex> lock(mu);
        slots[i] = std::move(r);
      }
      ready.notify_all();
    }
  };
  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(threads, n); ++t) pool.emplace_back(worker);
  for (std::size_t i = 0; i < n; ++i) {
    std::unique_lock<std::mutex> lock(mu);
    ready.wait(lock, [&] { return slots[i].has_value(); });
    Result r = std::move(*slots[i]);
    slots[i].reset();
    lock.unlock();
    consume(i, std::move(r));
  }
  for (auto& th : pool) th.join();
}

void check_failure_rate(std::size_t failed, std::size_t total, double limit,
                        const std::string& what) {
  if (total > 0 && static_cast<double>(failed) > limit * static_cast<double>(total)) {
    throw Error(ErrorKind::kFailureRateExceeded,
                std::to_string(failed) + " of " + std::to_string(total) + " " + what +
                    " failed");
  }
}

struct ScratchDir {
  fs::path path;
  explicit ScratchDir(fs::path p) : path(std::move(p)) {
    if (!path.empty()) make_dir(path);
  }
  ~ScratchDir() {
    std::error_code ec;
    if (!path.empty()) fs::remove_all(path, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
};

template <typename T>
void read_field(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void reject_unknown(const Json& j, std::initializer_list<const char*> keys,
                    const std::string& where) {
  std::set<std::string> known(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) {
      throw Error(ErrorKind::kSchemaViolation, where + ": unknown key \"" + k + "\"");
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Timbre store

TimbreStore TimbreStore::open(const fs::path& dir) {
  const fs::path index = dir / kStoreIndexName;
  std::ifstream in(index);
  if (!in) throw Error(ErrorKind::kMissingFile, index.string());
  TimbreStore store;
  store.dir_ = dir;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const Json j = Json::parse(line);
      store.entries_.push_back({j.at("utt_id").get<std::string>(),
                                j.at("speaker_id").get<std::string>(),
                                j.at("timbre").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kSchemaViolation,
                  index.string() + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  std::sort(store.entries_.begin(), store.entries_.end(),
            [](const StoreEntry& a, const StoreEntry& b) { return a.utt_id < b.utt_id; });
  for (const auto& e : store.entries_) {
    try {
      store.timbres_.push_back(load_timbre(dir / e.file));
    } catch (const Error& err) {
      throw Error(ErrorKind::kStoreCorrupt, err.what());
    }
  }
  return store;
}

CorpusIndex TimbreStore::corpus() const {
  std::vector<CorpusItem> items;
  for (const auto& e : entries_) items.push_back({e.utt_id, e.speaker_id});
  return CorpusIndex(std::move(items));
}

bool TimbreStore::contains(const std::string& utt_id) const {
  return std::binary_search(
      entries_.begin(), entries_.end(), StoreEntry{utt_id, "", ""},
      [](const StoreEntry& a, const StoreEntry& b) { return a.utt_id < b.utt_id; });
}

const TimbreVector& TimbreStore::timbre(const std::string& utt_id) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), utt_id,
      [](const StoreEntry& e, const std::string& id) { return e.utt_id < id; });
  if (it == entries_.end() || it->utt_id != utt_id) {
    throw Error(ErrorKind::kInvalidArgument, "no stored timbre for " + utt_id);
  }
  return timbres_[static_cast<std::size_t>(it - entries_.begin())];
}

TimbreLookup TimbreStore::lookup() const {
  return [this](const std::string& utt_id) { return timbre(utt_id); };
}

Json StoreBuildReport::to_json() const {
  return {{"total", total}, {"written", written}, {"reused", reused},
          {"failed", failures.size()}, {"failures", failures}};
}

StoreBuildReport build_timbre_store(const fs::path& manifest, const CodecBackend& backend,
                                    const fs::path& store_dir, int workers,
                                    double max_failure_rate) {
  const auto entries = read_manifest(manifest);
  std::set<std::string> ids;
  for (const auto& e : entries) {
    if (e.audio_filepath.empty()) {
      throw Error(ErrorKind::kSchemaViolation, e.utt_id + ": timbre store needs audio entries");
    }
    if (!ids.insert(e.utt_id).second) {
      throw Error(ErrorKind::kSchemaViolation, "duplicate utt_id " + e.utt_id);
    }
  }
  make_dir(store_dir);

  struct Outcome {
    enum { kWritten, kReused, kFailed, kCorrupt } status = kFailed;
    std::string message;
  };
  StoreBuildReport report;
  report.total = entries.size();
  std::vector<StoreEntry> index;
  std::optional<std::string> corrupt;

  run_ordered<Outcome>(
      entries.size(), workers,
      [&](std::size_t i) {
        const ManifestEntry& e = entries[i];
        const fs::path file = store_dir / (e.utt_id + ".timb");
        if (fs::exists(file)) {
          try {
            load_timbre(file);
            return Outcome{Outcome::kReused, ""};
          } catch (const Error& err) {
            return Outcome{Outcome::kCorrupt, err.what()};
          }
        }
        try {
          const AudioClip clean =
              denoise(load_canonical(resolve_entry_path(manifest, e.audio_filepath)));
          if (backend.is_reference()) {
            save_timbre(encode(clean).timbre, file);
          } else {
            ScratchDir scratch(store_dir / ".work" / e.utt_id);
            const fs::path wav = scratch.path / "in.wav";
            save_wav(clean, wav);
            const TimbreVector t =
                external_encode(backend, wav, scratch.path / "content.bin", scratch.path / "t.timb");
            save_timbre(t, file);
          }
          return Outcome{Outcome::kWritten, ""};
        } catch (const std::exception& err) {
          return Outcome{Outcome::kFailed, err.what()};
        }
      },
      [&](std::size_t i, Outcome&& o) {
        const ManifestEntry& e = entries[i];
        switch (o.status) {
          case Outcome::kWritten:
            ++report.written;
            break;
          case Outcome::kReused:
            ++report.reused;
            break;
          case Outcome::kCorrupt:
            if (!corrupt) corrupt = e.utt_id + ": " + o.message;
            return;
          case Outcome::kFailed:
            spdlog::warn("timbre extraction failed for {}: {}", e.utt_id, o.message);
            report.failures.push_back(e.utt_id + ": " + o.message);
            return;
        }
        index.push_back({e.utt_id, e.speaker_id, e.utt_id + ".timb"});
      });
  std::error_code ec;
  fs::remove(store_dir / ".work", ec);
  if (corrupt) throw Error(ErrorKind::kStoreCorrupt, *corrupt);

  std::sort(index.begin(), index.end(),
            [](const StoreEntry& a, const StoreEntry& b) { return a.utt_id < b.utt_id; });
  std::string text;
  for (const auto& e : index) {
    Json j;
    j["utt_id"] = e.utt_id;
    j["speaker_id"] = e.speaker_id;
    j["timbre"] = e.file;
    text += j.dump() + "\n";
  }
  const fs::path index_path = store_dir / kStoreIndexName;
  if (!fs::exists(index_path) || read_file(index_path) != text) write_file(index_path, text);

  check_failure_rate(report.failures.size(), report.total, max_failure_rate, "utterances");
  return report;
}

// ---------------------------------------------------------------------------
// Run configuration

std::string_view to_string(AugmentMethod method) {
  switch (method) {
    case AugmentMethod::kMixup: return "mixup";
    case AugmentMethod::kWaveform: return "waveform";
    case AugmentMethod::kSpecAugment: return "specaugment";
    case AugmentMethod::kVoiceConversion: return "voice_conversion";
  }
  return "unknown";
}

AugmentMethod parse_method(std::string_view name) {
  for (auto m : {AugmentMethod::kMixup, AugmentMethod::kWaveform, AugmentMethod::kSpecAugment,
                 AugmentMethod::kVoiceConversion}) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown method \"" + std::string(name) + "\"");
}

void RunConfig::validate() const {
  if (!(ratio > 0.0) || !std::isfinite(ratio)) {
    throw Error(ErrorKind::kInvalidArgument, "ratio must be positive");
  }
  if (workers < 1) throw Error(ErrorKind::kInvalidArgument, "workers must be >= 1");
  if (!(max_failure_rate >= 0.0 && max_failure_rate <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "max_failure_rate must be in [0, 1]");
  }
  mixup.validate();
  waveform.validate();
  specaugment.validate();
  const MixupConfig defaults;
  const bool ablated = mixup.source_equals_target != defaults.source_equals_target ||
                       mixup.num_mixup_timbres != defaults.num_mixup_timbres ||
                       mixup.post_denoise != defaults.post_denoise;
  if ((method == AugmentMethod::kWaveform || method == AugmentMethod::kSpecAugment) &&
      ablated) {
    throw Error(ErrorKind::kInvalidArgument,
                "mixup ablation flags do not apply to method " + std::string(to_string(method)));
  }
  if (method == AugmentMethod::kVoiceConversion &&
      (mixup.source_equals_target || mixup.num_mixup_timbres != defaults.num_mixup_timbres)) {
    throw Error(ErrorKind::kInvalidArgument,
                "voice conversion takes neither --source-equals-target nor "
                "--num-mixup-timbres");
  }
}

std::pair<std::string, std::string> RunConfig::preset() const {
  switch (method) {
    case AugmentMethod::kWaveform: return {"waveform", "Waveform Augmentation"};
    case AugmentMethod::kSpecAugment: return {"specaugment", "Spectrogram Augmentation"};
    case AugmentMethod::kVoiceConversion:
      return {"voice_conversion", "Voice Conversion Augmentation"};
    case AugmentMethod::kMixup: break;
  }
  const bool post = mixup.post_denoise;
  const bool same = mixup.source_equals_target;
  if (mixup.num_mixup_timbres == 3) {
    if (post && !same) return {"mixup_3_speaker_timbres", "Mixup w/ 3 Speaker Timbres"};
    return {"custom_mixup", "Custom Mixup"};
  }
  if (post && !same) return {"proposed_mixup", "Proposed Mixup"};
  if (!post && !same) return {"no_post_denoising", "No Post-denoising"};
  if (!post && same) {
    return {"no_post_denoising_source_equals_target", "No Post-denoising, Source=Target"};
  }
  return {"source_equals_target", "Source=Target"};
}

Json RunConfig::to_json() const {
  Json j;
  if (seed) j["seed"] = *seed;
  j["ratio"] = ratio;
  j["method"] = std::string(to_string(method));
  j["mixup"] = {{"alpha", mixup.alpha},
                {"beta", mixup.beta},
                {"num_mixup_timbres", mixup.num_mixup_timbres},
                {"post_denoise", mixup.post_denoise},
                {"pre_denoise", mixup.pre_denoise},
                {"source_equals_target", mixup.source_equals_target},
                {"speaker_uniform", mixup.speaker_uniform}};
  j["waveform"] = {{"stretch_min", waveform.stretch_min},
                   {"stretch_max", waveform.stretch_max},
                   {"pitch_min_semitones", waveform.pitch_min_semitones},
                   {"pitch_max_semitones", waveform.pitch_max_semitones},
                   {"gain_min_db", waveform.gain_min_db},
                   {"gain_max_db", waveform.gain_max_db},
                   {"probability", waveform.probability}};
  j["specaugment"] = {{"num_freq_masks", specaugment.num_freq_masks},
                      {"max_freq_width", specaugment.max_freq_width},
                      {"num_time_masks", specaugment.num_time_masks},
                      {"max_time_fraction", specaugment.max_time_fraction}};
  j["backend"] = backend.spec();
  j["workers"] = workers;
  j["output_dir"] = output_dir.string();
  j["store_dir"] = store_dir.string();
  j["max_failure_rate"] = max_failure_rate;
  return j;
}

RunConfig RunConfig::from_json(const Json& j) {
  RunConfig c;
  try {
    reject_unknown(j,
                   {"seed", "ratio", "method", "mixup", "waveform", "specaugment", "backend",
                    "workers", "output_dir", "store_dir", "max_failure_rate"},
                   "config");
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    read_field(j, "ratio", c.ratio);
    if (j.contains("method")) c.method = parse_method(j["method"].get<std::string>());
    if (j.contains("mixup")) {
      const Json& m = j["mixup"];
      reject_unknown(m,
                     {"alpha", "beta", "num_mixup_timbres", "post_denoise", "pre_denoise",
                      "source_equals_target", "speaker_uniform"},
                     "config.mixup");
      read_field(m, "alpha", c.mixup.alpha);
      read_field(m, "beta", c.mixup.beta);
      read_field(m, "num_mixup_timbres", c.mixup.num_mixup_timbres);
      read_field(m, "post_denoise", c.mixup.post_denoise);
      read_field(m, "pre_denoise", c.mixup.pre_denoise);
      read_field(m, "source_equals_target", c.mixup.source_equals_target);
      read_field(m, "speaker_uniform", c.mixup.speaker_uniform);
    }
    if (j.contains("waveform")) {
      const Json& w = j["waveform"];
      reject_unknown(w,
                     {"stretch_min", "stretch_max", "pitch_min_semitones",
                      "pitch_max_semitones", "gain_min_db", "gain_max_db", "probability"},
                     "config.waveform");
      read_field(w, "stretch_min", c.waveform.stretch_min);
      read_field(w, "stretch_max", c.waveform.stretch_max);
      read_field(w, "pitch_min_semitones", c.waveform.pitch_min_semitones);
      read_field(w, "pitch_max_semitones", c.waveform.pitch_max_semitones);
      read_field(w, "gain_min_db", c.waveform.gain_min_db);
      read_field(w, "gain_max_db", c.waveform.gain_max_db);
      read_field(w, "probability", c.waveform.probability);
    }
    if (j.contains("specaugment")) {
      const Json& s = j["specaugment"];
      reject_unknown(s,
                     {"num_freq_masks", "max_freq_width", "num_time_masks",
                      "max_time_fraction"},
                     "config.specaugment");
      read_field(s, "num_freq_masks", c.specaugment.num_freq_masks);
      read_field(s, "max_freq_width", c.specaugment.max_freq_width);
      read_field(s, "num_time_masks", c.specaugment.num_time_masks);
      read_field(s, "max_time_fraction", c.specaugment.max_time_fraction);
    }
    if (j.contains("backend")) c.backend = CodecBackend::parse(j["backend"].get<std::string>());
    read_field(j, "workers", c.workers);
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("store_dir")) c.store_dir = j["store_dir"].get<std::string>();
    read_field(j, "max_failure_rate", c.max_failure_rate);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchemaViolation, std::string("config: ") + e.what());
  }
  return c;
}

// ---------------------------------------------------------------------------
// Augmentation

std::vector<std::size_t> allocate_outputs(const std::vector<ManifestEntry>& originals,
                                          double ratio) {
  std::vector<std::size_t> order(originals.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return originals[a].utt_id < originals[b].utt_id;
  });
  const auto count = static_cast<std::size_t>(
      std::llround(ratio * static_cast<double>(originals.size())));
  std::vector<std::size_t> out(count);
  for (std::size_t j = 0; j < count; ++j) out[j] = order[j % order.size()];
  return out;
}

std::vector<PlannedJob> plan_augmentation(const std::vector<ManifestEntry>& originals,
                                          const CorpusIndex& corpus, const RunConfig& config) {
  if (!config.seed) throw Error(ErrorKind::kInvalidArgument, "a seed is required");
  const bool mixup = config.method == AugmentMethod::kMixup;
  const bool synth = mixup || config.method == AugmentMethod::kVoiceConversion;
  const int partners = mixup ? config.mixup.num_mixup_timbres - 1 : 0;
  if (synth && corpus.num_speakers() < required_speakers(config.mixup, partners)) {
    throw Error(ErrorKind::kInsufficientSpeakers,
                "need at least " +
                    std::to_string(required_speakers(config.mixup, partners)) +
                    " speakers, store has " + std::to_string(corpus.num_speakers()));
  }
  std::vector<PlannedJob> jobs;
  const auto sources = allocate_outputs(originals, config.ratio);
  for (std::size_t j = 0; j < sources.size(); ++j) {
    PlannedJob job;
    job.index = j;
    job.source = sources[j];
    if (synth) {
      Rng rng = derive_rng(*config.seed, j);
      job.selection =
          select_partners(corpus, originals[job.source].utt_id, rng, config.mixup, partners);
      if (partners == 1) {
        job.draw.lambda = sample_lambda(rng, config.mixup);
      } else if (partners == 2) {
        job.draw.weights = sample_dirichlet3(rng);
      }
    }
    jobs.push_back(std::move(job));
  }
  return jobs;
}

AugmentationRecord planned_record(const PlannedJob& job, const RunConfig& config) {
  AugmentationRecord r;
  const auto& sel = job.selection;
  r.method = sel.mixups.empty() ? "voice_conversion" : "mixup";
  r.source_utt_id = sel.source.utt_id;
  r.source_speaker = sel.source.speaker_id;
  r.target_utt_id = sel.target.utt_id;
  r.target_speaker = sel.target.speaker_id;
  for (const auto& m : sel.mixups) {
    r.mixup_utt_ids.push_back(m.utt_id);
    r.mixup_speakers.push_back(m.speaker_id);
  }
  r.source_equals_target = config.mixup.source_equals_target;
  r.post_denoise = config.mixup.post_denoise;
  if (sel.mixups.size() == 2) {
    r.weights = {job.draw.weights[0], job.draw.weights[1], job.draw.weights[2]};
  } else {
    r.lambda = sel.mixups.empty() ? 1.0 : job.draw.lambda;
  }
  return r;
}

Json RunSummary::to_json() const {
  return {{"originals", originals}, {"planned", planned},     {"emitted", emitted},
          {"failed", failures.size()}, {"failures", failures}, {"manifest", manifest.string()}};
}

Eigen::MatrixXd constructed_timbres(const std::vector<AugmentationRecord>& records,
                                    const TimbreStore& store) {
  std::vector<Eigen::VectorXd> rows;
  auto parent = [&](const std::string& id) {
    return Eigen::VectorXd(store.timbre(id).values().cast<double>());
  };
  for (const auto& r : records) {
    if (r.method != "mixup" && r.method != "voice_conversion") continue;
    Eigen::VectorXd v = parent(r.target_utt_id);
    if (r.mixup_utt_ids.size() == 1) {
      const double lambda = r.lambda.value_or(1.0);
      v = lambda * v + (1.0 - lambda) * parent(r.mixup_utt_ids[0]);
    } else if (r.mixup_utt_ids.size() == 2 && r.weights.size() == 3) {
      v = r.weights[0] * v + r.weights[1] * parent(r.mixup_utt_ids[0]) +
          r.weights[2] * parent(r.mixup_utt_ids[1]);
    }
    rows.push_back(std::move(v));
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), kTimbreDim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  }
  return out;
}

std::string git_blob_hash(const fs::path& path) {
  const std::string body = read_file(path);
  const std::string data = "blob " + std::to_string(body.size()) + '\0' + body;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha1(), nullptr) != 1) {
    throw Error(ErrorKind::kInvalidArgument, "SHA-1 unavailable");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

RunSummary run_augmentation(const fs::path& manifest, const RunConfig& config) {
  config.validate();
  if (!config.seed) throw Error(ErrorKind::kInvalidArgument, "a seed is required");
  if (config.output_dir.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "an output directory is required");
  }
  auto originals = read_manifest(manifest);
  if (originals.empty()) throw Error(ErrorKind::kEmptyCorpus, manifest.string());
  std::set<std::string> ids;
  for (const auto& e : originals) {
    if (!ids.insert(e.utt_id).second) {
      throw Error(ErrorKind::kSchemaViolation, "duplicate utt_id " + e.utt_id);
    }
  }

  const bool synth = config.method == AugmentMethod::kMixup ||
                     config.method == AugmentMethod::kVoiceConversion;
  std::optional<TimbreStore> store;
  CorpusIndex corpus({});
  if (synth) {
    if (config.store_dir.empty()) {
      throw Error(ErrorKind::kInvalidArgument, "mixup and voice conversion need a store");
    }
    store = TimbreStore::open(config.store_dir);
    corpus = store->corpus();
  }
  const auto jobs = plan_augmentation(originals, corpus, config);

  const fs::path out = config.output_dir;
  make_dir(out);
  make_dir(out / "audio");
  if (config.method == AugmentMethod::kSpecAugment) make_dir(out / "features");
  if (synth) make_dir(out / "timbres");

  RunSummary summary;
  summary.originals = originals.size();
  summary.planned = jobs.size();
  summary.manifest = out / "manifest.jsonl";

  std::ofstream mf(summary.manifest, std::ios::binary | std::ios::trunc);
  if (!mf) throw Error(ErrorKind::kUnwritablePath, summary.manifest.string());
  for (const auto& e : originals) {
    ManifestEntry copy = e;
    if (!copy.audio_filepath.empty()) {
      copy.audio_filepath =
          fs::absolute(resolve_entry_path(manifest, e.audio_filepath)).lexically_normal().string();
    } else {
      copy.features_filepath =
          fs::absolute(resolve_entry_path(manifest, e.features_filepath)).lexically_normal().string();
    }
    mf << manifest_line(copy) << '\n';
  }

  struct Outcome {
    std::optional<ManifestEntry> entry;
    std::string failure;
  };
  const TimbreLookup lookup = store ? store->lookup() : TimbreLookup{};

  run_ordered<Outcome>(
      jobs.size(), config.workers,
      [&](std::size_t i) -> Outcome {
        const PlannedJob& job = jobs[i];
        const ManifestEntry& src = originals[job.source];
        const std::string name = index_name(job.index);
        try {
          if (src.audio_filepath.empty()) {
            throw Error(ErrorKind::kSchemaViolation, "source has no audio");
          }
          const AudioClip clip = load_canonical(resolve_entry_path(manifest, src.audio_filepath));
          ManifestEntry e;
          e.text = src.text;
          e.speaker_id = "synth/" + src.speaker_id + "/" + std::to_string(job.index);
          e.language = src.language;
          e.utt_id = src.utt_id + "-aug" + name;
          e.source_utt_id = src.utt_id;
          e.extra = src.extra;
          AugmentationRecord record;
          Rng rng = derive_rng(*config.seed, job.index);

          if (synth) {
            std::unique_ptr<ScratchDir> scratch;
            if (!config.backend.is_reference()) {
              scratch = std::make_unique<ScratchDir>(out / ".work" / name);
            }
            AugmentedUtterance aug = augment_utterance(
                clip, job.selection, job.draw, config.mixup, config.backend, lookup,
                scratch ? scratch->path : fs::path());
            record = std::move(aug.record);
            save_wav(aug.audio, out / "audio" / (name + ".wav"));
            save_timbre(aug.mixed_timbre, out / "timbres" / (name + ".timb"));
            e.audio_filepath = "audio/" + name + ".wav";
            e.duration = aug.audio.duration();
          } else if (config.method == AugmentMethod::kWaveform) {
            WaveformAugResult aug = waveform_augment(clip, config.waveform, rng);
            record = std::move(aug.record);
            save_wav(aug.audio, out / "audio" / (name + ".wav"));
            e.audio_filepath = "audio/" + name + ".wav";
            e.duration = aug.audio.duration();
          } else {
            const MelSpectrogram mel = mel_spectrogram(stft(clip), MelConfig{});
            SpecAugResult aug = spec_augment(mel, config.specaugment, rng);
            record = std::move(aug.record);
            save_features(aug.mel.frames, out / "features" / (name + ".melf"));
            e.features_filepath = "features/" + name + ".melf";
            e.duration = clip.duration();
          }
          record.source_utt_id = src.utt_id;
          record.source_speaker = src.speaker_id;
          e.augmentation = std::move(record);
          return {std::move(e), ""};
        } catch (const std::exception& err) {
          return {std::nullopt, src.utt_id + " -> " + name + ": " + err.what()};
        }
      },
      [&](std::size_t, Outcome&& o) {
        if (o.entry) {
          mf << manifest_line(*o.entry) << '\n';
          ++summary.emitted;
        } else {
          spdlog::warn("augmentation failed: {}", o.failure);
          summary.failures.push_back(std::move(o.failure));
        }
      });
  mf.close();
  if (!mf) throw Error(ErrorKind::kUnwritablePath, summary.manifest.string());
  std::error_code ec;
  fs::remove(out / ".work", ec);

  // Worker count and output location do not belong to the result.
  Json echo = config.to_json();
  echo.erase("workers");
  echo.erase("output_dir");
  const auto [preset, label] = config.preset();
  Json meta;
  meta["preset"] = preset;
  meta["preset_label"] = label;
  meta["method"] = std::string(to_string(config.method));
  meta["config"] = std::move(echo);
  meta["inputs"] = {{"manifest", fs::absolute(manifest).lexically_normal().string()},
                    {"manifest_blob", git_blob_hash(manifest)}};
  if (store) meta["inputs"]["store_index_blob"] = git_blob_hash(store->dir() / kStoreIndexName);
  meta["counts"] = {{"originals", summary.originals},
                    {"planned", summary.planned},
                    {"emitted", summary.emitted},
                    {"failed", summary.failures.size()}};
  meta["failures"] = summary.failures;
  write_file(out / "run_metadata.json", meta.dump(2) + "\n");

  check_failure_rate(summary.failures.size(), summary.planned, config.max_failure_rate,
                     "outputs");
  return summary;
}

}  // namespace voicemix
