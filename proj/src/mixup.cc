// src/mixup.cc

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

#include "voicemix/mixup.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "voicemix/errors.hpp"

namespace voicemix {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSimplexTolerance = 1e-9;

void require_same_size(Eigen::Index a, Eigen::Index b) {
  if (a != b) {
    throw Error(ErrorKind::kDimensionMismatch,
                "timbre sizes " + std::to_string(a) + " and " + std::to_string(b));
  }
}

// Keeps every component inside its parents' range; only rounding can push
// a convex combination outside it.
template <typename Mixed, typename Lo, typename Hi>
Eigen::VectorXf clamp_to(const Mixed& mixed, const Lo& lo, const Hi& hi) {
  return mixed.cwiseMax(lo).cwiseMin(hi).template cast<float>();
}

TimbreVector to_timbre(const Eigen::VectorXf& v) {
  return TimbreVector::sanitized(TimbreVector::Values(v));
}

// Uniform pick among items whose speaker is not excluded; with
// speaker_uniform the speaker is drawn first.
const CorpusItem* pick(const CorpusIndex& corpus, const std::set<std::string>& excluded,
                       Rng& rng, bool speaker_uniform) {
  if (speaker_uniform) {
    std::vector<const std::string*> speakers;
    for (const auto& s : corpus.speakers()) {
      if (!excluded.count(s)) speakers.push_back(&s);
    }
    if (speakers.empty()) return nullptr;
    const std::string& chosen = *speakers[uniform_index(rng, speakers.size())];
    std::vector<const CorpusItem*> items;
    for (const auto& it : corpus.items()) {
      if (it.speaker_id == chosen) items.push_back(&it);
    }
    return items[uniform_index(rng, items.size())];
  }
  std::vector<const CorpusItem*> items;
  for (const auto& it : corpus.items()) {
    if (!excluded.count(it.speaker_id)) items.push_back(&it);
  }
  if (items.empty()) return nullptr;
  return items[uniform_index(rng, items.size())];
}

}  // namespace

void MixupConfig::validate() const {
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "Beta parameters must be positive");
  }
  if (num_mixup_timbres != 2 && num_mixup_timbres != 3) {
    throw Error(ErrorKind::kInvalidArgument, "num_mixup_timbres must be 2 or 3");
  }
}

double sample_lambda(Rng& rng, const MixupConfig& config) {
  if (config.alpha == 0.5 && config.beta == 0.5) {
    const double s = std::sin(0.5 * kPi * uniform01(rng));
    return std::clamp(s * s, 0.0, 1.0);
  }
  const double x = sample_gamma(rng, config.alpha);
  const double y = sample_gamma(rng, config.beta);
  if (x + y == 0.0) return 0.5;
  return x / (x + y);
}

Eigen::Vector3d sample_dirichlet3(Rng& rng, double concentration) {
  Eigen::Vector3d g;
  for (int i = 0; i < 3; ++i) g[i] = sample_gamma(rng, concentration);
  const double sum = g.sum();
  if (sum == 0.0) return Eigen::Vector3d::Constant(1.0 / 3.0);
  return g / sum;
}

Eigen::VectorXf mix_values(const Eigen::Ref<const Eigen::VectorXf>& a,
                           const Eigen::Ref<const Eigen::VectorXf>& b, double lambda) {
  require_same_size(a.size(), b.size());
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "lambda outside [0, 1]");
  }
  const Eigen::VectorXd ad = a.cast<double>();
  const Eigen::VectorXd bd = b.cast<double>();
  const Eigen::VectorXd mixed = lambda * ad + (1.0 - lambda) * bd;
  return clamp_to(mixed, ad.cwiseMin(bd), ad.cwiseMax(bd));
}

Eigen::VectorXf mix_values(const Eigen::Ref<const Eigen::VectorXf>& a,
                           const Eigen::Ref<const Eigen::VectorXf>& b,
                           const Eigen::Ref<const Eigen::VectorXf>& c,
                           const Eigen::Vector3d& weights) {
  require_same_size(a.size(), b.size());
  require_same_size(a.size(), c.size());
  if ((weights.array() < 0.0).any() || !weights.allFinite() ||
      std::abs(weights.sum() - 1.0) > kSimplexTolerance) {
    throw Error(ErrorKind::kWeightsNotSimplex, "weights must be nonnegative and sum to 1");
  }
  const Eigen::VectorXd ad = a.cast<double>();
  const Eigen::VectorXd bd = b.cast<double>();
  const Eigen::VectorXd cd = c.cast<double>();
  const Eigen::VectorXd mixed = weights[0] * ad + weights[1] * bd + weights[2] * cd;
  return clamp_to(mixed, ad.cwiseMin(bd).cwiseMin(cd), ad.cwiseMax(bd).cwiseMax(cd));
}

TimbreVector mix_timbres(const TimbreVector& target, const TimbreVector& mixup,
                         double lambda) {
  return to_timbre(mix_values(target.values(), mixup.values(), lambda));
}

TimbreVector mix_timbres_3(const TimbreVector& target, const TimbreVector& m1,
                           const TimbreVector& m2, const Eigen::Vector3d& weights) {
  return to_timbre(mix_values(target.values(), m1.values(), m2.values(), weights));
}

CorpusIndex::CorpusIndex(std::vector<CorpusItem> items) : items_(std::move(items)) {
  std::sort(items_.begin(), items_.end(),
            [](const CorpusItem& a, const CorpusItem& b) { return a.utt_id < b.utt_id; });
  std::set<std::string> speakers;
  for (const auto& it : items_) speakers.insert(it.speaker_id);
  speakers_.assign(speakers.begin(), speakers.end());
}

const CorpusItem& CorpusIndex::find(const std::string& utt_id) const {
  auto it = std::lower_bound(
      items_.begin(), items_.end(), utt_id,
      [](const CorpusItem& item, const std::string& id) { return item.utt_id < id; });
  if (it == items_.end() || it->utt_id != utt_id) {
    throw Error(ErrorKind::kInvalidArgument, "unknown utterance " + utt_id);
  }
  return *it;
}

std::size_t required_speakers(const MixupConfig& config, int num_partners) {
  return static_cast<std::size_t>(num_partners) + (config.source_equals_target ? 1 : 2);
}

PartnerSelection select_partners(const CorpusIndex& corpus, const std::string& source_utt,
                                 Rng& rng, const MixupConfig& config, int num_partners) {
  const std::size_t required = required_speakers(config, num_partners);
  if (corpus.num_speakers() < required) {
    throw Error(ErrorKind::kInsufficientSpeakers,
                "need at least " + std::to_string(required) + " speakers, corpus has " +
                    std::to_string(corpus.num_speakers()));
  }
  PartnerSelection sel;
  sel.source = corpus.find(source_utt);
  std::set<std::string> excluded{sel.source.speaker_id};
  if (config.source_equals_target) {
    sel.target = sel.source;
  } else {
    sel.target = *pick(corpus, excluded, rng, config.speaker_uniform);
    excluded.insert(sel.target.speaker_id);
  }
  for (int i = 0; i < num_partners; ++i) {
    const CorpusItem* m = pick(corpus, excluded, rng, false);
    sel.mixups.push_back(*m);
    excluded.insert(m->speaker_id);
  }
  return sel;
}

AugmentedUtterance augment_utterance(const AudioClip& source,
                                     const PartnerSelection& selection,
                                     const MixDraw& draw, const MixupConfig& config,
                                     const CodecBackend& backend,
                                     const TimbreLookup& timbres,
                                     const std::filesystem::path& scratch) {
  const std::size_t partners = selection.mixups.size();
  if (partners > 2) {
    throw Error(ErrorKind::kInvalidArgument, "at most two mixup partners");
  }
  const AudioClip clean = config.pre_denoise ? denoise(source) : source;
  BackendEncoding enc = backend_encode(backend, clean, scratch);

  const TimbreVector target = timbres(selection.target.utt_id);
  AugmentationRecord record;
  record.source_utt_id = selection.source.utt_id;
  record.source_speaker = selection.source.speaker_id;
  record.target_utt_id = selection.target.utt_id;
  record.target_speaker = selection.target.speaker_id;
  record.source_equals_target = config.source_equals_target;
  record.post_denoise = config.post_denoise;
  for (const auto& m : selection.mixups) {
    record.mixup_utt_ids.push_back(m.utt_id);
    record.mixup_speakers.push_back(m.speaker_id);
  }

  TimbreVector mixed = target;
  if (partners == 0) {
    record.method = "voice_conversion";
    record.lambda = 1.0;
  } else if (partners == 1) {
    record.method = "mixup";
    record.lambda = draw.lambda;
    mixed = mix_timbres(target, timbres(selection.mixups[0].utt_id), draw.lambda);
  } else {
    record.method = "mixup";
    record.weights = {draw.weights[0], draw.weights[1], draw.weights[2]};
    mixed = mix_timbres_3(target, timbres(selection.mixups[0].utt_id),
                          timbres(selection.mixups[1].utt_id), draw.weights);
  }

  AudioClip out = backend_decode(backend, enc.content, mixed, scratch);
  if (config.post_denoise) out = denoise(out);
  normalize_on_overflow(out);
  return {std::move(out), std::move(record), mixed};
}

}  // namespace voicemix
