// include/voicemix/mixup.hpp

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

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "voicemix/backend.hpp"
#include "voicemix/codec.hpp"
#include "voicemix/denoise.hpp"
#include "voicemix/manifest.hpp"
#include "voicemix/random.hpp"

namespace voicemix {

struct MixupConfig {
  double alpha = 0.5;
  double beta = 0.5;
  int num_mixup_timbres = 2;   // timbres entering the mix, target included
  bool post_denoise = true;
  bool pre_denoise = true;
  bool source_equals_target = false;
  bool speaker_uniform = false;  // draw a speaker first, then an utterance

  /// Throws kInvalidArgument.
  void validate() const;
};

/// Beta(alpha, beta). The symmetric 0.5 case uses sin^2(pi U / 2).
double sample_lambda(Rng& rng, const MixupConfig& config);

/// Dirichlet(c, c, c) from normalized Gamma(c) draws.
Eigen::Vector3d sample_dirichlet3(Rng& rng, double concentration = 0.5);

/// lambda * a + (1 - lambda) * b. Throws kDimensionMismatch.
Eigen::VectorXf mix_values(const Eigen::Ref<const Eigen::VectorXf>& a,
                           const Eigen::Ref<const Eigen::VectorXf>& b, double lambda);

/// w0 * a + w1 * b + w2 * c. Throws kDimensionMismatch or
/// kWeightsNotSimplex.
Eigen::VectorXf mix_values(const Eigen::Ref<const Eigen::VectorXf>& a,
                           const Eigen::Ref<const Eigen::VectorXf>& b,
                           const Eigen::Ref<const Eigen::VectorXf>& c,
                           const Eigen::Vector3d& weights);

/// Convex mix re-floored to a valid timbre. lambda = 1 returns `target`
/// and lambda = 0 returns `mixup`, bit for bit.
TimbreVector mix_timbres(const TimbreVector& target, const TimbreVector& mixup,
                         double lambda);
TimbreVector mix_timbres_3(const TimbreVector& target, const TimbreVector& m1,
                           const TimbreVector& m2, const Eigen::Vector3d& weights);

struct CorpusItem {
  std::string utt_id;
  std::string speaker_id;
};

/// Utterances sorted by utt_id, grouped by speaker.
class CorpusIndex {
 public:
  explicit CorpusIndex(std::vector<CorpusItem> items);

  const std::vector<CorpusItem>& items() const { return items_; }
  const std::vector<std::string>& speakers() const { return speakers_; }
  std::size_t num_speakers() const { return speakers_.size(); }
  /// Throws kInvalidArgument for unknown ids.
  const CorpusItem& find(const std::string& utt_id) const;

 private:
  std::vector<CorpusItem> items_;
  std::vector<std::string> speakers_;
};

struct PartnerSelection {
  CorpusItem source;
  CorpusItem target;
  std::vector<CorpusItem> mixups;
};

/// Speakers a corpus needs for `num_partners` mixup partners.
std::size_t required_speakers(const MixupConfig& config, int num_partners);

/// Target from another speaker (or the source itself when
/// source_equals_target), then `num_partners` mixup utterances whose
/// speakers are distinct from each other and from source and target.
/// Throws kInsufficientSpeakers.
PartnerSelection select_partners(const CorpusIndex& corpus, const std::string& source_utt,
                                 Rng& rng, const MixupConfig& config, int num_partners);

/// Mixing coefficients: lambda for two timbres, weights for three.
struct MixDraw {
  double lambda = 1.0;
  Eigen::Vector3d weights = Eigen::Vector3d(1.0, 0.0, 0.0);
};

using TimbreLookup = std::function<TimbreVector(const std::string& utt_id)>;

struct AugmentedUtterance {
  AudioClip audio;
  AugmentationRecord record;
  TimbreVector mixed_timbre;
};

/// denoise -> encode -> mix -> decode -> denoise. The number of partners in
/// `selection` picks two- or three-way mixing; none means plain conversion.
AugmentedUtterance augment_utterance(const AudioClip& source,
                                     const PartnerSelection& selection,
                                     const MixDraw& draw, const MixupConfig& config,
                                     const CodecBackend& backend,
                                     const TimbreLookup& timbres,
                                     const std::filesystem::path& scratch);

}  // namespace voicemix
