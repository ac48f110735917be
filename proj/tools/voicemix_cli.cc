// tools/voicemix_cli.cc

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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "voicemix/analysis.hpp"
#include "voicemix/audio.hpp"
#include "voicemix/backend.hpp"
#include "voicemix/codec.hpp"
#include "voicemix/denoise.hpp"
#include "voicemix/errors.hpp"
#include "voicemix/evaluation.hpp"
#include "voicemix/manifest.hpp"
#include "voicemix/pipeline.hpp"

namespace fs = std::filesystem;
using namespace voicemix;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kSchemaViolation:
    case ErrorKind::kInsufficientSpeakers:
    case ErrorKind::kInsufficientClasses:
    case ErrorKind::kEmptyReference:
    case ErrorKind::kEmptyCorpus:
    case ErrorKind::kTooFewVectors:
    case ErrorKind::kWeightsNotSimplex:
      return kExitValidation;
    default:
      return kExitRuntime;
  }
}

void print(const Json& j) { std::cout << j.dump(2) << std::endl; }

template <typename T>
void override_if(const std::optional<T>& flag, T& field) {
  if (flag) field = *flag;
}

Json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kMissingFile, path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchemaViolation, path.string() + ": " + e.what());
  }
}

// Timbres for one analysis group: *.timb files of a directory (sorted by
// name), or the augmented audio rows of a manifest, encoded again.
Eigen::MatrixXd load_group(const fs::path& source) {
  std::vector<TimbreVector> timbres;
  if (fs::is_directory(source)) {
    std::vector<fs::path> files;
    for (const auto& f : fs::directory_iterator(source)) {
      if (f.path().extension() == ".timb") files.push_back(f.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) timbres.push_back(load_timbre(f));
  } else {
    for (const auto& e : read_manifest(source)) {
      if (!e.augmentation || e.audio_filepath.empty()) continue;
      timbres.push_back(encode(load_canonical(resolve_entry_path(source, e.audio_filepath))).timbre);
    }
  }
  return timbre_matrix(timbres);
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("voicemix"));

  CLI::App app{"voicemix: speech corpus augmentation by speaker-timbre mixup"};
  app.require_subcommand(1);
  std::function<int()> action;

  // build-store -------------------------------------------------------------
  auto* build = app.add_subcommand("build-store", "Extract one timbre per utterance");
  std::string bs_manifest, bs_store, bs_backend = "reference";
  int bs_workers = 1;
  double bs_max_fail = kMaxFailureRate;
  build->add_option("--manifest", bs_manifest, "Input JSON Lines manifest")->required();
  build->add_option("--store", bs_store, "Timbre store directory")->required();
  build->add_option("--backend", bs_backend, "\"reference\" or an external command");
  build->add_option("--workers", bs_workers)->check(CLI::PositiveNumber);
  build->add_option("--max-failure-rate", bs_max_fail)->check(CLI::Range(0.0, 1.0));
  build->callback([&] {
    action = [&] {
      print(build_timbre_store(bs_manifest, CodecBackend::parse(bs_backend), bs_store,
                               bs_workers, bs_max_fail)
                .to_json());
      return kExitOk;
    };
  });

  // augment -----------------------------------------------------------------
  auto* aug = app.add_subcommand("augment", "Generate synthetic utterances");
  std::string au_manifest, au_config;
  std::optional<std::uint64_t> au_seed;
  std::optional<double> au_ratio, au_alpha, au_beta, au_max_fail;
  std::optional<std::string> au_method, au_backend, au_out, au_store;
  std::optional<int> au_workers, au_timbres;
  std::optional<double> au_stretch_min, au_stretch_max, au_pitch_min, au_pitch_max,
      au_gain_min, au_gain_max, au_prob, au_time_frac;
  std::optional<int> au_fmasks, au_fwidth, au_tmasks;
  bool au_no_post = false, au_no_pre = false, au_same = false, au_spk_uniform = false;
  aug->add_option("--manifest", au_manifest, "Input JSON Lines manifest")->required();
  aug->add_option("--seed", au_seed, "Master seed (required)")->required();
  aug->add_option("--config", au_config, "JSON run configuration");
  aug->add_option("--out", au_out, "Output directory");
  aug->add_option("--store", au_store, "Timbre store directory");
  aug->add_option("--ratio", au_ratio, "Synthetic outputs per original");
  aug->add_option("--method", au_method, "mixup|waveform|specaugment|voice_conversion");
  aug->add_option("--backend", au_backend, "\"reference\" or an external command");
  aug->add_option("--workers", au_workers);
  aug->add_option("--max-failure-rate", au_max_fail);
  aug->add_option("--alpha", au_alpha);
  aug->add_option("--beta", au_beta);
  aug->add_option("--num-mixup-timbres", au_timbres);
  aug->add_flag("--no-post-denoise", au_no_post);
  aug->add_flag("--no-pre-denoise", au_no_pre);
  aug->add_flag("--source-equals-target", au_same);
  aug->add_flag("--speaker-uniform", au_spk_uniform);
  aug->add_option("--stretch-min", au_stretch_min);
  aug->add_option("--stretch-max", au_stretch_max);
  aug->add_option("--pitch-min", au_pitch_min);
  aug->add_option("--pitch-max", au_pitch_max);
  aug->add_option("--gain-min", au_gain_min);
  aug->add_option("--gain-max", au_gain_max);
  aug->add_option("--transform-probability", au_prob);
  aug->add_option("--freq-masks", au_fmasks);
  aug->add_option("--max-freq-width", au_fwidth);
  aug->add_option("--time-masks", au_tmasks);
  aug->add_option("--max-time-fraction", au_time_frac);
  aug->callback([&] {
    action = [&] {
      RunConfig cfg = au_config.empty() ? RunConfig{}
                                        : RunConfig::from_json(read_json_file(au_config));
      cfg.seed = au_seed;
      override_if(au_ratio, cfg.ratio);
      if (au_method) cfg.method = parse_method(*au_method);
      if (au_backend) cfg.backend = CodecBackend::parse(*au_backend);
      if (au_out) cfg.output_dir = *au_out;
      if (au_store) cfg.store_dir = *au_store;
      override_if(au_workers, cfg.workers);
      override_if(au_max_fail, cfg.max_failure_rate);
      override_if(au_alpha, cfg.mixup.alpha);
      override_if(au_beta, cfg.mixup.beta);
      override_if(au_timbres, cfg.mixup.num_mixup_timbres);
      if (au_no_post) cfg.mixup.post_denoise = false;
      if (au_no_pre) cfg.mixup.pre_denoise = false;
      if (au_same) cfg.mixup.source_equals_target = true;
      if (au_spk_uniform) cfg.mixup.speaker_uniform = true;
      override_if(au_stretch_min, cfg.waveform.stretch_min);
      override_if(au_stretch_max, cfg.waveform.stretch_max);
      override_if(au_pitch_min, cfg.waveform.pitch_min_semitones);
      override_if(au_pitch_max, cfg.waveform.pitch_max_semitones);
      override_if(au_gain_min, cfg.waveform.gain_min_db);
      override_if(au_gain_max, cfg.waveform.gain_max_db);
      override_if(au_prob, cfg.waveform.probability);
      override_if(au_fmasks, cfg.specaugment.num_freq_masks);
      override_if(au_fwidth, cfg.specaugment.max_freq_width);
      override_if(au_tmasks, cfg.specaugment.num_time_masks);
      override_if(au_time_frac, cfg.specaugment.max_time_fraction);
      print(run_augmentation(au_manifest, cfg).to_json());
      return kExitOk;
    };
  });

  // validate ----------------------------------------------------------------
  auto* val = app.add_subcommand("validate", "Check a manifest");
  std::string va_manifest;
  val->add_option("manifest", va_manifest)->required();
  val->callback([&] {
    action = [&] {
      const ValidationReport report = validate_manifest(va_manifest);
      print(report.to_json());
      return report.ok() ? kExitOk : kExitValidation;
    };
  });

  // denoise -----------------------------------------------------------------
  auto* den = app.add_subcommand("denoise", "Stationary spectral gating");
  std::string dn_in, dn_out;
  DenoiseConfig dn_cfg;
  den->add_option("input", dn_in)->required();
  den->add_option("output", dn_out)->required();
  den->add_option("--percentile", dn_cfg.noise_percentile, "Noise floor quantile");
  den->add_option("--threshold-std", dn_cfg.threshold_std_multiplier);
  den->add_option("--smooth-freq", dn_cfg.smoothing_freq_bins);
  den->add_option("--smooth-time", dn_cfg.smoothing_time_frames);
  den->add_option("--floor-db", dn_cfg.attenuation_floor_db);
  den->callback([&] {
    action = [&] {
      dn_cfg.validate();
      save_wav(denoise(load_canonical(dn_in), dn_cfg), dn_out);
      return kExitOk;
    };
  });

  // wer / gap ---------------------------------------------------------------
  TextNormalization norm;
  bool keep_case = false;
  auto* werc = app.add_subcommand("wer", "Pooled word error rate");
  std::string we_pairs, we_refs, we_hyps;
  werc->add_option("--pairs", we_pairs, "JSON Lines with reference and hypothesis");
  werc->add_option("--refs", we_refs, "JSON Lines references keyed by utt_id");
  werc->add_option("--hyps", we_hyps, "JSON Lines hypotheses keyed by utt_id");
  werc->add_flag("--keep-case", keep_case);
  werc->add_flag("--strip-punctuation", norm.strip_punctuation);
  werc->callback([&] {
    action = [&] {
      norm.lowercase = !keep_case;
      std::vector<WerPair> pairs;
      if (!we_pairs.empty()) {
        pairs = read_pairs(we_pairs);
      } else if (!we_refs.empty() && !we_hyps.empty()) {
        pairs = join_pairs(we_refs, we_hyps);
      } else {
        throw Error(ErrorKind::kInvalidArgument, "give --pairs or both --refs and --hyps");
      }
      print(corpus_wer(pairs, norm).to_json());
      return kExitOk;
    };
  });

  auto* gapc = app.add_subcommand("gap", "WER gap between a low- and a high-resource set");
  std::string gp_low, gp_high;
  std::optional<double> gp_wer_low, gp_wer_high;
  gapc->add_option("--low", gp_low, "Pairs for the low-resource language");
  gapc->add_option("--high", gp_high, "Pairs for the high-resource language");
  gapc->add_option("--wer-low", gp_wer_low);
  gapc->add_option("--wer-high", gp_wer_high);
  gapc->add_flag("--keep-case", keep_case);
  gapc->add_flag("--strip-punctuation", norm.strip_punctuation);
  gapc->callback([&] {
    action = [&] {
      norm.lowercase = !keep_case;
      if (gp_wer_low && gp_wer_high) {
        print(gap_from_rates(*gp_wer_low, *gp_wer_high).to_json());
      } else if (!gp_low.empty() && !gp_high.empty()) {
        print(gap(read_pairs(gp_low), read_pairs(gp_high), norm).to_json());
      } else {
        throw Error(ErrorKind::kInvalidArgument,
                    "give --low and --high, or --wer-low and --wer-high");
      }
      return kExitOk;
    };
  });

  // proxy-eval --------------------------------------------------------------
  auto* prx = app.add_subcommand("proxy-eval", "Leave-one-speaker-out DTW word classifier");
  std::string px_corpus, px_aug;
  prx->add_option("--corpus", px_corpus, "Manifest of original utterances")->required();
  prx->add_option("--augmented", px_aug, "Manifest whose augmented rows join the pool");
  prx->callback([&] {
    action = [&] {
      const ProxyCorpus corpus = proxy_items_from_manifest(px_corpus);
      Json out;
      out["baseline"] = proxy_eval(corpus.originals, {}).to_json();
      if (!px_aug.empty()) {
        const ProxyCorpus extra = proxy_items_from_manifest(px_aug);
        out["augmented"] = proxy_eval(corpus.originals, extra.augmented).to_json();
        out["augmented_items"] = extra.augmented.size();
      }
      print(out);
      return kExitOk;
    };
  });

  // analyze-timbre ----------------------------------------------------------
  auto* ana = app.add_subcommand("analyze-timbre", "PCA spread of timbre groups");
  std::string an_original, an_out;
  std::vector<std::string> an_groups;
  int an_k = 2;
  ana->add_option("--original", an_original, "Directory of original .timb files")->required();
  ana->add_option("--group", an_groups,
                  "name=<dir of .timb | augmented manifest | constructed:manifest>");
  ana->add_option("--out", an_out, "Output prefix")->required();
  ana->add_option("--components", an_k)->check(CLI::Range(2, kTimbreDim));
  ana->callback([&] {
    action = [&] {
      std::vector<TimbreGroup> groups{{kOriginalGroup, load_group(an_original)}};
      for (const auto& spec : an_groups) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0) {
          throw Error(ErrorKind::kInvalidArgument, "group must be name=path: " + spec);
        }
        const std::string source = spec.substr(eq + 1);
        constexpr std::string_view kConstructed = "constructed:";
        if (source.rfind(kConstructed, 0) == 0) {
          // Exact mixes rebuilt from the records against the original store.
          std::vector<AugmentationRecord> records;
          for (const auto& e : read_manifest(source.substr(kConstructed.size()))) {
            if (e.augmentation) records.push_back(*e.augmentation);
          }
          groups.push_back(
              {spec.substr(0, eq), constructed_timbres(records, TimbreStore::open(an_original))});
        } else {
          groups.push_back({spec.substr(0, eq), load_group(source)});
        }
      }
      const PcaModel model = fit_pca(groups.front().vectors, an_k);
      const SpreadReport report = spread_report(model, groups);
      emit_scatter(model, groups, an_out);
      std::ofstream rep(an_out + ".report.json");
      if (!rep) throw Error(ErrorKind::kUnwritablePath, an_out + ".report.json");
      rep << report.to_json().dump(2) << "\n";
      print(report.to_json());
      return kExitOk;
    };
  });

  // encode / decode (also the external-backend contract) ---------------------
  auto* enc = app.add_subcommand("encode", "Reference codec analysis");
  std::string en_in, en_content, en_timbre;
  enc->add_option("input", en_in)->required();
  enc->add_option("content", en_content)->required();
  enc->add_option("timbre", en_timbre)->required();
  enc->callback([&] {
    action = [&] {
      const EncodedUtterance u = encode(load_canonical(en_in));
      save_content(u.content, en_content);
      save_timbre(u.timbre, en_timbre);
      return kExitOk;
    };
  });

  auto* dec = app.add_subcommand("decode", "Reference codec synthesis");
  std::string de_content, de_timbre, de_out;
  dec->add_option("content", de_content)->required();
  dec->add_option("timbre", de_timbre)->required();
  dec->add_option("output", de_out)->required();
  dec->callback([&] {
    action = [&] {
      save_wav(decode(load_content(de_content), load_timbre(de_timbre)), de_out);
      return kExitOk;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }
  try {
    return action ? action() : kExitValidation;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  }
}
