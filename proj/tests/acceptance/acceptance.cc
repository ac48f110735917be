// tests/acceptance/acceptance.cc

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

// One line per acceptance criterion; exits non-zero if any line fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "support/synth.hpp"
#include "voicemix/analysis.hpp"
#include "voicemix/codec.hpp"
#include "voicemix/denoise.hpp"
#include "voicemix/evaluation.hpp"
#include "voicemix/mixup.hpp"
#include "voicemix/pipeline.hpp"

namespace fs = std::filesystem;
using namespace voicemix;
using voicemix::testing::TempDir;

namespace {

constexpr std::uint64_t kSeed = 20240611;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [FAILED]");
  }
};

std::string fstr(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

int failures = 0;

void criterion(int id, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(secs < limit_s, fstr("runtime %.1f s", secs) + fstr(" < %.0f s", limit_s));
  failures += !o.pass;
  std::printf("criterion %d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
  std::fflush(stdout);
}

TimbreVector random_timbre(Rng& rng) {
  TimbreVector::Values v;
  for (int i = 0; i < kTimbreDim; ++i) {
    v[i] = static_cast<float>(TimbreVector::is_std_slot(i) ? 0.01 + 3.0 * uniform01(rng)
                                                           : -20.0 + 25.0 * uniform01(rng));
  }
  v[kVoicedFractionSlot] = static_cast<float>(uniform01(rng));
  return TimbreVector(v);
}

// Independent top-down edit distance over suffixes.
std::size_t edit_distance_oracle(const std::vector<std::string>& a,
                                 const std::vector<std::string>& b) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  std::function<std::size_t(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) {
    if (i == a.size()) return b.size() - j;
    if (j == b.size()) return a.size() - i;
    auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const std::size_t best = std::min({go(i + 1, j + 1) + (a[i] != b[j]), go(i + 1, j) + 1,
                                       go(i, j + 1) + 1});
    memo[key] = best;
    return best;
  };
  return go(0, 0);
}

double cosine(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return x.dot(y) / (x.norm() * y.norm());
}

Eigen::VectorXd head253(const TimbreVector& t) {
  return t.values().head(kLogF0StdSlot).cast<double>();
}

double snr_db(const Eigen::VectorXd& clean, const Eigen::VectorXd& estimate) {
  return 10.0 * std::log10(clean.squaredNorm() / (estimate - clean).squaredNorm());
}

std::vector<ManifestEntry> synthetic_entries(int speakers, int per_speaker) {
  std::vector<ManifestEntry> out;
  for (int s = 0; s < speakers; ++s) {
    for (int u = 0; u < per_speaker; ++u) {
      ManifestEntry e;
      e.speaker_id = "spk" + std::to_string(s);
      e.utt_id = e.speaker_id + "_u" + std::to_string(u);
      e.audio_filepath = e.utt_id + ".wav";
      e.text = "w";
      out.push_back(e);
    }
  }
  return out;
}

CorpusIndex index_of(const std::vector<ManifestEntry>& entries) {
  std::vector<CorpusItem> items;
  for (const auto& e : entries) items.push_back({e.utt_id, e.speaker_id});
  return CorpusIndex(items);
}

std::vector<AugmentationRecord> records_of(const fs::path& manifest) {
  std::vector<AugmentationRecord> out;
  for (const auto& e : read_manifest(manifest)) {
    if (e.augmentation) out.push_back(*e.augmentation);
  }
  return out;
}

Eigen::MatrixXd reextract(const fs::path& manifest) {
  std::vector<TimbreVector> ts;
  for (const auto& e : read_manifest(manifest)) {
    if (!e.augmentation) continue;
    ts.push_back(encode(load_canonical(resolve_entry_path(manifest, e.audio_filepath))).timbre);
  }
  return timbre_matrix(ts);
}

bool same_tree(const fs::path& a, const fs::path& b) {
  std::vector<fs::path> files;
  for (const auto& f : fs::recursive_directory_iterator(a)) {
    if (f.is_regular_file()) files.push_back(fs::relative(f.path(), a));
  }
  std::size_t count_b = 0;
  for (const auto& f : fs::recursive_directory_iterator(b)) count_b += f.is_regular_file();
  if (files.size() != count_b) return false;
  for (const auto& rel : files) {
    if (!voicemix::testing::same_bytes(a / rel, b / rel)) return false;
  }
  return true;
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);

  criterion(1, 5.0, [] {
    Outcome o;
    Rng rng(kSeed);
    bool bounds = true;
    bool endpoints = true;
    for (int i = 0; i < 1000; ++i) {
      const TimbreVector a = random_timbre(rng);
      const TimbreVector b = random_timbre(rng);
      const double lambda = uniform01(rng);
      const TimbreVector m = mix_timbres(a, b, lambda);
      bounds = bounds && (m.values().array() >= a.values().cwiseMin(b.values()).array()).all() &&
               (m.values().array() <= a.values().cwiseMax(b.values()).array()).all();
      endpoints = endpoints && mix_timbres(a, b, 1.0) == a && mix_timbres(a, b, 0.0) == b;
    }
    o.require(bounds, "1000 mixes inside parent bounds");
    o.require(endpoints, "lambda 0/1 endpoints exact");

    const MixupConfig cfg;
    const int n = 100000;
    double sum = 0.0, sum2 = 0.0;
    int low = 0;
    for (int i = 0; i < n; ++i) {
      const double l = sample_lambda(rng, cfg);
      sum += l;
      sum2 += l * l;
      low += l <= 0.1;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    const double frac = static_cast<double>(low) / n;
    const double cdf = 2.0 / 3.14159265358979323846 * std::asin(std::sqrt(0.1));
    o.require(std::abs(mean - 0.5) <= 0.01, fstr("mean %.4f", mean));
    o.require(std::abs(var - 0.125) <= 0.005, fstr("var %.4f", var));
    o.require(std::abs(frac - cdf) <= 0.01, fstr("P(l<=0.1) %.4f", frac) + fstr(" vs %.4f", cdf));
    return o;
  });

  criterion(2, 10.0, [] {
    Outcome o;
    Rng rng(kSeed + 2);
    const char* alphabet[] = {"a", "b", "c", "d", "e"};
    auto words = [&] {
      std::vector<std::string> w(uniform_index(rng, 9));
      for (auto& s : w) s = alphabet[uniform_index(rng, 5)];
      return w;
    };
    int mismatches = 0;
    for (int i = 0; i < 10000; ++i) {
      const auto ref = words();
      const auto hyp = words();
      const WerBreakdown b = align_words(ref, hyp);
      const bool consistent =
          b.reference_words == ref.size() &&
          static_cast<long>(hyp.size()) - static_cast<long>(ref.size()) ==
              static_cast<long>(b.insertions) - static_cast<long>(b.deletions);
      mismatches += !(consistent && b.errors() == edit_distance_oracle(ref, hyp));
    }
    o.require(mismatches == 0, std::to_string(mismatches) + " of 10000 pairs disagree");
    const double g1 = gap_from_rates(0.796, 0.562).gap;
    const double g2 = gap_from_rates(0.725, 0.550).gap;
    o.require(std::abs(g1 - 0.234) < 1e-12, fstr("gap %.3f", g1));
    o.require(std::abs(g2 - 0.175) < 1e-12, fstr("gap %.3f", g2));
    return o;
  });

  criterion(3, 60.0, [] {
    Outcome o;
    constexpr double kCosineThreshold = 0.95;
    double min_cos = 1.0;
    double worst_ratio_err = 0.0;
    for (int s = 0; s < 20; ++s) {
      const AudioClip x = voicemix::testing::harmonic_utterance(
          static_cast<std::uint64_t>(s), 90.0 + 8.0 * (s % 10), 0.6 + 0.1 * (s % 8),
          0.33 * (s % 3));
      const EncodedUtterance e = encode(x);
      const TimbreVector back = encode(decode(e.content, e.timbre)).timbre;
      min_cos = std::min(min_cos, cosine(head253(e.timbre), head253(back)));
      TimbreVector::Values shifted = e.timbre.values();
      shifted[kLogF0MeanSlot] += static_cast<float>(std::log(2.0));
      const TimbreVector up = encode(decode(e.content, TimbreVector(shifted))).timbre;
      const double ratio = std::exp(up.mean_log_f0() - e.timbre.mean_log_f0());
      worst_ratio_err = std::max(worst_ratio_err, std::abs(ratio / 2.0 - 1.0));
    }
    o.require(min_cos >= kCosineThreshold,
              fstr("min round-trip cosine %.4f", min_cos) + fstr(" >= %.2f", kCosineThreshold));
    o.require(worst_ratio_err <= 0.10, fstr("worst F0 doubling error %.1f%%", 100 * worst_ratio_err));
    return o;
  });

  TempDir work("acceptance");
  const fs::path corpus4 = voicemix::testing::write_corpus(
      voicemix::testing::micro_corpus(4, 3, 1), work.path() / "corpus4");
  const fs::path store4 = work.path() / "store4";
  build_timbre_store(corpus4, CodecBackend::reference(), store4);

  criterion(4, 120.0, [&] {
    Outcome o;
    RunConfig cfg;
    cfg.seed = kSeed;
    cfg.store_dir = store4;
    cfg.ratio = 0.33;
    cfg.output_dir = work.path() / "run033";
    const RunSummary small = run_augmentation(corpus4, cfg);
    o.require(small.emitted == 4 && read_manifest(small.manifest).size() == 16,
              "ratio 0.33 -> " + std::to_string(small.emitted) + " synthetic");
    cfg.ratio = 2.0;
    std::vector<fs::path> dirs;
    for (int workers : {1, 1, 4}) {
      cfg.workers = workers;
      cfg.output_dir = work.path() / ("run2_" + std::to_string(dirs.size()));
      const RunSummary big = run_augmentation(corpus4, cfg);
      if (dirs.empty()) {
        o.require(big.emitted == 24 && read_manifest(big.manifest).size() == 36,
                  "ratio 2.0 -> " + std::to_string(big.emitted) + " synthetic");
      }
      dirs.push_back(cfg.output_dir);
    }
    o.require(same_tree(dirs[0], dirs[1]), "same seed twice byte-identical");
    o.require(same_tree(dirs[0], dirs[2]), "1 vs 4 workers byte-identical");
    return o;
  });

  criterion(5, 60.0, [] {
    Outcome o;
    const auto entries = synthetic_entries(14, 5);
    const CorpusIndex corpus = index_of(entries);
    RunConfig cfg;
    cfg.seed = kSeed;
    cfg.ratio = 1000.0 / 70.0;
    std::size_t clean = 0, total = 0, same = 0, same_total = 0;
    for (const auto& job : plan_augmentation(entries, corpus, cfg)) {
      const AugmentationRecord r = planned_record(job, cfg);
      ++total;
      clean += audit_record(r).empty() && r.target_speaker != r.source_speaker &&
               r.mixup_speakers.size() == 1 && r.mixup_speakers[0] != r.source_speaker &&
               r.mixup_speakers[0] != r.target_speaker;
    }
    cfg.mixup.source_equals_target = true;
    for (const auto& job : plan_augmentation(entries, corpus, cfg)) {
      const AugmentationRecord r = planned_record(job, cfg);
      ++same_total;
      same += audit_record(r).empty() && r.target_speaker == r.source_speaker;
    }
    o.require(total == 1000 && clean == total,
              std::to_string(clean) + "/" + std::to_string(total) + " records distinct");
    o.require(same_total == 1000 && same == same_total,
              std::to_string(same) + "/" + std::to_string(same_total) +
                  " source=target records with target == source");
    return o;
  });

  criterion(6, 30.0, [&] {
    Outcome o;
    const TimbreStore store = TimbreStore::open(store4);
    std::vector<TimbreVector> originals;
    for (const auto& e : store.entries()) originals.push_back(store.timbre(e.utt_id));
    const Eigen::MatrixXd base = timbre_matrix(originals);
    const PcaModel model = fit_pca(base, 2);

    const fs::path mix_manifest = work.path() / "run2_0" / "manifest.jsonl";
    const Eigen::MatrixXd constructed = constructed_timbres(records_of(mix_manifest), store);
    const SpreadReport exact =
        spread_report(model, {{kOriginalGroup, base}, {"constructed", constructed}});
    o.require(exact.group("constructed").containment == 1.0,
              fstr("constructed containment %.3f", exact.group("constructed").containment));

    const Eigen::MatrixXd cov = sample_covariance(base);
    double residual = 0.0;
    for (Eigen::Index c = 0; c < model.rank(); ++c) {
      const Eigen::VectorXd v = model.components.col(c);
      residual = std::max(residual, (cov * v - model.explained_variance[c] * v).norm());
    }
    o.require(residual <= 1e-8, fstr("eigen residual %.2e", residual));

    Eigen::MatrixXd rank1 = Eigen::MatrixXd::Zero(4, kTimbreDim);
    const double pts[4] = {1, 2, 3, -1};
    for (int i = 0; i < 4; ++i) rank1(i, 0) = rank1(i, 1) = pts[i];
    const PcaModel r1 = fit_pca(rank1, 1);
    const double h = 1.0 / std::sqrt(2.0);
    Eigen::VectorXd expect = Eigen::VectorXd::Zero(kTimbreDim);
    expect[0] = expect[1] = h;
    const double pc_err = (r1.components.col(0) - expect).norm();
    o.require(pc_err < 1e-12 && std::abs(r1.explained_ratio()[0] - 1.0) < 1e-12,
              fstr("rank-1 PC1 error %.1e", pc_err) + fstr(", ratio %.6f", r1.explained_ratio()[0]));

    RunConfig wcfg;
    wcfg.seed = kSeed;
    wcfg.ratio = 2.0;
    wcfg.method = AugmentMethod::kWaveform;
    wcfg.output_dir = work.path() / "wave";
    const RunSummary wave = run_augmentation(corpus4, wcfg);
    const Eigen::MatrixXd mix_re = reextract(mix_manifest);
    const Eigen::MatrixXd wave_re = reextract(wave.manifest);
    const std::vector<TimbreGroup> groups = {
        {kOriginalGroup, base}, {"mixup", mix_re}, {"waveform", wave_re}};
    const SpreadReport soft = spread_report(model, groups);
    const double m_mix = soft.group("mixup").mean_mahalanobis;
    const double m_wave = soft.group("waveform").mean_mahalanobis;
    o.require(m_mix < m_wave, fstr("re-extracted Mahalanobis mixup %.2f", m_mix) +
                                  fstr(" < waveform %.2f", m_wave));

    emit_scatter(model, groups, work.path() / "fig_a");
    emit_scatter(model, groups, work.path() / "fig_b");
    o.require(voicemix::testing::same_bytes(work.path() / "fig_a.svg", work.path() / "fig_b.svg") &&
                  voicemix::testing::same_bytes(work.path() / "fig_a.csv",
                                                work.path() / "fig_b.csv"),
              "SVG/CSV byte-stable");
    return o;
  });

  criterion(7, 10.0, [] {
    Outcome o;
    // A 440 Hz burst over the middle half of 2 s of white noise, 0 dB overall.
    const Eigen::Index n = 32000;
    AudioClip clean = voicemix::testing::sine(440.0, 2.0, 1.0);
    clean.samples.head(n / 4).setZero();
    clean.samples.tail(n / 4).setZero();
    AudioClip noise = voicemix::testing::white_noise(n, kSeed, 1.0);
    const double scale = std::sqrt(clean.samples.squaredNorm() / noise.samples.squaredNorm());
    clean.samples *= 0.25;
    AudioClip noisy = clean;
    noisy.samples += 0.25 * scale * noise.samples;
    const AudioClip out = denoise(noisy);
    const double gain = snr_db(clean.samples, out.samples) - snr_db(clean.samples, noisy.samples);
    o.require(gain >= 5.0, fstr("SNR improvement %.2f dB", gain));
    o.require(out.samples.squaredNorm() <= 1.01 * noisy.samples.squaredNorm(),
              fstr("energy ratio %.3f", out.samples.squaredNorm() / noisy.samples.squaredNorm()));

    // Reported only: a tone that never stops is stationary, like the noise.
    AudioClip steady = voicemix::testing::sine(440.0, 2.0, 0.25);
    AudioClip steady_noisy = steady;
    const double s2 = std::sqrt(steady.samples.squaredNorm() / noise.samples.squaredNorm());
    steady_noisy.samples += s2 * noise.samples;
    const double steady_gain = snr_db(steady.samples, denoise(steady_noisy).samples) -
                               snr_db(steady.samples, steady_noisy.samples);
    o.detail += fstr("; continuous tone (reported) %.2f dB", steady_gain);
    return o;
  });

  criterion(8, 120.0, [&] {
    Outcome o;
    const fs::path corpus3 = voicemix::testing::write_corpus(
        voicemix::testing::micro_corpus(3, 5, 2), work.path() / "corpus3");
    const fs::path store3 = work.path() / "store3";
    build_timbre_store(corpus3, CodecBackend::reference(), store3);
    RunConfig cfg;
    cfg.seed = kSeed;
    cfg.ratio = 2.0;
    cfg.store_dir = store3;
    cfg.output_dir = work.path() / "proxy_run";
    const RunSummary run = run_augmentation(corpus3, cfg);
    const ProxyCorpus base = proxy_items_from_manifest(corpus3);
    const ProxyCorpus aug = proxy_items_from_manifest(run.manifest);
    const double without = proxy_eval(base.originals, {}).accuracy();
    const double with = proxy_eval(base.originals, aug.augmented).accuracy();
    o.require(with >= without, fstr("accuracy with mixup %.3f", with) +
                                   fstr(" >= without %.3f", without) +
                                   " (seed " + std::to_string(kSeed) + ")");
    return o;
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
