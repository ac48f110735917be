// tests/unit/analysis_test.cc

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

#include <fstream>

#include <gtest/gtest.h>

#include "support/synth.hpp"
#include "voicemix/analysis.hpp"
#include "voicemix/errors.hpp"

namespace voicemix {
namespace {

using testing::TempDir;

Eigen::MatrixXd cloud(int n, int dim, unsigned seed) {
  std::srand(seed);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(n, dim);
  x.col(0) *= 5.0;
  x.col(1) *= 2.0;
  return x;
}

TEST(Pca, ComponentsAreOrthonormalEigenvectors) {
  const Eigen::MatrixXd x = cloud(50, 6, 1);
  const PcaModel m = fit_pca(x, 3);
  EXPECT_LT((m.components.transpose() * m.components - Eigen::MatrixXd::Identity(3, 3))
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
  const Eigen::MatrixXd cov = sample_covariance(x);
  for (int c = 0; c < 3; ++c) {
    EXPECT_LT((cov * m.components.col(c) - m.explained_variance[c] * m.components.col(c)).norm(),
              1e-10);
    Eigen::Index arg;
    m.components.col(c).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(m.components(arg, c), 0.0);
  }
  EXPECT_GE(m.explained_variance[0], m.explained_variance[1]);
  EXPECT_NEAR(m.total_variance, cov.trace(), 1e-12);
  EXPECT_LE(m.explained_ratio().sum(), 1.0 + 1e-12);
}

TEST(Pca, CovarianceMatchesDefinition) {
  Eigen::MatrixXd x(3, 2);
  x << 1, 2, 3, 4, 5, 9;
  const Eigen::MatrixXd c = sample_covariance(x);
  EXPECT_DOUBLE_EQ(c(0, 0), 4.0);
  EXPECT_DOUBLE_EQ(c(0, 1), 7.0);
  EXPECT_NEAR(c(1, 1), 13.0, 1e-12);
}

TEST(Pca, ProjectReconstructFullRank) {
  const Eigen::MatrixXd x = cloud(20, 4, 2);
  const PcaModel m = fit_pca(x, 4);
  EXPECT_LT((reconstruct(m, project(m, x)) - x).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_THROW(project(m, Eigen::MatrixXd::Zero(2, 3)), Error);
}

TEST(Pca, Errors) {
  try {
    fit_pca(Eigen::MatrixXd::Zero(2, 5), 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kTooFewVectors);
  }
  EXPECT_THROW(fit_pca(Eigen::MatrixXd::Zero(10, 3), 4), Error);
}

TEST(Hull, SquareWithInteriorAndCollinearPoints) {
  std::vector<Eigen::Vector2d> pts = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}, {0.5, 0}};
  const auto hull = convex_hull(pts);
  EXPECT_EQ(hull.size(), 4u);
  EXPECT_TRUE(hull_contains(hull, {0.5, 0.5}));
  EXPECT_TRUE(hull_contains(hull, {1.0, 0.3}));
  EXPECT_FALSE(hull_contains(hull, {1.01, 0.3}));
  // Counter-clockwise orientation.
  double area = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    area += a.x() * b.y() - b.x() * a.y();
  }
  EXPECT_GT(area, 0.0);
}

TEST(Hull, DegenerateHulls) {
  const auto seg = convex_hull({{0, 0}, {2, 2}, {1, 1}});
  EXPECT_TRUE(hull_contains(seg, {1.5, 1.5}));
  EXPECT_FALSE(hull_contains(seg, {1.5, 1.0}));
  const auto point = convex_hull({{1, 1}, {1, 1}});
  EXPECT_TRUE(hull_contains(point, {1, 1}));
  EXPECT_FALSE(hull_contains(point, {1, 1.1}));
}

TEST(Spread, SubsetOfOriginalsIsContained) {
  const Eigen::MatrixXd base = cloud(30, 5, 3);
  const PcaModel m = fit_pca(base, 2);
  const Eigen::MatrixXd mids = 0.5 * (base.topRows(10) + base.bottomRows(10));
  const Eigen::MatrixXd far = base.topRows(5).array() * 10.0;
  const SpreadReport r =
      spread_report(m, {{kOriginalGroup, base}, {"mid", mids}, {"far", far}});
  EXPECT_DOUBLE_EQ(r.group("mid").containment, 1.0);
  EXPECT_LT(r.group("far").containment, 1.0);
  EXPECT_GT(r.group("far").mean_mahalanobis, r.group("mid").mean_mahalanobis);
  EXPECT_LT(r.group("mid").weighted_variance, r.group(kOriginalGroup).weighted_variance);
  EXPECT_EQ(r.to_json()["groups"].size(), 3u);
}

TEST(Spread, NeedsOriginalGroup) {
  const Eigen::MatrixXd base = cloud(30, 5, 4);
  const PcaModel m = fit_pca(base, 2);
  EXPECT_THROW(spread_report(m, {{"other", base}}), Error);
}

TEST(Scatter, WritesSvgAndCsv) {
  TempDir dir("fig");
  const Eigen::MatrixXd base = cloud(12, 5, 5);
  const PcaModel m = fit_pca(base, 2);
  emit_scatter(m, {{kOriginalGroup, base}, {"a<b&c", base.topRows(3)}}, dir.path() / "f");
  std::ifstream csv(dir.path() / "f.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "group,index,pc1,pc2");
  int rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  EXPECT_EQ(rows, 15);
  std::ifstream svg(dir.path() / "f.svg");
  const std::string text((std::istreambuf_iterator<char>(svg)), std::istreambuf_iterator<char>());
  EXPECT_EQ(text.rfind("<svg", 0) == 0 || text.rfind("<?xml", 0) == 0, true);
  EXPECT_NE(text.find("a&lt;b&amp;c"), std::string::npos);
  EXPECT_THROW(emit_scatter(m, {}, dir.path() / "g"), Error);
}

}  // namespace
}  // namespace voicemix
