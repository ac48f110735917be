// include/voicemix/analysis.hpp

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
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "voicemix/codec.hpp"
#include "voicemix/manifest.hpp"

namespace voicemix {

/// Principal axes of a point set. `components` holds one unit column per
/// axis, ordered by decreasing variance; the largest-magnitude entry of each
/// column is positive.
struct PcaModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;          // dim x k
  Eigen::VectorXd explained_variance;  // k, descending
  double total_variance = 0.0;         // trace of the sample covariance

  Eigen::Index dim() const { return mean.size(); }
  Eigen::Index rank() const { return components.cols(); }
  Eigen::VectorXd explained_ratio() const;
};

/// Rows are observations. Covariance uses the n - 1 divisor. Throws
/// kTooFewVectors when rows < k + 1 and kInvalidArgument when k is out of
/// range.
PcaModel fit_pca(const Eigen::MatrixXd& rows, int k);

/// Sample covariance (n - 1 divisor) of the rows.
Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& rows);

/// Stacks timbres as rows.
Eigen::MatrixXd timbre_matrix(const std::vector<TimbreVector>& timbres);

/// (rows - mean) * components. Throws kDimensionMismatch.
Eigen::MatrixXd project(const PcaModel& model, const Eigen::MatrixXd& rows);

/// mean + coords * components^T.
Eigen::MatrixXd reconstruct(const PcaModel& model, const Eigen::MatrixXd& coords);

/// Counter-clockwise hull (monotone chain) without collinear points.
std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> points);

/// Inside or within `slack` of the boundary. Degenerate hulls (a point or a
/// segment) contain only points within `slack` of them.
bool hull_contains(const std::vector<Eigen::Vector2d>& hull, const Eigen::Vector2d& p,
                   double slack = 1e-9);

struct TimbreGroup {
  std::string name;
  Eigen::MatrixXd vectors;  // rows
};

inline constexpr const char* kOriginalGroup = "original";
inline constexpr double kMahalanobisRidge = 1e-6;

struct GroupSpread {
  std::string name;
  std::size_t count = 0;
  double weighted_variance = 0.0;  // PC1/PC2 variances weighted by explained share
  double mean_mahalanobis = 0.0;   // to the original group, in the PC1/PC2 plane
  double containment = 0.0;        // share inside the originals' 2D hull
};

struct SpreadReport {
  Eigen::Vector2d explained_ratio = Eigen::Vector2d::Zero();
  std::vector<GroupSpread> groups;

  const GroupSpread& group(const std::string& name) const;
  Json to_json() const;
};

/// Needs a model with at least two components and a group named
/// "original" with at least 3 points. Throws kTooFewVectors.
SpreadReport spread_report(const PcaModel& model, const std::vector<TimbreGroup>& groups);

/// Writes <prefix>.svg (PC1/PC2 scatter, one marker per group) and
/// <prefix>.csv (group,index,pc1,pc2). Output depends only on the inputs.
/// Throws kInvalidArgument for an empty group list and kUnwritablePath.
void emit_scatter(const PcaModel& model, const std::vector<TimbreGroup>& groups,
                  const std::filesystem::path& prefix);

}  // namespace voicemix
