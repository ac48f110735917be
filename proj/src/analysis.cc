// src/analysis.cc

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

#include "voicemix/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "voicemix/errors.hpp"

namespace voicemix {

namespace {

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr double kSvgWidth = 640.0;
constexpr double kSvgHeight = 480.0;
constexpr double kMargin = 60.0;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
constexpr int kPaletteSize = 8;

double cross(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

double segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                        const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + t * ab - p).norm();
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string marker(int style, double x, double y, const char* color) {
  const double r = 4.0;
  std::ostringstream s;
  switch (style % 4) {
    case 0:
      s << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"" << num(r)
        << "\" fill=\"" << color << "\"/>";
      break;
    case 1:
      s << "<rect x=\"" << num(x - r) << "\" y=\"" << num(y - r) << "\" width=\""
        << num(2 * r) << "\" height=\"" << num(2 * r) << "\" fill=\"" << color << "\"/>";
      break;
    case 2:
      s << "<polygon points=\"" << num(x) << "," << num(y - r) << " " << num(x - r) << ","
        << num(y + r) << " " << num(x + r) << "," << num(y + r) << "\" fill=\"" << color
        << "\"/>";
      break;
    default:
      s << "<polygon points=\"" << num(x) << "," << num(y - r) << " " << num(x + r) << ","
        << num(y) << " " << num(x) << "," << num(y + r) << " " << num(x - r) << ","
        << num(y) << "\" fill=\"" << color << "\"/>";
  }
  return s.str();
}

}  // namespace

Eigen::VectorXd PcaModel::explained_ratio() const {
  return total_variance > 0.0 ? Eigen::VectorXd(explained_variance / total_variance)
                              : Eigen::VectorXd::Zero(explained_variance.size());
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& rows) {
  const Eigen::RowVectorXd mean = rows.colwise().mean();
  const Eigen::MatrixXd centered = rows.rowwise() - mean;
  return (centered.transpose() * centered) / static_cast<double>(rows.rows() - 1);
}

PcaModel fit_pca(const Eigen::MatrixXd& rows, int k) {
  if (k < 1 || k > rows.cols()) {
    throw Error(ErrorKind::kInvalidArgument, "component count out of range");
  }
  if (rows.rows() < k + 1) {
    throw Error(ErrorKind::kTooFewVectors, "PCA with " + std::to_string(k) +
                                               " components needs at least " +
                                               std::to_string(k + 1) + " vectors");
  }
  const Eigen::MatrixXd cov = sample_covariance(rows);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::kInvalidArgument, "covariance eigendecomposition failed");
  }
  const Eigen::Index dim = rows.cols();

  PcaModel model;
  model.mean = rows.colwise().mean().transpose();
  model.total_variance = cov.trace();
  model.components.resize(dim, k);
  model.explained_variance.resize(k);
  // Eigenvalues come back ascending.
  for (int c = 0; c < k; ++c) {
    const Eigen::Index src = dim - 1 - c;
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) v = -v;
    model.components.col(c) = v;
    model.explained_variance[c] = std::max(0.0, solver.eigenvalues()[src]);
  }
  return model;
}

Eigen::MatrixXd timbre_matrix(const std::vector<TimbreVector>& timbres) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(timbres.size()), kTimbreDim);
  for (std::size_t i = 0; i < timbres.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = timbres[i].values().cast<double>().transpose();
  }
  return out;
}

Eigen::MatrixXd project(const PcaModel& model, const Eigen::MatrixXd& rows) {
  if (rows.cols() != model.dim()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "vectors have " + std::to_string(rows.cols()) + " dims, model has " +
                    std::to_string(model.dim()));
  }
  return (rows.rowwise() - model.mean.transpose()) * model.components;
}

Eigen::MatrixXd reconstruct(const PcaModel& model, const Eigen::MatrixXd& coords) {
  if (coords.cols() != model.rank()) {
    throw Error(ErrorKind::kDimensionMismatch, "coordinate count differs from model rank");
  }
  return (coords * model.components.transpose()).rowwise() + model.mean.transpose();
}

std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> pts) {
  std::sort(pts.begin(), pts.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Eigen::Vector2d> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

bool hull_contains(const std::vector<Eigen::Vector2d>& hull, const Eigen::Vector2d& p,
                   double slack) {
  if (hull.empty()) return false;
  if (hull.size() == 1) return (hull[0] - p).norm() <= slack;
  if (hull.size() == 2) return segment_distance(p, hull[0], hull[1]) <= slack;
  bool inside = true;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    if (cross(a, b, p) < 0.0) {
      inside = false;
      break;
    }
  }
  if (inside) return true;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    if (segment_distance(p, hull[i], hull[(i + 1) % hull.size()]) <= slack) return true;
  }
  return false;
}

const GroupSpread& SpreadReport::group(const std::string& name) const {
  for (const auto& g : groups) {
    if (g.name == name) return g;
  }
  throw Error(ErrorKind::kInvalidArgument, "no group named " + name);
}

Json SpreadReport::to_json() const {
  Json j;
  j["explained_ratio"] = {explained_ratio[0], explained_ratio[1]};
  Json list = Json::array();
  for (const auto& g : groups) {
    list.push_back({{"name", g.name},
                    {"count", g.count},
                    {"weighted_variance", g.weighted_variance},
                    {"mean_mahalanobis", g.mean_mahalanobis},
                    {"containment", g.containment}});
  }
  j["groups"] = std::move(list);
  return j;
}

SpreadReport spread_report(const PcaModel& model, const std::vector<TimbreGroup>& groups) {
  if (model.rank() < 2) {
    throw Error(ErrorKind::kTooFewVectors, "spread analysis needs two components");
  }
  const TimbreGroup* original = nullptr;
  for (const auto& g : groups) {
    if (g.name == kOriginalGroup) original = &g;
  }
  if (original == nullptr || original->vectors.rows() < 3) {
    throw Error(ErrorKind::kTooFewVectors, "need an \"original\" group with at least 3 points");
  }

  const Eigen::MatrixXd base = project(model, original->vectors).leftCols(2);
  std::vector<Eigen::Vector2d> base_points;
  for (Eigen::Index i = 0; i < base.rows(); ++i) base_points.emplace_back(base.row(i));
  const auto hull = convex_hull(base_points);
  const Eigen::Vector2d base_mean = base.colwise().mean();
  const Eigen::Matrix2d base_cov =
      sample_covariance(base) + kMahalanobisRidge * Eigen::Matrix2d::Identity();
  const Eigen::LDLT<Eigen::Matrix2d> base_ldlt(base_cov);

  SpreadReport report;
  const Eigen::Vector2d ev = model.explained_variance.head<2>();
  const Eigen::Vector2d weight = ev.sum() > 0.0 ? Eigen::Vector2d(ev / ev.sum())
                                                : Eigen::Vector2d(0.5, 0.5);
  report.explained_ratio = model.explained_ratio().head<2>();
  for (const auto& g : groups) {
    GroupSpread s;
    s.name = g.name;
    s.count = static_cast<std::size_t>(g.vectors.rows());
    if (s.count > 0) {
      const Eigen::MatrixXd pts = project(model, g.vectors).leftCols(2);
      const Eigen::RowVector2d mu = pts.colwise().mean();
      const Eigen::RowVector2d var = (pts.rowwise() - mu).array().square().colwise().mean();
      s.weighted_variance = var.dot(weight.transpose());
      std::size_t inside = 0;
      double maha = 0.0;
      for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        const Eigen::Vector2d p = pts.row(i).transpose();
        const Eigen::Vector2d d = p - base_mean;
        maha += std::sqrt(std::max(0.0, d.dot(base_ldlt.solve(d))));
        inside += hull_contains(hull, p);
      }
      s.mean_mahalanobis = maha / static_cast<double>(s.count);
      s.containment = static_cast<double>(inside) / static_cast<double>(s.count);
    }
    report.groups.push_back(std::move(s));
  }
  return report;
}

void emit_scatter(const PcaModel& model, const std::vector<TimbreGroup>& groups,
                  const std::filesystem::path& prefix) {
  if (groups.empty()) throw Error(ErrorKind::kInvalidArgument, "no groups to plot");
  if (model.rank() < 2) {
    throw Error(ErrorKind::kTooFewVectors, "scatter needs two components");
  }
  std::vector<Eigen::MatrixXd> coords;
  Eigen::Vector2d lo = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector2d hi = -lo;
  for (const auto& g : groups) {
    coords.push_back(project(model, g.vectors).leftCols(2));
    if (coords.back().rows() > 0) {
      lo = lo.cwiseMin(coords.back().colwise().minCoeff().transpose());
      hi = hi.cwiseMax(coords.back().colwise().maxCoeff().transpose());
    }
  }
  if (!lo.allFinite()) {
    lo.setConstant(-1.0);
    hi.setConstant(1.0);
  }
  const Eigen::Vector2d span = (hi - lo).cwiseMax(1e-12);
  const double plot_w = kSvgWidth - 2 * kMargin;
  const double plot_h = kSvgHeight - 2 * kMargin;
  auto sx = [&](double x) { return kMargin + plot_w * (x - lo.x()) / span.x(); };
  auto sy = [&](double y) { return kSvgHeight - kMargin - plot_h * (y - lo.y()) / span.y(); };
  const Eigen::VectorXd ratio = model.explained_ratio();

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kSvgWidth)
      << "\" height=\"" << num(kSvgHeight) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<rect x=\"" << num(kMargin) << "\" y=\"" << num(kMargin) << "\" width=\""
      << num(plot_w) << "\" height=\"" << num(plot_h)
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << num(kSvgWidth / 2) << "\" y=\"" << num(kSvgHeight - 20)
      << "\" text-anchor=\"middle\">PC1 (" << num(100.0 * ratio[0]) << "%)</text>\n";
  svg << "<text x=\"20\" y=\"" << num(kSvgHeight / 2) << "\" text-anchor=\"middle\" "
      << "transform=\"rotate(-90 20 " << num(kSvgHeight / 2) << ")\">PC2 ("
      << num(100.0 * ratio[1]) << "%)</text>\n";

  std::ostringstream csv;
  csv << "group,index,pc1,pc2\n";
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const char* color = kPalette[g % kPaletteSize];
    const auto style = static_cast<int>(g);
    svg << "<g id=\"group-" << g << "\">\n";
    for (Eigen::Index i = 0; i < coords[g].rows(); ++i) {
      const double x = coords[g](i, 0);
      const double y = coords[g](i, 1);
      svg << marker(style, sx(x), sy(y), color) << "\n";
      char row[96];
      std::snprintf(row, sizeof row, ",%lld,%.9g,%.9g\n", static_cast<long long>(i), x, y);
      csv << groups[g].name << row;
    }
    svg << "</g>\n";
    const double ly = kMargin + 16.0 * static_cast<double>(g) + 10.0;
    const double lx = kSvgWidth - kMargin - 120.0;
    svg << marker(style, lx, ly, color) << "<text x=\"" << num(lx + 10) << "\" y=\""
        << num(ly + 4) << "\">" << xml_escape(groups[g].name) << "</text>\n";
  }
  svg << "</svg>\n";

  auto write = [](const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kUnwritablePath, path.string());
    out << text;
    if (!out) throw Error(ErrorKind::kUnwritablePath, path.string());
  };
  std::filesystem::path svg_path = prefix;
  svg_path += ".svg";
  std::filesystem::path csv_path = prefix;
  csv_path += ".csv";
  write(svg_path, svg.str());
  write(csv_path, csv.str());
}

}  // namespace voicemix
