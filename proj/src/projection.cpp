#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "bitr/assembly.hpp"
#include "bitr/errors.hpp"

namespace bitr {
namespace {

constexpr double kGapTolerance = 1e-9;

Eigen::Vector3d block_mean(const FeatureBlock& b) {
  if (b.channels != 1 || b.degree.dim() != 3) {
    throw InvalidArgument("expected a single-channel 3-dimensional block");
  }
  return b.data.colwise().mean().transpose();
}

struct NearestNeighbors {
  std::vector<int> index;
  double mse = 0.0;
};

NearestNeighbors nearest(const Cloud3& moved, const Cloud3& target) {
  NearestNeighbors nn;
  nn.index.resize(static_cast<std::size_t>(moved.rows()));
  double total = 0.0;
  for (Eigen::Index i = 0; i < moved.rows(); ++i) {
    const Eigen::RowVector3d p = moved.row(i);
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (Eigen::Index j = 0; j < target.rows(); ++j) {
      const double d = (target.row(j) - p).squaredNorm();
      if (d < best) {
        best = d;
        arg = static_cast<int>(j);
      }
    }
    nn.index[static_cast<std::size_t>(i)] = arg;
    total += best;
  }
  nn.mse = total / static_cast<double>(moved.rows());
  return nn;
}

}  // namespace

Eigen::Matrix3d svd_project(const Eigen::Matrix3d& a) {
  if (!a.allFinite()) throw InvalidArgument("svd_project: non-finite input");
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d s = svd.singularValues();
  if (!(s(1) - s(2) > kGapTolerance * s(0))) {
    throw DegenerateSpectrum("svd_project: sigma2 - sigma3 = " + std::to_string(s(1) - s(2)) +
                                 " is not above 1e-9 * sigma1; the projection is not unique",
                             s(1), s(2));
  }
  const Eigen::Matrix3d& u = svd.matrixU();
  const Eigen::Matrix3d& v = svd.matrixV();
  Eigen::Vector3d flip(1.0, 1.0, (u * v.transpose()).determinant() < 0.0 ? -1.0 : 1.0);
  return u * flip.asDiagonal() * v.transpose();
}

RigidTransform arun_solve(const Cloud3& x, const Cloud3& y) {
  if (x.rows() != y.rows()) {
    throw InvalidArgument("arun_solve: " + std::to_string(x.rows()) + " source points vs " +
                          std::to_string(y.rows()) + " reference points");
  }
  if (x.rows() < 3) throw InvalidArgument("arun_solve: needs at least 3 correspondences");
  const Eigen::RowVector3d mx = x.colwise().mean();
  const Eigen::RowVector3d my = y.colwise().mean();
  const Eigen::Matrix3d corr = (y.rowwise() - my).transpose() * (x.rowwise() - mx);
  RigidTransform g;
  g.r = svd_project(corr);
  g.t = my.transpose() - g.r * mx.transpose();
  return g;
}

AssemblyResult se3_project(const TensorField& f, const Cloud3& x, const Cloud3& y) {
  if (!f.has({1, 1}) || !f.has({1, 0}) || !f.has({0, 1})) {
    throw InvalidArgument("se3_project needs degrees (1,1), (1,0) and (0,1)");
  }
  if (f.block({1, 1}).channels != 1) {
    throw InvalidArgument("se3_project expects one (1,1) channel");
  }
  AssemblyResult res;
  const Eigen::VectorXd r_vec = f.block({1, 1}).data.colwise().mean().transpose();
  res.r_hat = Eigen::Map<const Eigen::Matrix3d>(r_vec.data());
  res.t_x = block_mean(f.block({1, 0}));
  res.t_y = block_mean(f.block({0, 1}));
  res.keypoints_x = x;
  res.keypoints_y = y;

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(res.r_hat);
  res.singular_values = svd.singularValues();
  const double s1 = res.singular_values(0);
  res.spectral_gap = s1 > 0.0 ? (res.singular_values(1) - res.singular_values(2)) / s1 : 0.0;
  res.near_degenerate = res.spectral_gap < 1e-6;

  res.g.r = svd_project(res.r_hat);
  const Eigen::Vector3d mx = x.colwise().mean().transpose() + res.t_x;
  const Eigen::Vector3d my = y.colwise().mean().transpose() + res.t_y;
  res.g.t = my - res.g.r * mx;
  return res;
}

IcpResult icp_refine(const PointCloud& x, const PointCloud& y, const RigidTransform& g0,
                     int max_iter, double tol) {
  x.validate();
  y.validate();
  IcpResult res;
  res.g = g0;
  NearestNeighbors nn = nearest(g0.apply(x.points), y.points);
  res.initial_mse = res.final_mse = nn.mse;
  if (x.size() < 3) return res;

  RigidTransform current = g0;
  double current_mse = nn.mse;
  Cloud3 matched(x.size(), 3);
  for (int it = 0; it < max_iter; ++it) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      matched.row(i) = y.points.row(nn.index[static_cast<std::size_t>(i)]);
    }
    try {
      current = arun_solve(x.points, matched);
    } catch (const DegenerateSpectrum&) {
      break;
    }
    nn = nearest(current.apply(x.points), y.points);
    res.iterations = it + 1;
    if (nn.mse < res.final_mse) {
      res.final_mse = nn.mse;
      res.g = current;
    }
    if (current_mse - nn.mse < tol) break;
    current_mse = nn.mse;
  }
  return res;
}

}  // namespace bitr
