#include "bitr/tensor_field.hpp"

#include <cmath>
#include <string>
#include <utility>

#include <Eigen/LU>

#include "bitr/errors.hpp"

namespace bitr {

Cloud3 RigidTransform::apply(const Cloud3& x) const {
  Cloud3 out = x * r.transpose();
  out.rowwise() += t.transpose();
  return out;
}

void RigidTransform::validate(double tol) const {
  const double orth = (r.transpose() * r - Eigen::Matrix3d::Identity()).norm();
  if (!(orth <= tol) || !(std::abs(r.determinant() - 1.0) <= tol) ||
      !t.allFinite()) {
    throw InvalidArgument("not a rigid transform (orthogonality error " +
                          std::to_string(orth) + ", det " +
                          std::to_string(r.determinant()) + ")");
  }
}

Eigen::Matrix4d homogeneous_matrix(const RigidTransform& g) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = g.r;
  m.topRightCorner<3, 1>() = g.t;
  return m;
}

RigidTransform from_homogeneous(const Eigen::Matrix4d& m) {
  const Eigen::RowVector4d bottom = m.row(3);
  if ((bottom - Eigen::RowVector4d(0, 0, 0, 1)).norm() > 1e-12) {
    throw InvalidArgument("homogeneous matrix must end with row [0 0 0 1]");
  }
  RigidTransform g{m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
  g.validate();
  return g;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return {a.r * b.r, a.r * b.t + a.t};
}

RigidTransform invert(const RigidTransform& g) {
  return {g.r.transpose(), -(g.r.transpose() * g.t)};
}

double relative_error(const RigidTransform& a, const RigidTransform& b) {
  return (homogeneous_matrix(a) - homogeneous_matrix(b)).norm();
}

void PointCloud::validate() const {
  if (points.rows() == 0) throw InvalidArgument("point cloud is empty");
  if (normals && normals->rows() != points.rows()) {
    throw InvalidArgument("normals count " + std::to_string(normals->rows()) +
                          " does not match point count " +
                          std::to_string(points.rows()));
  }
}

PointCloud PointCloud::transformed(const RigidTransform& g) const {
  PointCloud out{g.apply(points), std::nullopt};
  if (normals) out.normals = Cloud3(*normals * g.r.transpose());
  return out;
}

PointCloud PointCloud::scaled(double c) const {
  return {points * c, normals};
}

PointCloud PointCloud::permuted(const std::vector<int>& perm) const {
  if (static_cast<Eigen::Index>(perm.size()) != size()) {
    throw InvalidArgument("permutation length does not match cloud size");
  }
  PointCloud out{Cloud3(size(), 3), std::nullopt};
  if (normals) out.normals = Cloud3(size(), 3);
  for (Eigen::Index k = 0; k < size(); ++k) {
    out.points.row(k) = points.row(perm[k]);
    if (normals) out.normals->row(k) = normals->row(perm[k]);
  }
  return out;
}

FeatureBlock::FeatureBlock(BiDegree d, int c, Eigen::Index points)
    : degree(d), channels(c), data(Eigen::MatrixXd::Zero(points * c, d.dim())) {
  if (c <= 0) throw InvalidArgument("feature block needs at least one channel");
}

const FeatureBlock& TensorField::block(BiDegree d) const {
  auto it = blocks.find(d);
  if (it == blocks.end()) {
    throw InvalidArgument("field has no degree (" + std::to_string(d.p) + "," +
                          std::to_string(d.q) + ") block");
  }
  return it->second;
}

FeatureBlock& TensorField::block(BiDegree d) {
  return const_cast<FeatureBlock&>(std::as_const(*this).block(d));
}

DegreeChannels TensorField::degrees() const {
  DegreeChannels out;
  for (const auto& [d, b] : blocks) out[d] = b.channels;
  return out;
}

FeatureBlock& TensorField::add_block(BiDegree d, int channels) {
  check_degree(d.p);
  check_degree(d.q);
  auto [it, inserted] = blocks.emplace(d, FeatureBlock(d, channels, size()));
  if (!inserted) throw InvalidArgument("degree block added twice");
  return it->second;
}

void TensorField::validate() const {
  for (const auto& [d, b] : blocks) {
    if (b.degree != d || b.data.cols() != d.dim() ||
        b.data.rows() != size() * b.channels) {
      throw InvalidArgument("feature block (" + std::to_string(d.p) + "," +
                            std::to_string(d.q) +
                            ") does not match the field layout");
    }
  }
}

std::vector<Point6> embed_points(const Cloud3& x) {
  std::vector<Point6> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index u = 0; u < x.rows(); ++u) {
    out[static_cast<std::size_t>(u)].z1 = x.row(u).transpose();
  }
  return out;
}

TensorField act_bi_rigid(const BiRigid& g, const TensorField& f) {
  TensorField out;
  out.points.reserve(f.points.size());
  for (const Point6& z : f.points) {
    out.points.push_back({g.g1.apply(z.z1), g.g2.apply(z.z2)});
  }
  for (const auto& [d, b] : f.blocks) {
    FeatureBlock moved = b;
    // Each row v becomes (D v)^T = v^T D^T.
    moved.data = b.data * bi_wigner_d(d, g.g1.r, g.g2.r).transpose();
    out.blocks.emplace(d, std::move(moved));
  }
  return out;
}

TensorField act_swap(const TensorField& f) {
  TensorField out;
  out.points.reserve(f.points.size());
  for (const Point6& z : f.points) out.points.push_back({z.z2, z.z1});
  for (const auto& [d, b] : f.blocks) {
    // Input degree d = (p, q) lands in output degree (q, p).
    const BiDegree target = d.swapped();
    FeatureBlock moved(target, b.channels, f.size());
    const int dp = irrep_dim(d.p), dq = irrep_dim(d.q);
    for (int a = 0; a < dp; ++a) {
      for (int c = 0; c < dq; ++c) {
        moved.data.col(c * dp + a) = b.data.col(a * dq + c);
      }
    }
    out.blocks.emplace(target, std::move(moved));
  }
  return out;
}

TensorField act_scale(double c, int p, const TensorField& f) {
  if (!(c > 0.0)) throw InvalidArgument("scale factor must be positive");
  if (p < 0) throw InvalidArgument("scale degree must be non-negative");
  TensorField out;
  out.points.reserve(f.points.size());
  for (const Point6& z : f.points) out.points.push_back({c * z.z1, c * z.z2});
  const double factor = std::pow(c, p);
  for (const auto& [d, b] : f.blocks) {
    FeatureBlock scaled = b;
    scaled.data *= factor;
    out.blocks.emplace(d, std::move(scaled));
  }
  return out;
}

double field_distance(const TensorField& a, const TensorField& b) {
  if (a.points.size() != b.points.size() || a.degrees() != b.degrees()) {
    throw InvalidArgument("field_distance: fields have different layouts");
  }
  double sq = 0.0;
  for (std::size_t u = 0; u < a.points.size(); ++u) {
    sq += (a.points[u].stacked() - b.points[u].stacked()).squaredNorm();
  }
  for (const auto& [d, blk] : a.blocks) {
    sq += (blk.data - b.block(d).data).squaredNorm();
  }
  return std::sqrt(sq);
}

}  // namespace bitr
