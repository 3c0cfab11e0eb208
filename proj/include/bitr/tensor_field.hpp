#pragma once

#include <map>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "bitr/rep_theory.hpp"

namespace bitr {

using Cloud3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;

// Element of SE(3) acting as x -> r x + t.
struct RigidTransform {
  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }

  Eigen::Vector3d apply(const Eigen::Vector3d& x) const { return r * x + t; }
  // Applies to every row of an N x 3 matrix.
  Cloud3 apply(const Cloud3& x) const;

  // Throws InvalidArgument unless r^T r = I and det r = 1 to tol.
  void validate(double tol = 1e-9) const;
};

// Independent pair acting on the source and reference halves.
struct BiRigid {
  RigidTransform g1;
  RigidTransform g2;
};

Eigen::Matrix4d homogeneous_matrix(const RigidTransform& g);
RigidTransform from_homogeneous(const Eigen::Matrix4d& m);
// compose(a, b) = a o b.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& g);
// Frobenius norm of the difference of homogeneous matrices.
double relative_error(const RigidTransform& a, const RigidTransform& b);

// Raw 3-D points, optionally with one unit normal per point.
struct PointCloud {
  Cloud3 points;
  std::optional<Cloud3> normals;

  Eigen::Index size() const { return points.rows(); }
  bool has_normals() const { return normals.has_value(); }
  // Throws InvalidArgument on an empty cloud or a normals row mismatch.
  void validate() const;

  PointCloud transformed(const RigidTransform& g) const;
  PointCloud scaled(double c) const;
  // Rows reordered so that row k of the result is row perm[k] of this.
  PointCloud permuted(const std::vector<int>& perm) const;
};

struct Point6 {
  Eigen::Vector3d z1 = Eigen::Vector3d::Zero();
  Eigen::Vector3d z2 = Eigen::Vector3d::Zero();

  Eigen::Matrix<double, 6, 1> stacked() const {
    Eigen::Matrix<double, 6, 1> z;
    z << z1, z2;
    return z;
  }
  friend Point6 operator-(const Point6& a, const Point6& b) {
    return {a.z1 - b.z1, a.z2 - b.z2};
  }
};

// All degree-(p, q) features of a field. Rows are point-major: row
// u * channels + c holds channel c at point u. Each row is the column-major
// vec of a (2q+1) x (2p+1) matrix A, so it transforms as D_q(r2) A D_p(r1)^T.
// Equivalently, entry a * (2q+1) + b pairs first-factor index a with
// second-factor index b.
struct FeatureBlock {
  BiDegree degree;
  int channels = 0;
  Eigen::MatrixXd data;

  FeatureBlock() = default;
  FeatureBlock(BiDegree d, int c, Eigen::Index points);

  Eigen::Index num_points() const { return channels > 0 ? data.rows() / channels : 0; }
  auto at(Eigen::Index u) { return data.middleRows(u * channels, channels); }
  auto at(Eigen::Index u) const { return data.middleRows(u * channels, channels); }
};

using DegreeChannels = std::map<BiDegree, int>;

// Features of several degrees attached to a set of 6-D points.
struct TensorField {
  std::vector<Point6> points;
  std::map<BiDegree, FeatureBlock> blocks;

  Eigen::Index size() const { return static_cast<Eigen::Index>(points.size()); }
  bool has(BiDegree d) const { return blocks.count(d) != 0; }
  const FeatureBlock& block(BiDegree d) const;
  FeatureBlock& block(BiDegree d);
  DegreeChannels degrees() const;

  // Adds a zero-filled block; throws if the degree is already present.
  FeatureBlock& add_block(BiDegree d, int channels);
  // Throws InvalidArgument when a block does not cover every point or has
  // the wrong width.
  void validate() const;
};

// Embeds 3-D points as z = x (+) 0.
std::vector<Point6> embed_points(const Cloud3& x);

// (g1 x g2) f: points move to (g1 z1) (+) (g2 z2) and each degree-(p, q)
// block is multiplied by D_p(r1) (x) D_q(r2).
TensorField act_bi_rigid(const BiRigid& g, const TensorField& f);

// Swap action: points become z2 (+) z1 and the degree-(p, q) output block
// is the transpose of the degree-(q, p) input block.
TensorField act_swap(const TensorField& f);

// Scale action on a degree-p R+ field: points times c, values times c^p.
TensorField act_scale(double c, int p, const TensorField& f);

// Frobenius distance between two fields with identical layout (points and
// blocks). Throws on layout mismatch.
double field_distance(const TensorField& a, const TensorField& b);

}  // namespace bitr
