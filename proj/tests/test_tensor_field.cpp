#include <doctest.h>

#include <Eigen/LU>

#include "bitr/errors.hpp"
#include "bitr/tensor_field.hpp"
#include "support.hpp"

using namespace bitr;
using namespace bitr::test;

namespace {

// Degree-(1,1) feature as the 3x3 matrix A whose column-major vec it is.
Eigen::Matrix3d unvec(const Eigen::RowVectorXd& row) {
  return Eigen::Map<const Eigen::Matrix3d>(row.data());
}

BiRigid random_pair(Rng& rng) { return {random_transform(rng), random_transform(rng)}; }

BiRigid rotations_only(Rng& rng) {
  return {{random_rotation(rng), Eigen::Vector3d::Zero()}, {random_rotation(rng), Eigen::Vector3d::Zero()}};
}

const DegreeChannels kMixed{{{0, 0}, 2}, {{1, 0}, 1}, {{0, 1}, 1}, {{1, 1}, 2}, {{2, 1}, 1}, {{1, 2}, 1}};

}  // namespace

TEST_CASE("identity pair leaves a field unchanged") {
  Rng rng(1);
  const TensorField f = random_field(6, kMixed, rng);
  CHECK(field_distance(act_bi_rigid({}, f), f) < 1e-12);
}

TEST_CASE("degree-(1,1) features transform as r2 A r1^T") {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const TensorField f = random_field(1, {{{1, 1}, 1}}, rng);
    const BiRigid g = random_pair(rng);
    const TensorField moved = act_bi_rigid(g, f);
    const Eigen::Matrix3d a = unvec(f.block({1, 1}).data.row(0));
    const Eigen::Matrix3d b = unvec(moved.block({1, 1}).data.row(0));
    REQUIRE((b - g.g2.r * a * g.g1.r.transpose()).norm() < 1e-12);
  }
}

TEST_CASE("degree-(0,0) values are invariant while points move") {
  Rng rng(3);
  const TensorField f = random_field(5, {{{0, 0}, 3}}, rng);
  const BiRigid g = random_pair(rng);
  const TensorField moved = act_bi_rigid(g, f);
  CHECK((moved.block({0, 0}).data - f.block({0, 0}).data).norm() == 0.0);
  CHECK((moved.points[2].z1 - g.g1.apply(f.points[2].z1)).norm() < 1e-15);
  CHECK((moved.points[2].z2 - g.g2.apply(f.points[2].z2)).norm() < 1e-15);
}

TEST_CASE("swap is an involution that transposes and exchanges degrees") {
  Rng rng(4);
  const TensorField f = random_field(4, kMixed, rng);
  CHECK(field_distance(act_swap(act_swap(f)), f) == 0.0);

  const TensorField s = act_swap(f);
  CHECK((s.block({0, 1}).data - f.block({1, 0}).data).norm() == 0.0);
  CHECK((s.block({1, 0}).data - f.block({0, 1}).data).norm() == 0.0);
  for (Eigen::Index u = 0; u < f.size(); ++u) {
    for (int c = 0; c < 2; ++c) {
      const Eigen::Matrix3d a = unvec(f.block({1, 1}).at(u).row(c));
      const Eigen::Matrix3d b = unvec(s.block({1, 1}).at(u).row(c));
      CHECK((b - a.transpose()).norm() == 0.0);
    }
  }
  CHECK((s.points[1].z1 - f.points[1].z2).norm() == 0.0);
}

TEST_CASE("scale action") {
  Rng rng(5);
  const TensorField f = random_field(4, kMixed, rng);
  CHECK(field_distance(act_scale(1.0, 3, f), f) == 0.0);
  const TensorField s0 = act_scale(2.0, 0, f);
  CHECK((s0.block({1, 1}).data - f.block({1, 1}).data).norm() == 0.0);
  CHECK((s0.points[0].z1 - 2.0 * f.points[0].z1).norm() == 0.0);
  const TensorField s1 = act_scale(2.0, 1, f);
  CHECK((s1.block({1, 1}).data - 2.0 * f.block({1, 1}).data).norm() == 0.0);
  CHECK_THROWS_AS(act_scale(0.0, 1, f), InvalidArgument);
  CHECK_THROWS_AS(act_scale(-1.0, 1, f), InvalidArgument);
}

TEST_CASE("homogeneous matrix helpers") {
  Rng rng(6);
  CHECK((homogeneous_matrix(RigidTransform::identity()) - Eigen::Matrix4d::Identity()).norm() == 0.0);
  const RigidTransform g = random_transform(rng);
  const RigidTransform gi = invert(g);
  CHECK((gi.r - g.r.transpose()).norm() == 0.0);
  CHECK((gi.t + g.r.transpose() * g.t).norm() < 1e-15);
  CHECK(relative_error(compose(gi, g), RigidTransform::identity()) < 1e-12);
  CHECK(relative_error(g, g) == 0.0);
  const RigidTransform h = random_transform(rng);
  CHECK((homogeneous_matrix(compose(g, h)) - homogeneous_matrix(g) * homogeneous_matrix(h)).norm() < 1e-12);
  CHECK(relative_error(from_homogeneous(homogeneous_matrix(g)), g) == 0.0);
  const Eigen::Vector3d x(0.3, -0.2, 0.9);
  CHECK((compose(g, h).apply(x) - g.apply(h.apply(x))).norm() < 1e-14);
}

TEST_CASE("rigid transform validation") {
  RigidTransform g;
  g.r(0, 0) = 1.1;
  CHECK_THROWS_AS(g.validate(), InvalidArgument);
  g.r = -Eigen::Matrix3d::Identity();
  CHECK_THROWS_AS(g.validate(), InvalidArgument);
  CHECK_NOTHROW(RigidTransform::identity().validate());
}

TEST_CASE("action composition") {
  Rng rng(7);
  const TensorField f = random_field(5, kMixed, rng);
  for (int trial = 0; trial < 20; ++trial) {
    const BiRigid g = random_pair(rng), h = random_pair(rng);
    const BiRigid gh{compose(g.g1, h.g1), compose(g.g2, h.g2)};
    REQUIRE(field_distance(act_bi_rigid(gh, f), act_bi_rigid(g, act_bi_rigid(h, f))) < 1e-10);
  }
}

TEST_CASE("swap intertwines the pair action with exchanged factors") {
  Rng rng(8);
  const TensorField f = random_field(5, kMixed, rng);
  for (int trial = 0; trial < 20; ++trial) {
    const BiRigid g = random_pair(rng);
    const BiRigid exchanged{g.g2, g.g1};
    REQUIRE(field_distance(act_swap(act_bi_rigid(g, f)), act_bi_rigid(exchanged, act_swap(f))) < 1e-12);
  }
}

TEST_CASE("scale commutes with rotations") {
  Rng rng(9);
  const TensorField f = random_field(5, kMixed, rng);
  for (int trial = 0; trial < 20; ++trial) {
    const BiRigid g = rotations_only(rng);
    const double c = rng.uniform(0.1, 5.0);
    REQUIRE(field_distance(act_scale(c, 1, act_bi_rigid(g, f)), act_bi_rigid(g, act_scale(c, 1, f))) < 1e-12);
  }
}

TEST_CASE("field layout checks") {
  Rng rng(10);
  TensorField f = random_field(3, {{{1, 0}, 2}}, rng);
  CHECK_NOTHROW(f.validate());
  CHECK_THROWS_AS(f.add_block({1, 0}, 1), InvalidArgument);
  CHECK_THROWS_AS(f.block({0, 1}), InvalidArgument);
  f.block({1, 0}).data.conservativeResize(5, 3);
  CHECK_THROWS_AS(f.validate(), InvalidArgument);
  const TensorField g = random_field(3, {{{0, 0}, 2}}, rng);
  CHECK_THROWS_AS(field_distance(g, random_field(3, {{{0, 0}, 1}}, rng)), InvalidArgument);
}

TEST_CASE("point cloud helpers") {
  Rng rng(11);
  PointCloud c{random_cloud(4, rng), random_cloud(4, rng)};
  CHECK_NOTHROW(c.validate());
  const PointCloud p = c.permuted({2, 0, 3, 1});
  CHECK((p.points.row(0) - c.points.row(2)).norm() == 0.0);
  CHECK((p.normals->row(3) - c.normals->row(1)).norm() == 0.0);
  const RigidTransform g = random_transform(rng);
  const PointCloud t = c.transformed(g);
  CHECK((t.points.row(1).transpose() - g.apply(Eigen::Vector3d(c.points.row(1)))).norm() < 1e-14);
  CHECK((t.normals->row(1).transpose() - g.r * c.normals->row(1).transpose()).norm() < 1e-14);
  CHECK_THROWS_AS(c.permuted({0, 1}), InvalidArgument);
  PointCloud bad{random_cloud(4, rng), random_cloud(3, rng)};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  CHECK_THROWS_AS(PointCloud{}.validate(), InvalidArgument);
  const auto z = embed_points(c.points);
  CHECK(z.size() == 4);
  CHECK(z[3].z2.norm() == 0.0);
}
