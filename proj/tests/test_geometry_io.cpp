#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <string>

#include <Eigen/Geometry>

#include "bitr/assembly.hpp"
#include "bitr/errors.hpp"
#include "bitr/geometry_io.hpp"
#include "support.hpp"

using namespace bitr;
using namespace bitr::test;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("bitr_geometry_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

TriangleMesh single_triangle() {
  TriangleMesh m;
  m.vertices.resize(3, 3);
  m.vertices << 0, 0, 1, 1, 0, 1, 0, 1, 1;
  m.faces.resize(1, 3);
  m.faces << 0, 1, 2;
  return m;
}

// Every row of a appears in b (as a multiset of exact rows).
bool same_rows(const Cloud3& a, const Cloud3& b) {
  if (a.rows() != b.rows()) return false;
  auto key = [](const Cloud3& m) {
    std::multiset<std::tuple<double, double, double>> s;
    for (Eigen::Index i = 0; i < m.rows(); ++i) s.emplace(m(i, 0), m(i, 1), m(i, 2));
    return s;
  };
  return key(a) == key(b);
}

Cloud3 stack(const Cloud3& a, const Cloud3& b) {
  Cloud3 s(a.rows() + b.rows(), 3);
  s << a, b;
  return s;
}

}  // namespace

TEST_CASE("xyz loads three points and round-trips exactly") {
  const fs::path dir = scratch_dir("xyz");
  write_text(dir / "a.xyz", "# comment\n0 0 0\n1 2 3\n\n0.1 0.2 0.3\n");
  const PointCloud a = load_cloud(dir / "a.xyz");
  CHECK(a.size() == 3);
  CHECK_FALSE(a.has_normals());
  CHECK(a.points(2, 1) == 0.2);

  Rng rng(1);
  PointCloud c;
  c.points = random_cloud(25, rng) * 1.2345678901234567;
  c.normals = random_cloud(25, rng).rowwise().normalized();
  for (CloudFormat f : {CloudFormat::Xyz, CloudFormat::Ply, CloudFormat::Obj}) {
    const fs::path p = dir / ("round." + std::to_string(static_cast<int>(f)));
    save_cloud(p, c, f);
    const PointCloud back = load_cloud(p, f);
    REQUIRE(back.points == c.points);
    REQUIRE(back.has_normals());
    REQUIRE(*back.normals == *c.normals);
  }
  save_cloud(dir / "b.ply", c);
  CHECK(load_cloud(dir / "b.ply").points == c.points);
}

TEST_CASE("malformed rows name their line") {
  const fs::path dir = scratch_dir("bad");
  write_text(dir / "bad.xyz", "0 0 0\n1 2\n");
  try {
    load_cloud(dir / "bad.xyz");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
  write_text(dir / "nan.xyz", "0 0 0\n1 2 x\n");
  CHECK_THROWS_AS(load_cloud(dir / "nan.xyz"), ParseError);
  CHECK_THROWS_AS(parse_cloud_format("stl"), InvalidArgument);
  CHECK_THROWS_AS(cloud_format_for("a.stl"), InvalidArgument);
  CHECK(cloud_format_for("A.PLY") == CloudFormat::Ply);
  CHECK_THROWS(load_cloud(dir / "missing.xyz"));
}

TEST_CASE("obj meshes with polygons and index forms") {
  const fs::path dir = scratch_dir("obj");
  write_text(dir / "quad.obj", "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1 4//1\nf -4 -3 -2\n");
  const TriangleMesh m = load_mesh(dir / "quad.obj");
  CHECK(m.vertices.rows() == 4);
  REQUIRE(m.faces.rows() == 3);
  CHECK(m.faces.row(0) == Eigen::RowVector3i(0, 1, 2));
  CHECK(m.faces.row(1) == Eigen::RowVector3i(0, 2, 3));
  CHECK(m.faces.row(2) == Eigen::RowVector3i(0, 1, 2));
  write_text(dir / "bad.obj", "v 0 0 0\nf 1 2 3\n");
  CHECK_THROWS_AS(load_mesh(dir / "bad.obj"), InvalidArgument);
  write_text(dir / "junk.obj", "v 0 0 0\nv 1 0\n");
  CHECK_THROWS_AS(load_mesh(dir / "junk.obj"), ParseError);
}

TEST_CASE("mesh sampling") {
  const PointCloud tri = sample_mesh(single_triangle(), 1000, 1);
  CHECK(tri.size() == 1000);
  CHECK((tri.points.col(2).array() - 1.0).abs().maxCoeff() < 1e-15);
  CHECK(tri.points.col(0).minCoeff() >= 0.0);
  CHECK(tri.points.col(1).minCoeff() >= 0.0);
  CHECK((tri.points.col(0) + tri.points.col(1)).maxCoeff() <= 1.0 + 1e-15);

  // Faces of area 1/2 (z = 0) and 3/2 (z = 1): expected share 1/4.
  TriangleMesh two;
  two.vertices.resize(6, 3);
  two.vertices << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 3, 0, 1, 0, 1, 1;
  two.faces.resize(2, 3);
  two.faces << 0, 1, 2, 3, 4, 5;
  const int n = 20000;
  const PointCloud s = sample_mesh(two, n, 2);
  const double low = static_cast<double>((s.points.col(2).array() < 0.5).count());
  const double sd = std::sqrt(n * 0.25 * 0.75);
  CHECK(std::abs(low - 0.25 * n) < 5.0 * sd);

  CHECK(sample_mesh(blob_mesh(), 100, 9).points == sample_mesh(blob_mesh(), 100, 9).points);
  CHECK_THROWS_AS(sample_mesh(TriangleMesh{}, 10, 1), InvalidArgument);
}

TEST_CASE("plane crop keeps an exact share") {
  const PointCloud x = sample_mesh(blob_mesh(), 2048, 3);
  const auto [all, none] = crop_by_plane(x, {Eigen::Vector3d::UnitZ(), 1.0});
  CHECK(all.points == x.points);
  CHECK(none.size() == 0);
  const Eigen::Vector3d n = Eigen::Vector3d(1, 2, -1).normalized();
  const auto [kept, dropped] = crop_by_plane(x, {n, 0.3});
  CHECK(kept.size() == 614);
  CHECK(dropped.size() == 2048 - 614);
  CHECK(same_rows(stack(kept.points, dropped.points), x.points));
  CHECK((kept.points * n).maxCoeff() <= (dropped.points * n).minCoeff());
  for (int count : {1, 7, 100, 333})
    for (double s : {0.05, 0.5, 0.77, 0.999})
      REQUIRE(crop_by_plane(sample_mesh(blob_mesh(), count, 4), {n, s}).first.size() ==
              static_cast<Eigen::Index>(std::llround(s * count)));
  CHECK_THROWS_AS(crop_by_plane(x, {Eigen::Vector3d(1, 1, 0), 0.5}), InvalidArgument);
  CHECK_THROWS_AS(crop_by_plane(x, {n, 0.0}), InvalidArgument);
}

TEST_CASE("split and outliers") {
  const PointCloud base = sample_mesh(blob_mesh(), 2048, 5);
  const PointCloud noisy = add_outliers(base, 200, 1.0, 6);
  REQUIRE(noisy.size() == 2248);
  CHECK(noisy.points.topRows(2048) == base.points);
  CHECK(noisy.points.bottomRows(200).cwiseAbs().maxCoeff() <= 1.0);
  CHECK(add_outliers(base, 0, 1.0, 6).points == base.points);
  CHECK(add_outliers(base, 200, 1.0, 6).points == noisy.points);

  const auto [a, b] = split_two(noisy, 0.3, 7);
  CHECK(a.size() == 674);
  CHECK(b.size() == 2248 - 674);
  CHECK(same_rows(stack(a.points, b.points), noisy.points));
  CHECK(split_two(noisy, 0.3, 7).first.points == a.points);

  const PointCloud with_normals = estimate_normals(base, 8);
  const PointCloud n2 = add_outliers(with_normals, 10, 1.0, 1);
  CHECK(((n2.normals->rowwise().norm().array() - 1.0).abs() < 1e-12).all());
}

TEST_CASE("voxel grid sampling") {
  PointCloud one;
  one.points.resize(3, 3);
  one.points << 0.01, 0.01, 0.01, 0.02, 0.03, 0.04, 0.03, 0.05, 0.01;
  const PointCloud c = voxel_grid_sample(one, 0.1);
  REQUIRE(c.size() == 1);
  CHECK((c.points.row(0) - one.points.colwise().mean()).norm() < 1e-15);

  PointCloud grid;
  grid.points.resize(8, 3);
  for (int i = 0; i < 8; ++i) grid.points.row(i) = Eigen::RowVector3d(i & 1, (i >> 1) & 1, (i >> 2) & 1) * 0.35 + Eigen::RowVector3d::Constant(0.05);
  CHECK(same_rows(voxel_grid_sample(grid, 0.1).points, grid.points));

  Rng rng(8);
  PointCloud cube;
  cube.points.resize(50000, 3);
  for (Eigen::Index i = 0; i < cube.points.size(); ++i) cube.points.data()[i] = rng.uniform();
  const PointCloud v = voxel_grid_sample(cube, 0.1);
  CHECK(v.size() <= 11 * 11 * 11);
  CHECK(v.size() >= 900);
  CHECK_THROWS_AS(voxel_grid_sample(cube, 0.0), InvalidArgument);
}

TEST_CASE("normal estimation") {
  Rng rng(9);
  const Eigen::Vector3d axis = Eigen::Vector3d(1, -2, 0.5).normalized();
  const Eigen::Matrix3d frame = Eigen::Quaterniond::FromTwoVectors(Eigen::Vector3d::UnitZ(), axis).toRotationMatrix();
  PointCloud plane;
  plane.points.resize(200, 3);
  for (int i = 0; i < 200; ++i)
    plane.points.row(i) = (frame * Eigen::Vector3d(rng.uniform(-1, 1), rng.uniform(-1, 1), 0)).transpose();
  const PointCloud n = estimate_normals(plane, 10);
  for (int i = 0; i < 200; ++i) {
    REQUIRE(n.normals->row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(std::abs(std::abs(n.normals->row(i).dot(axis.transpose())) - 1.0) < 1e-6);
  }

  const PointCloud x = sample_mesh(blob_mesh(), 300, 10);
  const PointCloud nx = estimate_normals(x, 10);
  const RigidTransform g = random_rigid(rng, 180.0, 1.0);
  const PointCloud ng = estimate_normals(x.transformed(g), 10);
  for (int i = 0; i < 300; ++i) {
    const Eigen::Vector3d a = g.r * nx.normals->row(i).transpose();
    REQUIRE(std::abs(std::abs(a.dot(ng.normals->row(i).transpose())) - 1.0) < 1e-6);
  }
  CHECK_THROWS_AS(estimate_normals(x, 2), InvalidArgument);
  CHECK_THROWS_AS(estimate_normals(sample_mesh(blob_mesh(), 5, 1), 8), InvalidArgument);
}

TEST_CASE("random rigid motions") {
  Rng rng(11);
  CHECK(random_rigid(rng, 180.0, 0.0).t.norm() == 0.0);
  // Uniform rotations have angle CDF (a - sin a) / pi.
  double lo = 180.0, hi = 0.0;
  int below_right_angle = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const RigidTransform g = random_rigid(rng, 180.0, 2.0);
    REQUIRE_NOTHROW(g.validate());
    REQUIRE(g.t.norm() <= 2.0);
    const double a = metrics(g, RigidTransform::identity()).rotation_deg;
    lo = std::min(lo, a);
    hi = std::max(hi, a);
    if (a < 90.0) ++below_right_angle;
  }
  // P(angle < 15 deg) ~ 9.5e-4 per draw, P(angle > 175 deg) ~ 0.056.
  CHECK(lo < 15.0);
  CHECK(hi > 175.0);
  const double p = (std::numbers::pi / 2 - 1.0) / std::numbers::pi;
  CHECK(std::abs(below_right_angle - p * n) < 5.0 * std::sqrt(n * p * (1 - p)));
  for (int i = 0; i < 100; ++i) REQUIRE(metrics(random_rigid(rng, 10.0, 1.0), RigidTransform::identity()).rotation_deg <= 10.0 + 1e-9);
  CHECK(homogeneous_matrix(random_rigid(5, 180.0, 1.0)) == homogeneous_matrix(random_rigid(5, 180.0, 1.0)));
}
