#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "bitr/random.hpp"
#include "bitr/tensor_field.hpp"

namespace bitr {

enum class CloudFormat { Xyz, Ply, Obj };

// From a name ("xyz", "ply", "obj") or a file extension. Throws
// InvalidArgument when unrecognised.
CloudFormat parse_cloud_format(const std::string& name);
CloudFormat cloud_format_for(const std::filesystem::path& path);

// xyz: 3 or 6 whitespace-separated columns (x y z [nx ny nz]); '#' starts
// a comment. ply: ASCII, vertex element only, optional nx ny nz properties.
// obj: 'v' records (and 'vn' records in vertex order when saving normals).
// Values are written with 17 significant digits, so save then load is exact.
PointCloud load_cloud(const std::filesystem::path& path);
PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format);
void save_cloud(const std::filesystem::path& path, const PointCloud& cloud);
void save_cloud(const std::filesystem::path& path, const PointCloud& cloud,
                CloudFormat format);

struct TriangleMesh {
  Cloud3 vertices;
  Eigen::Matrix<int, Eigen::Dynamic, 3> faces;

  // Throws InvalidArgument on an out-of-range index.
  void validate() const;
};

// OBJ 'v' and 'f' records; polygons are fan-triangulated and 'a/b/c'
// index forms accepted.
TriangleMesh load_mesh(const std::filesystem::path& path);

// Closed, star-shaped and asymmetric test shape (about unit size).
TriangleMesh blob_mesh();

// Area-weighted face choice, then uniform barycentric coordinates.
PointCloud sample_mesh(const TriangleMesh& mesh, int n, std::uint64_t seed);

struct PlaneCropSpec {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double keep_ratio = 1.0;  // s in (0, 1]
};

// Keeps the round(s N) points with the smallest projection on the normal,
// in their original order; the rest are discarded (also in order).
std::pair<PointCloud, PointCloud> crop_by_plane(const PointCloud& x, const PlaneCropSpec& spec);

// Plane with a random normal (drawn from seed) splitting x into parts of
// round(ratio N) and N - round(ratio N) points.
std::pair<PointCloud, PointCloud> split_two(const PointCloud& x, double ratio,
                                            std::uint64_t seed);

// Appends count points uniform in [-h, h]^3. Normals, when present, get
// random unit vectors for the new points.
PointCloud add_outliers(const PointCloud& x, int count, double box_halfwidth,
                        std::uint64_t seed);

// One centroid per occupied cell of side `cell`, ordered by cell index
// (lexicographic in x, y, z). Normals are averaged and renormalised.
PointCloud voxel_grid_sample(const PointCloud& x, double cell);

// Smallest-eigenvalue direction of the covariance of each point and its k
// nearest neighbours, flipped to point away from the centroid of the cloud.
PointCloud estimate_normals(const PointCloud& x, int k);

// Rotation uniform over SO(3) when max_angle_deg >= 180; otherwise a uniform
// axis with angle uniform in [0, max_angle_deg]. Translation uniform in the
// ball of radius translation_scale.
RigidTransform random_rigid(Rng& rng, double max_angle_deg, double translation_scale);
RigidTransform random_rigid(std::uint64_t seed, double max_angle_deg, double translation_scale);

}  // namespace bitr
