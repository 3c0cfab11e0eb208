#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "bitr/random.hpp"
#include "bitr/tensor_field.hpp"

namespace bitr::test {

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

inline Cloud3 random_cloud(Eigen::Index n, Rng& rng) {
  Cloud3 x(n, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);
  return x;
}

inline RigidTransform random_transform(Rng& rng, double translation = 1.0) {
  RigidTransform g;
  g.r = random_rotation(rng);
  for (int c = 0; c < 3; ++c) g.t(c) = rng.uniform(-translation, translation);
  return g;
}

inline std::vector<Point6> random_points6(int n, Rng& rng) {
  std::vector<Point6> z(static_cast<std::size_t>(n));
  for (auto& p : z) {
    for (int c = 0; c < 3; ++c) {
      p.z1(c) = rng.uniform(-1.0, 1.0);
      p.z2(c) = rng.uniform(-1.0, 1.0);
    }
  }
  return z;
}

// Field with random features of the given degrees on random 6-D points.
inline TensorField random_field(int n, const DegreeChannels& degrees, Rng& rng) {
  TensorField f;
  f.points = random_points6(n, rng);
  for (const auto& [d, c] : degrees) f.add_block(d, c).data = random_matrix(n * c, d.dim(), rng);
  return f;
}

inline DegreeChannels bi_degrees(int max_degree, int channels) {
  DegreeChannels d;
  for (int p = 0; p <= max_degree; ++p)
    for (int q = 0; q <= max_degree; ++q) d[{p, q}] = channels;
  return d;
}

inline std::vector<int> random_permutation(int n, Rng& rng) {
  std::vector<int> p(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
  }
  return p;
}

}  // namespace bitr::test
