#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace bitr {

// Seedable generator used by every randomized routine.
//
// The bit stream is std::mt19937_64, whose output sequence is fixed by the
// C++ standard. Conversions to floating point are done here rather than with
// <random> distributions so results are identical across standard libraries:
//   uniform()  = (x >> 11) * 2^-53            in [0, 1)
//   normal()   = Box-Muller on two uniforms    (cosine branch only)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  Eigen::Vector3d unit_vector();

 private:
  std::mt19937_64 engine_;
};

}  // namespace bitr

namespace bitr {

// Rotation drawn uniformly from SO(3) (Shoemake's uniform unit quaternion).
Eigen::Matrix3d random_rotation(Rng& rng);

}  // namespace bitr
