#include "bitr/random.hpp"

#include <cmath>
#include <numbers>

namespace bitr {

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection keeps the result unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

Eigen::Vector3d Rng::unit_vector() {
  Eigen::Vector3d v;
  do {
    v = Eigen::Vector3d(normal(), normal(), normal());
  } while (v.norm() < 1e-12);
  return v.normalized();
}

}  // namespace bitr

#include <Eigen/Geometry>

namespace bitr {

Eigen::Matrix3d random_rotation(Rng& rng) {
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  const double u3 = rng.uniform();
  const double a = std::sqrt(1.0 - u1);
  const double b = std::sqrt(u1);
  const double tau = 2.0 * std::numbers::pi;
  const Eigen::Quaterniond q(b * std::cos(tau * u3), a * std::sin(tau * u2),
                             a * std::cos(tau * u2), b * std::sin(tau * u3));
  return q.normalized().toRotationMatrix();
}

}  // namespace bitr
