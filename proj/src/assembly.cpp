#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "bitr/assembly.hpp"
#include "bitr/errors.hpp"
#include "bitr/geometry_io.hpp"

namespace bitr {

RigidTransform complete_match(const BitrModel& model, const PointCloud& x,
                              const PointCloud& y) {
  if (!model.config.swap_tied) {
    throw InvalidArgument("complete matching needs a swap-tied model");
  }
  return compose(bitr_forward(model, x, y).g, bitr_forward(model, x, x).g);
}

Metrics metrics(const RigidTransform& g, const RigidTransform& gt) {
  const double c = std::clamp(0.5 * ((g.r * gt.r.transpose()).trace() - 1.0), -1.0, 1.0);
  return {std::acos(c) * 180.0 / std::numbers::pi, (gt.t - g.t).norm()};
}

double loss(const RigidTransform& g, const RigidTransform& gt) {
  return (g.r.transpose() * gt.r - Eigen::Matrix3d::Identity()).squaredNorm() +
         (gt.t - g.t).squaredNorm();
}

AuditReport equivariance_audit(const BitrModel& model, const PointCloud& x,
                               const PointCloud& y, int trials, std::uint64_t seed) {
  if (trials < 1) throw InvalidArgument("audit needs at least one trial");
  constexpr std::array<double, 3> kScales{0.5, 2.0, 10.0};
  Rng rng(seed);
  AuditReport report;
  report.trials = trials;
  const RigidTransform base = bitr_forward(model, x, y).g;
  for (int k = 0; k < trials; ++k) {
    const RigidTransform g1 = random_rigid(rng, 180.0, 1.0);
    const RigidTransform g2 = random_rigid(rng, 180.0, 1.0);
    const PointCloud xm = x.transformed(g1);
    const PointCloud ym = y.transformed(g2);

    const RigidTransform moved = bitr_forward(model, xm, ym).g;
    const RigidTransform expected = compose(g2, compose(base, invert(g1)));
    report.delta_bi = std::max(report.delta_bi, relative_error(moved, expected));

    const RigidTransform swapped = bitr_forward(model, ym, xm).g;
    report.delta_swap = std::max(report.delta_swap, relative_error(swapped, invert(moved)));

    const double c = kScales[static_cast<std::size_t>(k) % kScales.size()];
    const RigidTransform scaled = bitr_forward(model, xm.scaled(c), ym.scaled(c)).g;
    report.delta_scale = std::max(report.delta_scale, (scaled.r - moved.r).norm() +
                                                          (scaled.t - c * moved.t).norm());
  }
  return report;
}

}  // namespace bitr
