#include "bitr/equi_kernel.hpp"

#include <algorithm>
#include <cmath>

#include "bitr/errors.hpp"

namespace bitr {
namespace {

Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double a = 1.0 / std::sqrt(static_cast<double>(cols));
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(-a, a);
  return m;
}

void layer_norm(Eigen::VectorXd& x) {
  const double mean = x.mean();
  x.array() -= mean;
  const double var = x.squaredNorm() / static_cast<double>(x.size());
  if (!(var > 0.0)) {
    x.setZero();
    return;
  }
  x /= std::sqrt(var);
}

Eigen::VectorXd kron(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

int position(const std::vector<Degree>& range, Degree j) {
  return static_cast<int>(std::find(range.begin(), range.end(), j) - range.begin());
}

}  // namespace

RadialNet RadialNet::random(int homogeneity, int hidden, int outputs, Rng& rng) {
  if (homogeneity != 0 && homogeneity != 1) {
    throw InvalidArgument("radial networks support homogeneity degree 0 or 1");
  }
  RadialNet net;
  net.homogeneity = homogeneity;
  net.w1 = uniform_matrix(hidden, 2, rng);
  net.w2 = uniform_matrix(hidden, hidden, rng);
  net.head = uniform_matrix(outputs, hidden, rng);
  return net;
}

Eigen::VectorXd RadialNet::operator()(double n1, double n2) const {
  Eigen::VectorXd h = (w1 * Eigen::Vector2d(n1, n2)).cwiseMax(0.0);
  if (homogeneity == 0) layer_norm(h);
  h = (w2 * h).cwiseMax(0.0);
  if (homogeneity == 0) layer_norm(h);
  return head * h;
}

Eigen::VectorXd radial_eval(const RadialNet& net, double n1, double n2) {
  return net(n1, n2);
}

KernelSpec make_kernel_spec(BiDegree in, BiDegree out, int in_channels,
                            int out_channels) {
  if (in_channels <= 0 || out_channels <= 0) {
    throw InvalidArgument("kernel channel counts must be positive");
  }
  KernelSpec spec;
  spec.in = in;
  spec.out = out;
  spec.in_channels = in_channels;
  spec.out_channels = out_channels;
  const auto r1 = coupled_degrees(out.p, in.p);
  const auto r2 = coupled_degrees(out.q, in.q);
  for (Degree j1 : r1) {
    for (Degree j2 : r2) {
      spec.slots.emplace_back(j1, j2);
      spec.basis.push_back(bi_cg_block(out, in, j1, j2));
      // Partner enumerates J1 over r2 and J2 over r1.
      spec.transposed_slot.push_back(position(r2, j2) * static_cast<int>(r1.size()) +
                                     position(r1, j1));
    }
  }
  return spec;
}

Eigen::VectorXd kernel_radials(const KernelSpec& spec, double n1, double n2) {
  if (!spec.net) throw InvalidArgument("kernel spec has no radial network");
  const RadialNet& net = *spec.net;
  if (net.outputs() != spec.num_radials()) {
    throw InvalidArgument("radial network output count does not match kernel");
  }
  const Eigen::Index pair = static_cast<Eigen::Index>(spec.out_channels) * spec.in_channels;
  switch (spec.tie) {
    case SwapTie::None:
      return net(n1, n2);
    case SwapTie::Mirror: {
      const Eigen::VectorXd partner = net(n2, n1);
      Eigen::VectorXd out(spec.num_radials());
      for (std::size_t s = 0; s < spec.slots.size(); ++s) {
        out.segment(static_cast<Eigen::Index>(s) * pair, pair) =
            partner.segment(spec.transposed_slot[s] * pair, pair);
      }
      return out;
    }
    case SwapTie::Symmetric: {
      const Eigen::VectorXd direct = net(n1, n2);
      const Eigen::VectorXd flipped = net(n2, n1);
      Eigen::VectorXd out(spec.num_radials());
      for (std::size_t s = 0; s < spec.slots.size(); ++s) {
        out.segment(static_cast<Eigen::Index>(s) * pair, pair) =
            0.5 * (direct.segment(static_cast<Eigen::Index>(s) * pair, pair) +
                   flipped.segment(spec.transposed_slot[s] * pair, pair));
      }
      return out;
    }
  }
  return {};
}

EdgeHarmonics::EdgeHarmonics(const Point6& z, Degree max_degree)
    : n1(z.z1.norm()), n2(z.z2.norm()) {
  constexpr double kZeroNorm = 1e-12;
  const double k0 = real_harmonics(0, Eigen::Vector3d::UnitX())(0);
  for (Degree j = 0; j <= max_degree; ++j) {
    if (j == 0) {
      y1.push_back(Eigen::VectorXd::Constant(1, k0));
      y2.push_back(Eigen::VectorXd::Constant(1, k0));
      continue;
    }
    y1.push_back(n1 < kZeroNorm ? Eigen::VectorXd::Zero(irrep_dim(j))
                                : real_harmonics(j, z.z1));
    y2.push_back(n2 < kZeroNorm ? Eigen::VectorXd::Zero(irrep_dim(j))
                                : real_harmonics(j, z.z2));
  }
}

namespace {

Degree max_slot_degree(const KernelSpec& spec) {
  Degree m = 0;
  for (const auto& [j1, j2] : spec.slots) m = std::max({m, j1, j2});
  return m;
}

// Angular matrices dim(out) x dim(in), one per slot.
std::vector<Eigen::MatrixXd> angular(const KernelSpec& spec, const EdgeHarmonics& y) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(spec.slots.size());
  for (std::size_t s = 0; s < spec.slots.size(); ++s) {
    const auto [j1, j2] = spec.slots[s];
    const Eigen::VectorXd v = spec.basis[s] * kron(y.y1[j1], y.y2[j2]);
    out.push_back(Eigen::Map<const Eigen::MatrixXd>(v.data(), spec.out.dim(), spec.in.dim()));
  }
  return out;
}

}  // namespace

std::vector<Eigen::MatrixXd> kernel_eval(const KernelSpec& spec, const Point6& z) {
  const EdgeHarmonics y(z, max_slot_degree(spec));
  const auto ang = angular(spec, y);
  const Eigen::VectorXd phi = kernel_radials(spec, y.n1, y.n2);
  std::vector<Eigen::MatrixXd> out(
      static_cast<std::size_t>(spec.out_channels) * spec.in_channels,
      Eigen::MatrixXd::Zero(spec.out.dim(), spec.in.dim()));
  for (std::size_t s = 0; s < spec.slots.size(); ++s) {
    for (int co = 0; co < spec.out_channels; ++co) {
      for (int ci = 0; ci < spec.in_channels; ++ci) {
        const Eigen::Index k = (static_cast<Eigen::Index>(s) * spec.out_channels + co) *
                                   spec.in_channels + ci;
        out[static_cast<std::size_t>(co * spec.in_channels + ci)] += phi(k) * ang[s];
      }
    }
  }
  return out;
}

Eigen::MatrixXd kernel_apply(const KernelSpec& spec, const EdgeHarmonics& y,
                             const Eigen::Ref<const Eigen::MatrixXd>& features) {
  if (features.rows() != spec.in_channels || features.cols() != spec.in.dim()) {
    throw InvalidArgument("kernel_apply: feature shape does not match kernel input");
  }
  const auto ang = angular(spec, y);
  const Eigen::VectorXd phi = kernel_radials(spec, y.n1, y.n2);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(spec.out_channels, spec.out.dim());
  for (std::size_t s = 0; s < spec.slots.size(); ++s) {
    // mixed(co, :) = sum_ci phi(s, co, ci) f(ci, :)
    const Eigen::Map<const Eigen::MatrixXd, 0, Eigen::OuterStride<>> weights(
        phi.data() + static_cast<Eigen::Index>(s) * spec.out_channels * spec.in_channels,
        spec.in_channels, spec.out_channels, Eigen::OuterStride<>(spec.in_channels));
    const Eigen::MatrixXd mixed = weights.transpose() * features;
    out.noalias() += mixed * ang[s].transpose();
  }
  return out;
}

KernelConstraintReport certify_kernel_constraint(const KernelSpec& spec,
                                                 int trials, double tol,
                                                 Rng& rng) {
  if (trials < 1) throw InvalidArgument("certify_kernel_constraint needs trials >= 1");
  KernelConstraintReport report;
  report.trials = trials;
  report.tolerance = tol;
  for (int t = 0; t < trials; ++t) {
    const Point6 z{Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()),
                   Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal())};
    const Eigen::Matrix3d r1 = random_rotation(rng);
    const Eigen::Matrix3d r2 = random_rotation(rng);
    const Eigen::MatrixXd di = bi_wigner_d(spec.in, r1, r2);
    const Eigen::MatrixXd dout = bi_wigner_d(spec.out, r1, r2);
    const auto w = kernel_eval(spec, z);
    const auto w_rot = kernel_eval(spec, Point6{r1 * z.z1, r2 * z.z2});
    double sq = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      // (D_i (x) D_o) vec W = vec(D_o W D_i^T)
      sq += (dout * w[k] * di.transpose() - w_rot[k]).squaredNorm();
    }
    report.max_residual = std::max(report.max_residual, std::sqrt(sq));
  }
  report.passed = report.max_residual <= tol;
  return report;
}

}  // namespace bitr
