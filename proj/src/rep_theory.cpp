#include "bitr/rep_theory.hpp"

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <tuple>

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include "bitr/errors.hpp"

namespace bitr {
namespace {

constexpr double kPi = std::numbers::pi;

double factorial(int n) {
  double out = 1.0;
  for (int k = 2; k <= n; ++k) out *= k;
  return out;
}

// Harmonics of a unit vector given in the textbook frame (x, y, z) with
// polar axis z; the public entry point relabels axes first.
Eigen::VectorXd textbook_real_harmonics(Degree l, double x, double y,
                                        double z) {
  Eigen::VectorXd out(irrep_dim(l));
  // c_m + i s_m = (x + i y)^m
  std::array<double, kMaxDegree + 1> c{}, s{};
  c[0] = 1.0;
  s[0] = 0.0;
  for (int m = 1; m <= l; ++m) {
    c[m] = c[m - 1] * x - s[m - 1] * y;
    s[m] = s[m - 1] * x + c[m - 1] * y;
  }
  for (int m = 0; m <= l; ++m) {
    // Associated Legendre P_l^m(z) divided by sin^m(theta), no CS phase.
    double pmm = 1.0;
    for (int k = 1; k <= m; ++k) pmm *= 2 * k - 1;
    double plm = pmm;
    if (l > m) {
      double prev = pmm;
      double cur = (2 * m + 1) * z * pmm;
      for (int ll = m + 2; ll <= l; ++ll) {
        const double next =
            ((2 * ll - 1) * z * cur - (ll + m - 1) * prev) / (ll - m);
        prev = cur;
        cur = next;
      }
      plm = cur;
    }
    const double k = std::sqrt(factorial(l - m) / factorial(l + m));
    if (m == 0) {
      out(l) = k * plm;
    } else {
      out(l + m) = std::numbers::sqrt2 * k * plm * c[m];
      out(l - m) = std::numbers::sqrt2 * k * plm * s[m];
    }
  }
  return out;
}

// Product quadrature on the sphere: Gauss-Legendre in the polar cosine
// times the trapezoid rule in azimuth. Exact for polynomials of degree
// <= 11 in the polar cosine and trigonometric degree < 12 in azimuth,
// which covers products of two harmonics of degree <= kMaxDegree.
struct SphereQuadrature {
  std::vector<Eigen::Vector3d> nodes;
  std::vector<double> weights;
  // table[p] has one column per node holding Y_p(node).
  std::array<Eigen::MatrixXd, kMaxDegree + 1> table;
};

const SphereQuadrature& sphere_quadrature() {
  static const SphereQuadrature quad = [] {
    constexpr int kPolar = 6;
    constexpr int kAzimuth = 12;
    SphereQuadrature q;
    for (int k = 0; k < kPolar; ++k) {
      // Newton iteration on P_n starting from the Chebyshev guess.
      double x = std::cos(kPi * (k + 0.75) / (kPolar + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int n = 2; n <= kPolar; ++n) {
          const double p2 = ((2 * n - 1) * x * p1 - (n - 1) * p0) / n;
          p0 = p1;
          p1 = p2;
        }
        dp = kPolar * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      const double w_polar = 2.0 / ((1.0 - x * x) * dp * dp);
      const double sin_theta = std::sqrt(1.0 - x * x);
      for (int a = 0; a < kAzimuth; ++a) {
        const double phi = 2.0 * kPi * a / kAzimuth;
        q.nodes.emplace_back(sin_theta * std::cos(phi),
                             sin_theta * std::sin(phi), x);
        q.weights.push_back(w_polar * 2.0 * kPi / kAzimuth);
      }
    }
    for (Degree p = 0; p <= kMaxDegree; ++p) {
      q.table[p].resize(irrep_dim(p), static_cast<Eigen::Index>(q.nodes.size()));
      for (std::size_t n = 0; n < q.nodes.size(); ++n) {
        q.table[p].col(static_cast<Eigen::Index>(n)) =
            real_harmonics(p, q.nodes[n]);
      }
    }
    return q;
  }();
  return quad;
}

void check_rotation(const Eigen::Matrix3d& r) {
  const double orth = (r.transpose() * r - Eigen::Matrix3d::Identity()).norm();
  const double det = r.determinant();
  if (!(orth <= 1e-9) || !(std::abs(det - 1.0) <= 1e-9)) {
    throw InvalidArgument("wigner_d: input is not a rotation (|R^T R - I| = " +
                          std::to_string(orth) +
                          ", det = " + std::to_string(det) + ")");
  }
}

Eigen::Matrix3d axis_angle(double angle, Eigen::Vector3d axis) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

Eigen::MatrixXd compute_cg_block(Degree o, Degree i, Degree J) {
  const int n = irrep_dim(i) * irrep_dim(o);
  const int m = irrep_dim(J);
  // Fixed generic rotations; two already generate a dense subgroup.
  const std::array<Eigen::Matrix3d, 3> probes = {
      axis_angle(0.7345, {0.3, -0.5, 0.81}),
      axis_angle(2.1113, {-0.62, 0.2, 0.45}),
      axis_angle(1.3071, {0.11, 0.93, -0.27}),
  };
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(n * m, n * m);
  for (const auto& r : probes) {
    const Eigen::MatrixXd t = bi_wigner_d({i, o}, r, r);
    const Eigen::MatrixXd dj = wigner_d(J, r);
    // vec(T C - C D) = (I (x) T - D^T (x) I) vec(C)
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n * m, n * m);
    for (int col = 0; col < m; ++col) {
      a.block(col * n, col * n, n, n) += t;
      for (int k = 0; k < m; ++k) {
        a.block(col * n, k * n, n, n) -=
            dj(k, col) * Eigen::MatrixXd::Identity(n, n);
      }
    }
    normal.noalias() += a.transpose() * a;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normal);
  const Eigen::VectorXd& ev = eig.eigenvalues();
  const double scale = std::max(1.0, ev(ev.size() - 1));
  if (ev(0) > 1e-10 * scale || (ev.size() > 1 && ev(1) < 1e-6 * scale)) {
    throw Error("cg_block: intertwiner space for (" + std::to_string(o) + "," +
                std::to_string(i) + "," + std::to_string(J) +
                ") is not one-dimensional");
  }
  Eigen::MatrixXd c =
      Eigen::Map<const Eigen::MatrixXd>(eig.eigenvectors().col(0).data(), n, m);
  // By Schur's lemma C^T C is a multiple of the identity.
  c /= std::sqrt((c.transpose() * c).trace() / m);
  // Sign: the first entry (column-major) of maximal magnitude is positive.
  const double peak = c.cwiseAbs().maxCoeff();
  for (Eigen::Index k = 0; k < c.size(); ++k) {
    if (std::abs(c.data()[k]) > peak * (1.0 - 1e-9)) {
      if (c.data()[k] < 0) c = -c;
      break;
    }
  }
  return c;
}

}  // namespace

void check_degree(Degree p) {
  if (p < 0 || p > kMaxDegree) {
    throw InvalidArgument("degree " + std::to_string(p) +
                          " outside supported range [0, " +
                          std::to_string(kMaxDegree) + "]");
  }
}

Eigen::VectorXd real_harmonics(Degree J, const Eigen::Vector3d& u) {
  check_degree(J);
  const double norm = u.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw InvalidArgument("real_harmonics: direction must be non-zero");
  }
  const Eigen::Vector3d v = u / norm;
  // Textbook frame (X', Y', Z') = (z, x, y).
  return textbook_real_harmonics(J, v.z(), v.x(), v.y());
}

Eigen::MatrixXd wigner_d(Degree p, const Eigen::Matrix3d& r) {
  check_degree(p);
  check_rotation(r);
  if (p == 0) return Eigen::MatrixXd::Ones(1, 1);
  if (p == 1) return r;
  const SphereQuadrature& q = sphere_quadrature();
  Eigen::MatrixXd rotated(irrep_dim(p), static_cast<Eigen::Index>(q.nodes.size()));
  for (std::size_t n = 0; n < q.nodes.size(); ++n) {
    rotated.col(static_cast<Eigen::Index>(n)) =
        real_harmonics(p, r * q.nodes[n]) * q.weights[n];
  }
  // D = (2p + 1) / 4pi times the integral of Y(r u) Y(u)^T over the sphere.
  return (irrep_dim(p) / (4.0 * kPi)) * rotated * q.table[p].transpose();
}

Eigen::MatrixXd bi_wigner_d(BiDegree d, const Eigen::Matrix3d& r1,
                            const Eigen::Matrix3d& r2) {
  const Eigen::MatrixXd a = wigner_d(d.p, r1);
  const Eigen::MatrixXd b = wigner_d(d.q, r2);
  Eigen::MatrixXd out(d.dim(), d.dim());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

std::vector<Degree> coupled_degrees(Degree a, Degree b) {
  std::vector<Degree> out;
  for (Degree j = std::abs(a - b); j <= a + b; ++j) out.push_back(j);
  return out;
}

const Eigen::MatrixXd& cg_block(Degree o, Degree i, Degree J) {
  check_degree(o);
  check_degree(i);
  check_degree(J);
  if (J < std::abs(o - i) || J > o + i) {
    throw InvalidArgument("cg_block: J = " + std::to_string(J) +
                          " violates the triangle rule for (" +
                          std::to_string(o) + ", " + std::to_string(i) + ")");
  }
  static std::mutex mutex;
  static std::map<std::tuple<Degree, Degree, Degree>,
                  std::unique_ptr<const Eigen::MatrixXd>>
      cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{o, i, J}];
  if (!slot) slot = std::make_unique<const Eigen::MatrixXd>(compute_cg_block(o, i, J));
  return *slot;
}

Eigen::MatrixXd bi_cg_block(BiDegree o, BiDegree i, Degree J1, Degree J2) {
  const Eigen::MatrixXd& c1 = cg_block(o.p, i.p, J1);
  const Eigen::MatrixXd& c2 = cg_block(o.q, i.q, J2);
  const int di1 = irrep_dim(i.p), di2 = irrep_dim(i.q);
  const int do1 = irrep_dim(o.p), do2 = irrep_dim(o.q);
  Eigen::MatrixXd out(c1.rows() * c2.rows(), c1.cols() * c2.cols());
  for (int a_i1 = 0; a_i1 < di1; ++a_i1)
    for (int a_o1 = 0; a_o1 < do1; ++a_o1)
      for (int a_i2 = 0; a_i2 < di2; ++a_i2)
        for (int a_o2 = 0; a_o2 < do2; ++a_o2) {
          const int r1 = a_i1 * do1 + a_o1;
          const int r2 = a_i2 * do2 + a_o2;
          const int target =
              (a_i1 * di2 + a_i2) * (do1 * do2) + (a_o1 * do2 + a_o2);
          for (Eigen::Index j1 = 0; j1 < c1.cols(); ++j1) {
            out.row(target).segment(j1 * c2.cols(), c2.cols()) =
                c1(r1, j1) * c2.row(r2);
          }
        }
  return out;
}

}  // namespace bitr
