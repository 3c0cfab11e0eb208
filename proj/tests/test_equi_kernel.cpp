#include <doctest.h>

#include <cmath>
#include <memory>

#include "bitr/equi_kernel.hpp"
#include "bitr/errors.hpp"
#include "support.hpp"

using namespace bitr;
using namespace bitr::test;

namespace {

KernelSpec spec_with_net(BiDegree in, BiDegree out, int cin, int cout, int homogeneity, Rng& rng) {
  KernelSpec s = make_kernel_spec(in, out, cin, cout);
  s.net = std::make_shared<const RadialNet>(
      RadialNet::random(homogeneity, 16, static_cast<int>(s.num_radials()), rng));
  return s;
}

// Permutation carrying a degree-(p, q) vector to the degree-(q, p) vector of
// the transposed matrix: index a (2q+1) + b goes to b (2p+1) + a.
Eigen::MatrixXd swap_permutation(BiDegree d) {
  const int dp = irrep_dim(d.p), dq = irrep_dim(d.q);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(d.dim(), d.dim());
  for (int a = 0; a < dp; ++a)
    for (int b = 0; b < dq; ++b) p(b * dp + a, a * dq + b) = 1.0;
  return p;
}

Point6 random_z(Rng& rng) {
  return {Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()),
          Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal())};
}

std::vector<BiDegree> degrees_up_to_11() { return {{0, 0}, {1, 0}, {0, 1}, {1, 1}}; }

}  // namespace

TEST_CASE("radial networks are positively homogeneous") {
  Rng rng(1);
  const RadialNet d1 = RadialNet::random(1, 16, 5, rng);
  const RadialNet d0 = RadialNet::random(0, 16, 5, rng);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = rng.uniform(0.0, 2.0), b = rng.uniform(0.0, 2.0), c = rng.uniform(0.01, 20.0);
    REQUIRE((radial_eval(d1, 2 * a, 2 * b) - 2.0 * radial_eval(d1, a, b)).norm() < 1e-13);
    REQUIRE((radial_eval(d1, c * a, c * b) - c * radial_eval(d1, a, b)).norm() <
            1e-13 * (1.0 + c) * (1.0 + radial_eval(d1, a, b).norm()));
    REQUIRE((radial_eval(d0, 2 * a, 2 * b) - radial_eval(d0, a, b)).norm() < 1e-12);
    REQUIRE((radial_eval(d0, c * a, c * b) - radial_eval(d0, a, b)).norm() < 1e-12);
  }
}

TEST_CASE("degree-0 network at the origin returns zeros") {
  Rng rng(2);
  const RadialNet d0 = RadialNet::random(0, 16, 4, rng);
  const Eigen::VectorXd v = radial_eval(d0, 0.0, 0.0);
  CHECK(v.allFinite());
  CHECK(v.norm() == 0.0);
  CHECK_THROWS_AS(RadialNet::random(2, 16, 4, rng), InvalidArgument);
}

TEST_CASE("symmetric tie makes diagonal slots swap symmetric") {
  Rng rng(3);
  KernelSpec s = spec_with_net({1, 1}, {1, 1}, 2, 2, 0, rng);
  s.tie = SwapTie::Symmetric;
  const Eigen::Index pair = 4;
  for (int trial = 0; trial < 20; ++trial) {
    const double a = rng.uniform(0.1, 2.0), b = rng.uniform(0.1, 2.0);
    const Eigen::VectorXd ab = kernel_radials(s, a, b), ba = kernel_radials(s, b, a);
    for (std::size_t slot = 0; slot < s.slots.size(); ++slot) {
      const auto t = static_cast<Eigen::Index>(s.transposed_slot[slot]);
      // phi_{J1 J2}(a, b) = phi_{J2 J1}(b, a); for J1 = J2 this is symmetry.
      REQUIRE((ab.segment(static_cast<Eigen::Index>(slot) * pair, pair) - ba.segment(t * pair, pair)).norm() < 1e-14);
    }
  }
}

TEST_CASE("scalar kernel equals phi times k0 squared") {
  Rng rng(4);
  const KernelSpec s = spec_with_net({0, 0}, {0, 0}, 1, 1, 1, rng);
  const double k0 = 1.0;  // documented unit-norm Y_0
  for (int trial = 0; trial < 10; ++trial) {
    const Point6 z = random_z(rng);
    const auto w = kernel_eval(s, z);
    REQUIRE(w.size() == 1);
    const double phi = radial_eval(*s.net, z.z1.norm(), z.z2.norm())(0);
    REQUIRE(w[0](0, 0) == doctest::Approx(k0 * k0 * phi).epsilon(1e-14));
  }
}

TEST_CASE("kernel constraint holds for every spec up to degree (1,1)") {
  Rng rng(5);
  for (BiDegree i : degrees_up_to_11()) {
    for (BiDegree o : degrees_up_to_11()) {
      for (int h = 0; h <= 1; ++h) {
        const KernelSpec s = spec_with_net(i, o, 2, 3, h, rng);
        const KernelConstraintReport rep = certify_kernel_constraint(s, 100, 1e-10, rng);
        INFO("in (" << i.p << "," << i.q << ") out (" << o.p << "," << o.q << ") d=" << h);
        REQUIRE(rep.passed);
        REQUIRE(rep.max_residual < 1e-10);
      }
    }
  }
}

TEST_CASE("scalar kernel is equivariant to rounding") {
  Rng rng(6);
  const KernelSpec s = spec_with_net({0, 0}, {0, 0}, 1, 1, 0, rng);
  CHECK(certify_kernel_constraint(s, 100, 1e-10, rng).max_residual < 1e-14);
}

TEST_CASE("corrupted CG block is caught by the certifier") {
  Rng rng(7);
  KernelSpec s = spec_with_net({1, 1}, {1, 0}, 1, 1, 0, rng);
  for (auto& b : s.basis) b(0, 0) += 0.5;
  const KernelConstraintReport rep = certify_kernel_constraint(s, 20, 1e-10, rng);
  CHECK_FALSE(rep.passed);
  CHECK(rep.max_residual > 1e-3);
  CHECK_THROWS_AS(certify_kernel_constraint(s, 0, 1e-10, rng), InvalidArgument);
}

TEST_CASE("kernel is homogeneous of its network degree") {
  Rng rng(8);
  for (int h = 0; h <= 1; ++h) {
    const KernelSpec s = spec_with_net({1, 0}, {1, 1}, 2, 2, h, rng);
    for (int trial = 0; trial < 10; ++trial) {
      const Point6 z = random_z(rng);
      const double c = rng.uniform(0.1, 10.0);
      const auto w = kernel_eval(s, z);
      const auto wc = kernel_eval(s, Point6{c * z.z1, c * z.z2});
      for (std::size_t k = 0; k < w.size(); ++k) {
        REQUIRE((wc[k] - std::pow(c, h) * w[k]).norm() < 1e-12 * (1.0 + c));
      }
    }
  }
}

TEST_CASE("mirror and symmetric ties give the transpose identity") {
  Rng rng(9);
  // Mirror pair (o, i) = ((1,0), (1,1)) and its partner ((0,1), (1,1)).
  KernelSpec a = spec_with_net({1, 1}, {1, 0}, 2, 2, 1, rng);
  KernelSpec b = make_kernel_spec({1, 1}, {0, 1}, 2, 2);
  b.net = a.net;
  b.tie = SwapTie::Mirror;
  // Self-partnered (o, i) = ((1,1), (1,1)).
  KernelSpec c = spec_with_net({1, 1}, {1, 1}, 2, 2, 0, rng);
  c.tie = SwapTie::Symmetric;
  for (int trial = 0; trial < 20; ++trial) {
    const Point6 z = random_z(rng);
    const Point6 sz{z.z2, z.z1};
    for (const auto* pair : {&a, &c}) {
      const KernelSpec& s = *pair;
      const KernelSpec& partner = (pair == &a) ? b : c;
      const Eigen::MatrixXd po = swap_permutation(s.out), pi = swap_permutation(s.in);
      const auto w = kernel_eval(s, z);
      const auto wt = kernel_eval(partner, sz);
      for (std::size_t k = 0; k < w.size(); ++k) {
        REQUIRE((wt[k] - po * w[k] * pi.transpose()).norm() < 1e-12);
      }
    }
  }
  // Without the tie the identity fails.
  KernelSpec untied = spec_with_net({1, 1}, {0, 1}, 2, 2, 1, rng);
  const Point6 z = random_z(rng);
  const auto w = kernel_eval(a, z);
  const auto wt = kernel_eval(untied, Point6{z.z2, z.z1});
  const Eigen::MatrixXd po = swap_permutation(a.out), pi = swap_permutation(a.in);
  CHECK((wt[0] - po * w[0] * pi.transpose()).norm() > 1e-3);
}

TEST_CASE("zero-norm halves keep only the constant harmonic") {
  Rng rng(10);
  const KernelSpec s = spec_with_net({0, 0}, {1, 1}, 1, 1, 1, rng);
  const Point6 z{Eigen::Vector3d(0.3, -0.4, 0.5), Eigen::Vector3d::Zero()};
  const auto w = kernel_eval(s, z);
  CHECK(w[0].allFinite());
  // (0,0) -> (1,1) needs J1 = J2 = 1, so a zero second half kills the kernel.
  CHECK(w[0].norm() == 0.0);
  const EdgeHarmonics y(z, 2);
  CHECK(y.y2[0](0) == 1.0);
  CHECK(y.y2[1].norm() == 0.0);
  CHECK(y.y2[2].norm() == 0.0);
}

TEST_CASE("first-factor kernels reproduce the 3-D equivariant kernel") {
  // With z2 = 0 and degrees (p, 0) only J2 = 0 contributes and W satisfies
  // D_o(r) W(x) D_i(r)^T = W(r x).
  Rng rng(11);
  for (Degree pi = 0; pi <= 2; ++pi) {
    for (Degree po = 0; po <= 2; ++po) {
      const KernelSpec s = spec_with_net({pi, 0}, {po, 0}, 1, 2, 0, rng);
      for (const auto& [j1, j2] : s.slots) REQUIRE(j2 == 0);
      for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Vector3d x(rng.normal(), rng.normal(), rng.normal());
        const Eigen::Matrix3d r = random_rotation(rng);
        const auto w = kernel_eval(s, Point6{x, Eigen::Vector3d::Zero()});
        const auto wr = kernel_eval(s, Point6{r * x, Eigen::Vector3d::Zero()});
        const Eigen::MatrixXd dout = wigner_d(po, r), din = wigner_d(pi, r);
        for (std::size_t k = 0; k < w.size(); ++k) {
          REQUIRE((dout * w[k] * din.transpose() - wr[k]).norm() < 1e-10);
        }
      }
    }
  }
}

TEST_CASE("kernel_apply agrees with the kernel matrices") {
  Rng rng(12);
  const KernelSpec s = spec_with_net({1, 1}, {1, 0}, 3, 2, 0, rng);
  const Point6 z = random_z(rng);
  const Eigen::MatrixXd f = random_matrix(3, 9, rng);
  const auto w = kernel_eval(s, z);
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(2, 3);
  for (int co = 0; co < 2; ++co)
    for (int ci = 0; ci < 3; ++ci)
      expected.row(co) += (w[static_cast<std::size_t>(co * 3 + ci)] * f.row(ci).transpose()).transpose();
  const Eigen::MatrixXd got = kernel_apply(s, EdgeHarmonics(z, 2), f);
  CHECK((got - expected).norm() < 1e-13);
  CHECK_THROWS_AS(kernel_apply(s, EdgeHarmonics(z, 2), random_matrix(2, 9, rng)), InvalidArgument);
}

TEST_CASE("kernel spec slots follow the triangle ranges") {
  const KernelSpec s = make_kernel_spec({1, 1}, {1, 0}, 1, 1);
  const std::vector<std::pair<Degree, Degree>> expected{{0, 1}, {1, 1}, {2, 1}};
  CHECK(s.slots == expected);
  CHECK(s.num_radials() == 3);
  KernelSpec bare = make_kernel_spec({0, 0}, {0, 0}, 1, 1);
  CHECK_THROWS_AS(kernel_radials(bare, 1.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(make_kernel_spec({0, 0}, {0, 0}, 0, 1), InvalidArgument);
}
