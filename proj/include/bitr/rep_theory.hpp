#pragma once

// Real irreducible representations of SO(3) and SO(3) x SO(3).
//
// Basis conventions shared by every table in this header:
//
//  * Harmonics are real with unit norm, |Y_J(u)| = 1 for every unit u
//    (the orthonormal harmonics times sqrt(4pi / (2J + 1))), with
//    components ordered m = -J..J. They are the textbook real harmonics
//    written in the relabelled frame (X', Y', Z') = (z, x, y), i.e. the
//    polar axis is y. This makes Y_1(u) = (x, y, z), so the degree-1
//    Wigner-D matrix is the rotation matrix itself, and Y_0 = k0 = 1. No
//    Condon-Shortley phase appears in the real functions.
//  * wigner_d(p, r) is defined by Y_p(r u) = D_p(r) Y_p(u).
//  * A degree-(p, q) vector has index a * (2q + 1) + b, a over the first
//    factor and b over the second, so it transforms by D_p(r1) (x) D_q(r2).
//  * cg_block(o, i, J) has rows ordered like D_i (x) D_o (input index
//    major). This is the column-major vec of an output-by-input kernel
//    matrix.

#include <compare>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace bitr {

using Degree = int;

inline constexpr Degree kMaxDegree = 4;

constexpr int irrep_dim(Degree p) { return 2 * p + 1; }

// Degree (p, q) of an irrep of SO(3) x SO(3).
struct BiDegree {
  Degree p = 0;
  Degree q = 0;

  constexpr int dim() const { return irrep_dim(p) * irrep_dim(q); }
  constexpr BiDegree swapped() const { return {q, p}; }
  constexpr bool symmetric() const { return p == q; }

  friend constexpr auto operator<=>(const BiDegree&, const BiDegree&) = default;
};

// Throws InvalidArgument when p is outside [0, kMaxDegree].
void check_degree(Degree p);

// Real unit-norm harmonics of degree J at direction u (normalized
// internally). Throws on a zero vector.
Eigen::VectorXd real_harmonics(Degree J, const Eigen::Vector3d& u);

// Real Wigner-D matrix. r must be orthogonal with det +1 to 1e-9.
Eigen::MatrixXd wigner_d(Degree p, const Eigen::Matrix3d& r);

// D_p(r1) (x) D_q(r2).
Eigen::MatrixXd bi_wigner_d(BiDegree d, const Eigen::Matrix3d& r1,
                            const Eigen::Matrix3d& r2);

// Clebsch-Gordan change-of-basis block, shape (2o+1)(2i+1) x (2J+1), with
// orthonormal columns and (D_i(r) (x) D_o(r)) C = C D_J(r). Computed once
// per triple and cached; the returned reference stays valid for the life
// of the program.
const Eigen::MatrixXd& cg_block(Degree o, Degree i, Degree J);

// Second-order block for the SO(3) x SO(3) case. Rows follow the
// column-major vec of a dim(o) x dim(i) kernel matrix, i.e. the ordering of
// D_i(r12) (x) D_o(r12) = D_i1(r1) (x) D_i2(r2) (x) D_o1(r1) (x) D_o2(r2);
// columns follow Y_J1 (x) Y_J2. It is the Kronecker product of the two
// first-order blocks with rows permuted into that ordering.
Eigen::MatrixXd bi_cg_block(BiDegree o, BiDegree i, Degree J1, Degree J2);

// J values allowed by the triangle rule, ascending.
std::vector<Degree> coupled_degrees(Degree a, Degree b);

}  // namespace bitr
