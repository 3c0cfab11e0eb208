#pragma once

// SE(3) x SE(3) equivariant convolution kernels.
//
// A kernel from input degree i to output degree o maps a dim(i) feature to a
// dim(o) feature at every relative position z = z1 (+) z2:
//
//   vec W(z) = sum_{J1, J2} phi_{J1 J2}(|z1|, |z2|) Q_{J1 J2} (Y_J1(z1^) (x) Y_J2(z2^))
//
// with Q from bi_cg_block and phi a positively homogeneous radial network.

#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "bitr/random.hpp"
#include "bitr/rep_theory.hpp"
#include "bitr/tensor_field.hpp"

namespace bitr {

// Bias-free MLP on (|z1|, |z2|) that is positively homogeneous of degree
// `homogeneity`:
//   degree 1: Linear -> ReLU -> Linear -> ReLU -> Linear head
//   degree 0: Linear -> ReLU -> LayerNorm -> Linear -> ReLU -> LayerNorm -> Linear head
// LayerNorm has no epsilon and no shift; a zero-variance input maps to zero.
struct RadialNet {
  int homogeneity = 0;
  Eigen::MatrixXd w1;    // hidden x 2
  Eigen::MatrixXd w2;    // hidden x hidden
  Eigen::MatrixXd head;  // outputs x hidden

  static RadialNet random(int homogeneity, int hidden, int outputs, Rng& rng);

  Eigen::Index outputs() const { return head.rows(); }
  Eigen::VectorXd operator()(double n1, double n2) const;
};

Eigen::VectorXd radial_eval(const RadialNet& net, double n1, double n2);

// How a kernel's radial functions are tied to its swap partner (o~, i~).
enum class SwapTie {
  None,       // own network
  Mirror,     // phi^{o,i}_{J1,J2}(a, b) = phi^{o~,i~}_{J2,J1}(b, a); net is the partner's
  Symmetric,  // o = o~ and i = i~: phi_{J1,J2}(a, b) = (phi^_{J1,J2}(a, b) + phi^_{J2,J1}(b, a)) / 2
};

struct KernelSpec {
  BiDegree in;
  BiDegree out;
  int in_channels = 1;
  int out_channels = 1;
  // (J1, J2) pairs, J1 outer, both ascending.
  std::vector<std::pair<Degree, Degree>> slots;
  // bi_cg_block(out, in, J1, J2) per slot; kept per spec so a certifier can
  // be pointed at a tampered copy.
  std::vector<Eigen::MatrixXd> basis;
  // Index of (J2, J1) in the partner's slot list (used by Mirror/Symmetric).
  std::vector<int> transposed_slot;
  std::shared_ptr<const RadialNet> net;
  SwapTie tie = SwapTie::None;

  // Radial outputs, laid out as (slot * out_channels + co) * in_channels + ci.
  Eigen::Index num_radials() const {
    return static_cast<Eigen::Index>(slots.size()) * out_channels * in_channels;
  }
};

// Fills degrees, slots and angular basis; the caller attaches a network.
KernelSpec make_kernel_spec(BiDegree in, BiDegree out, int in_channels,
                            int out_channels);

// phi values for every (slot, channel pair), honouring the swap tie.
Eigen::VectorXd kernel_radials(const KernelSpec& spec, double n1, double n2);

// Harmonics of both halves of a relative position, shared by every kernel
// evaluated on the same edge. A half with norm below 1e-12 keeps only its
// J = 0 constant; higher degrees are zero.
struct EdgeHarmonics {
  double n1 = 0.0;
  double n2 = 0.0;
  std::vector<Eigen::VectorXd> y1;
  std::vector<Eigen::VectorXd> y2;

  EdgeHarmonics(const Point6& z, Degree max_degree);
};

// Kernel matrices W(z), one dim(out) x dim(in) matrix per channel pair,
// indexed co * in_channels + ci.
std::vector<Eigen::MatrixXd> kernel_eval(const KernelSpec& spec, const Point6& z);

// Applies the kernel at z to features (in_channels x dim(in)); returns
// out_channels x dim(out).
Eigen::MatrixXd kernel_apply(const KernelSpec& spec, const EdgeHarmonics& y,
                             const Eigen::Ref<const Eigen::MatrixXd>& features);

struct KernelConstraintReport {
  int trials = 0;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

// Max over random (z, r1, r2) of || (D_i (x) D_o)(r1 x r2) vec W(z) - vec W(r12 z) ||
// summed in Frobenius norm over channel pairs; passed = max_residual <= tol.
KernelConstraintReport certify_kernel_constraint(const KernelSpec& spec,
                                                 int trials, double tol,
                                                 Rng& rng);

}  // namespace bitr
