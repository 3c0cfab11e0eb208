#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "bitr/equi_kernel.hpp"
#include "bitr/random.hpp"
#include "bitr/tensor_field.hpp"

namespace bitr {

// k nearest neighbours of every point in R^6, self excluded, ties broken by
// ascending index. neighbors(u) is sorted by (distance, index).
struct NeighborGraph {
  int k = 0;
  std::vector<int> flat;  // size L * k

  Eigen::Index num_points() const { return k > 0 ? static_cast<Eigen::Index>(flat.size()) / k : 0; }
  std::span<const int> neighbors(Eigen::Index u) const {
    return {flat.data() + u * k, static_cast<std::size_t>(k)};
  }
};

// Throws InvalidArgument unless 1 <= k < points.size().
NeighborGraph knn_graph(const std::vector<Point6>& points, int k);

struct LayerConfig {
  DegreeChannels in;
  DegreeChannels out;
  int key_channels = 4;
  int radial_hidden = 16;
  // Homogeneity degree of the value radial networks. With 1 the
  // self-interaction weights are zero. Key networks are always degree 0.
  int value_homogeneity = 0;
  // Ties weights of each degree to its swapped degree so the layer commutes
  // with the swap action. Requires swap-closed degree sets.
  bool swap_tied = false;
};

using DegreePair = std::pair<BiDegree, BiDegree>;  // (out, in)

// Weights of one transformer layer
//   f_out^o(z_u) = W^o F^o(z_u) + sum_{i, v in knn(u)} alpha_uv W_V^{o,i}(z_v - z_u) f^i(z_v)
//   alpha_uv     = softmax_v <Q_u, K_uv>
//   Q_u^o        = W_Q^o F^o(z_u),  K_uv^o = sum_i W_K^{o,i}(z_v - z_u) f^i(z_v)
// W^o and W_Q^o mix channels; the degree components are never mixed, which
// keeps Q^o and K^o equivariant of degree o.
struct LayerParams {
  LayerConfig config;
  std::map<BiDegree, Eigen::MatrixXd> self_interaction;  // out(o) x in(o), o in in & out
  std::map<BiDegree, Eigen::MatrixXd> query;             // key_channels x in(o), o in in
  std::map<DegreePair, KernelSpec> key_kernels;          // o, i in in; in(i) -> key_channels
  std::map<DegreePair, KernelSpec> value_kernels;        // o in out, i in in
};

// Random initialisation: every weight uniform in [-a, a], a = 1/sqrt(fan-in).
LayerParams make_layer(const LayerConfig& config, Rng& rng);

// Re-points every Mirror kernel at its partner's network and marks
// self-partnered kernels Symmetric. Used after construction and loading.
void link_swap_ties(LayerParams& params);

// Checks the weight ties (W^o = W^o~, W_Q^o = W_Q^o~, shared or symmetrised
// radial networks). Returns the largest tie violation; 0 when untied
// parameters are not expected to match.
double swap_tie_violation(const LayerParams& params);

struct EluParams {
  std::map<BiDegree, Eigen::MatrixXd> w_mu;  // c x c
  std::map<BiDegree, Eigen::MatrixXd> w_nu;  // c x c
};

EluParams make_elu(const DegreeChannels& degrees, bool swap_tied, Rng& rng);

// alpha_uv for every edge of the graph, laid out like graph.flat.
std::vector<double> attention_weights(const LayerParams& params,
                                      const TensorField& f,
                                      const NeighborGraph& graph);

TensorField transformer_layer(const LayerParams& params, const TensorField& f,
                              const NeighborGraph& graph);

// Per point, degree and channel: F_mu if <F_mu, F_nu> >= 0, otherwise F_mu
// minus its projection on F_nu. F_mu = W_mu F, F_nu = W_nu F.
TensorField elu_layer(const EluParams& params, const TensorField& f);

// SE(3)-transformer layer on a field whose points have z2 = 0 and whose
// degrees are all (p, 0). Same arithmetic as transformer_layer.
TensorField se3_layer(const LayerParams& params, const TensorField& f,
                      const NeighborGraph& graph);

}  // namespace bitr
