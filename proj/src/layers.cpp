#include "bitr/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <string>

#include "bitr/errors.hpp"

namespace bitr {
namespace {

std::string degree_name(BiDegree d) {
  return "(" + std::to_string(d.p) + "," + std::to_string(d.q) + ")";
}

Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double a = 1.0 / std::sqrt(static_cast<double>(cols));
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(-a, a);
  return m;
}

void check_swap_closed(const DegreeChannels& set, const char* what) {
  for (const auto& [d, c] : set) {
    auto it = set.find(d.swapped());
    if (it == set.end() || it->second != c) {
      throw InvalidArgument(std::string("swap-tied layer needs swap-closed ") + what +
                            " degrees; missing partner of " + degree_name(d));
    }
  }
}

void validate_config(const LayerConfig& config) {
  if (config.in.empty() || config.out.empty()) {
    throw InvalidArgument("layer needs at least one input and one output degree");
  }
  for (const auto* set : {&config.in, &config.out}) {
    for (const auto& [d, c] : *set) {
      check_degree(d.p);
      check_degree(d.q);
      if (c <= 0) throw InvalidArgument("channel count must be positive");
    }
  }
  if (config.key_channels <= 0 || config.radial_hidden <= 0) {
    throw InvalidArgument("key channels and radial width must be positive");
  }
  if (config.value_homogeneity != 0 && config.value_homogeneity != 1) {
    throw InvalidArgument("value homogeneity must be 0 or 1");
  }
  if (config.swap_tied) {
    check_swap_closed(config.in, "input");
    check_swap_closed(config.out, "output");
  }
}

DegreePair swapped(const DegreePair& key) {
  return {key.first.swapped(), key.second.swapped()};
}

void build_kernels(std::map<DegreePair, KernelSpec>& kernels,
                   const DegreeChannels& outs, const DegreeChannels& ins,
                   std::optional<int> fixed_out_channels, int homogeneity,
                   const LayerConfig& config, Rng& rng) {
  for (const auto& [o, co] : outs) {
    for (const auto& [i, ci] : ins) {
      const DegreePair key{o, i};
      KernelSpec spec = make_kernel_spec(i, o, ci, fixed_out_channels.value_or(co));
      // Mirror kernels borrow the partner's network in link_swap_ties.
      if (!config.swap_tied || !(swapped(key) < key)) {
        spec.net = std::make_shared<const RadialNet>(RadialNet::random(
            homogeneity, config.radial_hidden, static_cast<int>(spec.num_radials()), rng));
      }
      kernels.emplace(key, std::move(spec));
    }
  }
}

void link_kernels(std::map<DegreePair, KernelSpec>& kernels, bool tied) {
  for (auto& [key, spec] : kernels) {
    if (!tied) {
      spec.tie = SwapTie::None;
      continue;
    }
    const DegreePair partner = swapped(key);
    if (partner == key) {
      spec.tie = SwapTie::Symmetric;
    } else if (partner < key) {
      spec.tie = SwapTie::Mirror;
      spec.net = kernels.at(partner).net;
    } else {
      spec.tie = SwapTie::None;
    }
  }
}

void check_field(const LayerParams& params, const TensorField& f,
                 const NeighborGraph& graph) {
  if (f.degrees() != params.config.in) {
    throw InvalidArgument("field degrees/channels do not match the layer input");
  }
  if (graph.num_points() != f.size()) {
    throw InvalidArgument("neighbour graph was built for " +
                          std::to_string(graph.num_points()) + " points, field has " +
                          std::to_string(f.size()));
  }
}

Degree harmonic_degree(const LayerParams& params) {
  Degree m = 0;
  for (const auto* kernels : {&params.key_kernels, &params.value_kernels}) {
    for (const auto& [key, spec] : *kernels) {
      for (const auto& [j1, j2] : spec.slots) m = std::max({m, j1, j2});
    }
  }
  return m;
}

std::vector<EdgeHarmonics> edge_harmonics(const TensorField& f, Eigen::Index u,
                                          std::span<const int> nbrs, Degree max_degree) {
  std::vector<EdgeHarmonics> out;
  out.reserve(nbrs.size());
  for (int v : nbrs) {
    out.emplace_back(f.points[static_cast<std::size_t>(v)] - f.points[static_cast<std::size_t>(u)],
                     max_degree);
  }
  return out;
}

// Softmax over the neighbours of u of <Q_u, K_uv>.
Eigen::VectorXd point_attention(const LayerParams& params, const TensorField& f,
                                Eigen::Index u, std::span<const int> nbrs,
                                const std::vector<EdgeHarmonics>& edges) {
  std::map<BiDegree, Eigen::MatrixXd> q;
  for (const auto& [o, w] : params.query) q.emplace(o, w * f.block(o).at(u));
  Eigen::VectorXd logits = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nbrs.size()));
  for (std::size_t j = 0; j < nbrs.size(); ++j) {
    for (const auto& [o, qo] : q) {
      Eigen::MatrixXd k = Eigen::MatrixXd::Zero(qo.rows(), qo.cols());
      for (const auto& [i, block] : f.blocks) {
        k += kernel_apply(params.key_kernels.at({o, i}), edges[j], block.at(nbrs[j]));
      }
      logits(static_cast<Eigen::Index>(j)) += qo.cwiseProduct(k).sum();
    }
  }
  const double peak = logits.maxCoeff();
  Eigen::VectorXd alpha = (logits.array() - peak).exp();
  return alpha / alpha.sum();
}

}  // namespace

NeighborGraph knn_graph(const std::vector<Point6>& points, int k) {
  const auto n = static_cast<int>(points.size());
  if (k < 1 || k >= n) {
    throw InvalidArgument("knn_graph: need 1 <= k < " + std::to_string(n) +
                          ", got k = " + std::to_string(k));
  }
  NeighborGraph graph;
  graph.k = k;
  graph.flat.reserve(static_cast<std::size_t>(n) * k);
  std::vector<std::pair<double, int>> dist(static_cast<std::size_t>(n - 1));
  for (int u = 0; u < n; ++u) {
    const auto zu = points[static_cast<std::size_t>(u)].stacked();
    std::size_t m = 0;
    for (int v = 0; v < n; ++v) {
      if (v == u) continue;
      dist[m++] = {(points[static_cast<std::size_t>(v)].stacked() - zu).squaredNorm(), v};
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    for (int j = 0; j < k; ++j) graph.flat.push_back(dist[static_cast<std::size_t>(j)].second);
  }
  return graph;
}

LayerParams make_layer(const LayerConfig& config, Rng& rng) {
  validate_config(config);
  LayerParams params;
  params.config = config;
  const bool tied = config.swap_tied;

  for (const auto& [o, co] : config.out) {
    auto in_it = config.in.find(o);
    if (in_it == config.in.end()) continue;
    if (config.value_homogeneity == 1) {
      params.self_interaction[o] = Eigen::MatrixXd::Zero(co, in_it->second);
    } else if (tied && o.swapped() < o) {
      params.self_interaction[o] = params.self_interaction.at(o.swapped());
    } else {
      params.self_interaction[o] = uniform_matrix(co, in_it->second, rng);
    }
  }
  for (const auto& [o, ci] : config.in) {
    if (tied && o.swapped() < o) {
      params.query[o] = params.query.at(o.swapped());
    } else {
      params.query[o] = uniform_matrix(config.key_channels, ci, rng);
    }
  }
  build_kernels(params.key_kernels, config.in, config.in, config.key_channels, 0,
                config, rng);
  build_kernels(params.value_kernels, config.out, config.in, std::nullopt,
                config.value_homogeneity, config, rng);
  link_swap_ties(params);
  return params;
}

void link_swap_ties(LayerParams& params) {
  link_kernels(params.key_kernels, params.config.swap_tied);
  link_kernels(params.value_kernels, params.config.swap_tied);
}

double swap_tie_violation(const LayerParams& params) {
  if (!params.config.swap_tied) return 0.0;
  double worst = 0.0;
  auto compare = [&worst](const std::map<BiDegree, Eigen::MatrixXd>& weights) {
    for (const auto& [d, w] : weights) {
      auto it = weights.find(d.swapped());
      if (it == weights.end()) {
        worst = std::numeric_limits<double>::infinity();
      } else if (it->second.rows() != w.rows() || it->second.cols() != w.cols()) {
        worst = std::numeric_limits<double>::infinity();
      } else {
        worst = std::max(worst, (it->second - w).norm());
      }
    }
  };
  compare(params.self_interaction);
  compare(params.query);
  for (const auto* kernels : {&params.key_kernels, &params.value_kernels}) {
    for (const auto& [key, spec] : *kernels) {
      const DegreePair partner = swapped(key);
      auto it = kernels->find(partner);
      if (it == kernels->end()) {
        worst = std::numeric_limits<double>::infinity();
        continue;
      }
      if (partner == key) {
        if (spec.tie != SwapTie::Symmetric) worst = std::numeric_limits<double>::infinity();
      } else if (spec.tie == SwapTie::Mirror) {
        if (spec.net != it->second.net) worst = std::numeric_limits<double>::infinity();
      } else if (it->second.tie != SwapTie::Mirror) {
        worst = std::numeric_limits<double>::infinity();
      }
    }
  }
  return worst;
}

EluParams make_elu(const DegreeChannels& degrees, bool swap_tied, Rng& rng) {
  EluParams params;
  for (const auto& [d, c] : degrees) {
    if (swap_tied && d.swapped() < d) {
      auto mu = params.w_mu.find(d.swapped());
      if (mu == params.w_mu.end() || mu->second.rows() != c) {
        throw InvalidArgument("swap-tied Elu needs swap-closed degrees with equal channels");
      }
      params.w_mu[d] = mu->second;
      params.w_nu[d] = params.w_nu.at(d.swapped());
    } else {
      params.w_mu[d] = uniform_matrix(c, c, rng);
      params.w_nu[d] = uniform_matrix(c, c, rng);
    }
  }
  return params;
}

std::vector<double> attention_weights(const LayerParams& params,
                                      const TensorField& f,
                                      const NeighborGraph& graph) {
  check_field(params, f, graph);
  const Degree max_degree = harmonic_degree(params);
  std::vector<double> out;
  out.reserve(graph.flat.size());
  for (Eigen::Index u = 0; u < f.size(); ++u) {
    const auto nbrs = graph.neighbors(u);
    const auto edges = edge_harmonics(f, u, nbrs, max_degree);
    const Eigen::VectorXd alpha = point_attention(params, f, u, nbrs, edges);
    out.insert(out.end(), alpha.data(), alpha.data() + alpha.size());
  }
  return out;
}

TensorField transformer_layer(const LayerParams& params, const TensorField& f,
                              const NeighborGraph& graph) {
  check_field(params, f, graph);
  const Degree max_degree = harmonic_degree(params);
  TensorField out;
  out.points = f.points;
  for (const auto& [o, c] : params.config.out) out.add_block(o, c);

  for (Eigen::Index u = 0; u < f.size(); ++u) {
    const auto nbrs = graph.neighbors(u);
    const auto edges = edge_harmonics(f, u, nbrs, max_degree);
    const Eigen::VectorXd alpha = point_attention(params, f, u, nbrs, edges);
    for (const auto& [o, c] : params.config.out) {
      Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(c, o.dim());
      if (auto w = params.self_interaction.find(o); w != params.self_interaction.end()) {
        acc.noalias() += w->second * f.block(o).at(u);
      }
      for (std::size_t j = 0; j < nbrs.size(); ++j) {
        for (const auto& [i, block] : f.blocks) {
          acc += alpha(static_cast<Eigen::Index>(j)) *
                 kernel_apply(params.value_kernels.at({o, i}), edges[j], block.at(nbrs[j]));
        }
      }
      out.block(o).at(u) = acc;
    }
  }
  return out;
}

TensorField elu_layer(const EluParams& params, const TensorField& f) {
  TensorField out;
  out.points = f.points;
  for (const auto& [d, block] : f.blocks) {
    auto mu_it = params.w_mu.find(d);
    auto nu_it = params.w_nu.find(d);
    if (mu_it == params.w_mu.end() || nu_it == params.w_nu.end() ||
        mu_it->second.cols() != block.channels) {
      throw InvalidArgument("Elu weights missing or mis-sized for degree " + degree_name(d));
    }
    FeatureBlock& result = out.add_block(d, static_cast<int>(mu_it->second.rows()));
    for (Eigen::Index u = 0; u < f.size(); ++u) {
      const Eigen::MatrixXd mu = mu_it->second * block.at(u);
      const Eigen::MatrixXd nu = nu_it->second * block.at(u);
      auto dst = result.at(u);
      for (Eigen::Index c = 0; c < mu.rows(); ++c) {
        const double dot = mu.row(c).dot(nu.row(c));
        const double nn = nu.row(c).squaredNorm();
        if (dot >= 0.0 || !(nn > 0.0)) {
          dst.row(c) = mu.row(c);
        } else {
          dst.row(c) = mu.row(c) - (dot / nn) * nu.row(c);
        }
      }
    }
  }
  return out;
}

TensorField se3_layer(const LayerParams& params, const TensorField& f,
                      const NeighborGraph& graph) {
  auto only_first_factor = [](const DegreeChannels& set) {
    return std::all_of(set.begin(), set.end(), [](const auto& e) { return e.first.q == 0; });
  };
  if (!only_first_factor(params.config.in) || !only_first_factor(params.config.out) ||
      !only_first_factor(f.degrees())) {
    throw InvalidArgument("se3_layer accepts only degrees of the form (p, 0)");
  }
  for (const Point6& z : f.points) {
    if (z.z2 != Eigen::Vector3d::Zero()) {
      throw InvalidArgument("se3_layer expects points embedded with z2 = 0");
    }
  }
  return transformer_layer(params, f, graph);
}

}  // namespace bitr
