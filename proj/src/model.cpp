#include <algorithm>
#include <cmath>
#include <string>

#include "bitr/assembly.hpp"
#include "bitr/errors.hpp"

namespace bitr {
namespace {

// Logit scale after standardisation; sharp enough that key points spread
// over the cloud instead of clustering around its centroid.
constexpr double kKeypointGain = 3.0;

DegreeChannels first_factor_degrees(int max_degree, int channels) {
  DegreeChannels d;
  for (int p = 0; p <= max_degree; ++p) d[{p, 0}] = channels;
  return d;
}

DegreeChannels bi_degrees(int max_degree, int channels) {
  DegreeChannels d;
  for (int p = 0; p <= max_degree; ++p)
    for (int q = 0; q <= max_degree; ++q) d[{p, q}] = channels;
  return d;
}

// Degree (0,0): ones. Degree (1,0): the offset from the centroid divided by
// the RMS radius of the cloud (invariant to translation and scale), then
// the normals when the model uses them.
TensorField extractor_input(const PointCloud& x, bool use_normals) {
  TensorField f;
  f.points = embed_points(x.points);
  f.add_block({0, 0}, 1).data.setOnes();
  const Cloud3 centered = x.points.rowwise() - x.points.colwise().mean();
  const double rms = std::sqrt(centered.squaredNorm() / static_cast<double>(x.size()));
  if (!(rms > 0.0)) throw InvalidArgument("key-point extraction needs distinct points");
  FeatureBlock& b = f.add_block({1, 0}, use_normals ? 2 : 1);
  for (Eigen::Index u = 0; u < x.size(); ++u) {
    b.at(u).row(0) = centered.row(u) / rms;
    if (use_normals) b.at(u).row(1) = x.normals->row(u);
  }
  return f;
}

// Replaces the (0,0) block of `own` by [own ; point mean of partner].
TensorField fuse(const TensorField& own, const TensorField& partner) {
  TensorField out = own;
  const FeatureBlock& a = own.block({0, 0});
  const FeatureBlock& b = partner.block({0, 0});
  Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(b.channels, 1);
  for (Eigen::Index v = 0; v < partner.size(); ++v) pooled += b.at(v);
  pooled /= static_cast<double>(partner.size());
  FeatureBlock fused({0, 0}, a.channels + b.channels, own.size());
  for (Eigen::Index u = 0; u < own.size(); ++u) {
    fused.at(u).topRows(a.channels) = a.at(u);
    fused.at(u).bottomRows(b.channels) = pooled;
  }
  out.blocks[{0, 0}] = std::move(fused);
  return out;
}

// Row-wise softmax of the L logits over the points of the cloud. Each row
// is first standardised across points and scaled by kKeypointGain; an
// untrained extractor produces nearly constant logits. A row whose spread
// is at rounding level is treated as constant.
Eigen::MatrixXd keypoint_weights(const FeatureBlock& logits) {
  const Eigen::Index n = logits.num_points();
  Eigen::MatrixXd s(logits.channels, n);
  for (Eigen::Index u = 0; u < n; ++u) s.col(u) = logits.at(u);
  for (Eigen::Index l = 0; l < s.rows(); ++l) {
    const double mean = s.row(l).mean();
    s.row(l).array() -= mean;
    const double sd = std::sqrt(s.row(l).squaredNorm() / static_cast<double>(n));
    if (sd > 1e-12 * std::max(1.0, std::abs(mean))) {
      s.row(l) *= kKeypointGain / sd;
    } else {
      s.row(l).setZero();
    }
    const double peak = s.row(l).maxCoeff();
    s.row(l) = (s.row(l).array() - peak).exp().matrix();
    s.row(l) /= s.row(l).sum();
  }
  return s;
}

}  // namespace

void ModelConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw InvalidArgument("model config: " + what);
  };
  require(keypoints >= 2, "keypoints must be at least 2");
  require(neighbors >= 1, "neighbors must be at least 1");
  require(channels >= 1 && key_channels >= 1, "channel counts must be positive");
  require(extractor_layers >= 1, "extractor_layers must be at least 1");
  require(transformer_layers >= 1, "transformer_layers must be at least 1");
  require(max_degree == 1 || max_degree == 2, "max_degree must be 1 or 2");
  require(radial_hidden >= 1, "radial_hidden must be positive");
}

BitrModel make_model(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  BitrModel model;
  model.config = config;

  KeypointExtractorParams& ex = model.extractor;
  ex.keypoints = config.keypoints;
  ex.use_normals = config.use_normals;
  DegreeChannels in{{{0, 0}, 1}, {{1, 0}, config.use_normals ? 2 : 1}};
  for (int l = 0; l < config.extractor_layers; ++l) {
    const bool last = l + 1 == config.extractor_layers;
    LayerConfig lc;
    lc.in = in;
    if (last) lc.in[{0, 0}] *= 2;
    lc.out = last ? DegreeChannels{{{0, 0}, config.keypoints}}
                  : first_factor_degrees(config.max_degree, config.channels);
    lc.key_channels = config.key_channels;
    lc.radial_hidden = config.radial_hidden;
    ex.layers.push_back(make_layer(lc, rng));
    if (!last) ex.elus.push_back(make_elu(lc.out, false, rng));
    in = lc.out;
  }

  in = {{{0, 0}, 1}};
  for (int l = 0; l < config.transformer_layers; ++l) {
    const bool last = l + 1 == config.transformer_layers;
    LayerConfig lc;
    lc.in = in;
    lc.out = last ? DegreeChannels{{{1, 1}, 1}, {{1, 0}, 1}, {{0, 1}, 1}}
                  : bi_degrees(config.max_degree, config.channels);
    lc.key_channels = config.key_channels;
    lc.radial_hidden = config.radial_hidden;
    lc.value_homogeneity = (last || !config.scale_chain) ? 1 : 0;
    lc.swap_tied = config.swap_tied;
    model.layers.push_back(make_layer(lc, rng));
    if (!last) model.elus.push_back(make_elu(lc.out, config.swap_tied, rng));
    in = lc.out;
  }
  return model;
}

Keypoints extract_keypoints(const KeypointExtractorParams& params, int neighbors,
                            const PointCloud& x, const PointCloud& y) {
  for (const PointCloud* c : {&x, &y}) {
    c->validate();
    if (c->size() < 2) throw InvalidArgument("key-point extraction needs at least 2 points");
    if (params.use_normals && !c->has_normals()) {
      throw InvalidArgument("model was built with normals but the cloud has none");
    }
  }
  if (params.layers.empty() || params.elus.size() + 1 != params.layers.size()) {
    throw InvalidArgument("malformed key-point extractor");
  }
  const auto gx = knn_graph(embed_points(x.points),
                            std::min<int>(neighbors, static_cast<int>(x.size()) - 1));
  const auto gy = knn_graph(embed_points(y.points),
                            std::min<int>(neighbors, static_cast<int>(y.size()) - 1));
  TensorField fx = extractor_input(x, params.use_normals);
  TensorField fy = extractor_input(y, params.use_normals);
  for (std::size_t l = 0; l + 1 < params.layers.size(); ++l) {
    fx = elu_layer(params.elus[l], se3_layer(params.layers[l], fx, gx));
    fy = elu_layer(params.elus[l], se3_layer(params.layers[l], fy, gy));
  }
  const TensorField fused_x = fuse(fx, fy);
  const TensorField fused_y = fuse(fy, fx);
  const auto& last = params.layers.back();
  Keypoints kp;
  kp.sx = keypoint_weights(se3_layer(last, fused_x, gx).block({0, 0}));
  kp.sy = keypoint_weights(se3_layer(last, fused_y, gy).block({0, 0}));
  kp.x = kp.sx * x.points;
  kp.y = kp.sy * y.points;
  return kp;
}

std::vector<Point6> merge_pc(const Cloud3& x, const Cloud3& y) {
  if (x.rows() != y.rows()) {
    throw InvalidArgument("merge_pc: " + std::to_string(x.rows()) + " vs " +
                          std::to_string(y.rows()) + " key points");
  }
  std::vector<Point6> z(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index u = 0; u < x.rows(); ++u) {
    z[static_cast<std::size_t>(u)] = {x.row(u).transpose(), y.row(u).transpose()};
  }
  return z;
}

AssemblyResult bitr_forward(const BitrModel& model, const PointCloud& x,
                            const PointCloud& y) {
  const Keypoints kp = extract_keypoints(model.extractor, model.config.neighbors, x, y);
  TensorField f;
  f.points = merge_pc(kp.x, kp.y);
  f.add_block({0, 0}, 1).data.setOnes();
  const int k = std::min<int>(model.config.neighbors, static_cast<int>(f.size()) - 1);
  const NeighborGraph graph = knn_graph(f.points, k);
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    f = transformer_layer(model.layers[l], f, graph);
    if (l < model.elus.size()) f = elu_layer(model.elus[l], f);
  }
  return se3_project(f, kp.x, kp.y);
}

}  // namespace bitr
