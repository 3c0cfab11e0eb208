#include "bitr/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bitr/errors.hpp"

namespace bitr {
namespace {

using nlohmann::json;

json array_to_json(const Eigen::MatrixXd& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return {{"shape", {m.rows(), m.cols()}}, {"data", data}};
}

Eigen::MatrixXd array_from_json(const json& j, Eigen::Index rows, Eigen::Index cols,
                                const std::string& where) {
  const auto shape = j.at("shape").get<std::vector<Eigen::Index>>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (shape.size() != 2 || shape[0] != rows || shape[1] != cols ||
      static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw ParseError(where + ": expected a " + std::to_string(rows) + "x" +
                         std::to_string(cols) + " array",
                     0);
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = data[static_cast<std::size_t>(i * cols + k)];
  return m;
}

std::string degree_key(BiDegree d) {
  return std::to_string(d.p) + "," + std::to_string(d.q);
}

std::string pair_key(const DegreePair& k) {
  return degree_key(k.first) + "<-" + degree_key(k.second);
}

json net_json(const RadialNet& net) {
  return {{"homogeneity", net.homogeneity},
          {"w1", array_to_json(net.w1)},
          {"w2", array_to_json(net.w2)},
          {"head", array_to_json(net.head)}};
}

json weights_json(const std::map<BiDegree, Eigen::MatrixXd>& weights) {
  json out = json::object();
  for (const auto& [d, w] : weights) out[degree_key(d)] = array_to_json(w);
  return out;
}

json kernels_json(const std::map<DegreePair, KernelSpec>& kernels) {
  json out = json::object();
  for (const auto& [key, spec] : kernels) {
    if (spec.tie != SwapTie::Mirror) out[pair_key(key)] = net_json(*spec.net);
  }
  return out;
}

json layer_json(const LayerParams& p) {
  return {{"self_interaction", weights_json(p.self_interaction)},
          {"query", weights_json(p.query)},
          {"key_kernels", kernels_json(p.key_kernels)},
          {"value_kernels", kernels_json(p.value_kernels)}};
}

json elu_json(const EluParams& e) {
  return {{"w_mu", weights_json(e.w_mu)}, {"w_nu", weights_json(e.w_nu)}};
}

void read_weights(const json& j, std::map<BiDegree, Eigen::MatrixXd>& weights,
                  const std::string& where) {
  if (j.size() != weights.size()) throw ParseError(where + ": wrong number of entries", 0);
  for (auto& [d, w] : weights) {
    const std::string key = degree_key(d);
    w = array_from_json(j.at(key), w.rows(), w.cols(), where + "[" + key + "]");
  }
}

void read_kernels(const json& j, std::map<DegreePair, KernelSpec>& kernels,
                  const std::string& where) {
  std::size_t owned = 0;
  for (auto& [key, spec] : kernels) {
    if (spec.tie == SwapTie::Mirror) continue;
    ++owned;
    const std::string name = where + "[" + pair_key(key) + "]";
    const json& n = j.at(pair_key(key));
    RadialNet net = *spec.net;
    if (n.at("homogeneity").get<int>() != net.homogeneity) {
      throw ParseError(name + ": homogeneity does not match the config", 0);
    }
    net.w1 = array_from_json(n.at("w1"), net.w1.rows(), net.w1.cols(), name + ".w1");
    net.w2 = array_from_json(n.at("w2"), net.w2.rows(), net.w2.cols(), name + ".w2");
    net.head = array_from_json(n.at("head"), net.head.rows(), net.head.cols(), name + ".head");
    spec.net = std::make_shared<const RadialNet>(std::move(net));
  }
  if (j.size() != owned) throw ParseError(where + ": wrong number of radial networks", 0);
}

void read_layer(const json& j, LayerParams& p, const std::string& where) {
  read_weights(j.at("self_interaction"), p.self_interaction, where + ".self_interaction");
  read_weights(j.at("query"), p.query, where + ".query");
  read_kernels(j.at("key_kernels"), p.key_kernels, where + ".key_kernels");
  read_kernels(j.at("value_kernels"), p.value_kernels, where + ".value_kernels");
  link_swap_ties(p);
  if (swap_tie_violation(p) != 0.0) {
    throw InvalidArgument(where + ": swap-tied weights are not equal");
  }
}

void read_elu(const json& j, EluParams& e, bool tied, const std::string& where) {
  read_weights(j.at("w_mu"), e.w_mu, where + ".w_mu");
  read_weights(j.at("w_nu"), e.w_nu, where + ".w_nu");
  if (!tied) return;
  for (const auto* w : {&e.w_mu, &e.w_nu}) {
    for (const auto& [d, m] : *w) {
      if (m != w->at(d.swapped())) throw InvalidArgument(where + ": swap-tied Elu weights differ");
    }
  }
}

template <typename T, typename F>
void read_list(const json& j, std::vector<T>& items, const std::string& where, F read) {
  if (!j.is_array() || j.size() != items.size()) {
    throw ParseError(where + ": expected " + std::to_string(items.size()) + " entries", 0);
  }
  for (std::size_t i = 0; i < items.size(); ++i) {
    read(j[i], items[i], where + "[" + std::to_string(i) + "]");
  }
}

json config_json(const ModelConfig& c) {
  return {{"keypoints", c.keypoints},
          {"neighbors", c.neighbors},
          {"channels", c.channels},
          {"key_channels", c.key_channels},
          {"extractor_layers", c.extractor_layers},
          {"transformer_layers", c.transformer_layers},
          {"max_degree", c.max_degree},
          {"radial_hidden", c.radial_hidden},
          {"swap_tied", c.swap_tied},
          {"scale_chain", c.scale_chain},
          {"use_normals", c.use_normals}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  const json ref = config_json(c);
  for (const auto& [key, value] : j.items()) {
    if (!ref.contains(key)) throw ParseError("unknown model config key '" + key + "'", 0);
  }
  c.keypoints = j.at("keypoints").get<int>();
  c.neighbors = j.at("neighbors").get<int>();
  c.channels = j.at("channels").get<int>();
  c.key_channels = j.at("key_channels").get<int>();
  c.extractor_layers = j.at("extractor_layers").get<int>();
  c.transformer_layers = j.at("transformer_layers").get<int>();
  c.max_degree = j.at("max_degree").get<int>();
  c.radial_hidden = j.at("radial_hidden").get<int>();
  c.swap_tied = j.at("swap_tied").get<bool>();
  c.scale_chain = j.at("scale_chain").get<bool>();
  c.use_normals = j.at("use_normals").get<bool>();
  return c;
}

}  // namespace

std::string model_to_json(const BitrModel& model) {
  json doc;
  doc["schema_version"] = kModelSchemaVersion;
  doc["config"] = config_json(model.config);
  json ex = {{"layers", json::array()}, {"elus", json::array()}};
  for (const auto& l : model.extractor.layers) ex["layers"].push_back(layer_json(l));
  for (const auto& e : model.extractor.elus) ex["elus"].push_back(elu_json(e));
  doc["extractor"] = ex;
  doc["layers"] = json::array();
  for (const auto& l : model.layers) doc["layers"].push_back(layer_json(l));
  doc["elus"] = json::array();
  for (const auto& e : model.elus) doc["elus"].push_back(elu_json(e));
  return doc.dump();
}

BitrModel model_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    const int version = doc.at("schema_version").get<int>();
    if (version != kModelSchemaVersion) {
      throw ParseError("unsupported model schema_version " + std::to_string(version), 0);
    }
    // The skeleton fixes every shape; the document only supplies values.
    BitrModel model = make_model(config_from_json(doc.at("config")), 0);
    const bool tied = model.config.swap_tied;
    const json& ex = doc.at("extractor");
    read_list(ex.at("layers"), model.extractor.layers, "extractor.layers",
              [](const json& j, LayerParams& p, const std::string& w) { read_layer(j, p, w); });
    read_list(ex.at("elus"), model.extractor.elus, "extractor.elus",
              [](const json& j, EluParams& e, const std::string& w) { read_elu(j, e, false, w); });
    read_list(doc.at("layers"), model.layers, "layers",
              [](const json& j, LayerParams& p, const std::string& w) { read_layer(j, p, w); });
    read_list(doc.at("elus"), model.elus, "elus",
              [tied](const json& j, EluParams& e, const std::string& w) { read_elu(j, e, tied, w); });
    return model;
  } catch (const json::exception& e) {
    throw ParseError(std::string("model JSON: ") + e.what(), 0);
  }
}

void save_model(const std::filesystem::path& path, const BitrModel& model) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << model_to_json(model) << '\n';
  if (!out) throw Error("write failed for " + path.string());
}

BitrModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string() + " for reading");
  std::stringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace bitr
