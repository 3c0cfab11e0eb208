#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bitr/assembly.hpp"
#include "bitr/errors.hpp"
#include "bitr/geometry_io.hpp"
#include "bitr/model_io.hpp"

namespace bitr::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kSchemaVersion = 1;

// Every key a config document may contain, with its default. A config file
// is merged over this object, then command-line flags over the result.
json default_config() {
  const ModelConfig m;
  return {
      // common
      {"seed", 0},
      {"out", "."},
      {"model", ""},
      {"save_model", ""},
      {"tol", 1e-9},
      // model hyperparameters (ignored when a model file is given)
      {"keypoints", m.keypoints},
      {"neighbors", m.neighbors},
      {"channels", m.channels},
      {"key_channels", m.key_channels},
      {"extractor_layers", m.extractor_layers},
      {"transformer_layers", m.transformer_layers},
      {"max_degree", m.max_degree},
      {"radial_hidden", m.radial_hidden},
      {"swap_tied", m.swap_tied},
      {"scale_chain", m.scale_chain},
      {"use_normals", m.use_normals},
      {"normals_k", 16},
      // inputs
      {"source", ""},
      {"reference", ""},
      {"gt", ""},
      {"init", ""},
      {"mesh", ""},
      {"format", "xyz"},
      // gen
      {"samples", 2048},
      {"outliers", 200},
      {"outlier_halfwidth", 1.0},
      {"pair", "split"},
      {"split_ratio", 0.3},
      {"crop_ratio", 1.0},
      {"voxel", 0.0},
      {"rotation_deg", 180.0},
      {"translation", 1.0},
      // assemble / match / icp
      {"complete_match", false},
      {"refine", "none"},
      {"icp_iters", 50},
      {"icp_tol", 1e-10},
      {"max_rotation_error_deg", nullptr},
      {"max_translation_error", nullptr},
      // audit
      {"audit_trials", 20},
      {"audit_points", 128},
      {"kernel_trials", 100},
      {"kernel_tol", 1e-10},
      {"break_swap_ties", false},
      {"break_scale_chain", false},
  };
}

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rejects unknown keys and values whose JSON type differs from the default's
// (integers are accepted where a float is expected).
json merge_config(json base, const json& patch, const std::string& origin) {
  if (!patch.is_object()) throw UsageError(origin + ": config must be a JSON object");
  for (const auto& [key, value] : patch.items()) {
    if (!base.contains(key)) throw UsageError(origin + ": unknown config key '" + key + "'");
    const json& ref = base[key];
    const bool ok =
        ref.is_null()      ? (value.is_null() || value.is_number())
        : ref.is_boolean() ? value.is_boolean()
        : ref.is_string()  ? value.is_string()
        : ref.is_number_float() ? value.is_number()
                                : value.is_number_integer();
    if (!ok) throw UsageError(origin + ": config key '" + key + "' has the wrong type");
    base[key] = value;
  }
  return base;
}

struct Context {
  json cfg;
  std::ostream& out;
  std::ostream& err;

  template <typename T>
  T get(const char* key) const { return cfg.at(key).get<T>(); }
  std::string path(const char* key) const { return cfg.at(key).get<std::string>(); }
  fs::path out_dir() const {
    fs::path dir = path("out");
    fs::create_directories(dir);
    return dir;
  }
};

json transform_json(const RigidTransform& g) {
  const Eigen::Matrix4d m = homogeneous_matrix(g);
  json rows = json::array();
  for (int i = 0; i < 4; ++i) rows.push_back({m(i, 0), m(i, 1), m(i, 2), m(i, 3)});
  return rows;
}

RigidTransform read_transform(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
  const json& rows = doc.is_object() ? doc.at("transform") : doc;
  if (!rows.is_array() || rows.size() != 4) throw ParseError(path.string() + ": expected 4x4 transform", 0);
  Eigen::Matrix4d m;
  for (int i = 0; i < 4; ++i) {
    if (!rows[i].is_array() || rows[i].size() != 4) {
      throw ParseError(path.string() + ": expected 4x4 transform", 0);
    }
    for (int j = 0; j < 4; ++j) m(i, j) = rows[i][j].get<double>();
  }
  RigidTransform g = from_homogeneous(m);
  g.validate(1e-6);
  return g;
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw Error("write failed for " + path.string());
}

ModelConfig model_config(const Context& ctx) {
  ModelConfig m;
  m.keypoints = ctx.get<int>("keypoints");
  m.neighbors = ctx.get<int>("neighbors");
  m.channels = ctx.get<int>("channels");
  m.key_channels = ctx.get<int>("key_channels");
  m.extractor_layers = ctx.get<int>("extractor_layers");
  m.transformer_layers = ctx.get<int>("transformer_layers");
  m.max_degree = ctx.get<int>("max_degree");
  m.radial_hidden = ctx.get<int>("radial_hidden");
  m.swap_tied = ctx.get<bool>("swap_tied") && !ctx.get<bool>("break_swap_ties");
  m.scale_chain = ctx.get<bool>("scale_chain") && !ctx.get<bool>("break_scale_chain");
  m.use_normals = ctx.get<bool>("use_normals");
  return m;
}

BitrModel obtain_model(const Context& ctx) {
  BitrModel model;
  if (!ctx.path("model").empty()) {
    if (ctx.get<bool>("break_swap_ties") || ctx.get<bool>("break_scale_chain")) {
      throw UsageError("fault-injection flags need a freshly initialised model, not --model");
    }
    model = load_model(ctx.path("model"));
  } else {
    model = make_model(model_config(ctx), ctx.get<std::uint64_t>("seed"));
  }
  if (!ctx.path("save_model").empty()) save_model(ctx.path("save_model"), model);
  return model;
}

PointCloud load_input(const Context& ctx, const char* key, bool want_normals) {
  const std::string p = ctx.path(key);
  if (p.empty()) throw UsageError(std::string("--") + key + " is required");
  PointCloud c = load_cloud(p);
  if (want_normals && !c.has_normals()) c = estimate_normals(c, ctx.get<int>("normals_k"));
  return c;
}

json metrics_json(const RigidTransform& g, const RigidTransform& gt) {
  const Metrics m = metrics(g, gt);
  return {{"schema_version", kSchemaVersion},
          {"rotation_deg", m.rotation_deg},
          {"translation", m.translation},
          {"loss", loss(g, gt)}};
}

// Applies the optional metric tolerances; returns false when one fails.
bool metrics_pass(const Context& ctx, json& metrics) {
  bool pass = true;
  const json& rot = ctx.cfg.at("max_rotation_error_deg");
  const json& tr = ctx.cfg.at("max_translation_error");
  if (!rot.is_null()) pass = pass && metrics["rotation_deg"].get<double>() <= rot.get<double>();
  if (!tr.is_null()) pass = pass && metrics["translation"].get<double>() <= tr.get<double>();
  metrics["max_rotation_error_deg"] = rot;
  metrics["max_translation_error"] = tr;
  metrics["passed"] = pass;
  return pass;
}

int cmd_gen(const Context& ctx) {
  const auto seed = ctx.get<std::uint64_t>("seed");
  const double split = ctx.get<double>("split_ratio");
  const double crop = ctx.get<double>("crop_ratio");
  const std::string pair = ctx.path("pair");
  if (pair != "split" && pair != "copy") throw UsageError("pair must be 'split' or 'copy'");
  if (!(crop > 0.0 && crop <= 1.0)) throw UsageError("crop_ratio must lie in (0, 1]");

  PointCloud full;
  if (!ctx.path("source").empty()) {
    full = load_cloud(ctx.path("source"));
  } else {
    const TriangleMesh mesh = ctx.path("mesh").empty() ? blob_mesh() : load_mesh(ctx.path("mesh"));
    full = sample_mesh(mesh, ctx.get<int>("samples"), seed);
  }
  full = add_outliers(full, ctx.get<int>("outliers"), ctx.get<double>("outlier_halfwidth"), seed + 1);

  PointCloud a, b;
  if (pair == "split") {
    std::tie(a, b) = split_two(full, split, seed + 2);
  } else {
    a = b = full;
  }
  if (crop < 1.0) {
    Rng rng(seed + 3);
    a = crop_by_plane(a, {rng.unit_vector(), crop}).first;
    b = crop_by_plane(b, {rng.unit_vector(), crop}).first;
  }
  const double voxel = ctx.get<double>("voxel");
  if (voxel > 0.0) {
    a = voxel_grid_sample(a, voxel);
    b = voxel_grid_sample(b, voxel);
  }
  if (ctx.get<bool>("use_normals")) {
    a = estimate_normals(a, ctx.get<int>("normals_k"));
    b = estimate_normals(b, ctx.get<int>("normals_k"));
  }
  // The source is moved away by a random motion; the ground truth maps it back.
  const RigidTransform motion =
      random_rigid(seed + 4, ctx.get<double>("rotation_deg"), ctx.get<double>("translation"));
  const PointCloud source = a.transformed(motion);
  const RigidTransform gt = invert(motion);

  const fs::path dir = ctx.out_dir();
  const CloudFormat fmt = parse_cloud_format(ctx.path("format"));
  const std::string ext = ctx.path("format") == "ply" ? ".ply" : ctx.path("format") == "obj" ? ".obj" : ".xyz";
  save_cloud(dir / ("source" + ext), source, fmt);
  save_cloud(dir / ("reference" + ext), b, fmt);
  write_json(dir / "gt.json", {{"schema_version", kSchemaVersion}, {"transform", transform_json(gt)}});
  ctx.out << "gen: source " << source.size() << " points, reference " << b.size()
          << " points (" << full.size() << " before the split)\n";
  return kOk;
}

int cmd_assemble(const Context& ctx, bool complete) {
  const BitrModel model = obtain_model(ctx);
  const bool normals = model.config.use_normals;
  const PointCloud x = load_input(ctx, "source", normals);
  const PointCloud y = load_input(ctx, "reference", normals);

  json doc = {{"schema_version", kSchemaVersion}};
  RigidTransform g;
  if (complete) {
    g = complete_match(model, x, y);
    doc["method"] = "complete_match";
  } else {
    const AssemblyResult res = bitr_forward(model, x, y);
    g = res.g;
    doc["method"] = "bitr";
    doc["diagnostics"] = {{"singular_values", {res.singular_values(0), res.singular_values(1), res.singular_values(2)}},
                          {"spectral_gap", res.spectral_gap},
                          {"near_degenerate", res.near_degenerate}};
  }
  const std::string refine = ctx.path("refine");
  if (refine == "icp") {
    const IcpResult icp = icp_refine(x, y, g, ctx.get<int>("icp_iters"), ctx.get<double>("icp_tol"));
    g = icp.g;
    doc["icp"] = {{"initial_mse", icp.initial_mse}, {"final_mse", icp.final_mse}, {"iterations", icp.iterations}};
  } else if (refine != "none") {
    throw UsageError("refine must be 'none' or 'icp'");
  }
  doc["transform"] = transform_json(g);
  const fs::path dir = ctx.out_dir();
  write_json(dir / "transform.json", doc);

  bool pass = true;
  if (!ctx.path("gt").empty()) {
    json m = metrics_json(g, read_transform(ctx.path("gt")));
    pass = metrics_pass(ctx, m);
    write_json(dir / "metrics.json", m);
    ctx.out << "rotation error " << m["rotation_deg"].get<double>() << " deg, translation error "
            << m["translation"].get<double>() << "\n";
  }
  return pass ? kOk : kToleranceFailed;
}

std::vector<const KernelSpec*> model_kernels(const BitrModel& model) {
  std::vector<const KernelSpec*> specs;
  auto collect = [&specs](const std::vector<LayerParams>& layers) {
    for (const auto& l : layers) {
      for (const auto& [k, s] : l.key_kernels) specs.push_back(&s);
      for (const auto& [k, s] : l.value_kernels) specs.push_back(&s);
    }
  };
  collect(model.extractor.layers);
  collect(model.layers);
  return specs;
}

int cmd_audit(const Context& ctx) {
  const BitrModel model = obtain_model(ctx);
  const auto seed = ctx.get<std::uint64_t>("seed");
  const bool normals = model.config.use_normals;
  PointCloud x, y;
  if (!ctx.path("source").empty() || !ctx.path("reference").empty()) {
    x = load_input(ctx, "source", normals);
    y = load_input(ctx, "reference", normals);
  } else {
    const int n = ctx.get<int>("audit_points");
    x = sample_mesh(blob_mesh(), n, seed + 1);
    y = sample_mesh(blob_mesh(), n, seed + 2).transformed(random_rigid(seed + 3, 180.0, 1.0));
    if (normals) {
      x = estimate_normals(x, ctx.get<int>("normals_k"));
      y = estimate_normals(y, ctx.get<int>("normals_k"));
    }
  }
  const double tol = ctx.get<double>("tol");
  const AuditReport rep = equivariance_audit(model, x, y, ctx.get<int>("audit_trials"), seed);

  const double ktol = ctx.get<double>("kernel_tol");
  Rng krng(seed + 5);
  double kmax = 0.0;
  const auto specs = model_kernels(model);
  for (const KernelSpec* s : specs) {
    kmax = std::max(kmax, certify_kernel_constraint(*s, ctx.get<int>("kernel_trials"), ktol, krng).max_residual);
  }
  const bool pass_bi = rep.delta_bi <= tol;
  const bool pass_swap = rep.delta_swap <= tol;
  const bool pass_scale = rep.delta_scale <= tol;
  const bool pass_kernel = kmax <= ktol;
  const bool pass = pass_bi && pass_swap && pass_scale && pass_kernel;
  json doc = {{"schema_version", kSchemaVersion},
              {"trials", rep.trials},
              {"points", {x.size(), y.size()}},
              {"tolerance", tol},
              {"delta_bi", rep.delta_bi},
              {"delta_swap", rep.delta_swap},
              {"delta_scale", rep.delta_scale},
              {"model", {{"swap_tied", model.config.swap_tied}, {"scale_chain", model.config.scale_chain}}},
              {"kernel", {{"specs", specs.size()},
                          {"trials", ctx.get<int>("kernel_trials")},
                          {"max_residual", kmax},
                          {"tolerance", ktol}}},
              {"pass", {{"bi", pass_bi}, {"swap", pass_swap}, {"scale", pass_scale}, {"kernel", pass_kernel}}},
              {"passed", pass}};
  write_json(ctx.out_dir() / "audit.json", doc);
  ctx.out << "delta_bi " << rep.delta_bi << (pass_bi ? " PASS" : " FAIL") << "\n"
          << "delta_swap " << rep.delta_swap << (pass_swap ? " PASS" : " FAIL") << "\n"
          << "delta_scale " << rep.delta_scale << (pass_scale ? " PASS" : " FAIL") << "\n"
          << "kernel residual " << kmax << (pass_kernel ? " PASS" : " FAIL") << "\n";
  return pass ? kOk : kToleranceFailed;
}

int cmd_arun(const Context& ctx) {
  const PointCloud x = load_input(ctx, "source", false);
  const PointCloud y = load_input(ctx, "reference", false);
  const RigidTransform g = arun_solve(x.points, y.points);
  const fs::path dir = ctx.out_dir();
  write_json(dir / "transform.json", {{"schema_version", kSchemaVersion},
                                      {"method", "arun"},
                                      {"transform", transform_json(g)}});
  bool pass = true;
  if (!ctx.path("gt").empty()) {
    json m = metrics_json(g, read_transform(ctx.path("gt")));
    pass = metrics_pass(ctx, m);
    write_json(dir / "metrics.json", m);
  }
  return pass ? kOk : kToleranceFailed;
}

int cmd_icp(const Context& ctx) {
  const PointCloud x = load_input(ctx, "source", false);
  const PointCloud y = load_input(ctx, "reference", false);
  const RigidTransform g0 = ctx.path("init").empty() ? RigidTransform{} : read_transform(ctx.path("init"));
  const IcpResult icp = icp_refine(x, y, g0, ctx.get<int>("icp_iters"), ctx.get<double>("icp_tol"));
  const fs::path dir = ctx.out_dir();
  write_json(dir / "transform.json",
             {{"schema_version", kSchemaVersion},
              {"method", "icp"},
              {"transform", transform_json(icp.g)},
              {"icp", {{"initial_mse", icp.initial_mse}, {"final_mse", icp.final_mse}, {"iterations", icp.iterations}}}});
  ctx.out << "icp: mse " << icp.initial_mse << " -> " << icp.final_mse << " in " << icp.iterations
          << " iterations\n";
  bool pass = true;
  if (!ctx.path("gt").empty()) {
    json m = metrics_json(icp.g, read_transform(ctx.path("gt")));
    pass = metrics_pass(ctx, m);
    write_json(dir / "metrics.json", m);
  }
  return pass ? kOk : kToleranceFailed;
}

json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"SE(3)-bi-equivariant point-cloud assembly"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // Flags shared by every subcommand; each one patches a config key.
  std::string config_path;
  json patch = json::object();
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t v) { patch["seed"] = v; }, "random seed");
    sub->add_option_function<std::string>("--out", [&](const std::string& v) { patch["out"] = v; }, "output directory");
    sub->add_option_function<std::string>("--model", [&](const std::string& v) { patch["model"] = v; }, "model JSON");
    sub->add_option_function<double>("--tol", [&](double v) { patch["tol"] = v; }, "equivariance tolerance");
    sub->add_option_function<std::string>("--save-model", [&](const std::string& v) { patch["save_model"] = v; },
                                          "write the model used to this path");
  };
  auto add_string = [&](CLI::App* sub, const std::string& flag, const char* key, const std::string& help) {
    sub->add_option_function<std::string>(flag, [&patch, key](const std::string& v) { patch[key] = v; }, help);
  };
  auto add_flag = [&](CLI::App* sub, const std::string& flag, const char* key, const std::string& help) {
    sub->add_flag_function(flag, [&patch, key](std::int64_t) { patch[key] = true; }, help);
  };
  auto add_inputs = [&](CLI::App* sub) {
    add_string(sub, "--source", "source", "source cloud");
    add_string(sub, "--reference", "reference", "reference cloud");
    add_string(sub, "--gt", "gt", "ground-truth transform JSON");
  };

  CLI::App* gen = app.add_subcommand("gen", "generate a source/reference pair and ground truth");
  add_common(gen);
  add_string(gen, "--mesh", "mesh", "OBJ mesh to sample (default: built-in shape)");
  add_string(gen, "--source", "source", "sample from this cloud instead of a mesh");
  add_string(gen, "--pair", "pair", "split | copy");
  add_string(gen, "--format", "format", "xyz | ply | obj");
  gen->add_option_function<double>("--crop", [&](double v) { patch["crop_ratio"] = v; }, "keep ratio s");

  CLI::App* assemble = app.add_subcommand("assemble", "run the model on a pair of clouds");
  add_common(assemble);
  add_inputs(assemble);
  add_flag(assemble, "--complete-match", "complete_match", "compose with bitr(X, X)");
  add_string(assemble, "--refine", "refine", "none | icp");

  CLI::App* match = app.add_subcommand("match", "complete matching with an untrained swap-tied model");
  add_common(match);
  add_inputs(match);
  add_string(match, "--refine", "refine", "none | icp");

  CLI::App* audit = app.add_subcommand("audit", "equivariance audit and kernel certification");
  add_common(audit);
  add_string(audit, "--source", "source", "source cloud (default: synthetic)");
  add_string(audit, "--reference", "reference", "reference cloud (default: synthetic)");
  audit->add_option_function<int>("--trials", [&](int v) { patch["audit_trials"] = v; }, "random perturbations");
  add_flag(audit, "--break-swap-ties", "break_swap_ties", "fault injection: untie swap weights");
  add_flag(audit, "--break-scale-chain", "break_scale_chain", "fault injection: degree-1 value paths everywhere");

  CLI::App* arun = app.add_subcommand("arun", "closed-form registration of corresponded clouds");
  add_common(arun);
  add_inputs(arun);

  CLI::App* icp = app.add_subcommand("icp", "iterative closest point refinement");
  add_common(icp);
  add_inputs(icp);
  add_string(icp, "--init", "init", "initial transform JSON (default identity)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    json cfg = default_config();
    if (!config_path.empty()) cfg = merge_config(cfg, read_config_file(config_path), config_path);
    cfg = merge_config(cfg, patch, "command line");
    Context ctx{cfg, out, err};
    if (*gen) return cmd_gen(ctx);
    if (*assemble) return cmd_assemble(ctx, cfg.at("complete_match").get<bool>());
    if (*match) return cmd_assemble(ctx, true);
    if (*audit) return cmd_audit(ctx);
    if (*arun) return cmd_arun(ctx);
    if (*icp) return cmd_icp(ctx);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const DegenerateSpectrum& e) {
    err << "error: " << e.what() << " (sigma2 = " << e.sigma2() << ", sigma3 = " << e.sigma3() << ")\n";
    return kRuntimeError;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace bitr::cli
