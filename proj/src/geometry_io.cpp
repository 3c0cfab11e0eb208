#include "bitr/geometry_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>
#include <string_view>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include "bitr/errors.hpp"

namespace bitr {
namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_double(std::string_view s, std::size_t line) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError("line " + std::to_string(line) + ": '" + std::string(s) +
                         "' is not a finite number",
                     line);
  }
  return v;
}

long parse_long(std::string_view s, std::size_t line) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("line " + std::to_string(line) + ": '" + std::string(s) +
                         "' is not an integer",
                     line);
  }
  return v;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_row(std::ostream& out, const char* prefix, const Eigen::RowVector3d& v) {
  out << prefix << fmt17(v(0)) << ' ' << fmt17(v(1)) << ' ' << fmt17(v(2));
}

PointCloud from_rows(const std::vector<Eigen::RowVector3d>& pts,
                     const std::vector<Eigen::RowVector3d>& normals) {
  PointCloud c;
  c.points.resize(static_cast<Eigen::Index>(pts.size()), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) c.points.row(static_cast<Eigen::Index>(i)) = pts[i];
  if (!normals.empty()) {
    Cloud3 n(static_cast<Eigen::Index>(normals.size()), 3);
    for (std::size_t i = 0; i < normals.size(); ++i) n.row(static_cast<Eigen::Index>(i)) = normals[i];
    c.normals = std::move(n);
  }
  return c;
}

PointCloud load_xyz(std::istream& in) {
  std::vector<Eigen::RowVector3d> pts, normals;
  std::optional<std::size_t> columns;
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    std::string_view body(line);
    body = body.substr(0, body.find('#'));
    const auto tok = split_ws(body);
    if (tok.empty()) continue;
    if (tok.size() != 3 && tok.size() != 6) {
      throw ParseError("line " + std::to_string(no) + ": expected 3 or 6 columns, got " +
                           std::to_string(tok.size()),
                       no);
    }
    if (columns && *columns != tok.size()) {
      throw ParseError("line " + std::to_string(no) + ": column count changed from " +
                           std::to_string(*columns) + " to " + std::to_string(tok.size()),
                       no);
    }
    columns = tok.size();
    pts.emplace_back(parse_double(tok[0], no), parse_double(tok[1], no), parse_double(tok[2], no));
    if (tok.size() == 6) {
      normals.emplace_back(parse_double(tok[3], no), parse_double(tok[4], no),
                           parse_double(tok[5], no));
    }
  }
  return from_rows(pts, normals);
}

PointCloud load_ply(std::istream& in) {
  std::string line;
  std::size_t no = 0;
  auto next = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  if (!next() || line != "ply") throw ParseError("line 1: missing 'ply' magic", 1);
  long vertex_count = -1;
  bool in_vertex = false;
  bool vertex_seen = false;
  std::vector<std::string> props;
  bool ascii = false;
  while (true) {
    if (!next()) throw ParseError("unexpected end of header", no);
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "end_header") break;
    if (tok[0] == "format") {
      if (tok.size() < 2 || tok[1] != "ascii") {
        throw ParseError("line " + std::to_string(no) + ": only ASCII PLY is supported", no);
      }
      ascii = true;
    } else if (tok[0] == "element") {
      if (tok.size() != 3) throw ParseError("line " + std::to_string(no) + ": malformed element", no);
      in_vertex = tok[1] == "vertex";
      if (in_vertex) {
        if (vertex_seen) throw ParseError("line " + std::to_string(no) + ": second vertex element", no);
        if (!props.empty() || vertex_count >= 0) {
          throw ParseError("line " + std::to_string(no) + ": vertex must be the first element", no);
        }
        vertex_seen = true;
        vertex_count = parse_long(tok[2], no);
        if (vertex_count < 0) throw ParseError("line " + std::to_string(no) + ": negative count", no);
      } else if (!vertex_seen) {
        throw ParseError("line " + std::to_string(no) + ": vertex must be the first element", no);
      }
    } else if (tok[0] == "property") {
      if (in_vertex) {
        if (tok.size() != 3 || tok[1] == "list") {
          throw ParseError("line " + std::to_string(no) + ": unsupported vertex property", no);
        }
        props.emplace_back(tok[2]);
      }
    } else {
      throw ParseError("line " + std::to_string(no) + ": unknown header keyword '" +
                           std::string(tok[0]) + "'",
                       no);
    }
  }
  if (!ascii) throw ParseError("missing format line", no);
  if (vertex_count < 0) throw ParseError("no vertex element", no);
  auto column = [&](const char* name) -> int {
    auto it = std::find(props.begin(), props.end(), name);
    return it == props.end() ? -1 : static_cast<int>(it - props.begin());
  };
  const std::array<int, 3> xyz{column("x"), column("y"), column("z")};
  const std::array<int, 3> nxyz{column("nx"), column("ny"), column("nz")};
  if (std::find(xyz.begin(), xyz.end(), -1) != xyz.end()) {
    throw ParseError("vertex element lacks x, y or z", no);
  }
  const bool has_normals = std::find(nxyz.begin(), nxyz.end(), -1) == nxyz.end();
  std::vector<Eigen::RowVector3d> pts, normals;
  for (long v = 0; v < vertex_count; ++v) {
    if (!next()) throw ParseError("unexpected end of file in vertex list", no);
    const auto tok = split_ws(line);
    if (tok.size() != props.size()) {
      throw ParseError("line " + std::to_string(no) + ": expected " +
                           std::to_string(props.size()) + " values, got " +
                           std::to_string(tok.size()),
                       no);
    }
    pts.emplace_back(parse_double(tok[xyz[0]], no), parse_double(tok[xyz[1]], no),
                     parse_double(tok[xyz[2]], no));
    if (has_normals) {
      normals.emplace_back(parse_double(tok[nxyz[0]], no), parse_double(tok[nxyz[1]], no),
                           parse_double(tok[nxyz[2]], no));
    }
  }
  return from_rows(pts, normals);
}

PointCloud load_obj(std::istream& in) {
  std::vector<Eigen::RowVector3d> pts, normals;
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    std::string_view body(line);
    body = body.substr(0, body.find('#'));
    const auto tok = split_ws(body);
    if (tok.empty() || (tok[0] != "v" && tok[0] != "vn")) continue;
    if (tok.size() < 4) {
      throw ParseError("line " + std::to_string(no) + ": '" + std::string(tok[0]) +
                           "' needs 3 coordinates",
                       no);
    }
    Eigen::RowVector3d v(parse_double(tok[1], no), parse_double(tok[2], no),
                         parse_double(tok[3], no));
    (tok[0] == "v" ? pts : normals).push_back(v);
  }
  if (normals.size() != pts.size()) normals.clear();
  return from_rows(pts, normals);
}

struct Accum {
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  Eigen::Vector3d normal_sum = Eigen::Vector3d::Zero();
  int count = 0;
};

Cloud3 select_rows(const Cloud3& m, const std::vector<int>& rows) {
  Cloud3 out(static_cast<Eigen::Index>(rows.size()), 3);
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

PointCloud select(const PointCloud& x, const std::vector<int>& rows) {
  PointCloud out{select_rows(x.points, rows), std::nullopt};
  if (x.normals) out.normals = select_rows(*x.normals, rows);
  return out;
}

}  // namespace

CloudFormat parse_cloud_format(const std::string& name) {
  std::string n = name;
  if (!n.empty() && n.front() == '.') n.erase(0, 1);
  std::transform(n.begin(), n.end(), n.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (n == "xyz" || n == "txt") return CloudFormat::Xyz;
  if (n == "ply" || n == "ply-ascii") return CloudFormat::Ply;
  if (n == "obj" || n == "obj-vertices") return CloudFormat::Obj;
  throw InvalidArgument("unknown cloud format '" + name + "'");
}

CloudFormat cloud_format_for(const std::filesystem::path& path) {
  return parse_cloud_format(path.extension().string());
}

PointCloud load_cloud(const std::filesystem::path& path) {
  return load_cloud(path, cloud_format_for(path));
}

PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format) {
  std::ifstream in = open_in(path);
  PointCloud c;
  switch (format) {
    case CloudFormat::Xyz: c = load_xyz(in); break;
    case CloudFormat::Ply: c = load_ply(in); break;
    case CloudFormat::Obj: c = load_obj(in); break;
  }
  if (c.size() == 0) throw ParseError(path.string() + ": no points", 0);
  return c;
}

void save_cloud(const std::filesystem::path& path, const PointCloud& cloud) {
  save_cloud(path, cloud, cloud_format_for(path));
}

void save_cloud(const std::filesystem::path& path, const PointCloud& cloud,
                CloudFormat format) {
  cloud.validate();
  std::ofstream out = open_out(path);
  const Eigen::Index n = cloud.size();
  switch (format) {
    case CloudFormat::Xyz:
      for (Eigen::Index i = 0; i < n; ++i) {
        write_row(out, "", cloud.points.row(i));
        if (cloud.normals) write_row(out, " ", cloud.normals->row(i));
        out << '\n';
      }
      break;
    case CloudFormat::Ply:
      out << "ply\nformat ascii 1.0\nelement vertex " << n
          << "\nproperty double x\nproperty double y\nproperty double z\n";
      if (cloud.normals) out << "property double nx\nproperty double ny\nproperty double nz\n";
      out << "end_header\n";
      for (Eigen::Index i = 0; i < n; ++i) {
        write_row(out, "", cloud.points.row(i));
        if (cloud.normals) write_row(out, " ", cloud.normals->row(i));
        out << '\n';
      }
      break;
    case CloudFormat::Obj:
      for (Eigen::Index i = 0; i < n; ++i) {
        write_row(out, "v ", cloud.points.row(i));
        out << '\n';
      }
      if (cloud.normals) {
        for (Eigen::Index i = 0; i < n; ++i) {
          write_row(out, "vn ", cloud.normals->row(i));
          out << '\n';
        }
      }
      break;
  }
  if (!out) throw Error("write failed for " + path.string());
}

void TriangleMesh::validate() const {
  if (faces.size() > 0 && (faces.minCoeff() < 0 || faces.maxCoeff() >= vertices.rows())) {
    throw InvalidArgument("mesh face index out of range");
  }
}

TriangleMesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::vector<Eigen::RowVector3d> verts;
  std::vector<Eigen::RowVector3i> faces;
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    std::string_view body(line);
    body = body.substr(0, body.find('#'));
    const auto tok = split_ws(body);
    if (tok.empty()) continue;
    if (tok[0] == "v") {
      if (tok.size() < 4) throw ParseError("line " + std::to_string(no) + ": 'v' needs 3 coordinates", no);
      verts.emplace_back(parse_double(tok[1], no), parse_double(tok[2], no), parse_double(tok[3], no));
    } else if (tok[0] == "f") {
      if (tok.size() < 4) throw ParseError("line " + std::to_string(no) + ": face needs 3 vertices", no);
      std::vector<int> idx;
      for (std::size_t k = 1; k < tok.size(); ++k) {
        long v = parse_long(tok[k].substr(0, tok[k].find('/')), no);
        if (v < 0) v += static_cast<long>(verts.size()) + 1;
        if (v < 1) throw ParseError("line " + std::to_string(no) + ": bad vertex index", no);
        idx.push_back(static_cast<int>(v - 1));
      }
      for (std::size_t k = 1; k + 1 < idx.size(); ++k) faces.emplace_back(idx[0], idx[k], idx[k + 1]);
    }
  }
  TriangleMesh mesh;
  mesh.vertices.resize(static_cast<Eigen::Index>(verts.size()), 3);
  for (std::size_t i = 0; i < verts.size(); ++i) mesh.vertices.row(static_cast<Eigen::Index>(i)) = verts[i];
  mesh.faces.resize(static_cast<Eigen::Index>(faces.size()), 3);
  for (std::size_t i = 0; i < faces.size(); ++i) mesh.faces.row(static_cast<Eigen::Index>(i)) = faces[i];
  mesh.validate();
  return mesh;
}

TriangleMesh blob_mesh() {
  constexpr int kLat = 24;
  constexpr int kLon = 48;
  const double pi = std::numbers::pi;
  auto radius = [](double theta, double phi) {
    return 0.55 + 0.18 * std::sin(2.0 * theta) * std::cos(phi) +
           0.10 * std::cos(3.0 * theta) + 0.07 * std::sin(theta) * std::sin(2.0 * phi + 0.4);
  };
  TriangleMesh mesh;
  mesh.vertices.resize(2 + (kLat - 1) * kLon, 3);
  mesh.vertices.row(0) << 0.0, 0.0, radius(0.0, 0.0);
  for (int i = 1; i < kLat; ++i) {
    const double theta = pi * i / kLat;
    for (int j = 0; j < kLon; ++j) {
      const double phi = 2.0 * pi * j / kLon;
      const double r = radius(theta, phi);
      mesh.vertices.row(1 + (i - 1) * kLon + j) << r * std::sin(theta) * std::cos(phi),
          r * std::sin(theta) * std::sin(phi), r * std::cos(theta);
    }
  }
  const int south = 1 + (kLat - 1) * kLon;
  mesh.vertices.row(south) << 0.0, 0.0, -radius(pi, 0.0);
  std::vector<Eigen::RowVector3i> faces;
  auto ring = [](int i, int j) { return 1 + (i - 1) * kLon + (j % kLon); };
  for (int j = 0; j < kLon; ++j) faces.emplace_back(0, ring(1, j), ring(1, j + 1));
  for (int i = 1; i + 1 < kLat; ++i) {
    for (int j = 0; j < kLon; ++j) {
      faces.emplace_back(ring(i, j), ring(i + 1, j), ring(i + 1, j + 1));
      faces.emplace_back(ring(i, j), ring(i + 1, j + 1), ring(i, j + 1));
    }
  }
  for (int j = 0; j < kLon; ++j) faces.emplace_back(south, ring(kLat - 1, j + 1), ring(kLat - 1, j));
  mesh.faces.resize(static_cast<Eigen::Index>(faces.size()), 3);
  for (std::size_t i = 0; i < faces.size(); ++i) mesh.faces.row(static_cast<Eigen::Index>(i)) = faces[i];
  return mesh;
}

PointCloud sample_mesh(const TriangleMesh& mesh, int n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("sample_mesh: n must be positive");
  if (mesh.faces.rows() == 0) throw InvalidArgument("sample_mesh: mesh has no faces");
  mesh.validate();
  std::vector<double> cumulative(static_cast<std::size_t>(mesh.faces.rows()));
  double total = 0.0;
  for (Eigen::Index f = 0; f < mesh.faces.rows(); ++f) {
    const Eigen::Vector3d a = mesh.vertices.row(mesh.faces(f, 0));
    const Eigen::Vector3d b = mesh.vertices.row(mesh.faces(f, 1));
    const Eigen::Vector3d c = mesh.vertices.row(mesh.faces(f, 2));
    total += 0.5 * (b - a).cross(c - a).norm();
    cumulative[static_cast<std::size_t>(f)] = total;
  }
  if (!(total > 0.0)) throw InvalidArgument("sample_mesh: mesh has zero area");
  Rng rng(seed);
  PointCloud out{Cloud3(n, 3), std::nullopt};
  for (int s = 0; s < n; ++s) {
    const double pick = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    if (it == cumulative.end()) --it;
    const auto f = static_cast<Eigen::Index>(it - cumulative.begin());
    const double r1 = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    out.points.row(s) = (1.0 - r1) * mesh.vertices.row(mesh.faces(f, 0)) +
                        r1 * (1.0 - r2) * mesh.vertices.row(mesh.faces(f, 1)) +
                        r1 * r2 * mesh.vertices.row(mesh.faces(f, 2));
  }
  return out;
}

std::pair<PointCloud, PointCloud> crop_by_plane(const PointCloud& x, const PlaneCropSpec& spec) {
  x.validate();
  if (!(spec.keep_ratio > 0.0 && spec.keep_ratio <= 1.0)) {
    throw InvalidArgument("crop_by_plane: keep ratio must lie in (0, 1]");
  }
  if (std::abs(spec.normal.norm() - 1.0) > 1e-9) {
    throw InvalidArgument("crop_by_plane: normal must have unit length");
  }
  const Eigen::VectorXd proj = x.points * spec.normal;
  std::vector<int> order(static_cast<std::size_t>(x.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return proj(a) < proj(b); });
  const auto keep = static_cast<std::size_t>(std::llround(spec.keep_ratio * static_cast<double>(x.size())));
  std::vector<int> kept(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep));
  std::vector<int> dropped(order.begin() + static_cast<std::ptrdiff_t>(keep), order.end());
  std::sort(kept.begin(), kept.end());
  std::sort(dropped.begin(), dropped.end());
  PointCloud discarded{Cloud3(0, 3), std::nullopt};
  if (!dropped.empty()) discarded = select(x, dropped);
  else if (x.normals) discarded.normals = Cloud3(0, 3);
  return {select(x, kept), std::move(discarded)};
}

std::pair<PointCloud, PointCloud> split_two(const PointCloud& x, double ratio,
                                            std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidArgument("split_two: ratio must lie in (0, 1)");
  Rng rng(seed);
  return crop_by_plane(x, {rng.unit_vector(), ratio});
}

PointCloud add_outliers(const PointCloud& x, int count, double box_halfwidth,
                        std::uint64_t seed) {
  if (count < 0) throw InvalidArgument("add_outliers: count must be non-negative");
  if (!(box_halfwidth >= 0.0)) throw InvalidArgument("add_outliers: half-width must be non-negative");
  Rng rng(seed);
  const Eigen::Index n = x.size();
  PointCloud out{Cloud3(n + count, 3), std::nullopt};
  out.points.topRows(n) = x.points;
  if (x.normals) {
    out.normals = Cloud3(n + count, 3);
    out.normals->topRows(n) = *x.normals;
  }
  for (int k = 0; k < count; ++k) {
    for (int c = 0; c < 3; ++c) out.points(n + k, c) = rng.uniform(-box_halfwidth, box_halfwidth);
  }
  if (out.normals) {
    for (int k = 0; k < count; ++k) out.normals->row(n + k) = rng.unit_vector().transpose();
  }
  return out;
}

PointCloud voxel_grid_sample(const PointCloud& x, double cell) {
  if (!(cell > 0.0)) throw InvalidArgument("voxel_grid_sample: cell must be positive");
  std::map<std::array<long long, 3>, Accum> cells;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    std::array<long long, 3> key;
    for (int c = 0; c < 3; ++c) key[static_cast<std::size_t>(c)] = static_cast<long long>(std::floor(x.points(i, c) / cell));
    Accum& a = cells[key];
    a.sum += x.points.row(i).transpose();
    if (x.normals) a.normal_sum += x.normals->row(i).transpose();
    ++a.count;
  }
  PointCloud out{Cloud3(static_cast<Eigen::Index>(cells.size()), 3), std::nullopt};
  if (x.normals) out.normals = Cloud3(static_cast<Eigen::Index>(cells.size()), 3);
  Eigen::Index row = 0;
  for (const auto& [key, a] : cells) {
    out.points.row(row) = (a.sum / a.count).transpose();
    if (x.normals) {
      const double len = a.normal_sum.norm();
      out.normals->row(row) = len > 0.0 ? Eigen::RowVector3d(a.normal_sum.transpose() / len)
                                        : Eigen::RowVector3d::Zero();
    }
    ++row;
  }
  return out;
}

PointCloud estimate_normals(const PointCloud& x, int k) {
  if (k < 3) throw InvalidArgument("estimate_normals: k must be at least 3");
  if (x.size() <= k) {
    throw InvalidArgument("estimate_normals: need more than k = " + std::to_string(k) + " points");
  }
  const Eigen::RowVector3d centroid = x.points.colwise().mean();
  PointCloud out{x.points, Cloud3(x.size(), 3)};
  std::vector<std::pair<double, int>> dist(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      dist[static_cast<std::size_t>(j)] = {(x.points.row(j) - x.points.row(i)).squaredNorm(),
                                           static_cast<int>(j)};
    }
    // The point itself (distance 0) plus its k nearest neighbours.
    std::partial_sort(dist.begin(), dist.begin() + k + 1, dist.end());
    Eigen::Matrix<double, Eigen::Dynamic, 3> nb(k + 1, 3);
    for (int m = 0; m <= k; ++m) nb.row(m) = x.points.row(dist[static_cast<std::size_t>(m)].second);
    const Eigen::RowVector3d mean = nb.colwise().mean();
    const Eigen::Matrix3d cov = (nb.rowwise() - mean).transpose() * (nb.rowwise() - mean);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    Eigen::Vector3d n = eig.eigenvectors().col(0).normalized();
    if (n.dot((x.points.row(i) - centroid).transpose()) < 0.0) n = -n;
    out.normals->row(i) = n.transpose();
  }
  return out;
}

RigidTransform random_rigid(Rng& rng, double max_angle_deg, double translation_scale) {
  if (!(translation_scale >= 0.0)) throw InvalidArgument("translation scale must be non-negative");
  RigidTransform g;
  if (max_angle_deg >= 180.0) {
    g.r = random_rotation(rng);
  } else {
    const Eigen::Vector3d axis = rng.unit_vector();
    const double angle = rng.uniform(0.0, std::max(0.0, max_angle_deg)) * std::numbers::pi / 180.0;
    g.r = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
  }
  const Eigen::Vector3d dir = rng.unit_vector();
  g.t = translation_scale * std::cbrt(rng.uniform()) * dir;
  return g;
}

RigidTransform random_rigid(std::uint64_t seed, double max_angle_deg, double translation_scale) {
  Rng rng(seed);
  return random_rigid(rng, max_angle_deg, translation_scale);
}

}  // namespace bitr
