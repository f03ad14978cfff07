#pragma once

// File formats: domain/mesh/solution/nodal JSON, doubling and check CSV
// (RFC 4180), SVG renderings.  All writers are deterministic: same values,
// same bytes.

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "nodalab/doubling.hpp"
#include "nodalab/fields.hpp"
#include "nodalab/mesh.hpp"
#include "nodalab/nodal.hpp"
#include "nodalab/spectral.hpp"

namespace nodalab::io {

using nlohmann::json;

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// CSV (RFC 4180)

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }

  std::string dump() const {
    auto quote = [](const std::string& s) {
      if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
      std::string q = "\"";
      for (char c : s) {
        if (c == '"') q += '"';
        q += c;
      }
      return q + "\"";
    };
    std::string out;
    for (size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + quote(header[i]);
    out += "\r\n";
    for (const auto& row : rows) {
      for (size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + quote(row[i]);
      out += "\r\n";
    }
    return out;
  }

  void write(const std::string& path) const { write_text(path, dump()); }
};

// ---------------------------------------------------------------------------
// Domain files: {loops, patches: [{center, radius, angle, tau, samples}], r0}

inline json domain_to_json(const PolygonDomain& dom) {
  json j;
  j["loops"] = json::array();
  for (const auto& loop : dom.loops) {
    json jl = json::array();
    for (const auto& p : loop) jl.push_back({p.x, p.y});
    j["loops"].push_back(jl);
  }
  j["patches"] = json::array();
  for (const auto& patch : dom.patches) {
    json jp;
    jp["center"] = {patch.center().x, patch.center().y};
    jp["radius"] = patch.radius();
    jp["angle"] = patch.angle();
    jp["tau"] = patch.tau();
    jp["samples"] = patch.samples();
    j["patches"].push_back(jp);
  }
  j["r0"] = dom.r0;
  j["tau_global"] = dom.tau_global;
  return j;
}

inline PolygonDomain domain_from_json(const json& j) {
  std::vector<std::vector<Vec2>> loops;
  const json& jl = j.at("loops");
  const bool single_loop = !jl.empty() && jl[0].is_array() && !jl[0].empty() && jl[0][0].is_number();
  auto read_loop = [](const json& arr) {
    std::vector<Vec2> loop;
    for (const auto& p : arr) loop.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return loop;
  };
  if (single_loop)
    loops.push_back(read_loop(jl));
  else
    for (const auto& l : jl) loops.push_back(read_loop(l));

  PolygonDomain dom(loops, j.value("tau_global", 1.0), j.value("r0", 0.0));
  if (j.contains("patches"))
    for (const auto& jp : j.at("patches")) {
      dom.patches.emplace_back(
          Vec2{jp.at("center").at(0).get<double>(), jp.at("center").at(1).get<double>()},
          jp.at("radius").get<double>(), jp.value("angle", 0.0), jp.at("tau").get<double>(),
          jp.at("samples").get<std::vector<double>>());
    }
  return dom;
}

inline void write_domain(const PolygonDomain& dom, const std::string& path) {
  write_text(path, domain_to_json(dom).dump(2) + "\n");
}

inline PolygonDomain read_domain(const std::string& path) {
  return domain_from_json(json::parse(read_text(path)));
}

// Built-in study domains.
inline PolygonDomain builtin_domain(const std::string& name) {
  if (name == "square") {
    PolygonDomain dom({{{0, 0}, {1, 0}, {1, 1}, {0, 1}}});
    return dom;  // corners are Lip(1): no small-tau certification, r0 = 0
  }
  if (name == "lshape")
    return PolygonDomain({{{0, 0}, {1, 0}, {1, 0.5}, {0.5, 0.5}, {0.5, 1}, {0, 1}}});
  if (name == "disk256") {
    const int n = 256;
    std::vector<Vec2> loop(n);
    for (int i = 0; i < n; ++i) {
      const double a = 2 * kPi * i / n;
      loop[i] = {std::cos(a), std::sin(a)};
    }
    // the polygon boundary is a graph over the tangent at each edge midpoint;
    // within a window of half-width w the slope stays below tan(asin(w)),
    // so radius-0.09 patches certify tau = 0.12 and cover with r0 = 0.045
    const double r0 = 0.045;
    const double patch_radius = 0.09;
    PolygonDomain dom({loop}, 0.12, r0);
    for (int i = 0; i < n; i += 3) {
      const double a = 2 * kPi * (i + 0.5) / n;
      const Vec2 c{std::cos(kPi / n) * std::cos(a), std::cos(kPi / n) * std::sin(a)};
      const double angle = a + kPi / 2;  // graph axis along the tangent
      const Frame fr{c, angle};
      dom.patches.push_back(LipschitzPatch::from_function(
          c, patch_radius, dom.tau_global,
          [&](double t) {
            // exact polygon height over the tangent line
            double best = 1e300;
            for (int e = 0; e < n; ++e) {
              const Vec2 l0 = fr.to_local(loop[e]);
              const Vec2 l1 = fr.to_local(loop[(e + 1) % n]);
              if ((l0.x - t) * (l1.x - t) > 0) continue;
              const double s = (t - l0.x) / (l1.x - l0.x + 1e-300);
              const double y = l0.y + s * (l1.y - l0.y);
              if (std::abs(y) < std::abs(best)) best = y;
            }
            return best == 1e300 ? 0.0 : best;
          },
          angle, 256));
    }
    return dom;
  }
  throw std::invalid_argument("unknown builtin domain '" + name + "'");
}

// ---------------------------------------------------------------------------
// Mesh files: {vertices, triangles, boundary}

inline void write_mesh(const TriangleMesh& mesh, const std::string& path) {
  json j;
  j["vertices"] = json::array();
  for (const auto& v : mesh.vertices) j["vertices"].push_back({v.x, v.y});
  j["triangles"] = json::array();
  for (const auto& t : mesh.triangles) j["triangles"].push_back({t[0], t[1], t[2]});
  j["boundary"] = json::array();
  for (auto b : mesh.boundary_vertex) j["boundary"].push_back(int(b));
  j["h_max"] = mesh.h_max;
  write_text(path, j.dump(2) + "\n");
}

inline TriangleMesh read_mesh(const std::string& path) {
  const json j = json::parse(read_text(path));
  TriangleMesh m;
  for (const auto& v : j.at("vertices")) m.vertices.push_back({v.at(0), v.at(1)});
  for (const auto& t : j.at("triangles"))
    m.triangles.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()});
  for (const auto& b : j.at("boundary")) m.boundary_vertex.push_back(b.get<int>() ? 1 : 0);
  m.h_max = j.contains("h_max") ? j.at("h_max").get<double>() : m.compute_h_max();
  if (m.boundary_vertex.size() != m.vertices.size())
    throw std::runtime_error("mesh file: boundary flag count mismatch");
  return m;
}

// ---------------------------------------------------------------------------
// Solution files: {mesh_ref, pairs: [{lambda, residual, coeffs}]}
// coeffs hold one value per mesh vertex (boundary zeros included).

struct SolutionFile {
  std::string mesh_ref;
  std::vector<double> lambdas;
  std::vector<double> residuals;
  std::vector<std::vector<double>> vertex_values;
};

inline std::vector<double> expand_to_vertices(const std::vector<double>& dof_values,
                                              const std::vector<int>& dof_map) {
  std::vector<double> full(dof_map.size(), 0.0);
  for (size_t v = 0; v < dof_map.size(); ++v)
    if (dof_map[v] >= 0) full[v] = dof_values[dof_map[v]];
  return full;
}

inline void write_solution(const std::string& mesh_ref, const std::vector<EigenPair>& pairs,
                           const std::vector<int>& dof_map, const std::string& path) {
  json j;
  j["mesh_ref"] = mesh_ref;
  j["pairs"] = json::array();
  for (const auto& p : pairs) {
    json jp;
    jp["lambda"] = p.lambda;
    jp["residual"] = p.residual;
    jp["coeffs"] = expand_to_vertices(p.coeffs, dof_map);
    j["pairs"].push_back(jp);
  }
  write_text(path, j.dump(2) + "\n");
}

inline SolutionFile read_solution(const std::string& path) {
  const json j = json::parse(read_text(path));
  SolutionFile s;
  s.mesh_ref = j.at("mesh_ref").get<std::string>();
  for (const auto& jp : j.at("pairs")) {
    s.lambdas.push_back(jp.at("lambda").get<double>());
    s.residuals.push_back(jp.at("residual").get<double>());
    s.vertex_values.push_back(jp.at("coeffs").get<std::vector<double>>());
  }
  return s;
}

// ---------------------------------------------------------------------------
// Nodal files + SVG

inline void write_nodal(const NodalSet& ns, const std::string& path) {
  json j;
  j["segments"] = json::array();
  for (const auto& s : ns.segments)
    j["segments"].push_back({{s[0].x, s[0].y}, {s[1].x, s[1].y}});
  j["total_length"] = ns.total_length;
  j["resolution"] = ns.resolution;
  write_text(path, j.dump(2) + "\n");
}

inline NodalSet read_nodal(const std::string& path) {
  const json j = json::parse(read_text(path));
  NodalSet ns;
  for (const auto& s : j.at("segments"))
    ns.segments.push_back({Vec2{s.at(0).at(0), s.at(0).at(1)}, Vec2{s.at(1).at(0), s.at(1).at(1)}});
  ns.total_length = j.at("total_length").get<double>();
  ns.resolution = j.at("resolution").get<double>();
  return ns;
}

class SvgWriter {
 public:
  SvgWriter(Rect world, int width = 800) : world_(world.padded(0.05 * world.diag())) {
    width_ = width;
    height_ = int(width * world_.height() / world_.width());
  }

  void polyline(const std::vector<Vec2>& pts, const std::string& color, double w = 1.0) {
    std::string d;
    for (size_t i = 0; i < pts.size(); ++i) {
      const Vec2 p = map(pts[i]);
      d += (i ? "L" : "M") + fmt_px(p.x) + " " + fmt_px(p.y);
    }
    body_ += "<path d=\"" + d + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" +
             fmt_px(w) + "\"/>\n";
  }

  void segment(const Vec2& a, const Vec2& b, const std::string& color, double w = 1.0) {
    polyline({a, b}, color, w);
  }

  void circle(const Vec2& c, double world_r, const std::string& color) {
    const Vec2 p = map(c);
    body_ += "<circle cx=\"" + fmt_px(p.x) + "\" cy=\"" + fmt_px(p.y) + "\" r=\"" +
             fmt_px(world_r * scale()) + "\" fill=\"none\" stroke=\"" + color + "\"/>\n";
  }

  void dot(const Vec2& c, double px, const std::string& color) {
    const Vec2 p = map(c);
    body_ += "<circle cx=\"" + fmt_px(p.x) + "\" cy=\"" + fmt_px(p.y) + "\" r=\"" + fmt_px(px) +
             "\" fill=\"" + color + "\"/>\n";
  }

  void text(const Vec2& world_pos, const std::string& s) {
    const Vec2 p = map(world_pos);
    body_ += "<text x=\"" + fmt_px(p.x) + "\" y=\"" + fmt_px(p.y) +
             "\" font-size=\"12\" font-family=\"monospace\">" + s + "</text>\n";
  }

  std::string dump() const {
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
           std::to_string(width_) + "\" height=\"" + std::to_string(height_) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += body_;
    out += "</svg>\n";
    return out;
  }

  void write(const std::string& path) const { write_text(path, dump()); }

 private:
  double scale() const { return width_ / world_.width(); }
  Vec2 map(const Vec2& p) const {
    return {(p.x - world_.lo.x) * scale(), height_ - (p.y - world_.lo.y) * scale()};
  }
  static std::string fmt_px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
  }

  Rect world_;
  int width_, height_;
  std::string body_;
};

inline void write_nodal_svg(const NodalSet& ns, const PolygonDomain* dom, const std::string& path) {
  Rect world = dom ? dom->bbox() : Rect{{-1, -1}, {1, 1}};
  if (!dom && !ns.segments.empty()) {
    world = Rect{ns.segments[0][0], ns.segments[0][0]};
    for (const auto& s : ns.segments) {
      world.expand(s[0]);
      world.expand(s[1]);
    }
  }
  SvgWriter svg(world);
  if (dom)
    for (const auto& loop : dom->loops) {
      std::vector<Vec2> closed = loop;
      closed.push_back(loop[0]);
      svg.polyline(closed, "black", 1.5);
    }
  for (const auto& s : ns.segments) svg.segment(s[0], s[1], "crimson", 1.0);
  svg.write(path);
}

// ---------------------------------------------------------------------------
// Doubling reports: CSV columns center_x, center_y, center_t, r, H, N, err

inline CsvTable doubling_csv(const DoublingReport& rep) {
  CsvTable t;
  t.header = {"center_x", "center_y", "center_t", "r", "H", "N", "err"};
  for (size_t i = 0; i < rep.radii.size(); ++i)
    t.add_row({fmt(rep.center.x), fmt(rep.center.y), fmt(rep.center.z), fmt(rep.radii[i]),
               fmt(rep.H_values[i]), fmt(rep.N_values[i]), fmt(rep.quad_error[i])});
  return t;
}

// ---------------------------------------------------------------------------
// Field specs, including fem:<solution file>#<index>

struct LoadedField {
  FieldPtr field;
  std::optional<double> lambda;
  std::shared_ptr<const Region> region;  // natural region when known
  std::shared_ptr<const PolygonDomain> domain;
};

inline LoadedField load_field_spec(const std::string& spec, double plane_halfwidth = 4.0) {
  LoadedField out;
  if (spec.rfind("fem:", 0) == 0) {
    const auto hash = spec.rfind('#');
    if (hash == std::string::npos)
      throw std::invalid_argument("fem spec: expected fem:<solution file>#<index>");
    const std::string sol_path = spec.substr(4, hash - 4);
    const int index = std::stoi(spec.substr(hash + 1));
    const SolutionFile sol = read_solution(sol_path);
    if (index < 0 || index >= int(sol.lambdas.size()))
      throw std::invalid_argument("fem spec: pair index out of range");
    std::filesystem::path mesh_path(sol.mesh_ref);
    if (mesh_path.is_relative())
      mesh_path = std::filesystem::path(sol_path).parent_path() / mesh_path;
    auto mesh = std::make_shared<TriangleMesh>(read_mesh(mesh_path.string()));
    out.field = std::make_shared<FemField>(mesh, sol.vertex_values[index]);
    out.lambda = sol.lambdas[index];
    return out;
  }
  if (spec.rfind("ext:", 0) == 0 && spec.find("ext:fem:", 0) == 0) {
    const auto at = spec.rfind('@');
    std::string inner_spec = spec.substr(4);
    std::optional<double> lambda;
    if (at != std::string::npos && at > 4) {
      inner_spec = spec.substr(4, at - 4);
      lambda = std::stod(spec.substr(at + 1));
    }
    LoadedField inner = load_field_spec(inner_spec, plane_halfwidth);
    if (!lambda) lambda = inner.lambda;
    if (!lambda) throw std::invalid_argument("ext spec: lambda required");
    out.field = make_extension(inner.field, *lambda);
    out.lambda = lambda;
    out.region = inner.region;
    out.domain = inner.domain;
    return out;
  }

  const ParsedField parsed = parse_field_spec(spec);
  out.field = parsed.field;
  out.lambda = parsed.lambda;

  // natural regions for the analytic families
  const ScalarField* base = parsed.field.get();
  if (const auto* ext = dynamic_cast<const ExtensionField*>(base)) base = ext->inner().get();
  if (const auto* rect = dynamic_cast<const RectangleField*>(base)) {
    auto dom = std::make_shared<PolygonDomain>(PolygonDomain(
        {{{0, 0}, {rect->a(), 0}, {rect->a(), rect->b()}, {0, rect->b()}}}));
    out.domain = dom;
    out.region = std::make_shared<PolygonRegion>(*dom);
  } else if (dynamic_cast<const Sine1DField*>(base)) {
    const auto* s1 = dynamic_cast<const Sine1DField*>(base);
    out.region = std::make_shared<StripRegion>(0.0, s1->a());
  } else if (dynamic_cast<const DiskField*>(base)) {
    const int n = 512;
    std::vector<Vec2> loop(n);
    for (int i = 0; i < n; ++i) {
      const double a = 2 * kPi * i / n;
      loop[i] = {std::cos(a), std::sin(a)};
    }
    auto dom = std::make_shared<PolygonDomain>(PolygonDomain({loop}));
    out.domain = dom;
    out.region = std::make_shared<PolygonRegion>(*dom);
  } else {
    out.region = std::make_shared<EverywhereRegion>(plane_halfwidth);
  }
  return out;
}

}  // namespace nodalab::io
