// Command-line surface for the nodal-set laboratory.
//
// Exit codes: 0 success (and zero violations), 1 violations found,
// 2 usage or input errors.

#include <CLI11.hpp>

#include "nodalab/io.hpp"
#include "nodalab/verify.hpp"

using namespace nodalab;

namespace {

PolygonDomain load_domain_arg(const std::string& arg) {
  if (std::filesystem::exists(arg)) return io::read_domain(arg);
  return io::builtin_domain(arg);  // throws on unknown names
}

LipschitzPatch load_patch_arg(const std::string& arg) {
  if (std::filesystem::exists(arg)) {
    const auto j = nlohmann::json::parse(io::read_text(arg));
    return LipschitzPatch(
        Vec2{j.at("center").at(0).get<double>(), j.at("center").at(1).get<double>()},
        j.at("radius").get<double>(), j.value("angle", 0.0), j.at("tau").get<double>(),
        j.at("samples").get<std::vector<double>>());
  }
  if (arg.rfind("flat", 0) == 0) {
    double radius = 2.0, tau = 0.02;
    const auto colon = arg.find(':');
    if (colon != std::string::npos) {
      const auto v = fielddetail::parse_csv_numbers(arg.substr(colon + 1));
      if (!v.empty()) radius = v[0];
      if (v.size() > 1) tau = v[1];
    }
    return LipschitzPatch::flat({0, 0}, radius, tau);
  }
  throw std::invalid_argument("--patch expects a JSON file or flat[:radius,tau]");
}

Vec2 parse_point(const std::string& s) {
  const auto v = fielddetail::parse_csv_numbers(s);
  if (v.size() != 2) throw std::invalid_argument("expected a point 'x,y'");
  return {v[0], v[1]};
}

Vec3 parse_point3(const std::string& s) {
  const auto v = fielddetail::parse_csv_numbers(s);
  if (v.size() == 2) return {v[0], v[1], 0.0};
  if (v.size() == 3) return {v[0], v[1], v[2]};
  throw std::invalid_argument("expected a point 'x,y' or 'x,y,t'");
}

int report_exit(const verify::CheckReport& rep) {
  std::printf("%s: cases=%d violations=%d worst_margin=%s %s\n", rep.check_id.c_str(), rep.cases,
              rep.violations, io::fmt(rep.worst_margin).c_str(), rep.passed ? "pass" : "FAIL");
  for (const auto& a : rep.artifacts) std::printf("  wrote %s\n", a.c_str());
  for (const auto& n : rep.notes) std::printf("  note: %s\n", n.c_str());
  return (rep.violations == 0 && rep.passed) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nodalab: Dirichlet eigenfunctions, nodal sets and doubling indices"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string output_dir = ".";
  app.add_option("--seed", seed, "seed for all randomized corpora");
  app.add_option("--output-dir", output_dir, "directory for emitted artifacts");

  // --- domain -------------------------------------------------------------
  auto* cmd_domain = app.add_subcommand("domain", "write a built-in domain file");
  std::string dom_name = "square", dom_out;
  cmd_domain->add_option("--name", dom_name, "square | lshape | disk256");
  cmd_domain->add_option("--out", dom_out, "output path (default <name>.json)");

  // --- mesh ---------------------------------------------------------------
  auto* cmd_mesh = app.add_subcommand("mesh", "triangulate a polygon domain");
  std::string mesh_domain, mesh_out;
  double mesh_h = 0.05;
  cmd_mesh->add_option("--domain", mesh_domain, "domain file or builtin name")->required();
  cmd_mesh->add_option("--h", mesh_h, "target mesh size")->required();
  cmd_mesh->add_option("--out", mesh_out, "output mesh file (default mesh.json)");

  // --- solve --------------------------------------------------------------
  auto* cmd_solve = app.add_subcommand("solve", "Dirichlet eigenpairs on a mesh");
  std::string solve_mesh, solve_out;
  int solve_count = 1;
  double solve_tol = 1e-8;
  cmd_solve->add_option("--mesh", solve_mesh, "mesh file")->required();
  cmd_solve->add_option("--count", solve_count, "number of eigenpairs")->required();
  cmd_solve->add_option("--tol", solve_tol, "residual tolerance");
  cmd_solve->add_option("--out", solve_out, "output solution file (default solution.json)");

  // --- nodal ----------------------------------------------------------------
  auto* cmd_nodal = app.add_subcommand("nodal", "extract the nodal set of a solution");
  std::string nodal_solution, nodal_out, nodal_svg, nodal_domain;
  int nodal_index = 0;
  double nodal_resolution = 0.005;
  cmd_nodal->add_option("--solution", nodal_solution, "solution file")->required();
  cmd_nodal->add_option("--index", nodal_index, "eigenpair index")->required();
  cmd_nodal->add_option("--resolution", nodal_resolution, "extraction resolution")->required();
  cmd_nodal->add_option("--domain", nodal_domain, "domain file or builtin for clipping");
  cmd_nodal->add_option("--out", nodal_out, "output nodal file (default nodal.json)");
  cmd_nodal->add_option("--svg", nodal_svg, "optional SVG rendering");

  // --- doubling -------------------------------------------------------------
  auto* cmd_doubling = app.add_subcommand("doubling", "doubling-index profile of a field");
  std::string dbl_field, dbl_center = "0,0", dbl_domain, dbl_out;
  double dbl_rmin = 0.1, dbl_rmax = 0.4, dbl_tol = 1e-5;
  int dbl_steps = 8;
  cmd_doubling->add_option("--field", dbl_field, "field spec")->required();
  cmd_doubling->add_option("--center", dbl_center, "profile center x,y[,t]");
  cmd_doubling->add_option("--rmin", dbl_rmin)->required();
  cmd_doubling->add_option("--rmax", dbl_rmax)->required();
  cmd_doubling->add_option("--steps", dbl_steps)->required();
  cmd_doubling->add_option("--domain", dbl_domain, "domain file or builtin");
  cmd_doubling->add_option("--tol", dbl_tol, "mass quadrature tolerance");
  cmd_doubling->add_option("--out", dbl_out, "output CSV (default doubling.csv)");

  // --- construct ------------------------------------------------------------
  auto* cmd_construct = app.add_subcommand("construct", "standard boundary-cube construction");
  std::string con_patch, con_cube, con_out;
  int con_k = 3;
  cmd_construct->add_option("--patch", con_patch, "patch file or flat[:radius,tau]")->required();
  cmd_construct->add_option("--cube", con_cube, "cube as cx,cy,side")->required();
  cmd_construct->add_option("--k", con_k, "subdivision exponent (>= 3)")->required();
  cmd_construct->add_option("--out", con_out, "output file (default construction.json)");

  // --- chain ------------------------------------------------------------
  auto* cmd_chain = app.add_subcommand("chain", "chain of balls to the eigenfunction maximizer");
  std::string chain_domain, chain_start, chain_field, chain_out;
  double chain_r = 0.05;
  cmd_chain->add_option("--domain", chain_domain, "domain file or builtin")->required();
  cmd_chain->add_option("--start", chain_start, "start point x,y")->required();
  cmd_chain->add_option("--r", chain_r, "ball radius parameter")->required();
  cmd_chain->add_option("--field", chain_field,
                        "field spec for the maximizer (default: FEM ground state)");
  cmd_chain->add_option("--out", chain_out, "output file (default chain.json)");

  // --- verify ------------------------------------------------------------
  auto* cmd_verify = app.add_subcommand("verify", "run a falsification check");
  std::string check_name, verify_domain = "square", verify_field = "harmonic:y", verify_cube;
  int verify_count = 36, verify_cases = 100, verify_k = 3;
  double verify_r = 0.05, verify_resolution = 0.005, verify_tau = 0.02;
  cmd_verify->add_option("check", check_name,
                         "monotonicity | interior-monotonicity | shift | three-ball-interior | "
                         "three-ball-boundary | subharmonic | cauchy | hyperplane | "
                         "interior-nodal | boundary-nodal | df-doubling | yau")
      ->required();
  cmd_verify->add_option("--domain", verify_domain, "domain file or builtin");
  cmd_verify->add_option("--count", verify_count, "modes / eigenpairs");
  cmd_verify->add_option("--cases", verify_cases, "corpus size");
  cmd_verify->add_option("--field", verify_field, "field spec (hyperplane)");
  cmd_verify->add_option("--cube", verify_cube, "cube cx,cy,side (hyperplane)");
  cmd_verify->add_option("--k", verify_k, "construction exponent (hyperplane)");
  cmd_verify->add_option("--r", verify_r, "ball radius (df-doubling)");
  cmd_verify->add_option("--resolution", verify_resolution, "extraction resolution");
  cmd_verify->add_option("--tau", verify_tau, "flat patch tau for boundary corpora");

  // --- sweep ------------------------------------------------------------
  auto* cmd_sweep = app.add_subcommand("sweep", "nodal length against sqrt(lambda)");
  std::string sweep_domain;
  int sweep_count = 36;
  double sweep_resolution = 0.005;
  cmd_sweep->add_option("--domain", sweep_domain, "domain file or builtin")->required();
  cmd_sweep->add_option("--count", sweep_count, "number of modes")->required();
  cmd_sweep->add_option("--resolution", sweep_resolution, "extraction resolution");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    std::filesystem::create_directories(output_dir);
    auto out_path = [&](const std::string& given, const std::string& fallback) {
      if (given.empty()) return output_dir + "/" + fallback;
      return given;
    };

    if (*cmd_domain) {
      const PolygonDomain dom = io::builtin_domain(dom_name);
      const std::string path = out_path(dom_out, dom_name + ".json");
      io::write_domain(dom, path);
      std::printf("wrote %s (%zu loops, %zu patches, r0=%s)\n", path.c_str(), dom.loops.size(),
                  dom.patches.size(), io::fmt(dom.r0).c_str());
      return 0;
    }

    if (*cmd_mesh) {
      const PolygonDomain dom = load_domain_arg(mesh_domain);
      const TriangleMesh mesh = triangulate(dom, mesh_h);
      const std::string path = out_path(mesh_out, "mesh.json");
      io::write_mesh(mesh, path);
      std::printf("wrote %s (%zu vertices, %zu triangles, min angle %.2f deg, h_max %s)\n",
                  path.c_str(), mesh.vertices.size(), mesh.triangles.size(), mesh.min_angle_deg(),
                  io::fmt(mesh.h_max).c_str());
      return 0;
    }

    if (*cmd_solve) {
      const TriangleMesh mesh = io::read_mesh(solve_mesh);
      const AssembledSystem sys = assemble(mesh);
      const auto pairs = solve_eigen(sys.K, sys.M, solve_count, solve_tol, seed);
      const std::string path = out_path(solve_out, "solution.json");
      io::write_solution(solve_mesh, pairs, sys.dof_map, path);
      std::printf("wrote %s (%d pairs, lambda_1=%s, worst residual %s)\n", path.c_str(),
                  solve_count, io::fmt(pairs.front().lambda).c_str(),
                  io::fmt(pairs.back().residual).c_str());
      return 0;
    }

    if (*cmd_nodal) {
      const io::SolutionFile sol = io::read_solution(nodal_solution);
      if (nodal_index < 0 || nodal_index >= int(sol.lambdas.size()))
        throw std::invalid_argument("nodal: pair index out of range");
      std::filesystem::path mesh_path(sol.mesh_ref);
      if (mesh_path.is_relative() && !std::filesystem::exists(mesh_path))
        mesh_path = std::filesystem::path(nodal_solution).parent_path() / mesh_path;
      auto mesh = std::make_shared<TriangleMesh>(io::read_mesh(mesh_path.string()));
      const FemField u(mesh, sol.vertex_values[nodal_index]);
      std::optional<PolygonDomain> dom;
      if (!nodal_domain.empty()) dom = load_domain_arg(nodal_domain);
      NodalSet ns;
      if (dom) {
        const PolygonRegion region(*dom);
        ns = extract_nodal(u, region, nodal_resolution);
      } else {
        // mesh-backed marching needs only a boundary oracle; reconstruct the
        // polygon hull from the boundary edges is overkill, so clip against
        // the mesh locator domain via the convex bbox region
        EverywhereRegion region(Rect::of_points(mesh->vertices));
        ns = extract_nodal(u, region, nodal_resolution);
      }
      const std::string path = out_path(nodal_out, "nodal.json");
      io::write_nodal(ns, path);
      std::printf("wrote %s (lambda=%s, %zu segments, length %s)\n", path.c_str(),
                  io::fmt(sol.lambdas[nodal_index]).c_str(), ns.segments.size(),
                  io::fmt(ns.total_length).c_str());
      if (!nodal_svg.empty()) {
        io::write_nodal_svg(ns, dom ? &*dom : nullptr, nodal_svg);
        std::printf("wrote %s\n", nodal_svg.c_str());
      }
      return 0;
    }

    if (*cmd_doubling) {
      const double halfwidth =
          std::abs(parse_point3(dbl_center).x) + std::abs(parse_point3(dbl_center).y) +
          2 * dbl_rmax + 1.0;
      const io::LoadedField lf = io::load_field_spec(dbl_field, halfwidth);
      std::shared_ptr<const Region> region = lf.region;
      if (!dbl_domain.empty()) {
        auto dom = std::make_shared<PolygonDomain>(load_domain_arg(dbl_domain));
        region = std::make_shared<PolygonRegion>(*dom);
      }
      if (!region) region = std::make_shared<EverywhereRegion>(halfwidth);
      MassOptions mopt;
      mopt.rel_tol = dbl_tol;
      const DoublingReport rep = doubling_profile(*lf.field, parse_point3(dbl_center), dbl_rmin,
                                                  dbl_rmax, dbl_steps, *region, mopt);
      const io::CsvTable table = io::doubling_csv(rep);
      const std::string path = out_path(dbl_out, "doubling.csv");
      table.write(path);
      std::printf("wrote %s (%zu rows)\n", path.c_str(), table.rows.size());
      for (size_t i = 0; i < rep.radii.size(); ++i)
        std::printf("  r=%-12s N=%-18s err=%s\n", io::fmt(rep.radii[i]).c_str(),
                    io::fmt(rep.N_values[i]).c_str(), io::fmt(rep.quad_error[i]).c_str());
      return 0;
    }

    if (*cmd_construct) {
      const LipschitzPatch patch = load_patch_arg(con_patch);
      const auto v = fielddetail::parse_csv_numbers(con_cube);
      if (v.size() != 3) throw std::invalid_argument("--cube expects cx,cy,side");
      const Cube Q({v[0], v[1]}, v[2], patch.angle());
      const StandardConstruction sc = standard_construction(patch, Q, con_k);
      nlohmann::json j;
      j["k"] = sc.k;
      j["cube"] = {{"center", {Q.center.x, Q.center.y}}, {"side", Q.side}, {"angle", Q.angle}};
      j["bisection_residual"] = sc.bisection_residual;
      auto dump_cubes = [](const std::vector<Cube>& cubes) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& c : cubes)
          arr.push_back({{"center", {c.center.x, c.center.y}}, {"side", c.side}});
        return arr;
      };
      j["boundary_cubes"] = dump_cubes(sc.boundary_cubes);
      j["inner_cubes"] = dump_cubes(sc.inner_cubes);
      const std::string path = out_path(con_out, "construction.json");
      io::write_text(path, j.dump(2) + "\n");
      std::printf("wrote %s (%zu boundary cubes, %zu inner cubes, residual %s)\n", path.c_str(),
                  sc.boundary_cubes.size(), sc.inner_cubes.size(),
                  io::fmt(sc.bisection_residual).c_str());
      return 0;
    }

    if (*cmd_chain) {
      const PolygonDomain dom = load_domain_arg(chain_domain);
      const PolygonRegion region(dom);
      const Vec2 start = parse_point(chain_start);
      Vec2 target;
      if (!chain_field.empty()) {
        const io::LoadedField lf = io::load_field_spec(chain_field);
        const Vec2 box_center = (dom.bbox().lo + dom.bbox().hi) * 0.5;
        const SupResult s = sup_on_ball(*lf.field, ball2(box_center, dom.diameter()), region);
        target = s.argmax;
      } else {
        // FEM ground state maximizer over mesh vertices
        auto mesh = std::make_shared<TriangleMesh>(triangulate(dom, dom.diameter() / 40));
        const AssembledSystem sys = assemble(*mesh);
        const auto pairs = solve_eigen(sys.K, sys.M, 1, 1e-8, seed);
        const auto full = io::expand_to_vertices(pairs[0].coeffs, sys.dof_map);
        size_t best = 0;
        for (size_t i = 1; i < full.size(); ++i)
          if (std::abs(full[i]) > std::abs(full[best])) best = i;
        target = mesh->vertices[best];
      }
      const ChainReport rep = chain_of_balls(region, start, chain_r, target);
      nlohmann::json j;
      j["steps"] = rep.steps;
      j["net_size"] = rep.net.size();
      j["net_covering_radius"] = rep.net_covering_radius;
      j["target"] = {target.x, target.y};
      j["balls"] = nlohmann::json::array();
      for (const auto& b : rep.balls)
        j["balls"].push_back({{"center", {b.center.x, b.center.y}}, {"radius", b.radius}});
      const std::string path = out_path(chain_out, "chain.json");
      io::write_text(path, j.dump(2) + "\n");
      std::printf("wrote %s (J=%d, |S|=%zu)\n", path.c_str(), rep.steps, rep.net.size());
      return 0;
    }

    if (*cmd_verify) {
      const LipschitzPatch flat = LipschitzPatch::flat({0, 0}, 2.0, verify_tau);
      if (check_name == "interior-monotonicity") {
        verify::MonotonicityOptions opt;
        opt.seed = seed;
        opt.out_dir = output_dir;
        if (cmd_verify->count("--cases")) opt.fields = verify_cases;
        return report_exit(verify::check_interior_monotonicity(opt));
      }
      if (check_name == "monotonicity") {
        verify::AlmostMonotonicityOptions opt;
        opt.seed = seed;
        opt.out_dir = output_dir;
        if (cmd_verify->count("--cases")) opt.fields = verify_cases;
        return report_exit(verify::check_almost_monotonicity(flat, opt));
      }
      if (check_name == "shift") {
        verify::ShiftOptions opt;
        opt.seed = seed;
        opt.out_dir = output_dir;
        opt.cases = verify_cases;
        return report_exit(verify::check_corollary_shift(flat, opt));
      }
      if (check_name == "three-ball-interior") {
        verify::ThreeBallOptions opt;
        opt.seed = seed;
        opt.out_dir = output_dir;
        opt.cases = verify_cases;
        return report_exit(verify::check_three_ball_interior(opt));
      }
      if (check_name == "three-ball-boundary") {
        verify::ThreeBallOptions opt;
        opt.seed = seed;
        opt.out_dir = output_dir;
        opt.cases = verify_cases;
        return report_exit(verify::check_three_ball_boundary(flat, opt));
      }
      if (check_name == "subharmonic") {
        verify::SubharmonicOptions opt;
        opt.seed = seed;
        opt.out_dir = output_dir;
        opt.cases = verify_cases;
        return report_exit(verify::check_subharmonic(flat, opt));
      }
      if (check_name == "cauchy") {
        verify::CauchyOptions opt;
        opt.seed = seed;
        opt.out_dir = output_dir;
        return report_exit(verify::check_cauchy(opt).report);
      }
      if (check_name == "hyperplane") {
        verify::HyperplaneOptions opt;
        opt.k = verify_k;
        opt.out_dir = output_dir;
        const io::LoadedField lf = io::load_field_spec(verify_field);
        Cube Q({0.0, 0.0}, 0.4, flat.angle());
        if (!verify_cube.empty()) {
          const auto v = fielddetail::parse_csv_numbers(verify_cube);
          if (v.size() != 3) throw std::invalid_argument("--cube expects cx,cy,side");
          Q = Cube({v[0], v[1]}, v[2], flat.angle());
        }
        const auto rep = verify::run_hyperplane_experiment(flat, *lf.field, Q, opt);
        const char* names[] = {"neither", "halved", "zero_free"};
        std::printf("hyperplane outcome: %s\n", names[int(rep.outcome) == 0   ? 1
                                                      : int(rep.outcome) == 1 ? 2
                                                                              : 0]);
        return report_exit(rep.report);
      }
      if (check_name == "interior-nodal") {
        verify::InteriorNodalOptions opt;
        opt.seed = seed;
        opt.out_dir = output_dir;
        opt.random_cases = std::min(verify_cases, 100);
        return report_exit(verify::check_interior_nodal_bound(opt).report);
      }
      if (check_name == "boundary-nodal") {
        verify::BoundaryNodalOptions opt;
        opt.out_dir = output_dir;
        return report_exit(verify::check_boundary_nodal_bound(opt).report);
      }
      if (check_name == "df-doubling") {
        verify::DfDoublingOptions opt;
        opt.pairs = verify_count;
        opt.r = verify_r;
        opt.seed = seed;
        opt.out_dir = output_dir;
        return report_exit(verify::check_df_doubling_bound(load_domain_arg(verify_domain), opt).report);
      }
      if (check_name == "yau") {
        verify::YauOptions opt;
        opt.count = verify_count;
        opt.resolution = verify_resolution;
        opt.seed = seed;
        opt.out_dir = output_dir;
        return report_exit(verify::yau_sweep(load_domain_arg(verify_domain), opt).report);
      }
      std::fprintf(stderr, "unknown check '%s'\n", check_name.c_str());
      return 2;
    }

    if (*cmd_sweep) {
      verify::YauOptions opt;
      opt.count = sweep_count;
      opt.resolution = sweep_resolution;
      opt.seed = seed;
      opt.out_dir = output_dir;
      return report_exit(verify::yau_sweep(load_domain_arg(sweep_domain), opt).report);
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
