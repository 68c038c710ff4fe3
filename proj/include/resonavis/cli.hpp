#pragma once

// Command-line driver. `run_cli` is the whole program; the executable's main
// only forwards to it so tests can run commands in-process.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "resonavis/config.hpp"
#include "resonavis/io.hpp"
#include "resonavis/study.hpp"

namespace resonavis {

enum ExitCode { kExitOk = 0, kExitNumerical = 1, kExitConfig = 2 };

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::config:
    case ErrorCode::misaligned_interface:
    case ErrorCode::non_integer_rows:
    case ErrorCode::invalid_geometry:
    case ErrorCode::invalid_material:
      return kExitConfig;
    default:
      return kExitNumerical;
  }
}

struct CliOptions {
  std::string config_path;
  bool json = false;
  std::optional<std::string> out_dir;
  std::optional<double> shift_re;
  std::optional<double> shift_im;
};

namespace cli_detail {

inline json stats_json(int N, const MeshStats& s) {
  return {{"N", N},
          {"h", s.h},
          {"vertices", s.vertices},
          {"triangles", s.triangles},
          {"triangles_fluid1", s.triangles_subdomain1},
          {"triangles_fluid2", s.triangles_subdomain2},
          {"edges", s.edges},
          {"boundary_edges", s.boundary_edges},
          {"interior_edges", s.interior_edges}};
}

inline std::filesystem::path output_dir(const RunConfig& cfg, const CliOptions& o) {
  std::filesystem::path dir = o.out_dir.value_or(cfg.output.directory);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p);
  if (!f) throw Error(ErrorCode::config, "cannot write '" + p.string() + "'");
  return f;
}

inline json pair_json(const EigenPair& p, const std::vector<std::string>& warnings) {
  return {{"lambda_re", p.lambda.real()},
          {"lambda_im", p.lambda.imag()},
          {"residual", p.residual},
          {"ritz_residual", p.ritz_residual},
          {"converged", p.converged},
          {"warnings", warnings}};
}

inline void write_sparse_file(const std::filesystem::path& p, const RealSparse& a) {
  auto f = open_out(p);
  write_coordinate(f, a);
}

// ---------------------------------------------------------------------------

inline int cmd_mesh_info(const RunConfig& cfg, const CliOptions& o, std::ostream& out) {
  json all = json::array();
  const bool dump = cfg.output.has("mesh");
  for (int N : cfg.mesh.levels) {
    const Mesh mesh = build_rect_mesh(cfg.geometry, N, cfg.mesh.pattern);
    const MeshStats s = mesh_stats(mesh);
    all.push_back(stats_json(N, s));
    if (dump) {
      auto f = open_out(output_dir(cfg, o) / ("mesh_N" + std::to_string(N) + ".txt"));
      write_mesh(f, mesh);
    }
    if (!o.json) {
      out << "N=" << N << "  h=" << s.h << '\n'
          << "  vertices        " << s.vertices << '\n'
          << "  triangles       " << s.triangles << " (fluid 1: " << s.triangles_subdomain1
          << ", fluid 2: " << s.triangles_subdomain2 << ")\n"
          << "  edges           " << s.edges << '\n'
          << "  boundary edges  " << s.boundary_edges << '\n'
          << "  interior edges  " << s.interior_edges << " (degrees of freedom)\n";
    }
  }
  if (o.json) out << (all.size() == 1 ? all[0] : all).dump(2) << '\n';
  return kExitOk;
}

inline int cmd_solve(const RunConfig& cfg, const CliOptions& o, std::ostream& out, std::ostream& err) {
  const auto dir = output_dir(cfg, o);
  SolveOptions opt;
  opt.nev = cfg.solver.nev;
  opt.krylov_dim = cfg.solver.krylov_dim;
  opt.tol = cfg.solver.tol;
  opt.max_restarts = cfg.solver.max_restarts;
  opt.shift = cfg.solver.shift.value_or(cd(0.0, 0.9 * estimate_first_frequency(cfg.geometry, cfg.materials)));
  if (o.shift_re) opt.shift.real(*o.shift_re);
  if (o.shift_im) opt.shift.imag(*o.shift_im);

  const SpectralBand band = essential_band(cfg.materials);
  const bool inviscid = cfg.materials.inviscid();
  json runs = json::array();
  json timings = json::object();

  for (int N : cfg.mesh.levels) {
    const auto t0 = std::chrono::steady_clock::now();
    const Mesh mesh = build_rect_mesh(cfg.geometry, N, cfg.mesh.pattern);
    const QuadraticPencil pencil = make_pencil(mesh, cfg.materials);
    const auto t1 = std::chrono::steady_clock::now();
    const SolveResult res = solve_qep(pencil, opt);
    const auto t2 = std::chrono::steady_clock::now();
    timings["N" + std::to_string(N)] = {{"assemble_s", std::chrono::duration<double>(t1 - t0).count()},
                                        {"solve_s", std::chrono::duration<double>(t2 - t1).count()}};

    if (cfg.output.has("mesh")) {
      auto f = open_out(dir / ("mesh_N" + std::to_string(N) + ".txt"));
      write_mesh(f, mesh);
    }
    if (cfg.output.has("matrices")) {
      const std::string tag = "_N" + std::to_string(N) + ".txt";
      write_sparse_file(dir / ("M" + tag), pencil.mass);
      write_sparse_file(dir / ("K1" + tag), pencil.k1);
      write_sparse_file(dir / ("K2" + tag), pencil.k2);
    }

    FilterResult filtered = filter_spurious(res.pairs, band);
    std::vector<std::size_t> order(filtered.kept.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(filtered.kept[a].lambda.imag()) < std::abs(filtered.kept[b].lambda.imag());
    });

    json pairs = json::array();
    if (!o.json) {
      out << "N=" << N << "  dofs=" << pencil.size() << "  shift=" << res.shift_used.real() << (res.shift_used.imag() < 0 ? " - " : " + ")
          << std::abs(res.shift_used.imag()) << " i\n";
    }
    int mode = 0;
    for (std::size_t k : order) {
      const EigenPair& p = filtered.kept[k];
      const ResidualReport rep = check_eigenpair(pencil, p);
      std::vector<std::string> warnings;
      if (!p.converged) warnings.push_back("not converged");
      if (rep.positive_decay_rate) warnings.push_back("nonnegative real part in a viscous run");
      if (rep.real_part_in_inviscid) warnings.push_back("nonzero real part in an inviscid run");
      if (std::find(filtered.near_real_kept.begin(), filtered.near_real_kept.end(), k) != filtered.near_real_kept.end()) {
        warnings.push_back("near-real eigenvalue outside the essential band");
      }
      pairs.push_back(pair_json(p, warnings));
      if (!o.json) {
        char line[160];
        std::snprintf(line, sizeof line, "  %-26s residual %.2e%s\n", format_eigenvalue(p.lambda, inviscid).c_str(),
                      p.residual, p.converged ? "" : "  (not converged)");
        out << line;
      }
      const std::string tag = "mode_N" + std::to_string(N) + "_" + std::to_string(mode++);
      if (cfg.output.eigenvectors) {
        auto f = open_out(dir / (tag + ".csv"));
        write_eigenvector_csv(f, mesh, p.u);
      }
      if (cfg.output.vtk) {
        auto f = open_out(dir / (tag + ".vtk"));
        write_divergence_vtk(f, mesh, p.u);
      }
    }
    json discarded = json::array();
    for (const auto& p : filtered.discarded) discarded.push_back(pair_json(p, {"in essential band"}));
    if (!filtered.discarded.empty()) {
      err << "warning: N=" << N << ": discarded " << filtered.discarded.size() << " near-real pair(s) in the essential band\n";
    }

    runs.push_back({{"mesh", stats_json(N, mesh_stats(mesh))},
                    {"shift", detail::complex_to(opt.shift)},
                    {"shift_used", detail::complex_to(res.shift_used)},
                    {"shift_retries", res.shift_retries},
                    {"restarts", res.restarts},
                    {"pairs", pairs},
                    {"discarded", discarded}});
  }

  json band_json = {{"mu_lower", band.mu_lower}, {"mu_upper", band.mu_upper}};
  if (!band.empty()) {
    band_json["lambda_lower"] = band.lambda_lower;
    band_json["lambda_upper"] = std::isfinite(band.lambda_upper) ? json(band.lambda_upper) : json(nullptr);
  }
  const json report = {{"config", to_json(cfg)}, {"band", band_json}, {"runs", runs}, {"timings", timings}};
  auto f = open_out(dir / "solve.json");
  f << report.dump(2) << '\n';
  if (o.json) out << report.dump(2) << '\n';
  return kExitOk;
}

inline int cmd_oracle(const RunConfig& cfg, const CliOptions& o, std::ostream& out, std::ostream& err) {
  const ComplexBox box = cfg.oracle.box.value_or(default_search_box(cfg.geometry, cfg.materials));
  const bool inviscid = cfg.materials.inviscid();
  json roots = json::array();
  for (int m : cfg.oracle.m_list) {
    const RootSearchResult r = find_roots(DispersionProblem{m, cfg.geometry, cfg.materials}, box, cfg.oracle.grid,
                                          cfg.oracle.tol);
    if (r.roots.empty()) err << "warning: " << r.diagnostic << '\n';
    for (const auto& root : r.roots) {
      roots.push_back({{"m", m}, {"lambda_re", root.lambda.real()}, {"lambda_im", root.lambda.imag()}, {"abs_fm", root.abs_f}});
      if (!o.json) {
        char line[160];
        std::snprintf(line, sizeof line, "m=%d  %-26s |f_m| %.2e\n", m, format_eigenvalue(root.lambda, inviscid).c_str(),
                      root.abs_f);
        out << line;
      }
    }
  }
  auto f = open_out(output_dir(cfg, o) / "roots.json");
  f << roots.dump(2) << '\n';
  if (o.json) out << roots.dump(2) << '\n';
  return kExitOk;
}

inline int cmd_convergence(const RunConfig& cfg, const CliOptions& o, std::ostream& out, std::ostream& err) {
  if (cfg.mesh.levels.size() < 3) throw Error(ErrorCode::config, "$.mesh.N: a convergence study needs at least 3 levels");
  std::vector<TrackedRoot> roots;
  if (!cfg.oracle.exact.empty()) {
    for (cd z : cfg.oracle.exact) roots.push_back({-1, z});
  } else {
    roots = collect_oracle_roots(cfg.geometry, cfg.materials, cfg.oracle);
  }
  if (roots.empty()) throw Error(ErrorCode::no_converged_pairs, "no oracle roots to track");

  SolveOptions opt = study_solve_options(cfg.solver, roots);
  if (o.shift_re) opt.shift.real(*o.shift_re);
  if (o.shift_im) opt.shift.imag(*o.shift_im);
  const auto levels = solve_levels(cfg.geometry, cfg.materials, cfg.mesh.levels, cfg.mesh.pattern, opt);

  std::vector<double> h;
  std::vector<std::vector<cd>> computed;
  for (const auto& lr : levels) {
    h.push_back(lr.stats.h);
    std::vector<cd> values;
    for (const auto& p : lr.result.pairs) {
      if (p.converged) values.push_back(p.lambda);
    }
    computed.push_back(std::move(values));
  }
  const ConvergenceTable table = build_convergence_table(cfg.mesh.levels, h, computed, roots);
  for (const auto& c : table.columns) {
    if (!c.order) err << "warning: " << format_eigenvalue(c.root.lambda, false) << ": " << c.note << '\n';
  }

  const auto dir = output_dir(cfg, o);
  {
    auto f = open_out(dir / "convergence.csv");
    f.precision(17);
    f << "column,m,exact_re,exact_im,N,h,lambda_re,lambda_im,error\n";
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      const auto& col = table.columns[c];
      for (std::size_t l = 0; l < table.levels.size(); ++l) {
        f << c << ',' << col.root.m << ',' << col.root.lambda.real() << ',' << col.root.lambda.imag() << ','
          << table.levels[l] << ',' << table.h[l] << ',';
        if (col.computed[l]) {
          f << col.computed[l]->real() << ',' << col.computed[l]->imag() << ',' << col.errors[l] << '\n';
        } else {
          f << ",,\n";
        }
      }
    }
  }
  json columns = json::array();
  for (const auto& col : table.columns) {
    json values = json::array();
    json errors = json::array();
    for (std::size_t l = 0; l < table.levels.size(); ++l) {
      values.push_back(col.computed[l] ? detail::complex_to(*col.computed[l]) : json(nullptr));
      errors.push_back(col.computed[l] ? json(col.errors[l]) : json(nullptr));
    }
    columns.push_back({{"m", col.root.m},
                       {"exact", detail::complex_to(col.root.lambda)},
                       {"computed", values},
                       {"errors", errors},
                       {"order", col.order ? json(*col.order) : json(nullptr)},
                       {"conflict", col.conflict},
                       {"note", col.note}});
  }
  json level_info = json::array();
  json timings = json::object();
  for (const auto& lr : levels) {
    level_info.push_back({{"mesh", stats_json(lr.N, lr.stats)},
                          {"shift_used", detail::complex_to(lr.result.shift_used)},
                          {"restarts", lr.result.restarts}});
    timings["N" + std::to_string(lr.N)] = lr.seconds;
  }
  const json report = {{"config", to_json(cfg)},
                       {"shift", detail::complex_to(opt.shift)},
                       {"nev", opt.nev},
                       {"krylov_dim", opt.krylov_dim},
                       {"levels", level_info},
                       {"columns", columns},
                       {"timings", timings}};
  auto f = open_out(dir / "convergence.json");
  f << report.dump(2) << '\n';
  if (o.json) {
    out << report.dump(2) << '\n';
  } else {
    out << format_convergence_table(table, cfg.materials.inviscid());
  }
  return kExitOk;
}

inline int cmd_contour(const RunConfig& cfg, const CliOptions& o, std::ostream& out) {
  const ComplexBox box = cfg.oracle.box.value_or(default_search_box(cfg.geometry, cfg.materials));
  const auto dir = output_dir(cfg, o);
  json files = json::array();
  for (int m : cfg.oracle.m_list) {
    const ContourGrid g = contour_grid(DispersionProblem{m, cfg.geometry, cfg.materials}, box, cfg.oracle.grid);
    const std::string name = "contour_m" + std::to_string(m) + ".csv";
    auto f = open_out(dir / name);
    f.precision(17);
    f << "re,im,log10_abs_fm\n";
    for (int j = 0; j < g.grid.ny; ++j) {
      for (int i = 0; i < g.grid.nx; ++i) {
        const cd z = g.point(i, j);
        f << z.real() << ',' << z.imag() << ',' << g.at(i, j) << '\n';
      }
    }
    files.push_back((dir / name).string());
    if (!o.json) out << "m=" << m << ": " << (dir / name).string() << " (" << g.grid.nx << " x " << g.grid.ny << ")\n";
  }
  if (o.json) out << json{{"files", files}}.dump(2) << '\n';
  return kExitOk;
}

}  // namespace cli_detail

/// Parses `argv` and runs one subcommand. Returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Two-fluid cavity eigenvalues with lowest-order Raviart-Thomas elements", "resonavis"};
  app.require_subcommand(1);
  CliOptions o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON run configuration")->required();
    sub->add_flag("--json", o.json, "print machine-readable JSON to stdout");
    sub->add_option("--out", o.out_dir, "output directory (overrides output.directory)");
  };
  auto* mesh_info = app.add_subcommand("mesh-info", "mesh statistics and optional mesh dump");
  auto* solve = app.add_subcommand("solve", "eigenvalues nearest a shift");
  auto* oracle = app.add_subcommand("oracle", "roots of the dispersion relation");
  auto* convergence = app.add_subcommand("convergence", "mesh-convergence study against oracle roots");
  auto* contour = app.add_subcommand("contour", "log10|f_m| on a grid, one CSV per m");
  for (auto* sub : {mesh_info, solve, oracle, convergence, contour}) add_common(sub);
  for (auto* sub : {solve, convergence}) {
    sub->add_option("--shift-re", o.shift_re, "real part of the shift (1/s)");
    sub->add_option("--shift-im", o.shift_im, "imaginary part of the shift (1/s)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    const RunConfig cfg = load_config(o.config_path);
    if (mesh_info->parsed()) return cli_detail::cmd_mesh_info(cfg, o, out);
    if (solve->parsed()) return cli_detail::cmd_solve(cfg, o, out, err);
    if (oracle->parsed()) return cli_detail::cmd_oracle(cfg, o, out, err);
    if (convergence->parsed()) return cli_detail::cmd_convergence(cfg, o, out, err);
    return cli_detail::cmd_contour(cfg, o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace resonavis
