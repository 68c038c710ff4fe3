#pragma once

// Mesh-convergence studies: solve on a ladder of refinements, pair computed
// eigenvalues with analytical roots, and fit convergence orders.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "resonavis/config.hpp"
#include "resonavis/mesh.hpp"
#include "resonavis/oracle.hpp"
#include "resonavis/solver.hpp"

namespace resonavis {

struct TrackedRoot {
  int m = -1;  // -1 when supplied without a mode index
  cd lambda;
};

/// Roots of f_m for every m in the config's list, upper half plane only,
/// sorted by imaginary part.
inline std::vector<TrackedRoot> collect_oracle_roots(const GeometryConfig& g, const MaterialConfig& mat,
                                                     const OracleConfig& cfg) {
  const ComplexBox box = cfg.box.value_or(default_search_box(g, mat));
  std::vector<TrackedRoot> roots;
  for (int m : cfg.m_list) {
    const auto found = find_roots(DispersionProblem{m, g, mat}, box, cfg.grid, cfg.tol);
    for (const auto& r : found.roots) {
      if (r.lambda.imag() > 0.0) roots.push_back({m, r.lambda});
    }
  }
  std::sort(roots.begin(), roots.end(),
            [](const TrackedRoot& a, const TrackedRoot& b) { return a.lambda.imag() < b.lambda.imag(); });
  return roots;
}

// ---------------------------------------------------------------------------

struct RootMatch {
  std::vector<std::optional<std::size_t>> computed_index;  // per root
  std::vector<bool> conflict;                              // per root
};

/// Nearest computed value for each root, rejected beyond `radius * |root|`.
/// Two roots claiming the same computed value are both flagged as conflicts.
inline RootMatch match_to_roots(const std::vector<cd>& computed, const std::vector<cd>& roots,
                                double radius = 0.05) {
  RootMatch out;
  out.computed_index.resize(roots.size());
  out.conflict.assign(roots.size(), false);
  for (std::size_t r = 0; r < roots.size(); ++r) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < computed.size(); ++c) {
      const double d = std::abs(computed[c] - roots[r]);
      if (d < best) {
        best = d;
        out.computed_index[r] = c;
      }
    }
    if (best > radius * std::abs(roots[r])) out.computed_index[r].reset();
  }
  for (std::size_t a = 0; a < roots.size(); ++a) {
    for (std::size_t b = a + 1; b < roots.size(); ++b) {
      if (out.computed_index[a] && out.computed_index[a] == out.computed_index[b]) {
        out.conflict[a] = out.conflict[b] = true;
      }
    }
  }
  return out;
}

struct ConvergenceColumn {
  TrackedRoot root;
  std::vector<std::optional<cd>> computed;  // per level
  std::vector<double> errors;               // NaN where unmatched
  std::optional<double> order;
  bool conflict = false;
  std::string note;
};

struct ConvergenceTable {
  std::vector<int> levels;
  std::vector<double> h;
  std::vector<ConvergenceColumn> columns;
};

/// Pairs per-level computed eigenvalues with the tracked roots and fits
/// log(error) against log(h) for every fully matched, conflict-free column.
inline ConvergenceTable build_convergence_table(const std::vector<int>& levels, const std::vector<double>& h,
                                                const std::vector<std::vector<cd>>& computed,
                                                const std::vector<TrackedRoot>& roots, double radius = 0.05) {
  ConvergenceTable table{levels, h, {}};
  std::vector<cd> targets;
  for (const auto& r : roots) targets.push_back(r.lambda);
  for (const auto& r : roots) {
    ConvergenceColumn col;
    col.root = r;
    col.computed.resize(levels.size());
    col.errors.assign(levels.size(), std::numeric_limits<double>::quiet_NaN());
    table.columns.push_back(std::move(col));
  }
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const RootMatch match = match_to_roots(computed[l], targets, radius);
    for (std::size_t r = 0; r < roots.size(); ++r) {
      auto& col = table.columns[r];
      if (match.conflict[r]) {
        col.conflict = true;
        col.note = "matching conflict at N=" + std::to_string(levels[l]);
      }
      if (match.computed_index[r]) {
        const cd value = computed[l][*match.computed_index[r]];
        col.computed[l] = value;
        col.errors[l] = std::abs(value - roots[r].lambda);
      }
    }
  }
  for (auto& col : table.columns) {
    if (col.conflict) continue;
    std::vector<ConvergenceSample> samples;
    bool complete = true;
    for (std::size_t l = 0; l < levels.size(); ++l) {
      if (!col.computed[l]) {
        complete = false;
        break;
      }
      samples.push_back({h[l], col.errors[l]});
    }
    if (!complete) {
      col.note = "unmatched at some level";
      continue;
    }
    try {
      col.order = fit_convergence_order(samples);
    } catch (const Error& e) {
      col.note = e.what();
    }
  }
  return table;
}

// ---------------------------------------------------------------------------

struct LevelResult {
  int N = 0;
  MeshStats stats;
  SolveResult result;
  double seconds = 0.0;
};

/// Worker cap from RESONAVIS_THREADS, else the hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("RESONAVIS_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline LevelResult solve_level(const GeometryConfig& g, const MaterialConfig& mat, int N, DiagonalPattern pattern,
                               const SolveOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const Mesh mesh = build_rect_mesh(g, N, pattern);
  const QuadraticPencil pencil = make_pencil(mesh, mat);
  LevelResult lr;
  lr.N = N;
  lr.stats = mesh_stats(mesh);
  lr.result = solve_qep(pencil, opt);
  lr.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return lr;
}

/// Independent solves per level, at most `workers` at a time; results keep
/// the order of `levels`.
inline std::vector<LevelResult> solve_levels(const GeometryConfig& g, const MaterialConfig& mat,
                                             const std::vector<int>& levels, DiagonalPattern pattern,
                                             const SolveOptions& opt, unsigned workers = worker_count()) {
  std::vector<LevelResult> out(levels.size());
  for (std::size_t start = 0; start < levels.size(); start += workers) {
    std::vector<std::future<LevelResult>> batch;
    const std::size_t stop = std::min(levels.size(), start + workers);
    for (std::size_t i = start; i < stop; ++i) {
      batch.push_back(std::async(std::launch::async, solve_level, std::cref(g), std::cref(mat), levels[i], pattern,
                                 std::cref(opt)));
    }
    for (std::size_t i = start; i < stop; ++i) out[i] = batch[i - start].get();
  }
  return out;
}

/// Shift at the middle of the tracked roots' frequency range, with enough
/// wanted pairs to cover all of them.
inline SolveOptions study_solve_options(const SolverConfig& cfg, const std::vector<TrackedRoot>& roots) {
  SolveOptions opt;
  opt.tol = cfg.tol;
  opt.max_restarts = cfg.max_restarts;
  if (cfg.shift) {
    opt.shift = *cfg.shift;
  } else if (!roots.empty()) {
    double lo = roots.front().lambda.imag(), hi = lo;
    for (const auto& r : roots) {
      lo = std::min(lo, r.lambda.imag());
      hi = std::max(hi, r.lambda.imag());
    }
    opt.shift = cd(0.0, 0.5 * (lo + hi));
  }
  opt.nev = std::max<Eigen::Index>(cfg.nev, static_cast<Eigen::Index>(roots.size()) + 2);
  opt.krylov_dim = std::clamp<Eigen::Index>(std::max<Eigen::Index>(cfg.krylov_dim, 2 * opt.nev + 20), opt.nev + 1, 200);
  return opt;
}

// ---------------------------------------------------------------------------
// Formatting

/// "1066.07 i" for purely imaginary values, "-9.83 + 1066.03 i" otherwise.
inline std::string format_eigenvalue(cd z, bool imaginary_only) {
  char buf[64];
  if (imaginary_only) {
    std::snprintf(buf, sizeof buf, "%.2f i", z.imag());
  } else {
    std::snprintf(buf, sizeof buf, "%.2f %c %.2f i", z.real(), z.imag() < 0 ? '-' : '+', std::abs(z.imag()));
  }
  return buf;
}

/// Table with one column per tracked eigenvalue: rows m, N=..., Order, Exact.
inline std::string format_convergence_table(const ConvergenceTable& t, bool imaginary_only) {
  std::string out;
  const int width = imaginary_only ? 12 : 22;
  auto cell = [&](const std::string& s) {
    char buf[64];
    std::snprintf(buf, sizeof buf, " %*s |", width, s.c_str());
    return std::string(buf);
  };
  auto row_label = [](const std::string& s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%-7s|", s.c_str());
    return std::string(buf);
  };
  out += row_label("m");
  for (const auto& c : t.columns) out += cell(c.root.m >= 0 ? std::to_string(c.root.m) : "-");
  out += '\n';
  for (std::size_t l = 0; l < t.levels.size(); ++l) {
    out += row_label("N=" + std::to_string(t.levels[l]));
    for (const auto& c : t.columns) out += cell(c.computed[l] ? format_eigenvalue(*c.computed[l], imaginary_only) : "--");
    out += '\n';
  }
  out += row_label("Order");
  for (const auto& c : t.columns) {
    char buf[32];
    if (c.order) {
      std::snprintf(buf, sizeof buf, "%.2f", *c.order);
    } else {
      std::snprintf(buf, sizeof buf, "%s", c.conflict ? "conflict" : "--");
    }
    out += cell(buf);
  }
  out += '\n';
  out += row_label("Exact");
  for (const auto& c : t.columns) out += cell(format_eigenvalue(c.root.lambda, imaginary_only));
  out += '\n';
  return out;
}

}  // namespace resonavis
