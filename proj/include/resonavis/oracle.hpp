#pragma once

// Analytical eigenvalues of the two-fluid rectangular cavity. Separating
// variables with X(x) = cos(m pi x / A) leaves, per mode index m, the
// dispersion function
//
//   f_m(l) = r1/rho1 sinh(r1 H) cosh(r2 (H - B)) - r2/rho2 sinh(r2 (H - B)) cosh(r1 H)
//   r_i(l) = sqrt(l^2 rho_i / (rho_i c_i^2 + 2 nu_i l) + m^2 pi^2 / A^2)
//
// whose complex roots are the exact eigenvalues.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "resonavis/assembly.hpp"
#include "resonavis/error.hpp"
#include "resonavis/mesh.hpp"

namespace resonavis {

using cd = std::complex<double>;

struct DispersionProblem {
  int m = 0;
  GeometryConfig geometry;
  MaterialConfig materials;
};

/// Principal branch; f_m is even in each r_i so the branch does not matter.
inline cd r_m(const DispersionProblem& p, int subdomain, cd lambda) {
  const FluidProperties& f = p.materials(subdomain);
  const cd denom = f.bulk() + 2.0 * f.nu * lambda;
  if (std::abs(denom) < 1e-12 * f.bulk()) {
    throw Error(ErrorCode::degenerate_denominator, "rho c^2 + 2 nu lambda vanishes");
  }
  const double k = p.m * std::numbers::pi / p.geometry.A;
  return std::sqrt(lambda * lambda * f.rho / denom + k * k);
}

struct DispersionValue {
  cd value;
  bool scaled = false;     // tanh-normalized form was used
  bool cosh_near_zero = false;
};

namespace detail {

inline DispersionValue dispersion_with(const DispersionProblem& p, cd r1, cd r2) {
  const auto& g = p.geometry;
  const double rho1 = p.materials(1).rho;
  const double rho2 = p.materials(2).rho;
  const cd a1 = r1 * g.H;
  const cd a2 = r2 * (g.H - g.B);
  DispersionValue out;
  if (std::abs(a1.real()) + std::abs(a2.real()) > 30.0) {
    out.scaled = true;
    out.value = r1 / rho1 * std::tanh(a1) - r2 / rho2 * std::tanh(a2);
    return out;
  }
  const cd c1 = std::cosh(a1);
  const cd c2 = std::cosh(a2);
  out.cosh_near_zero = std::abs(c1) < 1e-10 || std::abs(c2) < 1e-10;
  out.value = r1 / rho1 * std::sinh(a1) * c2 - r2 / rho2 * std::sinh(a2) * c1;
  return out;
}

}  // namespace detail

inline DispersionValue f_m_eval(const DispersionProblem& p, cd lambda) {
  return detail::dispersion_with(p, r_m(p, 1, lambda), r_m(p, 2, lambda));
}

inline cd f_m(const DispersionProblem& p, cd lambda) { return f_m_eval(p, lambda).value; }

// ---------------------------------------------------------------------------
// Derivative-free simplex minimization

struct SimplexResult {
  std::array<double, 2> x{};
  double value = 0.0;
  int iterations = 0;
};

/// Nelder-Mead in two variables with the standard coefficients (reflection 1,
/// expansion 2, contraction 1/2, shrink 1/2). Stops when the simplex diameter
/// drops below `xtol` or after `max_iter` iterations.
template <typename F>
SimplexResult nelder_mead(F&& fn, std::array<double, 2> x0, std::array<double, 2> step, double xtol,
                          int max_iter = 4000) {
  struct Vertex {
    std::array<double, 2> x;
    double f;
  };
  auto eval = [&](std::array<double, 2> x) { return Vertex{x, fn(x)}; };
  auto comb = [](const std::array<double, 2>& a, const std::array<double, 2>& b, double t) {
    return std::array<double, 2>{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
  };

  std::array<Vertex, 3> s{eval(x0), eval({x0[0] + step[0], x0[1]}), eval({x0[0], x0[1] + step[1]})};
  int it = 0;
  for (; it < max_iter; ++it) {
    std::sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    double diameter = 0.0;
    for (int i = 1; i < 3; ++i) {
      diameter = std::max(diameter, std::hypot(s[i].x[0] - s[0].x[0], s[i].x[1] - s[0].x[1]));
    }
    if (diameter <= xtol) break;

    const std::array<double, 2> centroid{0.5 * (s[0].x[0] + s[1].x[0]), 0.5 * (s[0].x[1] + s[1].x[1])};
    const Vertex reflected = eval(comb(centroid, s[2].x, -1.0));
    if (reflected.f < s[0].f) {
      const Vertex expanded = eval(comb(centroid, s[2].x, -2.0));
      s[2] = expanded.f < reflected.f ? expanded : reflected;
    } else if (reflected.f < s[1].f) {
      s[2] = reflected;
    } else {
      const bool outside = reflected.f < s[2].f;
      const Vertex contracted = eval(comb(centroid, outside ? reflected.x : s[2].x, 0.5));
      if (contracted.f < (outside ? reflected.f : s[2].f)) {
        s[2] = contracted;
      } else {
        for (int i = 1; i < 3; ++i) s[i] = eval(comb(s[0].x, s[i].x, 0.5));
      }
    }
  }
  std::sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
  return {s[0].x, s[0].f, it};
}

// ---------------------------------------------------------------------------

struct ComplexBox {
  double re_min = -1.0;
  double re_max = 1.0;
  double im_min = 0.0;
  double im_max = 1.0;

  bool contains(cd z, double pad_re = 0.0, double pad_im = 0.0) const {
    return z.real() >= re_min - pad_re && z.real() <= re_max + pad_re && z.imag() >= im_min - pad_im &&
           z.imag() <= im_max + pad_im;
  }
  ComplexBox conjugate() const { return {re_min, re_max, -im_max, -im_min}; }
  bool operator==(const ComplexBox&) const = default;
};

struct GridSize {
  int nx = 64;
  int ny = 256;
  bool operator==(const GridSize&) const = default;
};

struct Root {
  cd lambda;
  double abs_f = 0.0;
};

struct RootSearchResult {
  std::vector<Root> roots;  // sorted by |Im lambda|
  std::string diagnostic;
};

/// Grid scan of |f_m| over the box, a simplex polish from every local minimum
/// (ties broken by grid index), acceptance below tol * median(|f_m| on the grid), and
/// deduplication at 1e-6 relative distance.
inline RootSearchResult find_roots(const DispersionProblem& p, const ComplexBox& box, GridSize grid,
                                   double tol = 1e-6) {
  if (grid.nx < 16 || grid.ny < 16) throw Error(ErrorCode::config, "find_roots: grid must be at least 16x16");
  if (!(box.re_max > box.re_min) || !(box.im_max > box.im_min)) {
    throw Error(ErrorCode::config, "find_roots: empty search box");
  }
  const double dx = (box.re_max - box.re_min) / (grid.nx - 1);
  const double dy = (box.im_max - box.im_min) / (grid.ny - 1);
  auto at = [&](int i, int j) { return cd(box.re_min + i * dx, box.im_min + j * dy); };
  auto abs_f = [&](cd z) {
    try {
      const double v = std::abs(f_m(p, z));
      return std::isfinite(v) ? v : std::numeric_limits<double>::max();
    } catch (const Error&) {
      return std::numeric_limits<double>::max();
    }
  };

  std::vector<double> field(static_cast<std::size_t>(grid.nx) * grid.ny);
  auto idx = [&](int i, int j) { return static_cast<std::size_t>(j) * grid.nx + i; };
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) field[idx(i, j)] = abs_f(at(i, j));
  }
  std::vector<double> sorted = field;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];
  const double accept = tol * median;

  RootSearchResult out;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const double v = field[idx(i, j)];
      bool is_min = true;
      for (int dj = -1; dj <= 1 && is_min; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0) continue;
          const int ii = i + di, jj = j + dj;
          if (ii < 0 || jj < 0 || ii >= grid.nx || jj >= grid.ny) continue;
          // Ties go to the lower grid index so symmetric plateaus keep one seed.
          const double w = field[idx(ii, jj)];
          if (w < v || (w == v && idx(ii, jj) < idx(i, j))) {
            is_min = false;
            break;
          }
        }
      }
      if (!is_min) continue;

      // Polish in cell-scaled coordinates so the simplex is isotropic.
      const cd seed = at(i, j);
      auto objective = [&](const std::array<double, 2>& s) { return abs_f(seed + cd(s[0] * dx, s[1] * dy)); };
      const double xtol = 1e-10 * std::max(std::abs(seed), 1.0) / std::max(dx, dy);
      const SimplexResult sr = nelder_mead(objective, {0.0, 0.0}, {0.5, 0.5}, xtol);
      const cd z = seed + cd(sr.x[0] * dx, sr.x[1] * dy);
      if (!(sr.value <= accept) || !box.contains(z, dx, dy)) continue;

      const bool duplicate = std::any_of(out.roots.begin(), out.roots.end(), [&](const Root& r) {
        return std::abs(r.lambda - z) <= 1e-6 * std::max(std::abs(r.lambda), std::abs(z));
      });
      if (!duplicate) out.roots.push_back({z, sr.value});
    }
  }
  std::sort(out.roots.begin(), out.roots.end(),
            [](const Root& a, const Root& b) { return std::abs(a.lambda.imag()) < std::abs(b.lambda.imag()); });
  if (out.roots.empty()) out.diagnostic = "no roots of f_" + std::to_string(p.m) + " in the search box";
  return out;
}

// ---------------------------------------------------------------------------

/// Viscous eigenvalues of a homogeneous fluid from an inviscid frequency:
/// lambda = (-nu w^2 +- sqrt(nu^2 w^4 - rho^2 c^4 w^2)) / (rho c^2).
inline std::pair<cd, cd> homogeneous_lambda(double rho, double c, double nu, double omega) {
  const double bulk = rho * c * c;
  const cd disc = std::sqrt(cd(nu * nu * std::pow(omega, 4) - bulk * bulk * omega * omega, 0.0));
  const double base = -nu * omega * omega;
  return {(base + disc) / bulk, (base - disc) / bulk};
}

/// Natural frequencies c pi sqrt((m/A)^2 + (n/B)^2) of a single fluid filling a
/// rigid A x B rectangle, (m, n) != (0, 0), ascending.
inline std::vector<double> inviscid_rectangle_modes(double A, double B, double c, std::size_t count) {
  std::vector<double> omegas;
  if (count == 0) return omegas;
  // The modes (m, 0) and (0, n) with m, n <= count already give `count`
  // values below any mode with an index above count.
  const int k = static_cast<int>(count);
  for (int m = 0; m <= k; ++m) {
    for (int n = 0; n <= k; ++n) {
      if (m == 0 && n == 0) continue;
      omegas.push_back(c * std::numbers::pi * std::hypot(m / A, n / B));
    }
  }
  std::sort(omegas.begin(), omegas.end());
  omegas.resize(std::min(count, omegas.size()));
  return omegas;
}

/// Smallest natural frequency estimate for the two-fluid cavity: each fluid
/// treated as filling its own rigid sub-rectangle.
inline double estimate_first_frequency(const GeometryConfig& g, const MaterialConfig& mat) {
  const double w1 = inviscid_rectangle_modes(g.A, g.H, mat(1).c, 1).front();
  const double w2 = inviscid_rectangle_modes(g.A, g.B - g.H, mat(2).c, 1).front();
  return std::min(w1, w2);
}

// ---------------------------------------------------------------------------

struct ContourGrid {
  ComplexBox box;
  GridSize grid;
  std::vector<double> log10_abs_f;  // row-major, rows along Im, columns along Re

  cd point(int i, int j) const {
    const double x = grid.nx > 1 ? box.re_min + (box.re_max - box.re_min) * i / (grid.nx - 1) : box.re_min;
    const double y = grid.ny > 1 ? box.im_min + (box.im_max - box.im_min) * j / (grid.ny - 1) : box.im_min;
    return {x, y};
  }
  double at(int i, int j) const { return log10_abs_f[static_cast<std::size_t>(j) * grid.nx + i]; }
};

inline constexpr double kContourFloor = -16.0;

inline ContourGrid contour_grid(const DispersionProblem& p, const ComplexBox& box, GridSize grid) {
  if (grid.nx < 2 || grid.ny < 2) throw Error(ErrorCode::config, "contour_grid: grid must be at least 2x2");
  ContourGrid out{box, grid, {}};
  out.log10_abs_f.reserve(static_cast<std::size_t>(grid.nx) * grid.ny);
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      double v = std::numeric_limits<double>::infinity();  // pole of r_m
      try {
        const double a = std::abs(f_m(p, out.point(i, j)));
        v = a > 0.0 ? std::max(std::log10(a), kContourFloor) : kContourFloor;
      } catch (const Error&) {
      }
      out.log10_abs_f.push_back(v);
    }
  }
  return out;
}

}  // namespace resonavis
