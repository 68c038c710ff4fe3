#pragma once

// Run configuration: a single JSON document. Lengths in meters, densities in
// kg/m^3, sound speeds in m/s, viscosities in N s/m^2, eigenvalues in 1/s.

#include <complex>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "resonavis/assembly.hpp"
#include "resonavis/error.hpp"
#include "resonavis/mesh.hpp"
#include "resonavis/oracle.hpp"

namespace resonavis {

using json = nlohmann::json;

struct MeshConfig {
  std::vector<int> levels{8};
  DiagonalPattern pattern = DiagonalPattern::centered;
  bool operator==(const MeshConfig&) const = default;
};

struct SolverConfig {
  std::optional<cd> shift;  // unset: chosen from the inviscid frequency estimate
  int nev = 6;
  int krylov_dim = 40;
  double tol = 1e-10;
  int max_restarts = 5;
  bool operator==(const SolverConfig&) const = default;
};

struct OracleConfig {
  std::vector<int> m_list{0, 1, 2, 3};
  std::optional<ComplexBox> box;  // unset: derived from the frequency estimate
  GridSize grid{};
  double tol = 1e-6;
  std::vector<cd> exact;  // optional user-supplied reference eigenvalues
  bool operator==(const OracleConfig&) const = default;
};

struct OutputConfig {
  std::string directory = ".";
  std::vector<std::string> formats{"json"};
  bool eigenvectors = false;
  bool vtk = false;

  bool has(const std::string& f) const {
    for (const auto& x : formats) {
      if (x == f) return true;
    }
    return false;
  }
  bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
  GeometryConfig geometry;
  MaterialConfig materials;
  MeshConfig mesh;
  SolverConfig solver;
  OracleConfig oracle;
  OutputConfig output;
  bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline const json& require(const json& j, const std::string& path, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorCode::config, path + "." + key + ": missing");
  return j.at(key);
}

template <typename T>
T number(const json& j, const std::string& path) {
  if (!j.is_number()) throw Error(ErrorCode::config, path + ": expected a number");
  return j.get<T>();
}

template <typename T>
T number_or(const json& j, const std::string& path, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return number<T>(j.at(key), path + "." + key);
}

inline cd complex_from(const json& j, const std::string& path) {
  if (!j.is_object()) throw Error(ErrorCode::config, path + ": expected {\"re\": .., \"im\": ..}");
  return {number_or<double>(j, path, "re", 0.0), number_or<double>(j, path, "im", 0.0)};
}

inline json complex_to(cd z) { return {{"re", z.real()}, {"im", z.imag()}}; }

inline FluidProperties fluid_from(const json& j, const std::string& path) {
  FluidProperties f;
  f.rho = number<double>(require(j, path, "rho"), path + ".rho");
  f.c = number<double>(require(j, path, "c"), path + ".c");
  f.nu = number_or<double>(j, path, "nu", 0.0);
  return f;
}

inline RunConfig parse_config_impl(const json& root) {
  if (!root.is_object()) throw Error(ErrorCode::config, "$: expected a JSON object");
  RunConfig c;

  const json& g = require(root, "$", "geometry");
  c.geometry.A = number<double>(require(g, "$.geometry", "A"), "$.geometry.A");
  c.geometry.B = number<double>(require(g, "$.geometry", "B"), "$.geometry.B");
  c.geometry.H = number<double>(require(g, "$.geometry", "H"), "$.geometry.H");
  try {
    c.geometry.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::config, std::string("$.geometry: ") + e.what());
  }

  const json& m = require(root, "$", "materials");
  c.materials.fluid[0] = fluid_from(require(m, "$.materials", "fluid1"), "$.materials.fluid1");
  c.materials.fluid[1] = fluid_from(require(m, "$.materials", "fluid2"), "$.materials.fluid2");
  try {
    c.materials.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::config, std::string("$.materials: ") + e.what());
  }

  if (root.contains("mesh")) {
    const json& mj = root.at("mesh");
    if (mj.contains("N")) {
      const json& n = mj.at("N");
      c.mesh.levels.clear();
      if (n.is_array()) {
        for (std::size_t i = 0; i < n.size(); ++i) {
          c.mesh.levels.push_back(number<int>(n[i], "$.mesh.N[" + std::to_string(i) + "]"));
        }
      } else {
        c.mesh.levels.push_back(number<int>(n, "$.mesh.N"));
      }
      if (c.mesh.levels.empty()) throw Error(ErrorCode::config, "$.mesh.N: empty list");
      for (std::size_t i = 0; i < c.mesh.levels.size(); ++i) {
        if (c.mesh.levels[i] <= 0) throw Error(ErrorCode::config, "$.mesh.N: levels must be positive");
        if (i > 0 && c.mesh.levels[i] <= c.mesh.levels[i - 1]) {
          throw Error(ErrorCode::config, "$.mesh.N: levels must be strictly increasing");
        }
      }
    }
    if (mj.contains("pattern")) {
      const std::string p = mj.at("pattern").is_string() ? mj.at("pattern").get<std::string>() : "";
      if (p == "centered") {
        c.mesh.pattern = DiagonalPattern::centered;
      } else if (p == "uniform") {
        c.mesh.pattern = DiagonalPattern::uniform;
      } else {
        throw Error(ErrorCode::config, "$.mesh.pattern: expected \"centered\" or \"uniform\"");
      }
    }
  }

  if (root.contains("solver")) {
    const json& s = root.at("solver");
    if (s.contains("shift") && !s.at("shift").is_null()) c.solver.shift = complex_from(s.at("shift"), "$.solver.shift");
    c.solver.nev = number_or<int>(s, "$.solver", "nev", c.solver.nev);
    c.solver.krylov_dim = number_or<int>(s, "$.solver", "krylov_dim", c.solver.krylov_dim);
    c.solver.tol = number_or<double>(s, "$.solver", "tol", c.solver.tol);
    c.solver.max_restarts = number_or<int>(s, "$.solver", "max_restarts", c.solver.max_restarts);
    if (c.solver.nev < 1 || c.solver.krylov_dim <= c.solver.nev || c.solver.krylov_dim > 200) {
      throw Error(ErrorCode::config, "$.solver: need 1 <= nev < krylov_dim <= 200");
    }
    if (!(c.solver.tol > 0.0)) throw Error(ErrorCode::config, "$.solver.tol: must be positive");
  }

  if (root.contains("oracle")) {
    const json& o = root.at("oracle");
    if (o.contains("m")) {
      c.oracle.m_list.clear();
      const json& ml = o.at("m");
      if (!ml.is_array()) throw Error(ErrorCode::config, "$.oracle.m: expected an array");
      for (std::size_t i = 0; i < ml.size(); ++i) {
        const int mi = number<int>(ml[i], "$.oracle.m[" + std::to_string(i) + "]");
        if (mi < 0) throw Error(ErrorCode::config, "$.oracle.m: mode indices must be nonnegative");
        c.oracle.m_list.push_back(mi);
      }
    }
    if (o.contains("box") && !o.at("box").is_null()) {
      const json& b = o.at("box");
      ComplexBox box;
      box.re_min = number<double>(require(b, "$.oracle.box", "re_min"), "$.oracle.box.re_min");
      box.re_max = number<double>(require(b, "$.oracle.box", "re_max"), "$.oracle.box.re_max");
      box.im_min = number<double>(require(b, "$.oracle.box", "im_min"), "$.oracle.box.im_min");
      box.im_max = number<double>(require(b, "$.oracle.box", "im_max"), "$.oracle.box.im_max");
      if (!(box.re_max > box.re_min) || !(box.im_max > box.im_min)) {
        throw Error(ErrorCode::config, "$.oracle.box: empty box");
      }
      c.oracle.box = box;
    }
    if (o.contains("grid")) {
      const json& gr = o.at("grid");
      c.oracle.grid.nx = number_or<int>(gr, "$.oracle.grid", "nx", c.oracle.grid.nx);
      c.oracle.grid.ny = number_or<int>(gr, "$.oracle.grid", "ny", c.oracle.grid.ny);
      if (c.oracle.grid.nx < 2 || c.oracle.grid.ny < 2) throw Error(ErrorCode::config, "$.oracle.grid: at least 2x2");
    }
    c.oracle.tol = number_or<double>(o, "$.oracle", "tol", c.oracle.tol);
    if (o.contains("exact")) {
      const json& ex = o.at("exact");
      if (!ex.is_array()) throw Error(ErrorCode::config, "$.oracle.exact: expected an array");
      for (std::size_t i = 0; i < ex.size(); ++i) {
        c.oracle.exact.push_back(complex_from(ex[i], "$.oracle.exact[" + std::to_string(i) + "]"));
      }
    }
  }

  if (root.contains("output")) {
    const json& o = root.at("output");
    if (o.contains("directory")) {
      if (!o.at("directory").is_string()) throw Error(ErrorCode::config, "$.output.directory: expected a string");
      c.output.directory = o.at("directory").get<std::string>();
    }
    if (o.contains("formats")) {
      c.output.formats.clear();
      for (const auto& f : o.at("formats")) {
        if (!f.is_string()) throw Error(ErrorCode::config, "$.output.formats: expected strings");
        c.output.formats.push_back(f.get<std::string>());
      }
    }
    if (o.contains("eigenvectors")) c.output.eigenvectors = o.at("eigenvectors").get<bool>();
    if (o.contains("vtk")) c.output.vtk = o.at("vtk").get<bool>();
  }
  return c;
}

}  // namespace detail

/// Validates and converts a config document. Errors carry the JSON path of the
/// offending field, e.g. `$.materials.fluid1.rho: missing`.
inline RunConfig parse_config(const json& root) {
  try {
    return detail::parse_config_impl(root);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::config, std::string("$: ") + e.what());
  }
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config, "cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::config, std::string("$: invalid JSON (") + e.what() + ")");
  }
  return parse_config(root);
}

inline json to_json(const RunConfig& c) {
  using detail::complex_to;
  json fluids = json::object();
  for (int i = 0; i < 2; ++i) {
    const auto& f = c.materials.fluid[i];
    fluids["fluid" + std::to_string(i + 1)] = {{"rho", f.rho}, {"c", f.c}, {"nu", f.nu}};
  }
  json solver = {{"nev", c.solver.nev},
                 {"krylov_dim", c.solver.krylov_dim},
                 {"tol", c.solver.tol},
                 {"max_restarts", c.solver.max_restarts},
                 {"shift", c.solver.shift ? complex_to(*c.solver.shift) : json(nullptr)}};
  json exact = json::array();
  for (cd z : c.oracle.exact) exact.push_back(complex_to(z));
  json box = nullptr;
  if (c.oracle.box) {
    box = {{"re_min", c.oracle.box->re_min},
           {"re_max", c.oracle.box->re_max},
           {"im_min", c.oracle.box->im_min},
           {"im_max", c.oracle.box->im_max}};
  }
  return {
      {"geometry", {{"A", c.geometry.A}, {"B", c.geometry.B}, {"H", c.geometry.H}}},
      {"materials", fluids},
      {"mesh",
       {{"N", c.mesh.levels}, {"pattern", c.mesh.pattern == DiagonalPattern::centered ? "centered" : "uniform"}}},
      {"solver", solver},
      {"oracle",
       {{"m", c.oracle.m_list},
        {"box", box},
        {"grid", {{"nx", c.oracle.grid.nx}, {"ny", c.oracle.grid.ny}}},
        {"tol", c.oracle.tol},
        {"exact", exact}}},
      {"output",
       {{"directory", c.output.directory},
        {"formats", c.output.formats},
        {"eigenvectors", c.output.eigenvectors},
        {"vtk", c.output.vtk}}},
  };
}

/// Box used when the config gives none: Im in [0.5, 4] x the first-frequency
/// estimate, Re in [-0.2, 0.002] x the upper Im bound.
inline ComplexBox default_search_box(const GeometryConfig& g, const MaterialConfig& mat) {
  const double w = estimate_first_frequency(g, mat);
  const double top = 4.0 * w;
  return {-0.2 * top, 0.002 * top, 0.5 * w, top};
}

}  // namespace resonavis
