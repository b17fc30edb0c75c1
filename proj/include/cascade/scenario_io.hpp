#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "cascade/domain.hpp"

namespace cascade {

using Json = nlohmann::json;

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void allow_keys(const Json& j, const char* where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ScenarioError(std::string(where) + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : keys) ok = ok || k == a;
    if (!ok) throw ScenarioError(std::string(where) + ": unknown key '" + k + "'");
  }
}

inline const Json& need(const Json& j, const char* key, const char* where) {
  auto it = j.find(key);
  if (it == j.end()) throw ScenarioError(std::string(where) + ": missing '" + key + "'");
  return *it;
}

inline double number(const Json& j, const char* what) {
  if (!j.is_number()) throw ScenarioError(std::string(what) + ": expected a number");
  return j.get<double>();
}

inline Vec2 point(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) throw ScenarioError(std::string(what) + ": expected [x, y]");
  return {number(j[0], what), number(j[1], what)};
}

inline std::vector<double> numbers(const Json& j, const char* what) {
  if (!j.is_array()) throw ScenarioError(std::string(what) + ": expected an array");
  std::vector<double> out;
  for (const auto& x : j) out.push_back(number(x, what));
  return out;
}

inline int integer(const Json& j, const char* what) {
  if (!j.is_number_integer()) throw ScenarioError(std::string(what) + ": expected an integer");
  return j.get<int>();
}

inline Profile1D profile(const Json& j, const char* where) {
  return Profile1D(numbers(need(j, "breaks", where), "breaks"), numbers(need(j, "values", where), "values"));
}

inline UField parse_u(const Json& j) {
  if (j.is_number()) return UField::constant(j.get<double>());
  const std::string kind = need(j, "kind", "u").get<std::string>();
  if (kind == "constant") {
    allow_keys(j, "u", {"kind", "value"});
    return UField::constant(number(need(j, "value", "u"), "u.value"));
  }
  if (kind == "piecewise1d") {
    allow_keys(j, "u", {"kind", "breaks", "values"});
    return UField::piecewise(profile(j, "u"));
  }
  if (kind == "radial_piecewise") {
    allow_keys(j, "u", {"kind", "breaks", "values", "center"});
    return UField::radial(profile(j, "u"), j.contains("center") ? point(j["center"], "u.center") : Vec2{});
  }
  if (kind == "lattice") {
    allow_keys(j, "u", {"kind", "origin", "h", "nx", "ny", "values"});
    Grid2 g;
    g.origin = point(need(j, "origin", "u"), "u.origin");
    g.h = number(need(j, "h", "u"), "u.h");
    g.nx = integer(need(j, "nx", "u"), "u.nx");
    g.ny = integer(need(j, "ny", "u"), "u.ny");
    g.validate();
    UField u;
    u.kind = UKind::lattice;
    u.lattice = ScalarField2(g, 0.0);
    u.lattice.values = numbers(need(j, "values", "u"), "u.values");
    if (u.lattice.values.size() != g.size()) throw ScenarioError("u.values: expected nx*ny entries");
    return u;
  }
  throw ScenarioError("u: unknown kind '" + kind + "'");
}

inline RegionSpec parse_region(const Json& j) {
  RegionSpec r;
  const std::string kind = need(j, "kind", "initial").get<std::string>();
  if (kind == "half_line") {
    allow_keys(j, "initial", {"kind", "left"});
    r.kind = RegionKind::half_line;
    r.left = number(need(j, "left", "initial"), "initial.left");
  } else if (kind == "interval_complement") {
    allow_keys(j, "initial", {"kind", "left", "right"});
    r.kind = RegionKind::interval_complement;
    r.left = number(need(j, "left", "initial"), "initial.left");
    r.right = number(need(j, "right", "initial"), "initial.right");
  } else if (kind == "ball" || kind == "ball_complement") {
    allow_keys(j, "initial", {"kind", "center", "radius"});
    r.kind = kind == "ball" ? RegionKind::ball : RegionKind::ball_complement;
    if (j.contains("center")) r.center = point(j["center"], "initial.center");
    r.radius = number(need(j, "radius", "initial"), "initial.radius");
  } else if (kind == "annulus_complement") {
    allow_keys(j, "initial", {"kind", "center", "radius", "outer"});
    r.kind = RegionKind::annulus_complement;
    if (j.contains("center")) r.center = point(j["center"], "initial.center");
    r.radius = number(need(j, "radius", "initial"), "initial.radius");
    r.outer = number(need(j, "outer", "initial"), "initial.outer");
  } else if (kind == "lattice_mask") {
    allow_keys(j, "initial", {"kind", "origin", "h", "nx", "ny", "cells"});
    r.kind = RegionKind::lattice_mask;
    r.lattice.origin = point(need(j, "origin", "initial"), "initial.origin");
    r.lattice.h = number(need(j, "h", "initial"), "initial.h");
    r.lattice.nx = integer(need(j, "nx", "initial"), "initial.nx");
    r.lattice.ny = integer(need(j, "ny", "initial"), "initial.ny");
    for (const auto& c : need(j, "cells", "initial")) r.lattice.cells.push_back(integer(c, "initial.cells") != 0);
  } else {
    throw ScenarioError("initial: unknown kind '" + kind + "'");
  }
  r.validate();
  return r;
}

inline V0Field parse_v0(const Json& j) {
  V0Field v;
  if (j.is_number()) {
    v.value = j.get<double>();
    return v;
  }
  allow_keys(j, "v0", {"left", "right", "split"});
  v.kind = V0Kind::sides;
  v.left = number(need(j, "left", "v0"), "v0.left");
  v.right = number(need(j, "right", "v0"), "v0.right");
  if (j.contains("split")) v.split = number(j["split"], "v0.split");
  return v;
}

inline GridSpec parse_grid(const Json& j) {
  allow_keys(j, "grid", {"box", "h", "periodic_y"});
  const auto box = numbers(need(j, "box", "grid"), "grid.box");
  if (box.size() != 4) throw ScenarioError("grid.box: expected [xmin, xmax, ymin, ymax]");
  GridSpec g{box[0], box[1], box[2], box[3], number(need(j, "h", "grid"), "grid.h"), false};
  if (j.contains("periodic_y")) g.periodic_y = j["periodic_y"].get<bool>();
  if (!(g.xmax > g.xmin && g.ymax > g.ymin)) throw ScenarioError("grid.box: empty box");
  return g;
}

inline Tolerances parse_tolerances(const Json& j) {
  allow_keys(j, "tolerances", {"energy", "perimeter", "tv", "front_oracle", "ode_oracle", "residual", "pde", "boundary"});
  Tolerances t;
  auto get = [&](const char* k, double& out) {
    if (j.contains(k)) out = number(j[k], k);
  };
  get("energy", t.energy);
  get("perimeter", t.perimeter);
  get("tv", t.tv);
  get("front_oracle", t.front_oracle);
  get("ode_oracle", t.ode_oracle);
  get("residual", t.residual);
  get("pde", t.pde);
  get("boundary", t.boundary);
  return t;
}

inline Json profile_json(const Profile1D& p) { return {{"breaks", p.breaks()}, {"values", p.values()}}; }

}  // namespace detail

inline ScenarioSpec scenario_from_json(const Json& j) {
  detail::allow_keys(j, "scenario",
                     {"gamma", "dimension", "u", "initial", "v0", "cap", "eps_ladder", "grid", "seed", "cost",
                      "tolerances", "paths"});
  ScenarioSpec s;
  try {
    s.gamma = detail::number(detail::need(j, "gamma", "scenario"), "gamma");
    if (j.contains("dimension")) s.dimension = detail::integer(j["dimension"], "dimension");
    s.u = detail::parse_u(detail::need(j, "u", "scenario"));
    s.initial = detail::parse_region(detail::need(j, "initial", "scenario"));
    s.v0 = detail::parse_v0(detail::need(j, "v0", "scenario"));
    if (j.contains("cap") && !j["cap"].is_null()) s.cap = detail::number(j["cap"], "cap");
    if (j.contains("eps_ladder")) s.eps_ladder = detail::numbers(j["eps_ladder"], "eps_ladder");
    if (j.contains("grid") && !j["grid"].is_null()) s.grid = detail::parse_grid(j["grid"]);
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("paths")) s.paths = detail::integer(j["paths"], "paths");
    if (j.contains("tolerances")) s.tolerances = detail::parse_tolerances(j["tolerances"]);
    if (j.contains("cost") && !j["cost"].is_null()) {
      const Json& c = j["cost"];
      detail::allow_keys(c, "cost", {"kind", "value"});
      CostSpec cs;
      const std::string kind = detail::need(c, "kind", "cost").get<std::string>();
      if (kind == "constant") {
        cs.kind = CostSpec::Kind::constant;
        cs.value = detail::number(detail::need(c, "value", "cost"), "cost.value");
      } else if (kind != "closedform") {
        throw ScenarioError("cost: unknown kind '" + kind + "'");
      }
      s.cost = cs;
    }
    s.validate();
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError(e.what());
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(e.what());
  }
  return s;
}

inline Json scenario_to_json(const ScenarioSpec& s) {
  Json j;
  j["gamma"] = s.gamma;
  j["dimension"] = s.dimension;
  switch (s.u.kind) {
    case UKind::constant: j["u"] = {{"kind", "constant"}, {"value", s.u.value}}; break;
    case UKind::piecewise1d:
      j["u"] = detail::profile_json(s.u.profile);
      j["u"]["kind"] = "piecewise1d";
      break;
    case UKind::radial_piecewise:
      j["u"] = detail::profile_json(s.u.profile);
      j["u"]["kind"] = "radial_piecewise";
      j["u"]["center"] = {s.u.center.x, s.u.center.y};
      break;
    case UKind::lattice: {
      const Grid2& g = s.u.lattice.grid;
      j["u"] = {{"kind", "lattice"}, {"origin", {g.origin.x, g.origin.y}}, {"h", g.h},
                {"nx", g.nx},        {"ny", g.ny},                         {"values", s.u.lattice.values}};
      break;
    }
  }
  const RegionSpec& r = s.initial;
  switch (r.kind) {
    case RegionKind::half_line: j["initial"] = {{"kind", "half_line"}, {"left", r.left}}; break;
    case RegionKind::interval_complement:
      j["initial"] = {{"kind", "interval_complement"}, {"left", r.left}, {"right", r.right}};
      break;
    case RegionKind::ball:
    case RegionKind::ball_complement:
      j["initial"] = {{"kind", r.kind == RegionKind::ball ? "ball" : "ball_complement"},
                      {"center", {r.center.x, r.center.y}},
                      {"radius", r.radius}};
      break;
    case RegionKind::annulus_complement:
      j["initial"] = {{"kind", "annulus_complement"},
                      {"center", {r.center.x, r.center.y}},
                      {"radius", r.radius},
                      {"outer", r.outer}};
      break;
    case RegionKind::lattice_mask: {
      std::vector<int> cells(r.lattice.cells.begin(), r.lattice.cells.end());
      j["initial"] = {{"kind", "lattice_mask"},
                      {"origin", {r.lattice.origin.x, r.lattice.origin.y}},
                      {"h", r.lattice.h},
                      {"nx", r.lattice.nx},
                      {"ny", r.lattice.ny},
                      {"cells", cells}};
      break;
    }
  }
  if (s.v0.kind == V0Kind::constant) j["v0"] = s.v0.value;
  else j["v0"] = {{"left", s.v0.left}, {"right", s.v0.right}, {"split", s.v0.split}};
  j["cap"] = s.cap ? Json(*s.cap) : Json(nullptr);
  j["eps_ladder"] = s.eps_ladder;
  if (s.grid) {
    const GridSpec& g = *s.grid;
    j["grid"] = {{"box", {g.xmin, g.xmax, g.ymin, g.ymax}}, {"h", g.h}, {"periodic_y", g.periodic_y}};
  } else {
    j["grid"] = nullptr;
  }
  j["seed"] = s.seed;
  j["paths"] = s.paths;
  if (s.cost) {
    j["cost"] = {{"kind", s.cost->kind == CostSpec::Kind::constant ? "constant" : "closedform"}};
    if (s.cost->kind == CostSpec::Kind::constant) j["cost"]["value"] = s.cost->value;
  } else {
    j["cost"] = nullptr;
  }
  const Tolerances& t = s.tolerances;
  j["tolerances"] = {{"energy", t.energy},   {"perimeter", t.perimeter}, {"tv", t.tv},
                     {"front_oracle", t.front_oracle}, {"ode_oracle", t.ode_oracle}, {"residual", t.residual},
                     {"pde", t.pde},         {"boundary", t.boundary}};
  return j;
}

//! Canonical text: sorted keys, shortest round-trip floats, two-space indent.
inline std::string canonical_json(const Json& j) { return j.dump(2) + "\n"; }

inline ScenarioSpec parse_scenario(const std::string& text) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw ScenarioError("empty scenario");
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError(std::string("parse error: ") + e.what());
  }
  return scenario_from_json(j);
}

inline ScenarioSpec load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

//! 64-bit FNV-1a, printed as 16 hex digits.
inline std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string scenario_digest(const ScenarioSpec& s) { return fnv1a_hex(canonical_json(scenario_to_json(s))); }

//! Writes through a temporary file in the same directory, then renames.
inline void write_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  try {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    body(out);
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    throw;
  }
  std::filesystem::rename(tmp, path);
}

inline void write_atomic(const std::filesystem::path& path, const std::string& text) {
  write_atomic(path, [&](std::ostream& os) { os << text; });
}

}  // namespace cascade
