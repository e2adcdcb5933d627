#include "flatmoor/scenario.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace flatmoor {

std::vector<std::string> WindStats::validate() const {
  std::vector<std::string> issues;
  auto require = [&](bool ok, const char* msg) {
    if (!ok) issues.emplace_back(msg);
  };
  require(sigma_beta >= 0.0, "wind sigma_beta must be >= 0");
  require(k_V > 0.0, "wind Weibull shape k_V must be positive");
  require(lambda_V > 0.0, "wind Weibull scale lambda_V must be positive");
  require(rho_air > 0.0, "air density must be positive");
  require(Af > 0.0, "frontal area Af must be positive");
  require(Al > 0.0, "lateral area Al must be positive");
  require(Ls > 0.0, "wind lever arm Ls must be positive");
  require(c_x >= 0.0 && c_y >= 0.0 && c_n >= 0.0,
          "wind coefficient amplitudes must be >= 0");
  require(filter_tau > 0.0, "wind filter time constant must be positive");
  require(std::isfinite(mu_beta), "wind mean direction must be finite");
  return issues;
}

double ScenarioConfig::switching_radius() const {
  return R_s > 0.0 ? R_s : t_hor * std::hypot(u_max, v_max);
}

std::vector<std::string> ScenarioConfig::validate() const {
  std::vector<std::string> issues = params.validate();
  auto require = [&](bool ok, const std::string& msg) {
    if (!ok) issues.push_back(msg);
  };

  require(x0.finite(), "x0 must be finite");
  require(xf.finite(), "xf must be finite");
  require(t_hor > 0.0, "t_hor must be positive");
  require(t_mpc > 0.0 && t_mpc <= t_hor, "t_mpc must satisfy 0 < t_mpc <= t_hor");
  require(N >= 1, "need at least one collocation segment");
  require(epsilon > 0.0, "epsilon must be positive");
  require(plant_step > 0.0, "plant step must be positive");
  if (plant_step > 0.0) {
    const double steps = t_mpc / plant_step;
    require(std::abs(steps - std::round(steps)) <= 1e-9 * std::max(1.0, steps),
            "t_mpc must be an integer multiple of the plant step");
  }
  require(max_mpc_iterations >= 1, "max_mpc_iterations must be >= 1");
  require(u_max >= 0.0 && v_max >= 0.0, "speed estimates must be >= 0");
  require(R_s >= 0.0, "switching radius must be >= 0");
  require(switching_radius() > 0.0,
          "switching radius is zero: set switching_radius or u_max/v_max");
  require(spline.degree >= 1, "spline degree must be >= 1");
  require(spline.n_ctrl >= spline.degree + 1,
          "need at least degree+1 control points per output");
  require(spline.tf_min > 0.0 && spline.tf_min <= spline.tf_max,
          "mooring tf bounds must satisfy 0 < tf_min <= tf_max");
  require(solver.tol_kkt > 0.0 && solver.tol_feas > 0.0,
          "solver tolerances must be positive");
  require(solver.max_iter >= 1 && solver.max_inner_iter >= 1,
          "solver iteration limits must be >= 1");

  for (size_t i = 0; i < obstacles.rectangles.size(); ++i) {
    for (const std::string& msg : obstacles.rectangles[i].validate()) {
      issues.push_back("obstacle " + std::to_string(i + 1) + ": " + msg);
    }
  }
  for (const std::string& msg : wind.validate()) issues.push_back(msg);
  return issues;
}

ScenarioConfig default_scenario() {
  ScenarioConfig scn;
  scn.x0 = VesselState{3.5, 2.0, M_PI / 2, 0.0, 0.0, 0.0};
  scn.xf = VesselState{2.4, 18.0, 0.0, 0.0, 0.0, 0.0};
  scn.t_hor = 15.0;
  scn.t_mpc = 1.0;
  scn.N = 199;  // 200 collocation points
  scn.u_max = 0.38;
  scn.v_max = 0.0;
  scn.R_s = 0.0;  // derived: 15 * 0.38 = 5.7 m
  scn.epsilon = 1e-3;
  // Obstacle table lists full side lengths; stored as half-extents.
  scn.obstacles.rectangles = {
      {2.0, 17.575, 1.0, 0.25, 0.0, 12},
      {2.0, 18.575, 1.0, 0.25, 0.0, 12},
      {0.5, 16.325, 0.5, 3.0, 0.0, 12},
      {3.0, 10.0, 0.75, 0.75, M_PI / 4, 12},
  };
  scn.wind_enabled = true;
  scn.wind = WindStats{};
  scn.params = VesselParams::model_ship();
  return scn;
}

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream iss(s);
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

/// Number grammar: a decimal literal, or [+-]pi optionally divided by a
/// decimal literal (pi, -pi, pi/2, +pi/4, ...).
bool parse_number(const std::string& token, double& out) {
  std::string t = token;
  double sign = 1.0;
  if (!t.empty() && (t[0] == '+' || t[0] == '-')) {
    if (t[0] == '-') sign = -1.0;
    t = t.substr(1);
  }
  if (t.rfind("pi", 0) == 0) {
    if (t.size() == 2) {
      out = sign * M_PI;
      return true;
    }
    if (t.size() > 3 && t[2] == '/') {
      char* end = nullptr;
      const std::string denom = t.substr(3);
      const double d = std::strtod(denom.c_str(), &end);
      if (end != denom.c_str() + denom.size() || d == 0.0) return false;
      out = sign * M_PI / d;
      return true;
    }
    return false;
  }
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size() || token.empty()) return false;
  out = v;
  return true;
}

bool parse_bool(const std::string& token, bool& out) {
  if (token == "true" || token == "1" || token == "yes") {
    out = true;
    return true;
  }
  if (token == "false" || token == "0" || token == "no") {
    out = false;
    return true;
  }
  return false;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// One scalar-valued key: where it lands plus bookkeeping for notices.
struct KeyBinding {
  enum class Kind { Double, Int, Uint64, Bool, State6, Rect } kind = Kind::Double;
  void* target = nullptr;
  bool optional = false;  // no notice when absent
};

struct SectionSchema {
  std::map<std::string, KeyBinding> keys;
};

}  // namespace

ScenarioLoadResult load_scenario(const std::string& path) {
  ScenarioLoadResult res;
  res.config = default_scenario();
  ScenarioConfig& scn = res.config;

  std::ifstream in(path);
  if (!in) {
    res.errors.push_back("cannot open scenario file: " + path);
    return res;
  }

  bool obstacles_section_seen = false;
  std::vector<RectObstacle> parsed_rects;

  auto bind = [](KeyBinding::Kind k, void* t, bool opt = false) {
    return KeyBinding{k, t, opt};
  };
  using K = KeyBinding::Kind;

  std::map<std::string, SectionSchema> schema;
  schema["vessel"].keys = {
      {"m11", bind(K::Double, &scn.params.m11)},
      {"m22", bind(K::Double, &scn.params.m22)},
      {"m23", bind(K::Double, &scn.params.m23)},
      {"m32", bind(K::Double, &scn.params.m32)},
      {"m33", bind(K::Double, &scn.params.m33)},
      {"Xu", bind(K::Double, &scn.params.Xu)},
      {"Yv", bind(K::Double, &scn.params.Yv)},
      {"Yr", bind(K::Double, &scn.params.Yr)},
      {"Nv", bind(K::Double, &scn.params.Nv)},
      {"Nr", bind(K::Double, &scn.params.Nr)},
      {"Xuu", bind(K::Double, &scn.params.Xuu)},
      {"Yvv", bind(K::Double, &scn.params.Yvv)},
      {"Nrr", bind(K::Double, &scn.params.Nrr)},
      {"length", bind(K::Double, &scn.params.Ls)},
      {"width", bind(K::Double, &scn.params.Ws)},
      {"mass", bind(K::Double, &scn.params.mass)},
  };
  schema["bounds"].keys = {
      {"tau_u_min", bind(K::Double, &scn.params.tau_u_min)},
      {"tau_u_max", bind(K::Double, &scn.params.tau_u_max)},
      {"tau_r_min", bind(K::Double, &scn.params.tau_r_min)},
      {"tau_r_max", bind(K::Double, &scn.params.tau_r_max)},
  };
  int collocation_points = scn.N + 1;
  schema["scenario"].keys = {
      {"x0", bind(K::State6, &scn.x0)},
      {"xf", bind(K::State6, &scn.xf)},
      {"t_hor", bind(K::Double, &scn.t_hor)},
      {"t_mpc", bind(K::Double, &scn.t_mpc)},
      {"collocation_points", bind(K::Int, &collocation_points)},
      {"u_max", bind(K::Double, &scn.u_max)},
      {"v_max", bind(K::Double, &scn.v_max)},
      {"switching_radius", bind(K::Double, &scn.R_s, true)},
      {"epsilon", bind(K::Double, &scn.epsilon)},
      {"control_points", bind(K::Int, &scn.spline.n_ctrl)},
      {"tf_min", bind(K::Double, &scn.spline.tf_min)},
      {"tf_max", bind(K::Double, &scn.spline.tf_max)},
      {"plant_step", bind(K::Double, &scn.plant_step, true)},
      {"max_mpc_iterations", bind(K::Int, &scn.max_mpc_iterations, true)},
      {"seed", bind(K::Uint64, &scn.seed)},
  };
  schema["obstacles"].keys = {
      {"rect", bind(K::Rect, nullptr, true)},
  };
  bool wind_seed_given = false;
  schema["wind"].keys = {
      {"enabled", bind(K::Bool, &scn.wind_enabled)},
      {"mu_beta", bind(K::Double, &scn.wind.mu_beta)},
      {"sigma_beta", bind(K::Double, &scn.wind.sigma_beta)},
      {"k_V", bind(K::Double, &scn.wind.k_V)},
      {"lambda_V", bind(K::Double, &scn.wind.lambda_V)},
      {"rho_air", bind(K::Double, &scn.wind.rho_air)},
      {"Af", bind(K::Double, &scn.wind.Af)},
      {"Al", bind(K::Double, &scn.wind.Al)},
      {"Ls", bind(K::Double, &scn.wind.Ls)},
      {"c_x", bind(K::Double, &scn.wind.c_x)},
      {"c_y", bind(K::Double, &scn.wind.c_y)},
      {"c_n", bind(K::Double, &scn.wind.c_n)},
      {"filter_tau", bind(K::Double, &scn.wind.filter_tau)},
      {"seed", bind(K::Uint64, &scn.wind.seed, true)},
  };
  schema["solver"].keys = {
      {"tol_kkt", bind(K::Double, &scn.solver.tol_kkt)},
      {"tol_feas", bind(K::Double, &scn.solver.tol_feas)},
      {"max_iter", bind(K::Int, &scn.solver.max_iter)},
      {"max_inner_iter", bind(K::Int, &scn.solver.max_inner_iter, true)},
      {"verbosity", bind(K::Int, &scn.solver.verbosity, true)},
  };

  std::set<std::string> seen_sections;
  std::set<std::string> seen_keys;  // "section/key"
  std::string section;
  std::string line;
  int lineno = 0;

  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    auto err = [&](const std::string& msg) {
      res.errors.push_back("line " + std::to_string(lineno) + ": " + msg);
    };

    if (line.front() == '[') {
      if (line.back() != ']') {
        err("malformed section header '" + line + "'");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      if (!schema.count(section)) {
        err("unknown section [" + section + "]");
        section.clear();
        continue;
      }
      seen_sections.insert(section);
      if (section == "obstacles") obstacles_section_seen = true;
      continue;
    }

    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      err("expected 'key = value', got '" + line + "'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) {
      err("key '" + key + "' outside any section");
      continue;
    }
    const auto& keys = schema[section].keys;
    const auto it = keys.find(key);
    if (it == keys.end()) {
      err("unknown key '" + key + "' in [" + section + "]");
      continue;
    }
    const KeyBinding& kb = it->second;
    const std::string qualified = section + "/" + key;
    if (kb.kind != K::Rect && seen_keys.count(qualified)) {
      err("duplicate key '" + key + "' in [" + section + "]");
      continue;
    }
    seen_keys.insert(qualified);

    switch (kb.kind) {
      case K::Double: {
        double v;
        if (!parse_number(value, v)) {
          err("key '" + key + "': cannot parse number '" + value + "'");
        } else {
          *static_cast<double*>(kb.target) = v;
        }
        break;
      }
      case K::Int: {
        double v;
        if (!parse_number(value, v) || v != std::floor(v)) {
          err("key '" + key + "': expected an integer, got '" + value + "'");
        } else {
          *static_cast<int*>(kb.target) = static_cast<int>(v);
        }
        break;
      }
      case K::Uint64: {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
        if (value.empty() || end != value.c_str() + value.size()) {
          err("key '" + key + "': expected an unsigned integer, got '" + value + "'");
        } else {
          *static_cast<std::uint64_t*>(kb.target) = v;
          if (qualified == "wind/seed") wind_seed_given = true;
        }
        break;
      }
      case K::Bool: {
        bool v;
        if (!parse_bool(value, v)) {
          err("key '" + key + "': expected true/false, got '" + value + "'");
        } else {
          *static_cast<bool*>(kb.target) = v;
        }
        break;
      }
      case K::State6: {
        const auto toks = split_ws(value);
        double nums[6];
        bool ok = toks.size() == 6;
        for (size_t i = 0; ok && i < 6; ++i) ok = parse_number(toks[i], nums[i]);
        if (!ok) {
          err("key '" + key + "': expected 6 numbers (x y psi u v r)");
        } else {
          *static_cast<VesselState*>(kb.target) =
              VesselState{nums[0], nums[1], nums[2], nums[3], nums[4], nums[5]};
        }
        break;
      }
      case K::Rect: {
        const auto toks = split_ws(value);
        double nums[6];
        bool ok = toks.size() == 6;
        for (size_t i = 0; ok && i < 6; ++i) ok = parse_number(toks[i], nums[i]);
        if (!ok || nums[5] != std::floor(nums[5])) {
          err("rect: expected 'x0 y0 len_x len_y alpha p' (p integer)");
        } else {
          // The file lists full side lengths; the constraint functions use
          // half-extents.
          parsed_rects.push_back(RectObstacle{nums[0], nums[1], nums[2] / 2.0,
                                              nums[3] / 2.0, nums[4],
                                              static_cast<int>(nums[5])});
        }
        break;
      }
    }
  }

  if (obstacles_section_seen) scn.obstacles.rectangles = parsed_rects;
  scn.N = collocation_points - 1;
  if (collocation_points < 2) {
    res.errors.push_back("collocation_points must be at least 2");
  }
  if (!wind_seed_given) scn.wind.seed = scn.seed;

  // Notices for everything that fell back to defaults.
  for (const auto& [name, sec] : schema) {
    if (!seen_sections.count(name)) {
      res.notices.push_back("section [" + name + "] absent: using defaults");
      continue;
    }
    for (const auto& [key, kb] : sec.keys) {
      if (!kb.optional && !seen_keys.count(name + "/" + key)) {
        res.notices.push_back("key '" + key + "' in [" + name +
                              "] absent: using default");
      }
    }
  }

  for (const std::string& msg : scn.validate()) res.errors.push_back(msg);
  return res;
}

void save_scenario(const ScenarioConfig& scn, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scenario file: " + path);
  const VesselParams& p = scn.params;

  out << "# Docking scenario (written by the scenario writer; all keys explicit)\n";
  out << "\n[vessel]\n";
  out << "m11 = " << fmt(p.m11) << "\nm22 = " << fmt(p.m22) << "\nm23 = "
      << fmt(p.m23) << "\nm32 = " << fmt(p.m32) << "\nm33 = " << fmt(p.m33) << "\n";
  out << "Xu = " << fmt(p.Xu) << "\nYv = " << fmt(p.Yv) << "\nYr = " << fmt(p.Yr)
      << "\nNv = " << fmt(p.Nv) << "\nNr = " << fmt(p.Nr) << "\n";
  out << "Xuu = " << fmt(p.Xuu) << "\nYvv = " << fmt(p.Yvv) << "\nNrr = "
      << fmt(p.Nrr) << "\n";
  out << "length = " << fmt(p.Ls) << "\nwidth = " << fmt(p.Ws) << "\nmass = "
      << fmt(p.mass) << "\n";

  out << "\n[bounds]\n";
  out << "tau_u_min = " << fmt(p.tau_u_min) << "\ntau_u_max = " << fmt(p.tau_u_max)
      << "\ntau_r_min = " << fmt(p.tau_r_min) << "\ntau_r_max = "
      << fmt(p.tau_r_max) << "\n";

  auto state6 = [&](const VesselState& s) {
    return fmt(s.x) + " " + fmt(s.y) + " " + fmt(s.psi) + " " + fmt(s.u) + " " +
           fmt(s.v) + " " + fmt(s.r);
  };
  out << "\n[scenario]\n";
  out << "x0 = " << state6(scn.x0) << "\nxf = " << state6(scn.xf) << "\n";
  out << "t_hor = " << fmt(scn.t_hor) << "\nt_mpc = " << fmt(scn.t_mpc) << "\n";
  out << "collocation_points = " << (scn.N + 1) << "\n";
  out << "u_max = " << fmt(scn.u_max) << "\nv_max = " << fmt(scn.v_max) << "\n";
  if (scn.R_s > 0.0) out << "switching_radius = " << fmt(scn.R_s) << "\n";
  out << "epsilon = " << fmt(scn.epsilon) << "\n";
  out << "control_points = " << scn.spline.n_ctrl << "\n";
  out << "tf_min = " << fmt(scn.spline.tf_min) << "\ntf_max = "
      << fmt(scn.spline.tf_max) << "\n";
  out << "plant_step = " << fmt(scn.plant_step) << "\n";
  out << "max_mpc_iterations = " << scn.max_mpc_iterations << "\n";
  out << "seed = " << scn.seed << "\n";

  out << "\n[obstacles]\n";
  out << "# rect = x0 y0 len_x len_y alpha p   (full side lengths)\n";
  for (const RectObstacle& o : scn.obstacles.rectangles) {
    out << "rect = " << fmt(o.x0) << " " << fmt(o.y0) << " " << fmt(2.0 * o.dx)
        << " " << fmt(2.0 * o.dy) << " " << fmt(o.alpha) << " " << o.p << "\n";
  }

  const WindStats& w = scn.wind;
  out << "\n[wind]\n";
  out << "enabled = " << (scn.wind_enabled ? "true" : "false") << "\n";
  out << "mu_beta = " << fmt(w.mu_beta) << "\nsigma_beta = " << fmt(w.sigma_beta)
      << "\n";
  out << "k_V = " << fmt(w.k_V) << "\nlambda_V = " << fmt(w.lambda_V) << "\n";
  out << "rho_air = " << fmt(w.rho_air) << "\n";
  out << "Af = " << fmt(w.Af) << "\nAl = " << fmt(w.Al) << "\nLs = " << fmt(w.Ls)
      << "\n";
  out << "c_x = " << fmt(w.c_x) << "\nc_y = " << fmt(w.c_y) << "\nc_n = "
      << fmt(w.c_n) << "\n";
  out << "filter_tau = " << fmt(w.filter_tau) << "\n";
  out << "seed = " << w.seed << "\n";

  out << "\n[solver]\n";
  out << "tol_kkt = " << fmt(scn.solver.tol_kkt) << "\ntol_feas = "
      << fmt(scn.solver.tol_feas) << "\n";
  out << "max_iter = " << scn.solver.max_iter << "\n";
  out << "max_inner_iter = " << scn.solver.max_inner_iter << "\n";
  if (!out) throw std::runtime_error("failed writing scenario file: " + path);
}

}  // namespace flatmoor
