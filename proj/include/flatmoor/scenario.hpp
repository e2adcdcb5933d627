#pragma once

#include "flatmoor/obstacles.hpp"
#include "flatmoor/solver.hpp"
#include "flatmoor/vessel.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace flatmoor {

/// Stochastic wind description plus the geometry the force map needs.
struct WindStats {
  double mu_beta = 0.0;      // mean direction the wind blows toward [rad, NED]
  double sigma_beta = 0.06;  // direction standard deviation [rad]
  double k_V = 2.0;          // Weibull shape
  double lambda_V = 0.194;   // Weibull scale [m/s]
  double rho_air = 1.205;    // [kg/m^3]
  double Af = 0.35;          // frontal projected area [m^2]
  double Al = 1.2;           // lateral projected area [m^2]
  double Ls = 1.2;           // length for the yaw lever arm [m]
  double c_x = 0.7;          // surge coefficient amplitude
  double c_y = 0.85;         // sway coefficient amplitude
  double c_n = 0.125;        // yaw coefficient amplitude
  double filter_tau = 5.0;   // first-order smoothing time constant [s]
  std::uint64_t seed = 1;

  std::vector<std::string> validate() const;
};

struct SplineConfig {
  int n_ctrl = 21;      // control points per flat output
  int degree = 4;       // clamped B-spline degree
  double tf_min = 1.0;  // mooring final-time bounds [s]
  double tf_max = 60.0;
};

/// Everything a run needs: vessel, limits, geometry, wind, solver knobs.
struct ScenarioConfig {
  VesselState x0;
  VesselState xf;
  double t_hor = 15.0;  // prediction horizon [s]
  double t_mpc = 1.0;   // receding-horizon shift [s]
  int N = 199;          // collocation segments (N+1 points)
  double u_max = 0.38;  // speed estimates for the switching radius [m/s]
  double v_max = 0.0;
  double R_s = 0.0;       // switching radius [m]; 0 = derive from formula
  double epsilon = 1e-3;  // sway-force band [N]
  double plant_step = 0.01;  // plant integration step [s]
  int max_mpc_iterations = 200;
  std::uint64_t seed = 1;

  SplineConfig spline;
  ObstacleSet obstacles;
  bool wind_enabled = false;
  WindStats wind;
  VesselParams params = VesselParams::model_ship();
  SolverSettings solver;

  /// R_s when set, otherwise t_hor * sqrt(u_max^2 + v_max^2).
  double switching_radius() const;

  std::vector<std::string> validate() const;
};

/// The berth-basin docking scenario used as the bundled default: model-ship
/// vessel, four-rectangle basin, weak Weibull wind.
ScenarioConfig default_scenario();

struct ScenarioLoadResult {
  ScenarioConfig config;
  std::vector<std::string> errors;   // non-empty => file rejected
  std::vector<std::string> notices;  // defaulted sections/keys
  bool ok() const { return errors.empty(); }
};

/// Parse the INI-style scenario format (see the bundled file for the
/// grammar). Unknown sections or keys are errors; missing ones fall back to
/// the defaults above and are reported as notices. All problems are
/// collected, not first-failure.
ScenarioLoadResult load_scenario(const std::string& path);

/// Write a complete, explicit scenario file that round-trips through
/// load_scenario to the same configuration.
void save_scenario(const ScenarioConfig& scn, const std::string& path);

}  // namespace flatmoor
