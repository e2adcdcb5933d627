#pragma once

#include "flatmoor/scenario.hpp"
#include "flatmoor/transcription.hpp"
#include "flatmoor/vessel.hpp"
#include "flatmoor/wind.hpp"

#include <string>
#include <vector>

namespace flatmoor {

/// R_s = t_hor * sqrt(u_max^2 + v_max^2): the distance the vessel can cover
/// within one prediction horizon, used to trigger the mooring phase.
double switching_radius(double t_hor, double u_max, double v_max);

/// The vessel counts as moored when the plant state is this close to the
/// goal: planar position [m], heading [rad], and every velocity component.
struct MooringTolerance {
  double position = 0.05;
  double heading = 0.05;
  double velocity = 0.05;
};

/// Receding-horizon restart: resample `prev` at shift + sigma * t_f_new
/// (sigma spanning the new plan's domain, values held at the previous
/// endpoint once the shifted time runs past it) and refit control points on
/// spec's knot grid by least squares. t_f_new is t_hor for driving and
/// max(prev.tf - shift, tf_min) for mooring. Falls back to cold_start on a
/// degenerate fit. Multipliers are left empty.
TranscriptionGuess warm_start(const PhasePlan& prev, double shift,
                              const PhaseSpec& spec);

/// One receding-horizon round: what was solved and what was applied.
struct MpcIterationRecord {
  int index = 0;
  double t_start = 0.0;  // plant time when the round began [s]
  PhaseKind phase = PhaseKind::Driving;
  SolveStatus status = SolveStatus::NumericFailure;
  bool warm_started = false;
  bool fallback = false;  // solve rejected; applied the shifted previous plan
  double objective = 0.0;
  double kkt_residual = 0.0;
  double max_violation = 0.0;
  int outer_iterations = 0;
  int inner_iterations = 0;
  PhasePlan plan;  // the plan whose inputs were applied this round
  double applied_duration = 0.0;  // [s]; 0 on an aborting round
  int clamp_events = 0;  // plant steps whose commanded input was clamped
};

/// Input actually commanded at the start of one plant step (after clamping).
struct InputRecord {
  double t = 0.0;
  ControlInput input;
  bool clamped = false;
};

/// Everything a closed-loop run produces. Plant history holds the state at
/// every plant step including t = 0; inputs and wind hold exactly one record
/// per plant step (wind only when enabled).
struct MpcLog {
  std::vector<MpcIterationRecord> iterations;
  PlantTrajectory plant;
  std::vector<InputRecord> inputs;
  std::vector<WindSample> wind;
  double switch_time = -1.0;  // driving->mooring [s]; < 0 = never switched
  bool completed = false;
  std::string abort_reason;  // non-empty iff the run ended early
  VesselState final_state;
  double final_time = 0.0;
  double terminal_position_error = 0.0;
  double terminal_heading_error = 0.0;  // wrapped to (-pi, pi]
  double terminal_velocity_error = 0.0;  // max over |du|, |dv|, |dr|
};

/// Two-phase receding-horizon docking loop:
///   1. latch the phase to Mooring once the plant origin is within the
///      switching radius of the goal position,
///   2. transcribe and solve the phase NLP from the current plant state
///      (first round cold, later rounds warm-started from the applied plan),
///   3. on a non-Optimal solve fall back to the shifted previous plan
///      (three consecutive failures abort the run),
///   4. apply the plan's spline inputs, clamped to the actuator box, to the
///      wind-disturbed underactuated plant for t_mpc (or the whole plan when
///      a mooring plan is shorter), sampling wind once per plant step,
///   5. finish when a mooring plan with t_f <= t_mpc lands the plant within
///      the mooring tolerance, or on the iteration cap.
/// Deterministic for a fixed scenario (wind is seeded).
MpcLog run_closed_loop(const ScenarioConfig& scn,
                       const MooringTolerance& tol = {});

}  // namespace flatmoor
