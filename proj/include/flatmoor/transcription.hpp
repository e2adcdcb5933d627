#pragma once

#include "flatmoor/bspline.hpp"
#include "flatmoor/flatness.hpp"
#include "flatmoor/obstacles.hpp"
#include "flatmoor/scenario.hpp"
#include "flatmoor/solver.hpp"
#include "flatmoor/vessel.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace flatmoor {

/// Driving: fixed horizon, point-mass obstacle constraints, cost = squared
/// terminal distance of the flat output to the goal pose.
/// Mooring: free final time (appended to the decision vector), hull-corner
/// obstacle constraints, cost = final time.
enum class PhaseKind { Driving, Mooring };

/// Constraint-evaluation kernel selection. Parallel splits the collocation
/// points across OpenMP threads; Serial is the reference implementation.
/// Both produce bitwise-identical results because every point writes a
/// disjoint row block.
enum class EvalMode { Serial, Parallel };

/// Parallel when built with OpenMP, Serial otherwise.
EvalMode default_eval_mode();

using CtrlMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3>;

/// Everything one phase's optimal-control problem needs.
struct PhaseSpec {
  PhaseKind kind = PhaseKind::Driving;
  VesselState s0;  // state at the start of the plan
  VesselState xf;  // goal pose (terminal constraint for mooring)
  double t_hor = 15.0;  // driving horizon [s]
  double tf_min = 1.0;  // mooring final-time box [s]
  double tf_max = 60.0;
  double u_max = 0.38;  // speed estimate for the cold-start duration
  int N = 199;          // collocation segments (N+1 points)
  int n_ctrl = 21;      // control points per flat output
  int degree = 4;
  double epsilon = 1e-3;  // sway-force band [N]
  ObstacleSet obstacles;
  // Collision-row relaxation: rows become 1 - relax - f <= 0, shrinking the
  // exclusion region to the f = 1 - relax level set (linear scale
  // sqrt(1-relax) for the super-ellipses). 0 is the exact constraint.
  // Continuation ladders solve a relaxed problem first and feed the result
  // forward; the level sets of one fixed f have gentler gradients than
  // geometrically shrunk obstacles, whose sharpness grows as their size
  // shrinks.
  double obstacle_relax = 0.0;
  VesselParams params = VesselParams::model_ship();

  static PhaseSpec driving(const ScenarioConfig& scn, const VesselState& s0);
  static PhaseSpec mooring(const ScenarioConfig& scn, const VesselState& s0);
};

/// Decision vector: the three outputs' control points stacked output-major
/// (entry index = output * n_ctrl + point), followed by t_f when present.
struct DecisionLayout {
  int n_ctrl = 0;
  bool has_tf = false;

  int size() const { return 3 * n_ctrl + (has_tf ? 1 : 0); }
  int index(int output, int point) const { return output * n_ctrl + point; }
  int tf_index() const { return 3 * n_ctrl; }

  Eigen::VectorXd pack(const CtrlMatrix& ctrl, double tf) const;
  CtrlMatrix unpack_ctrl(const Eigen::VectorXd& v) const;
};

/// Primal (and optionally dual) starting point for one phase solve.
struct TranscriptionGuess {
  CtrlMatrix ctrl;                     // n_ctrl x 3
  double tf = 0.0;                     // mooring duration guess [s]
  Eigen::VectorXd eq_mult, ineq_mult;  // empty => start from zero multipliers
};

/// Driving: every control point at the current pose (a hover at s0).
/// Mooring: control points on the straight line from the current pose to the
/// goal pose, duration = distance over half the design speed.
TranscriptionGuess cold_start(const PhaseSpec& spec);

/// A phase transcribed to a box/equality/inequality NLP:
///   driving: n = 3 n_ctrl,     6 equalities,  (q+6)(N+1) inequalities
///   mooring: n = 3 n_ctrl + 1, 12 equalities, (4q+6)(N+1) inequalities
/// The spline basis is evaluated once at the collocation parameters; the
/// callbacks only recombine those rows with the decision vector.
struct TranscribedNlp {
  NlpProblem nlp;
  DecisionLayout layout;
  KnotVector knots;  // domain [0, t_hor] (driving) or [0, 1] (mooring)
  std::vector<double> times;  // collocation parameters on the knot domain
  std::vector<std::string> warnings;  // e.g. start pose already in collision
};

TranscribedNlp transcribe(const PhaseSpec& spec, const TranscriptionGuess& guess,
                          EvalMode mode = default_eval_mode());

/// Hull corner offsets in the body frame, counterclockwise from
/// fore-starboard: (L/2, W/2), (L/2, -W/2), (-L/2, -W/2), (-L/2, W/2).
std::vector<Eigen::Vector2d> hull_corner_offsets(const VesselParams& p);

/// Corner positions in world coordinates for a pose (x, y, psi).
std::vector<Eigen::Vector2d> hull_corners(const VesselState& s,
                                          const VesselParams& p);

/// A planned trajectory in physical time t in [0, duration()]. Driving plans
/// evaluate their splines directly; mooring plans evaluate at sigma = t/t_f
/// and scale derivatives by the chain rule.
struct PhasePlan {
  PhaseKind kind = PhaseKind::Driving;
  KnotVector knots;
  CtrlMatrix ctrl;
  double tf = 0.0;  // physical duration [s]

  double duration() const { return tf; }
  FlatPoint flat_at(double t) const;
  VesselState state_at(double t) const;
  FlatInputs inputs_at(double t, const VesselParams& p) const;
};

/// Interpret a decision vector on a transcription's knots as a plan.
PhasePlan plan_from_decision(const PhaseSpec& spec, const TranscribedNlp& tn,
                             const Eigen::VectorXd& v);

}  // namespace flatmoor
