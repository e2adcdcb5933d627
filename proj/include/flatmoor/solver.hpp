#pragma once

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <string>

namespace flatmoor {

/// Smooth NLP with first derivatives:
///   minimize f(v)  s.t.  lower <= v <= upper,  c_E(v) = 0,  c_I(v) <= 0.
/// Callbacks fill the (dense) Jacobian only when the pointer is non-null so
/// line searches can run on the cheap value-only path. Problems are built by
/// the transcription layer; the solver treats them as black boxes.
struct NlpProblem {
  int n = 0;
  int n_eq = 0;
  int n_ineq = 0;
  Eigen::VectorXd lower, upper;  // box bounds, +-infinity allowed
  Eigen::VectorXd v_init;

  std::function<double(const Eigen::VectorXd& v, Eigen::VectorXd* grad)> cost;
  std::function<void(const Eigen::VectorXd& v, Eigen::VectorXd& c,
                     Eigen::MatrixXd* jac)>
      eq;
  std::function<void(const Eigen::VectorXd& v, Eigen::VectorXd& c,
                     Eigen::MatrixXd* jac)>
      ineq;

  // Optional multiplier warm starts (sized n_eq / n_ineq, or empty).
  Eigen::VectorXd eq_mult_init, ineq_mult_init;
};

/// Inner minimizer choice. StructuredNewton assembles curvature from first
/// derivatives only: the Gauss-Newton term rho J'J of the active constraint
/// rows plus a structured-secant BFGS estimate of the remaining curvature
/// (cost Hessian and multiplier-weighted constraint curvature); it handles
/// the stiff penalty terms of tightly banded constraints far better than a
/// limited-memory method. Lbfgs is the memory-lean fallback.
enum class InnerMethod { StructuredNewton, Lbfgs };

struct SolverSettings {
  double tol_kkt = 1e-6;   // stationarity + complementarity target
  double tol_feas = 1e-6;  // max constraint violation target
  int max_iter = 500;      // outer (multiplier/penalty) iterations
  int max_inner_iter = 200;  // quasi-Newton steps per outer iteration
  double rho_init = 10.0;
  double rho_growth = 10.0;
  double rho_max = 1e8;
  InnerMethod inner_method = InnerMethod::StructuredNewton;
  int lbfgs_memory = 10;
  int verbosity = 0;          // 0 silent, 1 outer lines, 4 inner step trace
  std::ostream* log = nullptr;  // iteration log sink when verbosity > 0
};

enum class SolveStatus { Optimal, MaxIter, Infeasible, NumericFailure };
std::string to_string(SolveStatus status);

struct SolveResult {
  Eigen::VectorXd v_opt;
  SolveStatus status = SolveStatus::NumericFailure;
  double kkt_residual = 0.0;
  double max_violation = 0.0;
  int iterations = 0;        // outer iterations performed
  int inner_iterations = 0;  // total quasi-Newton steps
  double objective = 0.0;
  Eigen::VectorXd eq_mult, ineq_mult;     // final multiplier estimates
  std::vector<double> outer_violations;   // violation after each outer round
};

/// Max-norm KKT residual at (v, multipliers): the largest of the projected
/// Lagrangian gradient, the complementarity products sigma_i * c_I_i, and
/// the constraint violation. The optional out-parameters receive the parts.
double kkt_residual(const NlpProblem& prob, const Eigen::VectorXd& v,
                    const Eigen::VectorXd& eq_mult,
                    const Eigen::VectorXd& ineq_mult,
                    double* stationarity = nullptr,
                    double* complementarity = nullptr);

class NlpSolver {
 public:
  virtual ~NlpSolver() = default;
  virtual SolveResult solve(const NlpProblem& prob,
                            const SolverSettings& settings) const = 0;
};

/// Augmented-Lagrangian method: equality terms lambda'c + rho/2 |c|^2,
/// inequalities via the squared hinge max(0, sigma + rho c)^2, multiplier
/// updates on sufficiently feasible iterates, penalty growth otherwise.
/// Inner problems are minimized by a quasi-Newton method (see InnerMethod)
/// with a projected Armijo line search honoring the box. Deterministic for
/// identical inputs.
class AugLagSolver final : public NlpSolver {
 public:
  SolveResult solve(const NlpProblem& prob,
                    const SolverSettings& settings) const override;
};

/// Solve with the built-in augmented-Lagrangian solver.
SolveResult solve(const NlpProblem& prob, const SolverSettings& settings = {});

}  // namespace flatmoor
