#include "flatmoor/solver.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace flatmoor {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMultCap = 1e10;  // multiplier safeguard

Eigen::VectorXd clamp_box(const Eigen::VectorXd& v, const Eigen::VectorXd& lo,
                          const Eigen::VectorXd& hi) {
  return v.cwiseMax(lo).cwiseMin(hi);
}

/// Augmented-Lagrangian evaluation: equality terms lambda'c + rho/2 |c|^2,
/// inequality terms (max(0, sigma + rho c)^2 - sigma^2) / (2 rho). Caches
/// the raw constraint values of the most recent call.
struct AlEval {
  const NlpProblem& prob;
  Eigen::VectorXd lambda, sigma;
  double rho = 1.0;
  bool ok = true;  // false once a callback returned a non-finite value

  Eigen::VectorXd cE, cI;  // raw constraint caches
  Eigen::VectorXd grad_f, hinge;
  Eigen::MatrixXd JE, JI;

  explicit AlEval(const NlpProblem& p) : prob(p) {}

  double value(const Eigen::VectorXd& v, Eigen::VectorXd* grad) {
    double L = prob.cost(v, grad ? &grad_f : nullptr);
    if (grad) *grad = grad_f;
    if (prob.n_eq > 0) {
      prob.eq(v, cE, grad ? &JE : nullptr);
      L += lambda.dot(cE) + 0.5 * rho * cE.squaredNorm();
      if (grad) grad->noalias() += JE.transpose() * (lambda + rho * cE);
    }
    if (prob.n_ineq > 0) {
      prob.ineq(v, cI, grad ? &JI : nullptr);
      hinge.resize(prob.n_ineq);
      double acc = 0.0;
      for (int i = 0; i < prob.n_ineq; ++i) {
        const double t = sigma(i) + rho * cI(i);
        const double tp = t > 0.0 ? t : 0.0;
        acc += tp * tp - sigma(i) * sigma(i);
        hinge(i) = tp;
      }
      L += acc / (2.0 * rho);
      if (grad) grad->noalias() += JI.transpose() * hinge;
    }
    if (!std::isfinite(L) || (grad && !grad->allFinite())) ok = false;
    return L;
  }

  /// Max violation of the cached constraint values.
  double violation() const {
    double viol = 0.0;
    if (prob.n_eq > 0) viol = cE.cwiseAbs().maxCoeff();
    if (prob.n_ineq > 0) viol = std::max(viol, std::max(0.0, cI.maxCoeff()));
    return viol;
  }

  /// Gauss-Newton curvature of the constraint terms,
  /// rho (JE'JE + JI_act'JI_act) over the active hinge rows. Only valid
  /// right after value(v, &grad) so the Jacobian and hinge caches describe
  /// the same point.
  void gauss_newton_hessian(Eigen::MatrixXd& H) const {
    H.setZero(prob.n, prob.n);
    if (prob.n_eq > 0) {
      H.selfadjointView<Eigen::Lower>().rankUpdate(JE.transpose(), rho);
    }
    if (prob.n_ineq > 0) {
      int m_act = 0;
      for (int i = 0; i < prob.n_ineq; ++i) {
        if (hinge(i) > 0.0) ++m_act;
      }
      if (m_act > 0) {
        Eigen::MatrixXd act(m_act, prob.n);
        int r = 0;
        for (int i = 0; i < prob.n_ineq; ++i) {
          if (hinge(i) > 0.0) act.row(r++) = JI.row(i);
        }
        H.selfadjointView<Eigen::Lower>().rankUpdate(act.transpose(), rho);
      }
    }
    H.triangularView<Eigen::StrictlyUpper>() = H.transpose();
  }
};

Eigen::VectorXd lbfgs_direction(
    const std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& mem,
    const Eigen::VectorXd& g) {
  if (mem.empty()) return -g;
  std::vector<double> alpha(mem.size());
  Eigen::VectorXd q = g;
  for (int i = static_cast<int>(mem.size()) - 1; i >= 0; --i) {
    const auto& [s, y] = mem[i];
    const double rho_i = 1.0 / y.dot(s);
    alpha[i] = rho_i * s.dot(q);
    q -= alpha[i] * y;
  }
  const auto& [s_b, y_b] = mem.back();
  Eigen::VectorXd r = (s_b.dot(y_b) / y_b.dot(y_b)) * q;
  for (size_t i = 0; i < mem.size(); ++i) {
    const auto& [s, y] = mem[i];
    const double rho_i = 1.0 / y.dot(s);
    r += (alpha[i] - rho_i * y.dot(r)) * s;
  }
  return -r;
}

struct InnerOutcome {
  int steps = 0;
  bool converged = false;  // projected gradient reached the inner tolerance
  bool stalled = false;    // line search could make no progress
};

/// L-BFGS with projection on the box: directions from the two-loop
/// recursion, step acceptance by the projected Armijo rule
/// L(proj(v + a d)) <= L(v) + c1 g'(proj(v + a d) - v).
InnerOutcome minimize_inner(AlEval& E, Eigen::VectorXd& v,
                            const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                            double omega, const SolverSettings& st) {
  constexpr double c1 = 1e-4;
  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> mem;

  Eigen::VectorXd g(E.prob.n), gnew;
  double fv = E.value(v, &g);
  if (!E.ok) return {};

  InnerOutcome out;
  while (out.steps < st.max_inner_iter) {
    const double pg =
        (v - clamp_box(v - g, lo, hi)).lpNorm<Eigen::Infinity>();
    if (pg <= omega) {
      out.converged = true;
      break;
    }

    Eigen::VectorXd d = lbfgs_direction(mem, g);
    bool used_mem = !mem.empty();
    if (!(d.dot(g) < 0.0)) {  // not a descent direction: restart
      mem.clear();
      d = -g;
      used_mem = false;
    }

    double alpha =
        used_mem ? 1.0 : 1.0 / std::max(1.0, g.lpNorm<Eigen::Infinity>());
    Eigen::VectorXd vt;
    double ft = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      vt = clamp_box(v + alpha * d, lo, hi);
      const double move = (vt - v).lpNorm<Eigen::Infinity>();
      if (move == 0.0) break;
      ft = E.value(vt, nullptr);
      if (!E.ok) return out;
      if (ft <= fv + c1 * g.dot(vt - v)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (used_mem) {  // retry once along steepest descent
        mem.clear();
        continue;
      }
      out.stalled = true;
      break;
    }

    // Gradient at the accepted point (also refreshes constraint caches).
    E.value(vt, &gnew);
    if (!E.ok) return out;

    const Eigen::VectorXd s = vt - v;
    const Eigen::VectorXd y = gnew - g;
    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      mem.emplace_back(s, y);
      if (static_cast<int>(mem.size()) > st.lbfgs_memory) mem.pop_front();
    }
    v = vt;
    fv = ft;
    g.swap(gnew);
    ++out.steps;
  }
  return out;
}

/// Structured quasi-Newton inner loop: curvature model
///   H = Bf (damped-BFGS estimate of the cost Hessian plus the
///       multiplier-weighted constraint curvature, persistent across outer
///       iterations) + Gauss-Newton penalty curvature + adaptive Levenberg
///       damping,
/// direction from the free variables (bounds holding the iterate with an
/// outward gradient are frozen), acceptance by the projected Armijo rule.
InnerOutcome minimize_inner_newton(AlEval& E, Eigen::MatrixXd& Bf,
                                   Eigen::VectorXd& v, const Eigen::VectorXd& lo,
                                   const Eigen::VectorXd& hi, double omega,
                                   const SolverSettings& st) {
  constexpr double c1 = 1e-4;
  const int n = E.prob.n;
  InnerOutcome out;

  Eigen::VectorXd g(n), gnew;
  double fv = E.value(v, &g);
  if (!E.ok) return out;
  Eigen::MatrixXd Hgn;
  E.gauss_newton_hessian(Hgn);

  // Secant reference for Bf: gradient of the Lagrangian at the OUTER
  // multipliers, evaluated from the caches while they describe the current
  // iterate. Differencing this -- and not the AL gradient -- keeps the
  // penalty-regime curvature rho J'J and the violation-sized hinge terms out
  // of the estimate: those belong to the Gauss-Newton block and the
  // Levenberg damping. The outer multipliers are constant within the
  // subproblem, so this reference is smooth in v; weighting by the active
  // hinge rows instead would jump by sigma_i J_i whenever a row crosses the
  // hinge, and on band constraints that churn their active set the jumps
  // masquerade as enormous curvature (observed: Bf diagonals at 1e9 and
  // Newton steps collapsing to 1e-7). Early on (multipliers zero) Bf learns
  // exactly the cost Hessian; near convergence the multipliers approach
  // their optima with complementarity zeroing the inactive rows, so Bf
  // learns the true Lagrangian curvature the Gauss-Newton block cannot see.
  const auto lagrangian_ref = [&E]() {
    Eigen::VectorXd gL = E.grad_f;
    if (E.prob.n_eq > 0) gL.noalias() += E.JE.transpose() * E.lambda;
    if (E.prob.n_ineq > 0) gL.noalias() += E.JI.transpose() * E.sigma;
    return gL;
  };
  Eigen::VectorXd gL_ref = lagrangian_ref();

  double mu = 1e-8;
  int tiny_steps = 0;
  // Quadratic-phase polish bookkeeping (see below): once the model decrease
  // of the Newton step drops below the cost's roundoff resolution, progress
  // is judged by the gradient ratio instead of the Armijo test.
  bool last_polish = false;
  double pg_prev = kInf;
  int polish_count = 0;
  Eigen::MatrixXd Htot;
  Eigen::VectorXd vt, d(n);
  std::vector<int> free_idx;
  free_idx.reserve(n);

  while (out.steps < st.max_inner_iter) {
    const double pg = (v - clamp_box(v - g, lo, hi)).lpNorm<Eigen::Infinity>();
    if (pg <= omega) {
      out.converged = true;
      break;
    }
    if (last_polish) {
      // A polish step must keep shrinking the gradient; once it stops, the
      // linear-algebra floor is reached and nothing further can be gained.
      last_polish = false;
      if (pg > 0.7 * pg_prev || polish_count > 20) {
        out.stalled = true;
        break;
      }
    }
    pg_prev = pg;

    // Variables pinned at a bound by the gradient leave the Newton system.
    free_idx.clear();
    for (int i = 0; i < n; ++i) {
      const double tol_i = 1e-12 * (1.0 + std::abs(v[i]));
      const bool at_lo = lo[i] > -kInf && v[i] <= lo[i] + tol_i && g[i] > 0.0;
      const bool at_hi = hi[i] < kInf && v[i] >= hi[i] - tol_i && g[i] < 0.0;
      if (!at_lo && !at_hi) free_idx.push_back(i);
    }
    if (free_idx.empty()) {  // every direction is blocked
      out.converged = true;
      break;
    }
    const int nf = static_cast<int>(free_idx.size());

    const double curv_scale =
        1.0 + Hgn.diagonal().maxCoeff() + Bf.diagonal().maxCoeff();
    bool accepted = false;
    double ft = 0.0;
    int halvings = 0;
    for (int escalation = 0; escalation < 6 && !accepted; ++escalation) {
      Eigen::MatrixXd Hff(nf, nf);
      Eigen::VectorXd gff(nf);
      for (int a = 0; a < nf; ++a) {
        gff[a] = g[free_idx[a]];
        for (int b = 0; b < nf; ++b) {
          Hff(a, b) = Hgn(free_idx[a], free_idx[b]) +
                      Bf(free_idx[a], free_idx[b]);
        }
        Hff(a, a) += mu * curv_scale;
      }
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(Hff);
      Eigen::VectorXd df = -ldlt.solve(gff);
      // Two passes of iterative refinement. The subproblem Hessian blends
      // penalty curvature (rho J'J, up to ~1e9) with near-flat cost
      // directions, so the raw factorization's forward error leaves the
      // direction with O(1) relative error components; refining against the
      // residual restores them at the cost of two matvec/solve pairs.
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXd rres = Hff * df + gff;
        df -= ldlt.solve(rres);
      }
      d.setZero();
      for (int a = 0; a < nf; ++a) d[free_idx[a]] = df[a];
      if (ldlt.info() != Eigen::Success || !d.allFinite() || d.dot(g) >= 0.0) {
        mu = std::max(mu * 100.0, 1e-4);
        continue;
      }
      // Quadratic-phase polish: near the minimizer of a stiff subproblem the
      // Newton step's predicted decrease (~ -g.d/2) falls below the roundoff
      // resolution of the cost, so the Armijo test cannot register the
      // improvement no matter the step size -- yet the step itself still
      // shrinks the gradient quadratically. Take the full step unguarded:
      // the bound on the model decrease caps any hidden increase at
      // roundoff. Progress is policed at the top of the loop via the
      // gradient ratio.
      if (-g.dot(d) <= 2e-12 * (1.0 + std::abs(fv))) {
        // Re-solve nearly undamped: the walk-in damping level throttles
        // exactly the flat directions the polish needs to clean. The damped
        // direction stays as the fallback if the undamped system is
        // degenerate or throws the step out of the quadratic basin.
        Eigen::MatrixXd Hp = Hff;
        Hp.diagonal().array() += (1e-12 - mu) * curv_scale;
        const Eigen::LDLT<Eigen::MatrixXd> ldlt_p(Hp);
        if (ldlt_p.info() == Eigen::Success) {
          Eigen::VectorXd dp = -ldlt_p.solve(gff);
          for (int pass = 0; pass < 2; ++pass) {
            const Eigen::VectorXd rres = Hp * dp + gff;
            dp -= ldlt_p.solve(rres);
          }
          if (dp.allFinite() &&
              dp.lpNorm<Eigen::Infinity>() <=
                  1e-3 * (1.0 + v.lpNorm<Eigen::Infinity>())) {
            for (int a = 0; a < nf; ++a) d[free_idx[a]] = dp[a];
          }
        }
        vt = clamp_box(v + d, lo, hi);
        if ((vt - v).lpNorm<Eigen::Infinity>() > 0.0) {
          ft = E.value(vt, nullptr);
          if (!E.ok) return out;
          accepted = true;
          halvings = 0;
          last_polish = true;
          ++polish_count;
          break;
        }
      }
      // Armijo backtracking, deep enough that a descent direction always
      // yields a step; the tiny relative slack absorbs roundoff when the
      // penalty terms dwarf the per-step decrease.
      double alpha = 1.0;
      halvings = 0;
      for (int ls = 0; ls < 40; ++ls, ++halvings) {
        vt = clamp_box(v + alpha * d, lo, hi);
        if ((vt - v).lpNorm<Eigen::Infinity>() == 0.0) break;
        ft = E.value(vt, nullptr);
        if (!E.ok) return out;
        if (ft <= fv + c1 * g.dot(vt - v) + 1e-14 * std::abs(fv)) {
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) mu = std::max(mu * 100.0, 1e-4);
    }
    if (!accepted) {
      out.stalled = true;
      break;
    }
    // Levenberg damping feedback. Any backtracking means the full model step
    // overshot the region where the quadratic model is valid (active hinge
    // rows flipping mid-step are the usual cause), so the damping grows with
    // the number of halvings. A full step instead adapts on the classical
    // ratio of actual to model-predicted decrease.
    if (last_polish) {
      // Sub-roundoff decrease: the actual/predicted ratio is meaningless.
    } else if (halvings > 0) {
      mu = std::min(mu * std::pow(2.0, halvings), 1e6);
    } else {
      const Eigen::VectorXd step = vt - v;
      const double pred =
          -g.dot(step) - 0.5 * step.dot(Hgn * step) -
          0.5 * step.dot(Bf.selfadjointView<Eigen::Lower>() * step) -
          0.5 * mu * curv_scale * step.squaredNorm();
      const double ratio = pred > 0.0 ? (fv - ft) / pred : -1.0;
      if (ratio > 0.75) {
        mu = std::max(mu * 0.25, 1e-12);
      } else if (ratio < 0.25) {
        mu = std::min(mu * 4.0, 1e6);
      }
    }

    E.value(vt, &gnew);  // refreshes all caches at the accepted point
    if (!E.ok) return out;
    E.gauss_newton_hessian(Hgn);
    const Eigen::VectorXd gL_new = lagrangian_ref();

    // Cautious structured update of Bf: only steps above the noise floor
    // with genuinely positive curvature teach the estimate, otherwise skip
    // -- damping a junk secant would feed the estimate's own roundoff back
    // into itself and inflate it without bound.
    const Eigen::VectorXd s = vt - v;
    const Eigen::VectorXd ytil = gL_new - gL_ref;
    const double sy = s.dot(ytil);
    if (s.lpNorm<Eigen::Infinity>() >
            1e-8 * (1.0 + vt.lpNorm<Eigen::Infinity>()) &&
        sy > 1e-8 * s.norm() * ytil.norm()) {
      const Eigen::VectorXd Bs = Bf.selfadjointView<Eigen::Lower>() * s;
      const double sBs = s.dot(Bs);
      if (sBs > 1e-16) {
        Bf.selfadjointView<Eigen::Lower>().rankUpdate(ytil, 1.0 / sy);
        Bf.selfadjointView<Eigen::Lower>().rankUpdate(Bs, -1.0 / sBs);
        Bf.triangularView<Eigen::StrictlyUpper>() = Bf.transpose();
      }
    }
    gL_ref = gL_new;
    v = vt;
    fv = ft;
    g.swap(gnew);
    ++out.steps;
    // Consecutive microscopic accepted steps mean the computed direction has
    // collapsed below the resolution of the Armijo slack: the subproblem is
    // making no progress at this conditioning, so report a stall instead of
    // burning the remaining budget on no-ops. Polish steps are exempt: they
    // are tiny by design and policed by the gradient ratio instead.
    if (!last_polish &&
        s.lpNorm<Eigen::Infinity>() <=
            1e-11 * (1.0 + v.lpNorm<Eigen::Infinity>())) {
      if (++tiny_steps >= 3) {
        out.stalled = true;
        break;
      }
    } else {
      tiny_steps = 0;
    }
    if (st.verbosity >= 4 && st.log) {
      char line[240];
      std::snprintf(line, sizeof(line),
                    "    in %3d  f % .12e  pg %.3e  mu %.1e  hv %d  nf %d"
                    "  |d| %.1e  dHgn %.1e  dBf %.1e",
                    out.steps, fv, pg, mu, halvings, nf,
                    s.lpNorm<Eigen::Infinity>(), Hgn.diagonal().maxCoeff(),
                    Bf.diagonal().maxCoeff());
      *st.log << line << '\n';
    }
  }
  return out;
}

void log_outer(const SolverSettings& st, int outer, double obj, double viol,
               double rho, int inner_steps) {
  if (st.verbosity >= 1 && st.log) {
    char line[160];
    std::snprintf(line, sizeof(line),
                  "outer %3d  obj % .6e  viol %.3e  rho %.1e  inner %d", outer,
                  obj, viol, rho, inner_steps);
    *st.log << line << '\n';
  }
}

}  // namespace

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::MaxIter: return "MaxIter";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::NumericFailure: return "NumericFailure";
  }
  return "Unknown";
}

double kkt_residual(const NlpProblem& prob, const Eigen::VectorXd& v,
                    const Eigen::VectorXd& eq_mult,
                    const Eigen::VectorXd& ineq_mult, double* stationarity,
                    double* complementarity) {
  if (v.size() != prob.n) {
    throw std::invalid_argument("kkt_residual: decision vector size mismatch");
  }
  Eigen::VectorXd g;
  prob.cost(v, &g);

  double feas = 0.0, comp = 0.0;
  if (prob.n_eq > 0) {
    Eigen::VectorXd c;
    Eigen::MatrixXd J;
    prob.eq(v, c, &J);
    const Eigen::VectorXd lam =
        eq_mult.size() ? eq_mult : Eigen::VectorXd::Zero(prob.n_eq);
    if (lam.size() != prob.n_eq) {
      throw std::invalid_argument("kkt_residual: equality multiplier size mismatch");
    }
    g.noalias() += J.transpose() * lam;
    feas = c.cwiseAbs().maxCoeff();
  }
  if (prob.n_ineq > 0) {
    Eigen::VectorXd c;
    Eigen::MatrixXd J;
    prob.ineq(v, c, &J);
    const Eigen::VectorXd sig =
        ineq_mult.size() ? ineq_mult : Eigen::VectorXd::Zero(prob.n_ineq);
    if (sig.size() != prob.n_ineq) {
      throw std::invalid_argument("kkt_residual: inequality multiplier size mismatch");
    }
    g.noalias() += J.transpose() * sig;
    feas = std::max(feas, std::max(0.0, c.maxCoeff()));
    comp = (sig.array() * c.array()).abs().maxCoeff();
  }

  const Eigen::VectorXd lo =
      prob.lower.size() ? prob.lower : Eigen::VectorXd::Constant(prob.n, -kInf);
  const Eigen::VectorXd hi =
      prob.upper.size() ? prob.upper : Eigen::VectorXd::Constant(prob.n, kInf);
  const double stat = (v - clamp_box(v - g, lo, hi)).lpNorm<Eigen::Infinity>();
  if (stationarity) *stationarity = stat;
  if (complementarity) *complementarity = comp;
  return std::max({stat, comp, feas});
}

namespace {

/// Degenerate-active-set certificate. When at least as many constraint rows
/// sit exactly on their boundary as there are decision variables, the KKT
/// multipliers are non-unique: the first-order multiplier iteration then
/// chatters between sign patterns on roundoff-scale steps and the carried
/// multipliers never settle, even though the iterate itself is optimal. The
/// standard remedy is to exhibit one valid certificate directly: refit the
/// multipliers by least squares over the identified active set, iteratively
/// dropping rows whose fitted multiplier comes out negative, and accept only
/// if the refitted pair passes the same projected-KKT test the solver
/// reports. On success the refitted multipliers and residual replace the
/// carried ones in `res`.
bool refit_certificate(const NlpProblem& prob, const Eigen::VectorXd& v,
                       const SolverSettings& st, SolveResult& res) {
  if (prob.n_eq + prob.n_ineq == 0) return false;

  Eigen::VectorXd g;
  prob.cost(v, &g);
  if (!g.allFinite()) return false;

  Eigen::VectorXd cE, cI;
  Eigen::MatrixXd JE, JI;
  if (prob.n_eq > 0) {
    prob.eq(v, cE, &JE);
    if (!JE.allFinite()) return false;
  }
  if (prob.n_ineq > 0) {
    prob.ineq(v, cI, &JI);
    if (!JI.allFinite()) return false;
  }

  // Inequality rows close enough to their boundary that a positive
  // multiplier is compatible with the complementarity tolerance. The final
  // KKT check polices any misidentification.
  std::vector<int> act;
  for (int i = 0; i < prob.n_ineq; ++i) {
    if (cI(i) >= -1e-8) act.push_back(i);
  }

  for (int round = 0;; ++round) {
    const int m_act = static_cast<int>(act.size());
    if (prob.n_eq + m_act == 0) return false;
    Eigen::MatrixXd A(prob.n, prob.n_eq + m_act);
    if (prob.n_eq > 0) A.leftCols(prob.n_eq) = JE.transpose();
    for (int k = 0; k < m_act; ++k) {
      A.col(prob.n_eq + k) = JI.row(act[k]).transpose();
    }

    const Eigen::VectorXd y = A.colPivHouseholderQr().solve(-g);
    if (!y.allFinite()) return false;

    // Drop rows fitted with a meaningfully negative multiplier; tolerate
    // roundoff-scale negatives (clamped below) so the loop cannot cycle.
    std::vector<int> keep;
    keep.reserve(act.size());
    const double drop_tol = 1e-10 * (1.0 + y.cwiseAbs().maxCoeff());
    for (int k = 0; k < m_act; ++k) {
      if (y(prob.n_eq + k) >= -drop_tol) keep.push_back(act[k]);
    }

    if (static_cast<int>(keep.size()) == m_act || round >= 9) {
      Eigen::VectorXd lam =
          prob.n_eq > 0 ? y.head(prob.n_eq).eval() : Eigen::VectorXd();
      Eigen::VectorXd sig = Eigen::VectorXd::Zero(prob.n_ineq);
      for (int k = 0; k < m_act; ++k) {
        sig(act[k]) = std::max(y(prob.n_eq + k), 0.0);
      }
      const double kkt = kkt_residual(prob, v, lam, sig);
      if (kkt > st.tol_kkt) return false;
      res.kkt_residual = kkt;
      res.eq_mult = std::move(lam);
      res.ineq_mult = std::move(sig);
      return true;
    }
    act.swap(keep);
  }
}

}  // namespace

SolveResult AugLagSolver::solve(const NlpProblem& prob,
                                const SolverSettings& st) const {
  if (prob.n <= 0) throw std::invalid_argument("solve: empty problem");
  if (!prob.cost) throw std::invalid_argument("solve: missing cost callback");
  if (prob.n_eq > 0 && !prob.eq) {
    throw std::invalid_argument("solve: missing equality callback");
  }
  if (prob.n_ineq > 0 && !prob.ineq) {
    throw std::invalid_argument("solve: missing inequality callback");
  }

  const Eigen::VectorXd lo =
      prob.lower.size() ? prob.lower : Eigen::VectorXd::Constant(prob.n, -kInf);
  const Eigen::VectorXd hi =
      prob.upper.size() ? prob.upper : Eigen::VectorXd::Constant(prob.n, kInf);
  if (lo.size() != prob.n || hi.size() != prob.n || (lo.array() > hi.array()).any()) {
    throw std::invalid_argument("solve: inconsistent box bounds");
  }

  AlEval E(prob);
  E.lambda = prob.eq_mult_init.size() ? prob.eq_mult_init
                                      : Eigen::VectorXd::Zero(prob.n_eq);
  E.sigma = prob.ineq_mult_init.size()
                ? prob.ineq_mult_init.cwiseMax(0.0).eval()
                : Eigen::VectorXd::Zero(prob.n_ineq);
  if (E.lambda.size() != prob.n_eq || E.sigma.size() != prob.n_ineq) {
    throw std::invalid_argument("solve: multiplier warm start size mismatch");
  }
  E.rho = st.rho_init;

  Eigen::VectorXd v = clamp_box(
      prob.v_init.size() ? prob.v_init : Eigen::VectorXd::Zero(prob.n), lo, hi);

  const bool constrained = prob.n_eq + prob.n_ineq > 0;
  const double omega_floor = 1e-2 * st.tol_kkt;
  double omega = constrained ? 1.0 / E.rho : 0.5 * st.tol_kkt;
  double eta = std::pow(E.rho, -0.1);

  SolveResult res;
  res.v_opt = v;
  double best_viol = kInf;
  int stall = 0;
  int cont_rounds = 0;
  // Penalty de-escalation ratchet: each step down must keep paying off in
  // stationarity, otherwise lowering the penalty only destabilizes the
  // feasibility it was meant to polish.
  double stat_at_deesc = kInf;
  bool deesc_on = true;
  // Cost-curvature estimate for the structured-Newton inner loop; the cost
  // does not change across outer iterations, so the estimate persists.
  Eigen::MatrixXd Bf = Eigen::MatrixXd::Identity(prob.n, prob.n);

  for (int outer = 1; outer <= st.max_iter; ++outer) {
    const InnerOutcome inner =
        st.inner_method == InnerMethod::StructuredNewton
            ? minimize_inner_newton(E, Bf, v, lo, hi,
                                    std::max(omega, omega_floor), st)
            : minimize_inner(E, v, lo, hi, std::max(omega, omega_floor), st);
    res.inner_iterations += inner.steps;
    res.iterations = outer;

    // Refresh caches at the accepted iterate (a rejected line-search trial
    // may have been the last evaluation).
    (void)E.value(v, nullptr);
    if (!E.ok) {
      res.status = SolveStatus::NumericFailure;
      res.v_opt = v;
      res.eq_mult = E.lambda;
      res.ineq_mult = E.sigma;
      return res;
    }
    const double viol = E.violation();
    res.v_opt = v;
    res.objective = prob.cost(v, nullptr);
    log_outer(st, outer, res.objective, viol, E.rho, inner.steps);

    // The step budget ran out before the subproblem tolerance was met: the
    // iterate is mid-descent, so acting on its violation (multiplier update
    // or penalty growth) would respond to noise. Resume the same subproblem —
    // but not forever: on problems whose subproblems outlast a few budgets,
    // a first-order multiplier update at a near-feasible iterate still makes
    // progress, while endless resumption would freeze the multipliers.
    if (constrained && !inner.converged && !inner.stalled &&
        ++cont_rounds <= 2) {
      continue;
    }
    const bool subproblem_converged = inner.converged || !constrained;
    cont_rounds = 0;

    res.outer_violations.push_back(viol);

    if (viol <= std::max(eta, st.tol_feas)) {
      // First-order multiplier update on a sufficiently feasible iterate.
      if (prob.n_eq > 0) {
        E.lambda = (E.lambda + E.rho * E.cE).cwiseMax(-kMultCap).cwiseMin(kMultCap);
      }
      if (prob.n_ineq > 0) {
        E.sigma = (E.sigma + E.rho * E.cI).cwiseMax(0.0).cwiseMin(kMultCap);
      }
      double stat = 0.0, comp = 0.0;
      const double kkt = kkt_residual(prob, v, E.lambda, E.sigma, &stat, &comp);
      res.kkt_residual = kkt;
      res.max_violation = viol;
      res.eq_mult = E.lambda;
      res.ineq_mult = E.sigma;
      if (st.verbosity >= 2 && st.log) {
        char line[160];
        std::snprintf(line, sizeof(line),
                      "  accept stat %.3e comp %.3e omega %.1e eta %.1e conv %d",
                      stat, comp, omega, eta, subproblem_converged ? 1 : 0);
        *st.log << line << '\n';
      }
      if (kkt <= st.tol_kkt && viol <= st.tol_feas) {
        res.status = SolveStatus::Optimal;
        return res;
      }
      // Near-miss stationarity at a feasible iterate: with a degenerate
      // active set the carried multipliers may chatter while a valid
      // certificate exists. Try to exhibit one before iterating further.
      if (viol <= st.tol_feas && kkt <= 1e3 * st.tol_kkt &&
          refit_certificate(prob, v, st, res)) {
        res.status = SolveStatus::Optimal;
        return res;
      }
      // Fixed-factor tightening: dividing by rho (the textbook schedule)
      // collapses the targets several orders per round once the penalty is
      // large, forcing pointless penalty growth before the multiplier
      // iteration has had a chance to converge. The stationarity target only
      // tightens when the inner loop met the current one; the feasibility
      // target tightens on every accepted round -- this branch fired because
      // the violation met it, and a sticky target would let rounds whose
      // multiplier updates are absorbing inner truncation noise cycle here
      // forever instead of escalating to penalty growth.
      if (subproblem_converged) {
        omega = std::max(0.1 * omega, omega_floor);
      }
      eta = std::max(0.1 * eta, 0.1 * st.tol_feas);
      if (kkt > st.tol_kkt && viol <= 1e-2 * st.tol_feas &&
          E.rho > st.rho_init && deesc_on) {
        // Feasibility converged long ago but stationarity is limited by the
        // penalty-dominated conditioning of the subproblem: relaxing the
        // penalty recovers the accuracy of the Newton directions -- as long
        // as each step down keeps improving stationarity.
        if (stat < 0.7 * stat_at_deesc) {
          stat_at_deesc = stat;
          E.rho = std::max(E.rho / st.rho_growth, st.rho_init);
        } else {
          deesc_on = false;
        }
      }
    } else if (viol > 0.5 * best_viol) {
      // Feasibility is stagnating at this penalty level: grow it.
      if (E.rho >= st.rho_max) {
        // Penalty exhausted: declare infeasibility once the violation stops
        // improving meaningfully.
        if (viol > 0.9 * best_viol) {
          if (++stall >= 3) {
            res.status = SolveStatus::Infeasible;
            res.kkt_residual = kkt_residual(prob, v, E.lambda, E.sigma);
            res.max_violation = viol;
            res.eq_mult = E.lambda;
            res.ineq_mult = E.sigma;
            return res;
          }
        } else {
          stall = 0;
        }
      }
      E.rho = std::min(E.rho * st.rho_growth, st.rho_max);
      omega = std::max(1.0 / E.rho, omega_floor);
      eta = std::max(std::pow(E.rho, -0.1), 0.1 * st.tol_feas);
    } else {
      // Violation still above the target but shrinking fast enough: keep the
      // penalty and pull with refreshed multipliers instead.
      if (prob.n_eq > 0) {
        E.lambda = (E.lambda + E.rho * E.cE).cwiseMax(-kMultCap).cwiseMin(kMultCap);
      }
      if (prob.n_ineq > 0) {
        E.sigma = (E.sigma + E.rho * E.cI).cwiseMax(0.0).cwiseMin(kMultCap);
      }
      if (subproblem_converged) omega = std::max(omega / 2.0, omega_floor);
    }
    best_viol = std::min(best_viol, viol);

    if (!constrained && inner.stalled) break;  // nothing further to try
  }

  res.status = SolveStatus::MaxIter;
  res.kkt_residual = kkt_residual(prob, v, E.lambda, E.sigma);
  res.max_violation = res.outer_violations.empty() ? kInf
                                                   : res.outer_violations.back();
  res.eq_mult = E.lambda;
  res.ineq_mult = E.sigma;
  // Last chance before reporting failure: the budget may have run out while
  // the multiplier iteration chattered around a degenerate optimum.
  const double viol_now = E.violation();
  if (viol_now <= st.tol_feas && res.kkt_residual <= 1e3 * st.tol_kkt &&
      refit_certificate(prob, v, st, res)) {
    res.status = SolveStatus::Optimal;
    res.max_violation = viol_now;
  }
  return res;
}

SolveResult solve(const NlpProblem& prob, const SolverSettings& settings) {
  return AugLagSolver{}.solve(prob, settings);
}

}  // namespace flatmoor
