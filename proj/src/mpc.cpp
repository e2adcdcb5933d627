#include "flatmoor/mpc.hpp"

#include "flatmoor/bspline.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace flatmoor {

namespace {

double wrap_angle(double a) { return std::remainder(a, 2.0 * M_PI); }

struct ClampedInput {
  ControlInput input;
  bool engaged = false;
};

ClampedInput clamp_input(const FlatInputs& raw, const VesselParams& p) {
  ClampedInput c;
  c.input.tau_u = std::clamp(raw.theta_tau_u, p.tau_u_min, p.tau_u_max);
  c.input.tau_r = std::clamp(raw.theta_tau_r, p.tau_r_min, p.tau_r_max);
  c.engaged = c.input.tau_u != raw.theta_tau_u || c.input.tau_r != raw.theta_tau_r;
  return c;
}

}  // namespace

double switching_radius(double t_hor, double u_max, double v_max) {
  return t_hor * std::hypot(u_max, v_max);
}

TranscriptionGuess warm_start(const PhasePlan& prev, double shift,
                              const PhaseSpec& spec) {
  const bool moor = spec.kind == PhaseKind::Mooring;
  const double tf_new =
      moor ? std::max(prev.tf - shift, spec.tf_min) : spec.t_hor;
  const double domain = moor ? 1.0 : spec.t_hor;
  const KnotVector kv =
      KnotVector::clamped_uniform(spec.degree, spec.n_ctrl, domain);

  const int m = std::max(4 * spec.n_ctrl, spec.N + 1);
  std::vector<double> params(m);
  Eigen::MatrixXd targets(m, 3);
  for (int i = 0; i < m; ++i) {
    const double s01 = static_cast<double>(i) / (m - 1);
    params[i] = i == m - 1 ? domain : domain * s01;
    const double t_prev = std::min(shift + s01 * tf_new, prev.tf);
    targets.row(i) = prev.flat_at(t_prev).z.transpose();
  }

  TranscriptionGuess g;
  g.tf = tf_new;
  const Eigen::MatrixXd B = basis_matrix(kv, params, 0);
  g.ctrl = B.colPivHouseholderQr().solve(targets);
  if (!g.ctrl.allFinite()) return cold_start(spec);
  return g;
}

MpcLog run_closed_loop(const ScenarioConfig& scn, const MooringTolerance& tol) {
  {
    const auto issues = scn.validate();
    if (!issues.empty()) {
      throw std::invalid_argument("invalid scenario: " + issues.front());
    }
  }

  MpcLog log;
  VesselState s = scn.x0;
  double t = 0.0;
  log.plant.time.push_back(0.0);
  log.plant.states.push_back(s);

  const double R_s = scn.switching_radius();
  const double h = scn.plant_step;
  PhaseKind phase = PhaseKind::Driving;
  bool have_prev = false;
  PhasePlan prev_plan;
  double last_applied = scn.t_mpc;
  int consecutive_failures = 0;
  WindGenerator wind_gen(scn.wind);

  const auto finish = [&](const char* reason) {
    log.abort_reason = reason ? reason : "";
    log.final_state = s;
    log.final_time = t;
    log.terminal_position_error = std::hypot(s.x - scn.xf.x, s.y - scn.xf.y);
    log.terminal_heading_error = std::abs(wrap_angle(s.psi - scn.xf.psi));
    log.terminal_velocity_error =
        std::max({std::abs(s.u - scn.xf.u), std::abs(s.v - scn.xf.v),
                  std::abs(s.r - scn.xf.r)});
    return log;
  };

  try {
    while (true) {
      if (static_cast<int>(log.iterations.size()) >= scn.max_mpc_iterations) {
        return finish("mpc iteration cap reached");
      }
      if (phase == PhaseKind::Driving &&
          std::hypot(s.x - scn.xf.x, s.y - scn.xf.y) <= R_s) {
        phase = PhaseKind::Mooring;  // latched: never leaves mooring
        log.switch_time = t;
      }
      const bool moor = phase == PhaseKind::Mooring;

      MpcIterationRecord rec;
      rec.index = static_cast<int>(log.iterations.size());
      rec.t_start = t;
      rec.phase = phase;

      const PhaseSpec spec = moor ? PhaseSpec::mooring(scn, s)
                                  : PhaseSpec::driving(scn, s);
      rec.warm_started = have_prev;
      const TranscriptionGuess guess =
          have_prev ? warm_start(prev_plan, last_applied, spec)
                    : cold_start(spec);
      const TranscribedNlp tn = transcribe(spec, guess);
      const SolveResult res = solve(tn.nlp, scn.solver);

      rec.status = res.status;
      rec.objective = res.objective;
      rec.kkt_residual = res.kkt_residual;
      rec.max_violation = res.max_violation;
      rec.outer_iterations = res.iterations;
      rec.inner_iterations = res.inner_iterations;

      if (res.status == SolveStatus::Optimal) {
        consecutive_failures = 0;
        rec.plan = plan_from_decision(spec, tn, res.v_opt);
      } else {
        ++consecutive_failures;
        if (consecutive_failures >= 3) {
          log.iterations.push_back(std::move(rec));
          return finish("three consecutive solver failures");
        }
        if (!have_prev) {
          log.iterations.push_back(std::move(rec));
          return finish("initial solve failed with no fallback plan");
        }
        rec.fallback = true;  // apply the shifted previous plan instead
        rec.plan = PhasePlan{spec.kind, tn.knots, guess.ctrl,
                             moor ? guess.tf : spec.t_hor};
      }

      const PhasePlan& plan = rec.plan;
      const bool final_candidate = moor && plan.tf <= scn.t_mpc + 1e-6;
      const double seg = final_candidate ? std::min(plan.tf, scn.t_mpc)
                                         : scn.t_mpc;
      const int n_steps = std::max<int>(1, std::llround(seg / h));

      for (int k = 0; k < n_steps; ++k) {
        const double t_loc = k * h;
        DisturbanceForce dist;
        if (scn.wind_enabled) {
          const WindSample ws = wind_gen.step(h);
          dist = wind_force(ws, s, scn.wind);
          log.wind.push_back(ws);
        }
        const auto command = [&](double t_q) {
          const double te = std::clamp(t_loc + t_q, 0.0, plan.tf);
          return clamp_input(plan.inputs_at(te, scn.params), scn.params);
        };
        const ClampedInput at_start = command(0.0);
        log.inputs.push_back({t + t_loc, at_start.input, at_start.engaged});
        if (at_start.engaged) ++rec.clamp_events;

        const PlantTrajectory step = integrate_rk4(
            s,
            [&](double t_q) {
              return std::make_pair(command(t_q).input, dist);
            },
            scn.params, h, h);
        s = step.states.back();
        log.plant.time.push_back(t + (k + 1) * h);
        log.plant.states.push_back(s);
      }

      rec.applied_duration = n_steps * h;
      t += rec.applied_duration;
      last_applied = rec.applied_duration;
      prev_plan = plan;
      have_prev = true;
      const bool solved = res.status == SolveStatus::Optimal;
      log.iterations.push_back(std::move(rec));

      if (final_candidate && solved) {
        const double pos_err = std::hypot(s.x - scn.xf.x, s.y - scn.xf.y);
        const double psi_err = std::abs(wrap_angle(s.psi - scn.xf.psi));
        const double vel_err =
            std::max({std::abs(s.u - scn.xf.u), std::abs(s.v - scn.xf.v),
                      std::abs(s.r - scn.xf.r)});
        if (pos_err <= tol.position && psi_err <= tol.heading &&
            vel_err <= tol.velocity) {
          log.completed = true;
          return finish(nullptr);
        }
      }
    }
  } catch (const std::exception& e) {
    return finish(e.what());
  }
}

}  // namespace flatmoor
