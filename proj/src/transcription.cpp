#include "flatmoor/transcription.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

namespace flatmoor {

EvalMode default_eval_mode() {
#ifdef FLATMOOR_HAVE_OPENMP
  return EvalMode::Parallel;
#else
  return EvalMode::Serial;
#endif
}

PhaseSpec PhaseSpec::driving(const ScenarioConfig& scn, const VesselState& s0) {
  PhaseSpec spec;
  spec.kind = PhaseKind::Driving;
  spec.s0 = s0;
  spec.xf = scn.xf;
  spec.t_hor = scn.t_hor;
  spec.tf_min = scn.spline.tf_min;
  spec.tf_max = scn.spline.tf_max;
  spec.u_max = scn.u_max;
  spec.N = scn.N;
  spec.n_ctrl = scn.spline.n_ctrl;
  spec.degree = scn.spline.degree;
  spec.epsilon = scn.epsilon;
  spec.obstacles = scn.obstacles;
  spec.params = scn.params;
  return spec;
}

PhaseSpec PhaseSpec::mooring(const ScenarioConfig& scn, const VesselState& s0) {
  PhaseSpec spec = driving(scn, s0);
  spec.kind = PhaseKind::Mooring;
  return spec;
}

Eigen::VectorXd DecisionLayout::pack(const CtrlMatrix& ctrl, double tf) const {
  if (ctrl.rows() != n_ctrl) {
    throw std::invalid_argument("pack: control-point count mismatch");
  }
  Eigen::VectorXd v(size());
  for (int j = 0; j < 3; ++j) v.segment(j * n_ctrl, n_ctrl) = ctrl.col(j);
  if (has_tf) v[tf_index()] = tf;
  return v;
}

CtrlMatrix DecisionLayout::unpack_ctrl(const Eigen::VectorXd& v) const {
  if (v.size() != size()) {
    throw std::invalid_argument("unpack_ctrl: decision-vector size mismatch");
  }
  CtrlMatrix ctrl(n_ctrl, 3);
  for (int j = 0; j < 3; ++j) ctrl.col(j) = v.segment(j * n_ctrl, n_ctrl);
  return ctrl;
}

TranscriptionGuess cold_start(const PhaseSpec& spec) {
  TranscriptionGuess g;
  g.ctrl.resize(spec.n_ctrl, 3);
  const Eigen::Vector3d z0(spec.s0.x, spec.s0.y, spec.s0.psi);
  if (spec.kind == PhaseKind::Driving) {
    g.ctrl = z0.transpose().replicate(spec.n_ctrl, 1);
    g.tf = spec.t_hor;
    return g;
  }
  const Eigen::Vector3d zf(spec.xf.x, spec.xf.y, spec.xf.psi);
  for (int i = 0; i < spec.n_ctrl; ++i) {
    const double a = spec.n_ctrl > 1
                         ? static_cast<double>(i) / (spec.n_ctrl - 1)
                         : 0.0;
    g.ctrl.row(i) = ((1.0 - a) * z0 + a * zf).transpose();
  }
  const double dist = std::hypot(zf.x() - z0.x(), zf.y() - z0.y());
  const double speed = std::max(0.5 * spec.u_max, 0.01);
  g.tf = std::clamp(dist / speed, spec.tf_min, spec.tf_max);
  return g;
}

std::vector<Eigen::Vector2d> hull_corner_offsets(const VesselParams& p) {
  const double a = p.Ls / 2.0, b = p.Ws / 2.0;
  return {{a, b}, {a, -b}, {-a, -b}, {-a, b}};
}

std::vector<Eigen::Vector2d> hull_corners(const VesselState& s,
                                          const VesselParams& p) {
  const double c = std::cos(s.psi), sn = std::sin(s.psi);
  std::vector<Eigen::Vector2d> out;
  out.reserve(4);
  for (const Eigen::Vector2d& off : hull_corner_offsets(p)) {
    out.emplace_back(s.x + c * off.x() - sn * off.y(),
                     s.y + sn * off.x() + c * off.y());
  }
  return out;
}

namespace {

/// Shared state captured by the NLP callbacks: the basis is sampled once at
/// the collocation parameters, so evaluations only recombine rows.
struct EvalContext {
  PhaseSpec spec;
  DecisionLayout layout;
  KnotVector kv;
  std::vector<double> times;
  Eigen::MatrixXd B0, B1, B2;  // (N+1) x n_ctrl basis samples, k-th derivative
  std::vector<Eigen::Vector2d> corners;  // empty => constrain the origin only
  int rows_per_point = 0;
  EvalMode mode = EvalMode::Serial;
};

struct Scaling {
  double tf = 0.0;  // physical duration
  double s1 = 1.0;  // d(sigma)/dt factors applied to spline derivatives
  double s2 = 1.0;
};

Scaling scaling_at(const EvalContext& C, const Eigen::VectorXd& v) {
  Scaling s;
  if (C.spec.kind == PhaseKind::Mooring) {
    s.tf = v[C.layout.tf_index()];
    s.s1 = 1.0 / s.tf;
    s.s2 = s.s1 * s.s1;
  } else {
    s.tf = C.spec.t_hor;
  }
  return s;
}

FlatPoint flat_at_row(const EvalContext& C, const CtrlMatrix& P, int k,
                      const Scaling& sc) {
  FlatPoint fp;
  for (int j = 0; j < 3; ++j) {
    fp.z[j] = C.B0.row(k).dot(P.col(j));
    fp.dz[j] = sc.s1 * C.B1.row(k).dot(P.col(j));
    fp.ddz[j] = sc.s2 * C.B2.row(k).dot(P.col(j));
  }
  return fp;
}

/// d(physical flat point)/d(t_f) for fixed sigma: positions are unaffected,
/// first derivatives scale like 1/t_f, second like 1/t_f^2.
Eigen::Matrix<double, 9, 1> tf_sensitivity(const FlatPoint& fp, double tf) {
  Eigen::Matrix<double, 9, 1> y = Eigen::Matrix<double, 9, 1>::Zero();
  y.segment<3>(3) = -fp.dz / tf;
  y.segment<3>(6) = -2.0 * fp.ddz / tf;
  return y;
}

/// Fill the constraint rows of one collocation point. Writes only rows
/// [rows_per_point*k, rows_per_point*(k+1)), so points are independent.
void point_rows(const EvalContext& C, const CtrlMatrix& P, const Scaling& sc,
                int k, Eigen::VectorXd& c, Eigen::MatrixXd* jac) {
  const int n_ctrl = C.layout.n_ctrl;
  const auto b0 = C.B0.row(k);
  const auto b1 = C.B1.row(k);
  const auto b2 = C.B2.row(k);
  const FlatPoint fp = flat_at_row(C, P, k, sc);
  int row = C.rows_per_point * k;

  // Row whose value depends on positions only (gradient wz w.r.t. z).
  auto add_pos_row = [&](double value, const Eigen::Vector3d& wz) {
    c[row] = value;
    if (jac) {
      for (int j = 0; j < 3; ++j) {
        if (wz[j] != 0.0) jac->block(row, j * n_ctrl, 1, n_ctrl) = wz[j] * b0;
      }
    }
    ++row;
  };
  // Row depending on the full flat point through weights w (stacked order
  // z1 z2 z3 dz1 dz2 dz3 ddz1 ddz2 ddz3, physical derivatives).
  auto add_flat_row = [&](double value, const Eigen::Matrix<double, 9, 1>& w) {
    c[row] = value;
    if (jac) {
      for (int j = 0; j < 3; ++j) {
        jac->block(row, j * n_ctrl, 1, n_ctrl) =
            w[j] * b0 + (w[3 + j] * sc.s1) * b1 + (w[6 + j] * sc.s2) * b2;
      }
      if (C.layout.has_tf) {
        (*jac)(row, C.layout.tf_index()) = w.dot(tf_sensitivity(fp, sc.tf));
      }
    }
    ++row;
  };

  if (C.corners.empty()) {
    // Point-mass collision rows: h_i(z1, z2) <= 0.
    const Eigen::Vector2d pos(fp.z[0], fp.z[1]);
    for (const RectObstacle& o : C.spec.obstacles.rectangles) {
      const double h =
          1.0 - C.spec.obstacle_relax - rect_value(o, pos.x(), pos.y());
      Eigen::Vector3d wz = Eigen::Vector3d::Zero();
      if (jac) wz.head<2>() = -rect_gradient(o, pos.x(), pos.y());
      add_pos_row(h, wz);
    }
  } else {
    // Hull-corner collision rows: corner = position + R(psi) * offset, so
    // the heading enters through dR/dpsi * offset.
    const double cs = std::cos(fp.z[2]), sn = std::sin(fp.z[2]);
    for (const Eigen::Vector2d& off : C.corners) {
      const Eigen::Vector2d world(cs * off.x() - sn * off.y(),
                                  sn * off.x() + cs * off.y());
      const Eigen::Vector2d corner = fp.z.head<2>() + world;
      const Eigen::Vector2d dcorner_dpsi(-sn * off.x() - cs * off.y(),
                                         cs * off.x() - sn * off.y());
      for (const RectObstacle& o : C.spec.obstacles.rectangles) {
        const double h =
            1.0 - C.spec.obstacle_relax - rect_value(o, corner.x(), corner.y());
        Eigen::Vector3d wz = Eigen::Vector3d::Zero();
        if (jac) {
          const Eigen::Vector2d g = -rect_gradient(o, corner.x(), corner.y());
          wz.head<2>() = g;
          wz[2] = g.dot(dcorner_dpsi);
        }
        add_pos_row(h, wz);
      }
    }
  }

  // Input rows from the flat input map.
  const VesselParams& p = C.spec.params;
  const FlatInputs in = theta_u(fp, p);
  Eigen::Matrix<double, 3, 9> Ju;
  if (jac) Ju = theta_u_jacobian(fp, p);
  const auto wrow = [&](int r) -> Eigen::Matrix<double, 9, 1> {
    return Ju.row(r).transpose();
  };
  const Eigen::Matrix<double, 9, 1> zero9 = Eigen::Matrix<double, 9, 1>::Zero();
  add_flat_row(in.theta_tau_u - p.tau_u_max, jac ? wrow(0) : zero9);
  add_flat_row(p.tau_u_min - in.theta_tau_u, jac ? (-wrow(0)).eval() : zero9);
  add_flat_row(in.theta_tau_r - p.tau_r_max, jac ? wrow(2) : zero9);
  add_flat_row(p.tau_r_min - in.theta_tau_r, jac ? (-wrow(2)).eval() : zero9);
  add_flat_row(in.theta_tau_v - C.spec.epsilon, jac ? wrow(1) : zero9);
  add_flat_row(-in.theta_tau_v - C.spec.epsilon, jac ? (-wrow(1)).eval() : zero9);
}

void eval_ineq(const EvalContext& C, const Eigen::VectorXd& v,
               Eigen::VectorXd& c, Eigen::MatrixXd* jac) {
  const int npts = static_cast<int>(C.times.size());
  c.resize(static_cast<Eigen::Index>(C.rows_per_point) * npts);
  if (jac) jac->setZero(c.size(), C.layout.size());
  const CtrlMatrix P = C.layout.unpack_ctrl(v);
  const Scaling sc = scaling_at(C, v);

  if (C.mode == EvalMode::Parallel) {
#ifdef FLATMOOR_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int k = 0; k < npts; ++k) point_rows(C, P, sc, k, c, jac);
  } else {
    for (int k = 0; k < npts; ++k) point_rows(C, P, sc, k, c, jac);
  }
}

void eval_eq(const EvalContext& C, const Eigen::VectorXd& v, Eigen::VectorXd& c,
             Eigen::MatrixXd* jac) {
  const bool moor = C.spec.kind == PhaseKind::Mooring;
  const int n_ctrl = C.layout.n_ctrl;
  const int n_eq = moor ? 12 : 6;
  c.resize(n_eq);
  if (jac) jac->setZero(n_eq, C.layout.size());
  const CtrlMatrix P = C.layout.unpack_ctrl(v);
  const Scaling sc = scaling_at(C, v);

  auto pin_state = [&](int row0, int k, const Vec6& target) {
    const FlatPoint fp = flat_at_row(C, P, k, sc);
    c.segment<6>(row0) = theta_x(fp).vec() - target;
    if (!jac) return;
    const Eigen::Matrix<double, 6, 9> Jx = theta_x_jacobian(fp);
    for (int j = 0; j < 3; ++j) {
      jac->block(row0, j * n_ctrl, 6, n_ctrl) =
          Jx.col(j) * C.B0.row(k) + (sc.s1 * Jx.col(3 + j)) * C.B1.row(k) +
          (sc.s2 * Jx.col(6 + j)) * C.B2.row(k);
    }
    if (C.layout.has_tf) {
      jac->block(row0, C.layout.tf_index(), 6, 1) =
          Jx * tf_sensitivity(fp, sc.tf);
    }
  };

  pin_state(0, 0, C.spec.s0.vec());
  if (moor) {
    pin_state(6, static_cast<int>(C.times.size()) - 1, C.spec.xf.vec());
  }
}

void collision_warnings(const PhaseSpec& spec, std::vector<std::string>& out) {
  auto check_pose = [&](const VesselState& s, const char* what) {
    std::vector<Eigen::Vector2d> pts;
    if (spec.kind == PhaseKind::Driving) {
      pts.emplace_back(s.x, s.y);
    } else {
      pts = hull_corners(s, spec.params);
    }
    for (const Eigen::Vector2d& pt : pts) {
      for (size_t i = 0; i < spec.obstacles.rectangles.size(); ++i) {
        if (rect_value(spec.obstacles.rectangles[i], pt.x(), pt.y()) < 1.0) {
          out.push_back(std::string(what) + " violates obstacle " +
                        std::to_string(i + 1));
        }
      }
    }
  };
  check_pose(spec.s0, "start pose");
  if (spec.kind == PhaseKind::Mooring) check_pose(spec.xf, "goal pose");
}

}  // namespace

TranscribedNlp transcribe(const PhaseSpec& spec, const TranscriptionGuess& guess,
                          EvalMode mode) {
  if (spec.N < 1) throw std::invalid_argument("need at least one segment");
  if (spec.n_ctrl < spec.degree + 1) {
    throw std::invalid_argument("need at least degree+1 control points");
  }
  if (spec.epsilon <= 0.0) throw std::invalid_argument("epsilon must be positive");
  const bool moor = spec.kind == PhaseKind::Mooring;
  if (spec.kind == PhaseKind::Driving && spec.t_hor <= 0.0) {
    throw std::invalid_argument("driving horizon must be positive");
  }
  if (moor && !(spec.tf_min > 0.0 && spec.tf_min <= spec.tf_max)) {
    throw std::invalid_argument("mooring needs 0 < tf_min <= tf_max");
  }
  if (guess.ctrl.rows() != spec.n_ctrl) {
    throw std::invalid_argument("guess has wrong control-point count");
  }

  auto ctx = std::make_shared<EvalContext>();
  ctx->spec = spec;
  ctx->layout = DecisionLayout{spec.n_ctrl, moor};
  ctx->mode = mode;
  const double domain = moor ? 1.0 : spec.t_hor;
  ctx->kv = KnotVector::clamped_uniform(spec.degree, spec.n_ctrl, domain);
  ctx->times.resize(spec.N + 1);
  for (int k = 0; k <= spec.N; ++k) {
    ctx->times[k] = k == spec.N ? domain : domain * k / spec.N;
  }
  ctx->B0 = basis_matrix(ctx->kv, ctx->times, 0);
  ctx->B1 = basis_matrix(ctx->kv, ctx->times, 1);
  ctx->B2 = basis_matrix(ctx->kv, ctx->times, 2);
  if (moor) ctx->corners = hull_corner_offsets(spec.params);
  const int q = static_cast<int>(spec.obstacles.rectangles.size());
  ctx->rows_per_point = (moor ? 4 * q : q) + 6;

  TranscribedNlp tn;
  tn.layout = ctx->layout;
  tn.knots = ctx->kv;
  tn.times = ctx->times;
  collision_warnings(spec, tn.warnings);

  NlpProblem& nlp = tn.nlp;
  nlp.n = ctx->layout.size();
  nlp.n_eq = moor ? 12 : 6;
  nlp.n_ineq = ctx->rows_per_point * (spec.N + 1);
  const double inf = std::numeric_limits<double>::infinity();
  nlp.lower = Eigen::VectorXd::Constant(nlp.n, -inf);
  nlp.upper = Eigen::VectorXd::Constant(nlp.n, inf);
  if (moor) {
    nlp.lower[ctx->layout.tf_index()] = spec.tf_min;
    nlp.upper[ctx->layout.tf_index()] = spec.tf_max;
  }
  nlp.v_init = ctx->layout.pack(
      guess.ctrl, std::clamp(guess.tf, spec.tf_min, spec.tf_max));
  if (guess.eq_mult.size() == nlp.n_eq) nlp.eq_mult_init = guess.eq_mult;
  if (guess.ineq_mult.size() == nlp.n_ineq) nlp.ineq_mult_init = guess.ineq_mult;

  if (moor) {
    const int tf_idx = ctx->layout.tf_index();
    const int n = nlp.n;
    nlp.cost = [tf_idx, n](const Eigen::VectorXd& v, Eigen::VectorXd* grad) {
      if (grad) {
        grad->setZero(n);
        (*grad)[tf_idx] = 1.0;
      }
      return v[tf_idx];
    };
  } else {
    const Eigen::Vector3d z_goal(spec.xf.x, spec.xf.y, spec.xf.psi);
    nlp.cost = [ctx, z_goal](const Eigen::VectorXd& v, Eigen::VectorXd* grad) {
      const CtrlMatrix P = ctx->layout.unpack_ctrl(v);
      const int last = static_cast<int>(ctx->times.size()) - 1;
      Eigen::Vector3d z_end;
      for (int j = 0; j < 3; ++j) z_end[j] = ctx->B0.row(last).dot(P.col(j));
      const Eigen::Vector3d diff = z_end - z_goal;
      if (grad) {
        grad->setZero(ctx->layout.size());
        for (int j = 0; j < 3; ++j) {
          grad->segment(j * ctx->layout.n_ctrl, ctx->layout.n_ctrl) =
              2.0 * diff[j] * ctx->B0.row(last).transpose();
        }
      }
      return diff.squaredNorm();
    };
  }
  nlp.eq = [ctx](const Eigen::VectorXd& v, Eigen::VectorXd& c,
                 Eigen::MatrixXd* jac) { eval_eq(*ctx, v, c, jac); };
  nlp.ineq = [ctx](const Eigen::VectorXd& v, Eigen::VectorXd& c,
                   Eigen::MatrixXd* jac) { eval_ineq(*ctx, v, c, jac); };
  return tn;
}

FlatPoint PhasePlan::flat_at(double t) const {
  const double tt = std::clamp(t, 0.0, duration());
  double param = tt;
  double s1 = 1.0;
  if (kind == PhaseKind::Mooring) {
    param = std::clamp(tf > 0.0 ? tt / tf : 0.0, 0.0, 1.0);
    s1 = 1.0 / tf;
  }
  const SplineTrajectory spl{knots, ctrl};
  FlatPoint fp;
  fp.z = spl.eval(param, 0);
  fp.dz = s1 * spl.eval(param, 1);
  fp.ddz = s1 * s1 * spl.eval(param, 2);
  return fp;
}

VesselState PhasePlan::state_at(double t) const { return theta_x(flat_at(t)); }

FlatInputs PhasePlan::inputs_at(double t, const VesselParams& p) const {
  return theta_u(flat_at(t), p);
}

PhasePlan plan_from_decision(const PhaseSpec& spec, const TranscribedNlp& tn,
                             const Eigen::VectorXd& v) {
  PhasePlan plan;
  plan.kind = spec.kind;
  plan.knots = tn.knots;
  plan.ctrl = tn.layout.unpack_ctrl(v);
  plan.tf = spec.kind == PhaseKind::Mooring ? v[tn.layout.tf_index()]
                                            : spec.t_hor;
  return plan;
}

}  // namespace flatmoor
