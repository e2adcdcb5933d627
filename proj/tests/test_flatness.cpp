#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "flatmoor/flatness.hpp"
#include "flatmoor/vessel.hpp"

#include <cmath>
#include <random>

using namespace flatmoor;

namespace {

// Random flat point with velocities bounded away from zero so the modulus
// damping terms are locally smooth (needed by the finite-difference checks).
FlatPoint random_flat_point(std::mt19937& rng) {
  std::uniform_real_distribution<double> pos(-5.0, 5.0);
  std::uniform_real_distribution<double> mag(0.2, 1.0);
  std::bernoulli_distribution coin(0.5);
  auto signed_mag = [&]() { return coin(rng) ? mag(rng) : -mag(rng); };

  for (;;) {
    FlatPoint fp;
    fp.z << pos(rng), pos(rng), pos(rng);
    fp.dz << signed_mag(), signed_mag(), signed_mag();
    fp.ddz << signed_mag(), signed_mag(), signed_mag();
    const VesselState s = theta_x(fp);
    if (std::abs(s.u) > 0.05 && std::abs(s.v) > 0.05 && std::abs(s.r) > 0.05)
      return fp;
  }
}

Eigen::Matrix<double, 9, 1> stack(const FlatPoint& fp) {
  Eigen::Matrix<double, 9, 1> v;
  v << fp.z, fp.dz, fp.ddz;
  return v;
}

FlatPoint unstack(const Eigen::Matrix<double, 9, 1>& v) {
  FlatPoint fp;
  fp.z = v.segment<3>(0);
  fp.dz = v.segment<3>(3);
  fp.ddz = v.segment<3>(6);
  return fp;
}

}  // namespace

TEST_CASE("state map on axis-aligned and rotated motion") {
  FlatPoint fp;
  fp.dz << 1.0, 0.0, 0.0;
  VesselState s = theta_x(fp);
  CHECK(s.u == doctest::Approx(1.0));
  CHECK(s.v == doctest::Approx(0.0));
  CHECK(s.r == doctest::Approx(0.0));

  fp.z << 0.0, 0.0, M_PI / 2;
  fp.dz << 0.0, 1.0, 0.0;
  s = theta_x(fp);
  CHECK(s.u == doctest::Approx(1.0));
  CHECK(std::abs(s.v) < 1e-15);
}

TEST_CASE("state map reproduces the docking start pose") {
  FlatPoint fp;
  fp.z << 3.5, 2.0, M_PI / 2;
  const VesselState s = theta_x(fp);
  CHECK(s.x == doctest::Approx(3.5));
  CHECK(s.y == doctest::Approx(2.0));
  CHECK(s.psi == doctest::Approx(M_PI / 2));
  CHECK(s.u == 0.0);
  CHECK(s.v == 0.0);
  CHECK(s.r == 0.0);
}

TEST_CASE("flat output from state inverts the state map") {
  VesselState s;
  s.u = 1.0;
  FlatPoint fp = flat_from_state(s);
  CHECK(fp.dz(0) == doctest::Approx(1.0));
  CHECK(fp.dz(1) == doctest::Approx(0.0));

  s = VesselState{1.0, 2.0, M_PI / 2, 1.0, 0.0, 0.0};
  fp = flat_from_state(s);
  CHECK(std::abs(fp.dz(0)) < 1e-15);
  CHECK(fp.dz(1) == doctest::Approx(1.0));

  std::mt19937 rng(73);
  std::uniform_real_distribution<double> any(-10.0, 10.0);
  for (int i = 0; i < 10000; ++i) {
    const VesselState orig{any(rng), any(rng), any(rng),
                           any(rng), any(rng), any(rng)};
    const VesselState back = theta_x(flat_from_state(orig));
    CHECK((back.vec() - orig.vec()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("input map on pure surge matches hand evaluation") {
  const VesselParams p = VesselParams::model_ship();
  FlatPoint fp;
  fp.dz << 1.0, 0.0, 0.0;
  const FlatInputs in = theta_u(fp, p);
  CHECK(in.theta_tau_u == doctest::Approx(14.1));  // -Xu - Xuu at u = 1
  CHECK(in.theta_tau_v == doctest::Approx(0.0));
  CHECK(in.theta_tau_r == doctest::Approx(0.0));
}

TEST_CASE("input map at rest is zero") {
  const VesselParams p = VesselParams::model_ship();
  const FlatInputs in = theta_u(FlatPoint{}, p);
  CHECK(in.theta_tau_u == 0.0);
  CHECK(in.theta_tau_v == 0.0);
  CHECK(in.theta_tau_r == 0.0);
}

TEST_CASE("flat maps are consistent with the vessel dynamics") {
  // Feeding theta_u through the fully actuated dynamics must reproduce the
  // analytic time derivative of theta_x along the flat trajectory.
  const VesselParams p = VesselParams::model_ship();
  std::mt19937 rng(74);
  for (int i = 0; i < 500; ++i) {
    const FlatPoint fp = random_flat_point(rng);
    const VesselState s = theta_x(fp);
    const FlatInputs in = theta_u(fp, p);

    const Vec6 ds = state_derivative(s, {in.theta_tau_u, in.theta_tau_r}, {}, p,
                                     Actuation::full(in.theta_tau_v));

    const double sn = std::sin(fp.z(2)), cs = std::cos(fp.z(2));
    Vec6 expect;
    expect(0) = fp.dz(0);
    expect(1) = fp.dz(1);
    expect(2) = fp.dz(2);
    expect(3) = cs * fp.dz(2) * fp.dz(1) + sn * fp.ddz(1) -
                sn * fp.dz(2) * fp.dz(0) + cs * fp.ddz(0);
    expect(4) = -sn * fp.dz(2) * fp.dz(1) + cs * fp.ddz(1) -
                cs * fp.dz(2) * fp.dz(0) - sn * fp.ddz(0);
    expect(5) = fp.ddz(2);

    CHECK((ds - expect).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("state map jacobian matches finite differences") {
  std::mt19937 rng(75);
  const double step = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const FlatPoint fp = random_flat_point(rng);
    const Eigen::Matrix<double, 6, 9> J = theta_x_jacobian(fp);

    const Eigen::Matrix<double, 9, 1> v0 = stack(fp);
    for (int c = 0; c < 9; ++c) {
      Eigen::Matrix<double, 9, 1> vp = v0, vm = v0;
      vp(c) += step;
      vm(c) -= step;
      const Vec6 fd =
          (theta_x(unstack(vp)).vec() - theta_x(unstack(vm)).vec()) / (2 * step);
      CHECK((fd - J.col(c)).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("input map jacobian matches finite differences") {
  const VesselParams p = VesselParams::model_ship();
  std::mt19937 rng(76);
  const double step = 1e-6;
  auto tau_vec = [&](const FlatPoint& fp) {
    const FlatInputs in = theta_u(fp, p);
    return Eigen::Vector3d(in.theta_tau_u, in.theta_tau_v, in.theta_tau_r);
  };

  for (int i = 0; i < 100; ++i) {
    const FlatPoint fp = random_flat_point(rng);
    const Eigen::Matrix<double, 3, 9> J = theta_u_jacobian(fp, p);

    const Eigen::Matrix<double, 9, 1> v0 = stack(fp);
    for (int c = 0; c < 9; ++c) {
      Eigen::Matrix<double, 9, 1> vp = v0, vm = v0;
      vp(c) += step;
      vm(c) -= step;
      const Eigen::Vector3d fd =
          (tau_vec(unstack(vp)) - tau_vec(unstack(vm))) / (2 * step);
      const double scale = std::max(1.0, J.col(c).cwiseAbs().maxCoeff());
      CHECK((fd - J.col(c)).cwiseAbs().maxCoeff() < 1e-5 * scale);
    }
  }
}

TEST_CASE("input map jacobian equals the dynamics-based form") {
  // Cross-check the closed-form expressions against M*nu_dot + (C+D)nu
  // assembled from the vessel module, which the input map must equal.
  const VesselParams p = VesselParams::model_ship();
  std::mt19937 rng(77);
  for (int i = 0; i < 200; ++i) {
    const FlatPoint fp = random_flat_point(rng);

    const double sn = std::sin(fp.z(2)), cs = std::cos(fp.z(2));
    Eigen::Matrix3d W;
    W << cs, sn, 0, -sn, cs, 0, 0, 0, 1;
    Eigen::Matrix3d Wp;
    Wp << -sn, cs, 0, -cs, -sn, 0, 0, 0, 0;

    const Eigen::Vector3d nu = W * fp.dz;
    const Eigen::Vector3d nu_dot = W * fp.ddz + fp.dz(2) * (Wp * fp.dz);
    const Eigen::Vector3d tau =
        mass_matrix(p) * nu_dot +
        (coriolis_matrix(nu, p) + damping_matrix(nu, p)) * nu;

    const FlatInputs in = theta_u(fp, p);
    CHECK(in.theta_tau_u == doctest::Approx(tau(0)).epsilon(1e-10));
    CHECK(in.theta_tau_v == doctest::Approx(tau(1)).epsilon(1e-10));
    CHECK(in.theta_tau_r == doctest::Approx(tau(2)).epsilon(1e-10));
  }
}
