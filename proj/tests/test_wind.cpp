#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "flatmoor/wind.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace flatmoor;

namespace {

WindStats table_stats(std::uint64_t seed) {
  WindStats w;  // defaults already carry the model-basin numbers
  w.seed = seed;
  return w;
}

VesselState rest_state(double psi) {
  VesselState s;
  s.psi = psi;
  return s;
}

}  // namespace

TEST_CASE("uniform01 stays in [0,1) and replays from the seed") {
  std::mt19937_64 a(110), b(110);
  for (int i = 0; i < 10000; ++i) {
    const double u = uniform01(a);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(u == uniform01(b));
  }
}

TEST_CASE("weibull quantile hits the unit quantile and the endpoints") {
  const double k = 2.0;
  const double lambda = 0.194;
  // U = 1 - e^-1 maps to V = lambda for every shape.
  CHECK(weibull_quantile(1.0 - std::exp(-1.0), k, lambda) ==
        doctest::Approx(lambda).epsilon(1e-14));
  CHECK(weibull_quantile(1.0 - std::exp(-1.0), 0.7, 3.5) ==
        doctest::Approx(3.5).epsilon(1e-14));
  CHECK(weibull_quantile(0.0, k, lambda) == 0.0);
  // Monotone in u.
  double prev = -1.0;
  for (int i = 0; i < 100; ++i) {
    const double v = weibull_quantile(i / 100.0, k, lambda);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("degenerate direction spread pins beta_w to the mean") {
  WindStats w = table_stats(111);
  w.mu_beta = 1.2345;
  w.sigma_beta = 0.0;
  std::mt19937_64 rng(w.seed);
  for (int i = 0; i < 1000; ++i) {
    const WindSample s = sample_wind(w, rng);
    CHECK(s.beta_w == 1.2345);
    CHECK(s.V_abs >= 0.0);
  }
}

TEST_CASE("speed draws match the Weibull mean over 1e5 samples") {
  const WindStats w = table_stats(112);
  std::mt19937_64 rng(w.seed);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const WindSample s = sample_wind(w, rng);
    REQUIRE(s.V_abs >= 0.0);
    sum += s.V_abs;
  }
  // E[V] = lambda * Gamma(1 + 1/k); k = 2 gives Gamma(1.5) = sqrt(pi)/2.
  const double expected = 0.194 * 0.5 * std::sqrt(M_PI);
  CHECK(sum / n == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("direction draws match the Gaussian mean and spread") {
  WindStats w = table_stats(113);
  w.mu_beta = 0.4;
  w.sigma_beta = 0.06;
  std::mt19937_64 rng(w.seed);
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double b = sample_wind(w, rng).beta_w;
    sum += b;
    sq += (b - w.mu_beta) * (b - w.mu_beta);
  }
  const double mean = sum / n;
  const double std_dev = std::sqrt(sq / n);
  CHECK(mean == doctest::Approx(0.4).epsilon(0.005));
  CHECK(std_dev == doctest::Approx(0.06).epsilon(0.02));
}

TEST_CASE("still air and vessel at rest give zero force") {
  const WindStats w = table_stats(114);
  const WindSample calm{0.7, 0.0};
  const DisturbanceForce f = wind_force(calm, rest_state(0.3), w);
  CHECK(f.fx == 0.0);
  CHECK(f.fy == 0.0);
  CHECK(f.mz == 0.0);
}

TEST_CASE("head-on relative wind is pure surge") {
  const WindStats w = table_stats(115);
  // Wind blowing toward the bow direction from astern: beta_w == psi puts the
  // attack angle at pi, so the sway and yaw coefficients vanish.
  const double psi = 0.9;
  const WindSample tail{psi, 2.0};
  const DisturbanceForce f = wind_force(tail, rest_state(psi), w);
  CHECK(f.fx == doctest::Approx(0.5 * w.rho_air * 4.0 * w.c_x * w.Af)
                    .epsilon(1e-12));
  CHECK(std::abs(f.fy) < 1e-12);
  CHECK(std::abs(f.mz) < 1e-12);
}

TEST_CASE("mirrored relative wind flips fy and mz and keeps fx") {
  const WindStats w = table_stats(116);
  std::mt19937 rng(117);
  std::uniform_real_distribution<double> ang(-1.5, 1.5);
  std::uniform_real_distribution<double> spd(0.05, 3.0);
  for (int i = 0; i < 200; ++i) {
    const double psi = ang(rng);
    const double off = ang(rng);
    const double V = spd(rng);
    const DisturbanceForce fp =
        wind_force({psi + off, V}, rest_state(psi), w);
    const DisturbanceForce fm =
        wind_force({psi - off, V}, rest_state(psi), w);
    CHECK(fp.fx == doctest::Approx(fm.fx).epsilon(1e-12));
    CHECK(fp.fy == doctest::Approx(-fm.fy).epsilon(1e-12));
    CHECK(fp.mz == doctest::Approx(-fm.mz).epsilon(1e-12));
  }
}

TEST_CASE("force scales with the square of speed and linearly with density") {
  WindStats w = table_stats(118);
  const VesselState s = rest_state(0.2);
  const WindSample one{1.1, 0.8};
  const WindSample two{1.1, 1.6};
  const DisturbanceForce f1 = wind_force(one, s, w);
  const DisturbanceForce f2 = wind_force(two, s, w);
  CHECK(f2.fx == doctest::Approx(4.0 * f1.fx).epsilon(1e-13));
  CHECK(f2.fy == doctest::Approx(4.0 * f1.fy).epsilon(1e-13));
  CHECK(f2.mz == doctest::Approx(4.0 * f1.mz).epsilon(1e-13));

  WindStats dense = w;
  dense.rho_air = 2.0 * w.rho_air;
  const DisturbanceForce fd = wind_force(one, s, dense);
  CHECK(fd.fx == doctest::Approx(2.0 * f1.fx).epsilon(1e-14));
  CHECK(fd.fy == doctest::Approx(2.0 * f1.fy).epsilon(1e-14));
  CHECK(fd.mz == doctest::Approx(2.0 * f1.mz).epsilon(1e-14));
}

TEST_CASE("surging through still air produces pure drag") {
  const WindStats w = table_stats(119);
  VesselState s = rest_state(0.0);
  s.u = 0.5;
  const DisturbanceForce f = wind_force({0.0, 0.0}, s, w);
  // Relative wind comes from dead ahead: surge drag only, opposing motion.
  CHECK(f.fx == doctest::Approx(-0.5 * w.rho_air * 0.25 * w.c_x * w.Af)
                    .epsilon(1e-13));
  CHECK(std::abs(f.fy) < 1e-12);
  CHECK(std::abs(f.mz) < 1e-12);
}

TEST_CASE("generator streams replay bitwise from the seed") {
  WindGenerator a(table_stats(120));
  WindGenerator b(table_stats(120));
  WindGenerator c(table_stats(121));
  bool any_diff = false;
  for (int i = 0; i < 1000; ++i) {
    const WindSample sa = a.step(0.01);
    const WindSample sb = b.step(0.01);
    const WindSample sc = c.step(0.01);
    CHECK(sa.beta_w == sb.beta_w);
    CHECK(sa.V_abs == sb.V_abs);
    any_diff = any_diff || sa.V_abs != sc.V_abs;
  }
  CHECK(any_diff);
}

TEST_CASE("generator filter matches a manual replication") {
  const WindStats w = table_stats(122);
  WindGenerator gen(w);
  std::mt19937_64 rng(w.seed);
  const double h = 0.01;
  const double alpha = -std::expm1(-h / w.filter_tau);
  double wx = 0.0, wy = 0.0;
  double max_raw = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const WindSample raw = sample_wind(w, rng);
    max_raw = std::max(max_raw, raw.V_abs);
    const double tx = raw.V_abs * std::cos(raw.beta_w);
    const double ty = raw.V_abs * std::sin(raw.beta_w);
    if (i == 0) {
      wx = tx;
      wy = ty;
    } else {
      wx += alpha * (tx - wx);
      wy += alpha * (ty - wy);
    }
    const WindSample got = gen.step(h);
    CHECK(got.V_abs == std::hypot(wx, wy));
    CHECK(got.beta_w == std::atan2(wy, wx));
    // Filtered vector is a convex combination of raw vectors.
    CHECK(got.V_abs <= max_raw + 1e-12);
  }
}

TEST_CASE("filter time constant bounds per-step movement") {
  // Near-zero time constant passes the raw samples through.
  WindStats fast = table_stats(123);
  fast.filter_tau = 1e-4;
  WindGenerator gen_fast(fast);
  std::mt19937_64 rng(fast.seed);
  for (int i = 0; i < 200; ++i) {
    const WindSample raw = sample_wind(fast, rng);
    const WindSample got = gen_fast.step(0.01);
    CHECK(got.V_abs == doctest::Approx(raw.V_abs).epsilon(1e-9));
  }

  // Huge time constant freezes the filter at the first sample.
  WindStats slow = table_stats(124);
  slow.filter_tau = 1e9;
  WindGenerator gen_slow(slow);
  const WindSample first = gen_slow.step(0.01);
  for (int i = 0; i < 200; ++i) {
    const WindSample got = gen_slow.step(0.01);
    CHECK(got.V_abs == doctest::Approx(first.V_abs).epsilon(1e-9));
    CHECK(got.beta_w == doctest::Approx(first.beta_w).epsilon(1e-9));
  }
}
