#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "ldp/model.hpp"

using namespace ldp;

namespace {

SivParams fitted_siv() {
  // beta, chi, eta from the two-equilibria regime; mu/gamma/theta use the
  // recorded default split of mu+gamma = 1.03, mu+theta = 0.05.
  return {3.6, 0.1, 0.3, 1.01, 0.02, 0.03};
}

S0is1Params fitted_s0is1() { return {3.0, 5.0, 0.015, 2.0}; }

double norm2(const Vec& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("siv network shape and table values") {
  ReactionNetwork net = build_siv(fitted_siv());
  CHECK(net.dim == 2);
  CHECK(net.transitions == 7);
  for (const auto& h : net.jumps)
    for (int c : h) CHECK(std::abs(c) <= 1);

  // Infection rate vanishes on the simplex edge.
  CHECK(net.rate(0, {0.5, 0.5}) == doctest::Approx(0.0));
  // beta_2 = chi * beta * z1 * z2.
  CHECK(net.rate(1, {0.2, 0.5}) == doctest::Approx(0.1 * 3.6 * 0.2 * 0.5));

  // Disease-free equilibrium (0, eta/(mu+theta+eta)) has zero drift.
  Vec dfe{0.0, 0.3 / (0.05 + 0.3)};
  CHECK(norm2(drift(net, dfe)) < 1e-14);
}

TEST_CASE("s0is1 network shape and table values") {
  ReactionNetwork net = build_s0is1(fitted_s0is1());
  CHECK(net.dim == 2);
  CHECK(net.transitions == 5);

  CHECK(norm2(drift(net, {0.0, 0.0})) == doctest::Approx(0.0));
  // beta_4 = r * beta * x1 * x2.
  CHECK(net.rate(3, {0.1, 0.5}) == doctest::Approx(2.0 * 3.0 * 0.1 * 0.5));

  // Equilibrium coordinates read off the published phase portrait.
  CHECK(norm2(drift(net, {0.14780605, 0.81947272})) < 1e-5);
  CHECK(norm2(drift(net, {0.0113606, 0.68302727})) < 1e-5);
}

TEST_CASE("drift is the rate-weighted jump sum") {
  ReactionNetwork net = build_s0is1(fitted_s0is1());
  std::mt19937 gen(42);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    double x = uni(gen), y = uni(gen) * (1.0 - x);
    Vec z{x, y};
    Vec b = drift(net, z);
    Vec manual(2, 0.0);
    for (int j = 0; j < net.transitions; ++j) {
      double r = net.rate(j, z);
      manual[0] += r * net.jumps[j][0];
      manual[1] += r * net.jumps[j][1];
    }
    CHECK(b[0] == doctest::Approx(manual[0]).epsilon(1e-14));
    CHECK(b[1] == doctest::Approx(manual[1]).epsilon(1e-14));
  }
}

TEST_CASE("rates stay within [0, sigma] over the simplex") {
  for (int model = 0; model < 2; ++model) {
    ReactionNetwork net =
        model == 0 ? build_siv(fitted_siv()) : build_s0is1(fitted_s0is1());
    for (double x = 0.0; x <= 1.0; x += 0.01)
      for (double y = 0.0; x + y <= 1.0; y += 0.01)
        for (int j = 0; j < net.transitions; ++j) {
          double r = net.rate(j, {x, y});
          CHECK(r >= 0.0);
          CHECK(r <= net.sup_rate + 1e-12);
        }
  }
}

TEST_CASE("siv drift depends only on the identifiable combinations") {
  // Same beta, chi, eta, mu+gamma, mu+theta but different splits.
  SivParams p1{3.6, 0.1, 0.3, 1.01, 0.02, 0.03};
  SivParams p2{3.6, 0.1, 0.3, 0.99, 0.04, 0.01};
  ReactionNetwork n1 = build_siv(p1);
  ReactionNetwork n2 = build_siv(p2);
  for (double x = 0.0; x <= 1.0; x += 0.05)
    for (double y = 0.0; x + y <= 1.0; y += 0.05) {
      Vec b1 = drift(n1, {x, y});
      Vec b2 = drift(n2, {x, y});
      CHECK(b1[0] == doctest::Approx(b2[0]).epsilon(1e-12));
      CHECK(b1[1] == doctest::Approx(b2[1]).epsilon(1e-12));
    }
}

TEST_CASE("parameter validation") {
  SivParams bad = fitted_siv();
  bad.chi = 1.5;
  CHECK_THROWS_AS(build_siv(bad), std::invalid_argument);
  bad = fitted_siv();
  bad.beta = -1.0;
  CHECK_THROWS_AS(build_siv(bad), std::invalid_argument);
  S0is1Params bad2 = fitted_s0is1();
  bad2.r = -0.1;
  CHECK_THROWS_AS(build_s0is1(bad2), std::invalid_argument);
}

TEST_CASE("snap_initial floor rule and idempotence") {
  auto all_of_A = [](const Vec& z) { return in_simplex(z, 1.0, 1e-12); };
  Vec snapped = snap_initial({0.26, 0.31}, all_of_A, 10);
  CHECK(snapped[0] == doctest::Approx(0.2));
  CHECK(snapped[1] == doctest::Approx(0.3));

  // Already a lattice point: unchanged.
  Vec fixed = snap_initial({0.3, 0.5}, all_of_A, 10);
  CHECK(fixed[0] == doctest::Approx(0.3));
  CHECK(fixed[1] == doctest::Approx(0.5));

  Vec again = snap_initial(snapped, all_of_A, 10);
  CHECK(again == snapped);
}

TEST_CASE("snap_initial near a concave boundary matches exhaustive scan") {
  // Region: simplex minus an open disk; the floor point can fall in the
  // hole, forcing the nearest-inside-lattice-point fallback.
  auto inside = [](const Vec& z) {
    if (!in_simplex(z, 1.0, 1e-12)) return false;
    double dx = z[0] - 0.5, dy = z[1] - 0.3;
    return dx * dx + dy * dy >= 0.04;
  };
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (std::int64_t N : {10, 25, 50}) {
    for (int trial = 0; trial < 60; ++trial) {
      double x = uni(gen), y = uni(gen) * (1.0 - x);
      Vec z{x, y};
      if (!inside(z)) continue;
      Vec snapped = snap_initial(z, inside, N);
      CHECK(inside(snapped));

      Vec floor_pt{std::floor(z[0] * N + 1e-9) / N,
                   std::floor(z[1] * N + 1e-9) / N};
      if (inside(floor_pt)) {
        // The floor rule takes precedence when its point is in the region.
        CHECK(snapped == floor_pt);
        continue;
      }
      // Otherwise: nearest lattice point of the region, brute force over
      // the whole lattice with the lexicographic tie-break.
      double best = 1e18;
      Vec best_p;
      for (std::int64_t a = 0; a <= N; ++a)
        for (std::int64_t b = 0; a + b <= N; ++b) {
          Vec p{static_cast<double>(a) / N, static_cast<double>(b) / N};
          if (!inside(p)) continue;
          double d = std::hypot(p[0] - z[0], p[1] - z[1]);
          if (d < best - 1e-15 ||
              (std::abs(d - best) <= 1e-15 && p < best_p)) {
            best = d;
            best_p = p;
          }
        }
      double got = std::hypot(snapped[0] - z[0], snapped[1] - z[1]);
      CHECK(got == doctest::Approx(best).epsilon(1e-12));
      CHECK(snapped == best_p);
    }
  }
}

TEST_CASE("lipschitz estimates") {
  ReactionNetwork constant;
  constant.dim = 2;
  constant.transitions = 1;
  constant.jumps = {{1, 0}};
  constant.raw_rates = {[](const Vec&) { return 2.5; }};
  constant.sup_rate = 2.5;
  CHECK(lipschitz_estimate(constant, 0.05) == doctest::Approx(0.0));

  ReactionNetwork linear = constant;
  linear.raw_rates = {[](const Vec& z) { return 3.0 * z[0]; }};
  linear.sup_rate = 3.0;
  CHECK(lipschitz_estimate(linear, 0.02) == doctest::Approx(3.0).epsilon(1e-6));

  ReactionNetwork siv = build_siv(fitted_siv());
  double est = lipschitz_estimate(siv, 0.01);
  CHECK(est == doctest::Approx(siv.analytic_lipschitz).epsilon(0.05));
}
