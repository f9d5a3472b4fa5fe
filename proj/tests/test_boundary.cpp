#include <doctest.h>

#include <cmath>

#include "ldp/boundary.hpp"

using namespace ldp;

namespace {

SivParams fitted_siv() { return {3.6, 0.1, 0.3, 1.01, 0.02, 0.03}; }
S0is1Params fitted_s0is1() { return {3.0, 5.0, 0.015, 2.0}; }

struct Fitted {
  ReactionNetwork net;
  EquilibriumSet eq;
  BoundaryCurve curve;
  DomainSpec domain;
};

const Fitted& fitted(ModelKind kind) {
  static Fitted siv = [] {
    Fitted f;
    f.net = build_siv(fitted_siv());
    f.eq = equilibria_siv(fitted_siv());
    f.curve = compute_separatrix(f.net, *f.eq.endemic_unstable);
    f.domain = build_domain(f.curve, ModelKind::siv, f.net);
    return f;
  }();
  static Fitted s0is1 = [] {
    Fitted f;
    f.net = build_s0is1(fitted_s0is1());
    f.eq = equilibria_s0is1(fitted_s0is1());
    f.curve = compute_separatrix(f.net, *f.eq.endemic_unstable);
    f.domain = build_domain(f.curve, ModelKind::s0is1, f.net);
    return f;
  }();
  return kind == ModelKind::siv ? siv : s0is1;
}

DomainSpec disk_domain(Vec2 center, double radius, int sides = 128) {
  DomainSpec dom;
  dom.model = ModelKind::s0is1;
  for (int i = 0; i < sides; ++i) {
    double ang = 2.0 * M_PI * i / sides;
    dom.polygon.push_back(
        {center.x + radius * std::cos(ang), center.y + radius * std::sin(ang)});
  }
  dom.z0 = {center.x, center.y};
  dom.interior_ref = dom.z0;
  dom.grid = MembershipGrid(dom.polygon, 128);
  return dom;
}

}  // namespace

TEST_CASE("separatrix passes through the saddle and hits the expected faces") {
  for (ModelKind kind : {ModelKind::siv, ModelKind::s0is1}) {
    const Fitted& f = fitted(kind);
    const Vec& zt = *f.eq.endemic_unstable;
    Vec2 at_one = f.curve.pts[f.curve.saddle_index];
    CHECK(std::hypot(at_one.x - zt[0], at_one.y - zt[1]) < 1e-6);
    CHECK(f.curve.u[f.curve.saddle_index] == doctest::Approx(1.0));
    // B on the horizontal axis, E/F on the diagonal face.
    CHECK(f.curve.b_end().y == doctest::Approx(0.0));
    CHECK(f.curve.e_end().x + f.curve.e_end().y == doctest::Approx(1.0));
    // Parameter values increase along the polyline.
    for (std::size_t i = 1; i < f.curve.u.size(); ++i)
      CHECK(f.curve.u[i] >= f.curve.u[i - 1] - 1e-12);
  }
}

TEST_CASE("s0is1 B endpoint matches the published phase portrait") {
  const Fitted& f = fitted(ModelKind::s0is1);
  CHECK(f.curve.b_end().x == doctest::Approx(0.308).epsilon(0.07));
  CHECK(std::abs(f.curve.b_end().x - 0.31) < 0.02);
}

TEST_CASE("curve monotonicity in the documented orientation") {
  // SIV: both components nondecreasing in u; S0IS1: first nonincreasing,
  // second nondecreasing.
  const double tol = 1e-7;
  const Fitted& siv = fitted(ModelKind::siv);
  for (std::size_t i = 1; i < siv.curve.pts.size(); ++i) {
    CHECK(siv.curve.pts[i].x >= siv.curve.pts[i - 1].x - tol);
    CHECK(siv.curve.pts[i].y >= siv.curve.pts[i - 1].y - tol);
  }
  const Fitted& s01 = fitted(ModelKind::s0is1);
  for (std::size_t i = 1; i < s01.curve.pts.size(); ++i) {
    CHECK(s01.curve.pts[i].x <= s01.curve.pts[i - 1].x + tol);
    CHECK(s01.curve.pts[i].y >= s01.curve.pts[i - 1].y - tol);
  }
}

TEST_CASE("basin test: displaced curve points flow to the right equilibria") {
  for (ModelKind kind : {ModelKind::siv, ModelKind::s0is1}) {
    const Fitted& f = fitted(kind);
    const Vec zs = *f.eq.endemic_stable;
    const Vec dfe = f.eq.dfe;
    const Vec2 z0{f.domain.z0[0], f.domain.z0[1]};

    int checked = 0;
    std::size_t stride = std::max<std::size_t>(1, f.curve.pts.size() / 50);
    for (std::size_t i = 0; i < f.curve.pts.size(); i += stride) {
      Vec2 p = f.curve.pts[i];
      if (std::hypot(p.x - f.curve.saddle.x, p.y - f.curve.saddle.y) < 0.02)
        continue;
      Vec2 dir = z0 - p;
      double len = norm(dir);
      Vec2 in{p.x + 1e-3 * dir.x / len, p.y + 1e-3 * dir.y / len};
      Vec2 out{p.x - 1e-3 * dir.x / len, p.y - 1e-3 * dir.y / len};
      if (!in_simplex({out.x, out.y}, 1.0, 0.0)) continue;
      if (!in_simplex({in.x, in.y}, 1.0, 0.0)) continue;

      auto settles_at = [&](Vec2 start, const Vec& target) {
        Vec cur{start.x, start.y};
        for (int leg = 0; leg < 14; ++leg) {
          OdeSolution sol = integrate(f.net, project_to_simplex(cur), 50.0, 1e-9);
          cur = sol.final_state();
          if (std::hypot(cur[0] - target[0], cur[1] - target[1]) < 0.02)
            return true;
        }
        return false;
      };
      CHECK(settles_at(in, zs));
      CHECK(settles_at(out, dfe));
      ++checked;
    }
    CHECK(checked >= 20);
  }
}

TEST_CASE("domain membership and z0 placement") {
  for (ModelKind kind : {ModelKind::siv, ModelKind::s0is1}) {
    const Fitted& f = fitted(kind);
    CHECK(membership(f.domain, f.domain.z0));
    CHECK(distance_to_boundary(f.domain, f.domain.z0) > 1e-3);
    CHECK(polygon_signed_area(f.domain.polygon) > 0.0);

    // A point nudged outward across the saddle is outside.
    Vec2 zt = f.curve.saddle;
    Vec2 z0{f.domain.z0[0], f.domain.z0[1]};
    Vec2 dir = z0 - zt;
    double len = norm(dir);
    Vec outside{zt.x - 2e-3 * dir.x / len, zt.y - 2e-3 * dir.y / len};
    CHECK(!membership(f.domain, outside));

    // Polyline vertices count as inside (closed set).
    Vec2 v = f.domain.polygon[f.domain.polygon.size() / 2];
    CHECK(membership(f.domain, {v.x, v.y}));

    CHECK(!membership(f.domain, {0.9, 0.9}));
  }
}

TEST_CASE("s0is1 domain separates the equilibria") {
  const Fitted& f = fitted(ModelKind::s0is1);
  CHECK(membership(f.domain, *f.eq.endemic_stable));
  CHECK(!membership(f.domain, {0.0, 0.0}));
}

TEST_CASE("siv z0 example point satisfies the bullet constraints") {
  const Fitted& f = fitted(ModelKind::siv);
  CHECK(z0_constraints_satisfied(f.curve, ModelKind::siv, f.net,
                                 {0.73, 1.0 / 6.0}));
  CHECK(membership(f.domain, {0.73, 1.0 / 6.0}));
}

TEST_CASE("star shape: disk passes with c2 close to the radius") {
  DomainSpec disk = disk_domain({0.35, 0.35}, 0.3);
  AssumptionReport rep = check_star_shape(disk, 256, {0.05, 0.1, 0.3, 0.7});
  CHECK(rep.all_pass());
  double c2 = rep.item("inward_shift_clearance").details["c2"];
  double c1 = rep.item("inward_shift_clearance").details["c1"];
  CHECK(c2 == doctest::Approx(0.3).epsilon(0.02));
  CHECK(c1 == doctest::Approx(0.3).epsilon(0.02));
}

TEST_CASE("star shape: center on the boundary fails item 2") {
  DomainSpec disk = disk_domain({0.35, 0.35}, 0.3);
  disk.z0 = {0.65, 0.35};  // on the rim
  AssumptionReport rep = check_star_shape(disk, 128, {0.1, 0.5});
  CHECK(!rep.item("inward_shift_clearance").pass);
  double c2 = rep.item("inward_shift_clearance").details["c2"];
  CHECK(c2 == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("star shape holds for both fitted domains") {
  for (ModelKind kind : {ModelKind::siv, ModelKind::s0is1}) {
    const Fitted& f = fitted(kind);
    AssumptionReport rep =
        check_star_shape(f.domain, 400, {0.02, 0.05, 0.1, 0.2});
    CHECK(rep.all_pass());
    double c2 = rep.item("inward_shift_clearance").details["c2"];
    CHECK(c2 > 0.0);
    // Consistency with the distance oracle at the center.
    CHECK(distance_to_boundary(f.domain, f.domain.z0) >= c2 * 0.2 - 1e-9);
  }
}

TEST_CASE("rate monotonicity toward the center") {
  // Constant positive rates pass vacuously for lambda1 below the constant.
  ReactionNetwork constant;
  constant.dim = 2;
  constant.transitions = 1;
  constant.jumps = {{1, 0}};
  constant.raw_rates = {[](const Vec&) { return 0.7; }};
  constant.sup_rate = 0.7;
  DomainSpec disk = disk_domain({0.3, 0.3}, 0.2);
  AssumptionReport rep = check_rate_monotonicity(constant, disk, 0.02);
  CHECK(rep.all_pass());

  // Linear rate growing toward a center placed at larger z1.
  ReactionNetwork linear = constant;
  linear.raw_rates = {[](const Vec& z) { return z[0]; }};
  linear.sup_rate = 1.0;
  DomainSpec disk2 = disk_domain({0.45, 0.2}, 0.15);
  AssumptionReport rep2 = check_rate_monotonicity(linear, disk2, 0.02);
  CHECK(rep2.all_pass());

  // Fitted model against its own domain.
  const Fitted& f = fitted(ModelKind::s0is1);
  AssumptionReport rep3 = check_rate_monotonicity(f.net, f.domain, 0.01);
  CHECK(rep3.all_pass());
  double l1 = rep3.item("rates_increase_toward_center").details["lambda1"];
  double l2 = rep3.item("rates_increase_toward_center").details["lambda2"];
  CHECK(l1 > 0.0);
  CHECK(l2 > 0.0);
}

TEST_CASE("C_a lower bound") {
  // Rates bounded below pass whenever the threshold drops under the floor.
  ReactionNetwork floor_net;
  floor_net.dim = 2;
  floor_net.transitions = 1;
  floor_net.jumps = {{1, 0}};
  floor_net.raw_rates = {[](const Vec&) { return 0.05; }};
  floor_net.sup_rate = 0.05;
  DomainSpec disk = disk_domain({0.3, 0.3}, 0.2);
  AssumptionReport rep =
      check_ca_bound(floor_net, disk, 0.25, {1e-4, 1e-3, 1e-2}, 0.9);
  CHECK(rep.all_pass());
  // exp(-a^-nu) at a = 1e-4, nu = 1/4 is exp(-10) ~ 4.54e-5 < 0.05.
  CHECK(std::exp(-std::pow(1e-4, -0.25)) ==
        doctest::Approx(4.5399929762e-5).epsilon(1e-6));
  double a0 = rep.item("rate_floor_vs_exp_bound").details["a0"];
  CHECK(a0 == doctest::Approx(1e-2));

  // Fitted model: polynomial rates vanish on the faces, so the check holds
  // only for small a; a positive a0 must be reported.
  const Fitted& f = fitted(ModelKind::s0is1);
  AssumptionReport star = check_star_shape(f.domain, 300, {0.05, 0.1});
  double c2 = star.item("inward_shift_clearance").details["c2"];
  AssumptionReport rep2 =
      check_ca_bound(f.net, f.domain, 0.25, {1e-8, 1e-7, 1e-6, 1e-5}, c2);
  double a0f = rep2.item("rate_floor_vs_exp_bound").details["a0"];
  CHECK(a0f > 0.0);
}

TEST_CASE("sector condition along the s0is1 separatrix") {
  const Fitted& f = fitted(ModelKind::s0is1);
  AssumptionReport rep = check_sector_condition(f.net, f.curve);
  CHECK(rep.all_pass());
  CHECK(rep.item("below_saddle_g1neg_g2pos_sumpos").details["samples"]
            .get<int>() >= 50);
}

TEST_CASE("lyapunov candidate checks") {
  // Square region with drift pulling toward its center: the clamped
  // distance candidate passes the geometric and drift items.
  DomainSpec square;
  square.model = ModelKind::s0is1;
  square.polygon = {{0.1, 0.1}, {0.4, 0.1}, {0.4, 0.4}, {0.1, 0.4}};
  square.z0 = {0.25, 0.25};
  square.interior_ref = square.z0;
  square.grid = MembershipGrid(square.polygon, 128);

  ReactionNetwork pull;
  pull.dim = 2;
  pull.transitions = 4;
  pull.jumps = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  pull.raw_rates = {
      [](const Vec& z) { return std::max(0.0, 0.25 - z[0]); },
      [](const Vec& z) { return std::max(0.0, z[0] - 0.25); },
      [](const Vec& z) { return std::max(0.0, 0.25 - z[1]); },
      [](const Vec& z) { return std::max(0.0, z[1] - 0.25); },
  };
  pull.sup_rate = 1.0;

  LyapunovCandidate cand = default_lyapunov(square, 0.1);
  AssumptionReport rep = check_lyapunov(cand, pull, square, 100, 0.01);
  CHECK(rep.item("positive_inside_zero_on_boundary").pass);
  CHECK(rep.item("gradient_nonzero_on_boundary").pass);
  CHECK(rep.item("dominates_clamped_distance").pass);
  CHECK(rep.item("drift_nondecreasing").pass);

  // A candidate with vanishing boundary gradient fails item 2.
  LyapunovCandidate bad;
  bad.value = [&square](const Vec& z) {
    double d = polygon_distance(square.polygon, {z[0], z[1]});
    return d * d;
  };
  bad.gradient = [&square, &cand](const Vec& z) {
    double d = polygon_distance(square.polygon, {z[0], z[1]});
    Vec g = cand.gradient(z);
    return Vec{2.0 * d * g[0], 2.0 * d * g[1]};
  };
  AssumptionReport rep2 = check_lyapunov(bad, pull, square, 100, 0.01);
  CHECK(!rep2.item("gradient_nonzero_on_boundary").pass);

  // Fitted model: run the default candidate and record the verdicts.
  const Fitted& f = fitted(ModelKind::s0is1);
  AssumptionReport rep3 =
      check_lyapunov(default_lyapunov(f.domain), f.net, f.domain, 100, 0.01);
  CHECK(rep3.items.size() == 5);
  CHECK(rep3.item("positive_inside_zero_on_boundary").pass);
}

TEST_CASE("domain polygon is simple") {
  for (ModelKind kind : {ModelKind::siv, ModelKind::s0is1}) {
    const auto& poly = fitted(kind).domain.polygon;
    // Sampled non-adjacent edge pairs must not intersect.
    std::size_t n = poly.size();
    std::size_t stride = std::max<std::size_t>(1, n / 250);
    int bad = 0;
    for (std::size_t i = 0; i < n; i += stride) {
      Vec2 a = poly[i], b = poly[(i + 1) % n];
      for (std::size_t j = i + 2; j < n; j += stride) {
        if (i == 0 && j + 1 == n) continue;
        Vec2 c = poly[j], d = poly[(j + 1) % n];
        double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
        double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
        if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0))) ++bad;
      }
    }
    CHECK(bad == 0);
  }
}
