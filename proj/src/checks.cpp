#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ldp/boundary.hpp"

namespace ldp {

namespace {

// Evenly spaced points along the polygon perimeter, with the inward normal
// of the edge each point sits on (interior is left of CCW edges).
struct BoundarySample {
  Vec2 p;
  Vec2 inward;
};

std::vector<BoundarySample> sample_boundary(const std::vector<Vec2>& poly,
                                            int n) {
  double perimeter = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i)
    perimeter += norm(poly[(i + 1) % poly.size()] - poly[i]);
  bool ccw = polygon_signed_area(poly) > 0.0;

  std::vector<BoundarySample> out;
  out.reserve(n);
  double spacing = perimeter / n;
  double carried = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    Vec2 a = poly[i];
    Vec2 b = poly[(i + 1) % poly.size()];
    double len = norm(b - a);
    if (len <= 0.0) continue;
    Vec2 dir = (1.0 / len) * (b - a);
    Vec2 inw = ccw ? Vec2{-dir.y, dir.x} : Vec2{dir.y, -dir.x};
    double s = carried;
    while (s < len) {
      out.push_back({a + s * dir, inw});
      s += spacing;
    }
    carried = s - len;
  }
  return out;
}

double min_rate(const ReactionNetwork& net, const Vec& z) {
  double m = std::numeric_limits<double>::infinity();
  for (int j = 0; j < net.transitions; ++j) m = std::min(m, net.rate(j, z));
  return m;
}

}  // namespace

AssumptionReport check_star_shape(const DomainSpec& domain,
                                  int n_boundary_samples,
                                  const std::vector<double>& a_grid) {
  AssumptionReport rep;
  rep.check = "star_shape";
  const Vec2 z0{domain.z0[0], domain.z0[1]};
  auto samples = sample_boundary(domain.polygon, n_boundary_samples);

  // Item 1: open segments (z0, y) meet the boundary only at y.
  int seg_failures = 0;
  nlohmann::json witnesses = nlohmann::json::array();
  for (const auto& s : samples) {
    double seg_len = norm(s.p - z0);
    if (seg_len < 1e-12) continue;
    double t_cut = 1.0 - 2e-6 / seg_len;
    auto hits = segment_polygon_intersections(domain.polygon, z0, s.p);
    int early = 0;
    for (double t : hits)
      if (t < t_cut) ++early;
    if (early > 0) {
      ++seg_failures;
      if (witnesses.size() < 16)
        witnesses.push_back({{"y", {s.p.x, s.p.y}}, {"crossings", early}});
    }
  }
  rep.items.push_back({"segments_meet_boundary_once", seg_failures == 0,
                       {{"samples", static_cast<int>(samples.size())},
                        {"failures", seg_failures},
                        {"witnesses", witnesses}}});

  // Item 2: the inward shift gains clearance linearly in a.
  double c1 = 0.0;
  double c2 = std::numeric_limits<double>::infinity();
  nlohmann::json worst;
  for (const auto& s : samples) {
    c1 = std::max(c1, norm(s.p - z0));
    for (double a : a_grid) {
      Vec2 ya = s.p + a * (z0 - s.p);
      double ratio = polygon_distance(domain.polygon, ya) / a;
      if (ratio < c2) {
        c2 = ratio;
        worst = {{"y", {s.p.x, s.p.y}}, {"a", a}, {"dist_over_a", ratio}};
      }
    }
  }
  double inf_boundary_dist = std::numeric_limits<double>::infinity();
  for (const auto& s : samples)
    inf_boundary_dist = std::min(inf_boundary_dist, norm(s.p - z0));
  double theta = c2 > 0.0 && inf_boundary_dist > 0.0
                     ? std::asin(std::min(1.0, c2 / inf_boundary_dist))
                     : 0.0;
  rep.items.push_back({"inward_shift_clearance", c2 > 0.0,
                       {{"c1", c1},
                        {"c2", c2},
                        {"theta", theta},
                        {"min_center_distance", inf_boundary_dist},
                        {"worst", worst}}});
  return rep;
}

AssumptionReport check_rate_monotonicity(const ReactionNetwork& net,
                                         const DomainSpec& domain,
                                         double grid_step) {
  AssumptionReport rep;
  rep.check = "rate_monotonicity";
  const Vec2 z0{domain.z0[0], domain.z0[1]};

  std::vector<Vec2> grid;
  for (double x = 0.0; x <= 1.0; x += grid_step)
    for (double y = 0.0; x + y <= 1.0; y += grid_step) {
      Vec2 z{x, y};
      if (domain.grid.contains(z)) grid.push_back(z);
    }

  const std::vector<double> lambda2_ladder{0.8, 0.4, 0.2, 0.1, 0.05};
  double best_l1 = 0.0, best_l2 = 0.0;
  nlohmann::json table = nlohmann::json::array();
  nlohmann::json witness;
  for (double l2 : lambda2_ladder) {
    double l1 = net.sup_rate + 1.0;
    nlohmann::json w;
    for (const auto& z : grid) {
      for (int frac = 1; frac <= 8; ++frac) {
        double a = l2 * frac / 8.0;
        Vec2 za = z + a * (z0 - z);
        for (int j = 0; j < net.transitions; ++j) {
          double bz = net.rate(j, {z.x, z.y});
          if (bz >= l1) continue;
          double bza = net.rate(j, {za.x, za.y});
          if (bza <= bz) {
            if (bz < l1) {
              l1 = bz;
              w = {{"z", {z.x, z.y}}, {"j", j}, {"a", a},
                   {"rate_z", bz},    {"rate_za", bza}};
            }
          }
        }
      }
    }
    table.push_back({{"lambda2", l2}, {"lambda1", l1}});
    if (l1 > best_l1 + 1e-15 || (l1 >= best_l1 - 1e-15 && l2 > best_l2)) {
      best_l1 = l1;
      best_l2 = l2;
      witness = w;
    }
  }
  rep.items.push_back({"rates_increase_toward_center", best_l1 > 1e-9,
                       {{"lambda1", best_l1},
                        {"lambda2", best_l2},
                        {"ladder", table},
                        {"binding_witness", witness}}});
  return rep;
}

AssumptionReport check_ca_bound(const ReactionNetwork& net,
                                const DomainSpec& domain, double nu,
                                const std::vector<double>& a_grid, double c2) {
  if (!(nu > 0.0 && nu < 0.5))
    throw std::invalid_argument("check_ca_bound: nu must lie in (0, 1/2)");
  if (!(c2 > 0.0))
    throw std::invalid_argument("check_ca_bound: c2 must be positive");
  AssumptionReport rep;
  rep.check = "ca_bound";

  std::vector<Vec2> interior;
  for (double x = 0.0; x <= 1.0; x += 0.005)
    for (double y = 0.0; x + y <= 1.0; y += 0.005) {
      Vec2 z{x, y};
      if (domain.grid.contains(z)) interior.push_back(z);
    }
  auto rim = sample_boundary(domain.polygon, 2000);

  std::vector<double> sorted = a_grid;
  std::sort(sorted.begin(), sorted.end());
  nlohmann::json rows = nlohmann::json::array();
  double a0 = 0.0;
  bool chain = true;
  for (double a : sorted) {
    double clearance = c2 * a;
    double ca = std::numeric_limits<double>::infinity();
    int n_candidates = 0;
    for (const auto& z : interior) {
      if (polygon_distance(domain.polygon, z) < clearance) continue;
      ++n_candidates;
      ca = std::min(ca, min_rate(net, {z.x, z.y}));
    }
    // The infimum lives on the inner rim where rates are smallest; offset
    // boundary samples inward by exactly the clearance.
    for (const auto& s : rim) {
      Vec2 z = s.p + clearance * s.inward;
      if (!in_simplex({z.x, z.y}, 1.0, 0.0)) continue;
      if (!domain.grid.contains(z)) continue;
      if (polygon_distance(domain.polygon, z) < clearance * (1.0 - 1e-3))
        continue;
      ++n_candidates;
      ca = std::min(ca, min_rate(net, {z.x, z.y}));
    }
    if (n_candidates == 0)
      throw std::invalid_argument(
          "check_ca_bound: inner region empty at a = " + std::to_string(a));
    double threshold = std::exp(-std::pow(a, -nu));
    bool pass = ca >= threshold;
    rows.push_back({{"a", a}, {"C_a", ca}, {"threshold", threshold},
                    {"pass", pass}});
    if (pass && chain)
      a0 = a;
    else
      chain = false;
  }
  rep.items.push_back({"rate_floor_vs_exp_bound", a0 > 0.0,
                       {{"nu", nu}, {"c2", c2}, {"a0", a0}, {"rows", rows}}});
  return rep;
}

AssumptionReport check_sector_condition(const ReactionNetwork& net,
                                        const BoundaryCurve& curve) {
  AssumptionReport rep;
  rep.check = "sector_condition";
  const Vec2 zt = curve.saddle;

  auto eval = [&](const Vec2& p) { return drift(net, {p.x, p.y}); };

  int below_total = 0, below_fail = 0;
  int above_total = 0, above_fail = 0;
  nlohmann::json w_below, w_above;
  std::size_t stride = std::max<std::size_t>(1, curve.pts.size() / 400);
  for (std::size_t i = 0; i < curve.pts.size(); i += stride) {
    const Vec2& p = curve.pts[i];
    if (norm(p - zt) < 1e-3) continue;
    Vec g = eval(p);
    if (p.y < zt.y) {
      ++below_total;
      if (!(g[0] < 0.0 && g[1] > 0.0 && g[0] + g[1] > 0.0)) {
        ++below_fail;
        w_below = {{"p", {p.x, p.y}}, {"g", {g[0], g[1]}}};
      }
    } else {
      ++above_total;
      if (!(g[0] > 0.0 && g[1] < 0.0 && g[0] + g[1] < 0.0)) {
        ++above_fail;
        w_above = {{"p", {p.x, p.y}}, {"g", {g[0], g[1]}}};
      }
    }
  }
  rep.items.push_back({"below_saddle_g1neg_g2pos_sumpos", below_fail == 0,
                       {{"samples", below_total},
                        {"failures", below_fail},
                        {"witness", w_below}}});
  rep.items.push_back({"above_saddle_mirrored", above_fail == 0,
                       {{"samples", above_total},
                        {"failures", above_fail},
                        {"witness", w_above}}});

  // d(z1+z2)/dt > 0 on the half line {(zt1 + a, zt2 - a), a > 0}.
  int hl_fail = 0, hl_total = 0;
  nlohmann::json w_hl;
  for (int i = 1; i <= 50; ++i) {
    double a = zt.y * i / 51.0;
    Vec2 p{zt.x + a, zt.y - a};
    if (p.x + p.y > 1.0 || p.y < 0.0) break;
    Vec g = eval(p);
    ++hl_total;
    if (!(g[0] + g[1] > 0.0)) {
      ++hl_fail;
      w_hl = {{"a", a}, {"sum", g[0] + g[1]}};
    }
  }
  rep.items.push_back({"halfline_sum_positive", hl_fail == 0 && hl_total > 0,
                       {{"samples", hl_total},
                        {"failures", hl_fail},
                        {"witness", w_hl}}});
  return rep;
}

LyapunovCandidate default_lyapunov(const DomainSpec& domain,
                                   double clamp_level) {
  double c2cap = clamp_level > 0.0
                     ? clamp_level
                     : 0.75 * distance_to_boundary(domain, domain.interior_ref);
  auto poly = domain.polygon;
  LyapunovCandidate cand;
  cand.value = [poly, c2cap](const Vec& z) {
    return std::min(polygon_distance(poly, Vec2{z[0], z[1]}), c2cap);
  };
  cand.gradient = [poly, c2cap](const Vec& z) {
    Vec2 p{z[0], z[1]};
    double best = std::numeric_limits<double>::infinity();
    Vec2 nearest{0, 0};
    for (std::size_t i = 0; i < poly.size(); ++i) {
      Vec2 a = poly[i];
      Vec2 b = poly[(i + 1) % poly.size()];
      Vec2 ab = b - a;
      double t = dot(p - a, ab) / std::max(dot(ab, ab), 1e-300);
      t = std::clamp(t, 0.0, 1.0);
      Vec2 q = a + t * ab;
      double d = norm(p - q);
      if (d < best) {
        best = d;
        nearest = q;
      }
    }
    if (best >= c2cap) return Vec{0.0, 0.0};
    if (best < 1e-12) {
      // On the boundary: fall back to the inward edge normal.
      bool ccw = polygon_signed_area(poly) > 0.0;
      double bd = std::numeric_limits<double>::infinity();
      Vec2 inw{0, 0};
      for (std::size_t i = 0; i < poly.size(); ++i) {
        Vec2 a = poly[i];
        Vec2 b = poly[(i + 1) % poly.size()];
        double d = point_segment_distance(p, a, b);
        if (d < bd) {
          bd = d;
          Vec2 dir = (1.0 / std::max(norm(b - a), 1e-300)) * (b - a);
          inw = ccw ? Vec2{-dir.y, dir.x} : Vec2{dir.y, -dir.x};
        }
      }
      return Vec{inw.x, inw.y};
    }
    Vec2 g = (1.0 / best) * (p - nearest);
    return Vec{g.x, g.y};
  };
  return cand;
}

AssumptionReport check_lyapunov(const LyapunovCandidate& u,
                                const ReactionNetwork& net,
                                const DomainSpec& domain, std::int64_t N,
                                double grid_step) {
  AssumptionReport rep;
  rep.check = "lyapunov_candidate";

  std::vector<Vec2> grid;
  for (double x = 0.0; x <= 1.0; x += grid_step)
    for (double y = 0.0; x + y <= 1.0; y += grid_step) {
      Vec2 z{x, y};
      if (domain.grid.contains(z)) grid.push_back(z);
    }
  auto rim = sample_boundary(domain.polygon, 1000);

  // Item 1: u > 0 inside, u = 0 on the boundary.
  double min_interior = std::numeric_limits<double>::infinity();
  for (const auto& z : grid) {
    if (polygon_distance(domain.polygon, z) < grid_step / 2) continue;
    min_interior = std::min(min_interior, u.value({z.x, z.y}));
  }
  double max_boundary = 0.0;
  for (const auto& s : rim)
    max_boundary = std::max(max_boundary, std::abs(u.value({s.p.x, s.p.y})));
  rep.items.push_back({"positive_inside_zero_on_boundary",
                       min_interior > 0.0 && max_boundary < 1e-9,
                       {{"min_interior", min_interior},
                        {"max_boundary", max_boundary}}});

  // Item 2: nonvanishing gradient on the boundary.
  double min_grad = std::numeric_limits<double>::infinity();
  for (const auto& s : rim) {
    Vec g = u.gradient({s.p.x, s.p.y});
    min_grad = std::min(min_grad, std::hypot(g[0], g[1]));
  }
  rep.items.push_back(
      {"gradient_nonzero_on_boundary", min_grad > 1e-9,
       {{"min_gradient_norm", min_grad}}});

  // Item 3: u dominates min(C1 dist, C2).
  double c2cap = 0.0;
  for (const auto& z : grid) c2cap = std::max(c2cap, u.value({z.x, z.y}));
  double c1 = std::numeric_limits<double>::infinity();
  for (const auto& z : grid) {
    double dist = polygon_distance(domain.polygon, z);
    double uv = u.value({z.x, z.y});
    double floor = std::min(dist, c2cap / 2.0);
    if (floor > 1e-12) c1 = std::min(c1, uv / floor);
  }
  rep.items.push_back(
      {"dominates_clamped_distance", c1 > 1e-9,
       {{"C1", c1}, {"C2", c2cap / 2.0}}});

  // Item 4: <b, grad u> >= 0 (small slack for polyline kinks).
  double min_inner = std::numeric_limits<double>::infinity();
  nlohmann::json w4;
  for (const auto& z : grid) {
    Vec b = drift(net, {z.x, z.y});
    Vec g = u.gradient({z.x, z.y});
    double ip = b[0] * g[0] + b[1] * g[1];
    if (ip < min_inner) {
      min_inner = ip;
      w4 = {{"z", {z.x, z.y}}, {"inner", ip}};
    }
  }
  rep.items.push_back({"drift_nondecreasing", min_inner >= -1e-6,
                       {{"min_inner_product", min_inner}, {"witness", w4}}});

  // Item 5: <-g_N, grad u> >= rho * (number of suppressed directions),
  // evaluated on lattice points within a jump of the boundary.
  double rho = std::numeric_limits<double>::infinity();
  int active_points = 0;
  nlohmann::json w5;
  const double invN = 1.0 / static_cast<double>(N);
  auto rimN = sample_boundary(domain.polygon, 4000);
  std::vector<Vec2> band;
  for (const auto& s : rimN)
    for (int dx = -2; dx <= 2; ++dx)
      for (int dy = -2; dy <= 2; ++dy) {
        Vec2 z{(std::round(s.p.x * N) + dx) * invN,
               (std::round(s.p.y * N) + dy) * invN};
        if (z.x < 0 || z.y < 0 || z.x + z.y > 1.0) continue;
        if (!domain.grid.contains(z)) continue;
        band.push_back(z);
      }
  std::sort(band.begin(), band.end(), [](const Vec2& a, const Vec2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  band.erase(std::unique(band.begin(), band.end(),
                         [](const Vec2& a, const Vec2& b) {
                           return a.x == b.x && a.y == b.y;
                         }),
             band.end());
  for (const auto& z : band) {
    int active = 0;
    Vec gN(2, 0.0);
    for (int j = 0; j < net.transitions; ++j) {
      Vec2 cand{z.x + net.jumps[j][0] * invN, z.y + net.jumps[j][1] * invN};
      if (domain.grid.contains(cand)) continue;
      ++active;
      double bj = net.rate(j, {z.x, z.y});
      gN[0] += bj * net.jumps[j][0];
      gN[1] += bj * net.jumps[j][1];
    }
    if (active == 0) continue;
    ++active_points;
    Vec g = u.gradient({z.x, z.y});
    double val = (-gN[0] * g[0] - gN[1] * g[1]) / active;
    if (val < rho) {
      rho = val;
      w5 = {{"z", {z.x, z.y}}, {"active", active}, {"value", val}};
    }
  }
  rep.items.push_back({"reflection_term_coercive",
                       active_points > 0 && rho > 0.0,
                       {{"rho", active_points > 0 ? rho : 0.0},
                        {"active_points", active_points},
                        {"N", N},
                        {"witness", w5}}});
  return rep;
}

}  // namespace ldp
