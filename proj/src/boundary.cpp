#include "ldp/boundary.hpp"

#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ldp {

std::string to_string(ModelKind m) {
  return m == ModelKind::siv ? "siv" : "s0is1";
}

namespace {

using state_type = std::vector<double>;

constexpr int kFaceAxis = 0;      // z2 = 0
constexpr int kFaceDiagonal = 1;  // z1 + z2 = 1
constexpr int kFaceVertical = 2;  // z1 = 0

struct BranchTrace {
  std::vector<double> tau;  // reverse time from the saddle offset point
  std::vector<Vec2> pts;
  int face = -1;            // which simplex face terminated the branch
};

// Reverse-time shooting: integrates dy/dtau = -b(y) until a simplex face is
// crossed; records points with bounded spatial spacing.
BranchTrace trace_branch(const ReactionNetwork& net, const Vec& start,
                         double tol, int max_steps, double ds_max) {
  namespace odeint = boost::numeric::odeint;
  auto rhs = [&net](const state_type& x, state_type& dxdt, double) {
    Vec b = drift(net, project_to_simplex(x, net.simplex_cap));
    for (std::size_t i = 0; i < b.size(); ++i) dxdt[i] = -b[i];
  };
  auto stepper = odeint::make_dense_output(
      tol, tol, odeint::runge_kutta_dopri5<state_type>());
  state_type x = start;
  stepper.initialize(x, 0.0, 1e-4);

  BranchTrace out;
  auto record = [&](double tau, const state_type& s) {
    Vec2 p{s[0], s[1]};
    if (!out.pts.empty() && norm(p - out.pts.back()) < 1e-12) return;
    out.tau.push_back(tau);
    out.pts.push_back(p);
  };
  record(0.0, x);

  auto crossed = [](const Vec2& p) {
    if (p.y < 0.0) return kFaceAxis;
    if (1.0 - p.x - p.y < 0.0) return kFaceDiagonal;
    if (p.x < 0.0) return kFaceVertical;
    return -1;
  };

  for (int step = 0; step < max_steps; ++step) {
    double t_prev = stepper.current_time();
    stepper.do_step(rhs);
    double t_cur = stepper.current_time();
    state_type s(2);
    stepper.calc_state(t_cur, s);
    int face = crossed(Vec2{s[0], s[1]});
    if (face >= 0) {
      // Bisect the crossing time of the first face reached.
      double lo = t_prev, hi = t_cur;
      int hit = face;
      for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        stepper.calc_state(mid, s);
        int f = crossed(Vec2{s[0], s[1]});
        if (f >= 0) {
          hi = mid;
          hit = f;
        } else {
          lo = mid;
        }
        if (hi - lo < 1e-15 * (1.0 + hi)) break;
      }
      stepper.calc_state(hi, s);
      Vec2 p{s[0], s[1]};
      // Snap exactly onto the face.
      if (hit == kFaceAxis) p.y = 0.0;
      if (hit == kFaceVertical) p.x = 0.0;
      if (hit == kFaceDiagonal) {
        double ex = std::clamp(p.x, 0.0, 1.0);
        p = Vec2{ex, 1.0 - ex};
      }
      record(hi, {p.x, p.y});
      out.face = hit;
      return out;
    }
    // Subdivide long steps so the polyline spacing stays below ds_max.
    state_type s_prev(2);
    stepper.calc_state(t_prev, s_prev);
    stepper.calc_state(t_cur, s);
    double ds = std::hypot(s[0] - s_prev[0], s[1] - s_prev[1]);
    int pieces = std::max(1, static_cast<int>(std::ceil(ds / ds_max)));
    for (int i = 1; i <= pieces; ++i) {
      double ti = t_prev + (t_cur - t_prev) * i / pieces;
      state_type si(2);
      stepper.calc_state(ti, si);
      record(ti, si);
    }
  }
  throw std::runtime_error(
      "compute_separatrix: branch did not reach the simplex boundary "
      "within the step budget");
}

double polyline_hausdorff(const std::vector<Vec2>& a,
                          const std::vector<Vec2>& b) {
  auto one_sided = [](const std::vector<Vec2>& from,
                      const std::vector<Vec2>& to) {
    double worst = 0.0;
    std::size_t stride = std::max<std::size_t>(1, from.size() / 256);
    for (std::size_t i = 0; i < from.size(); i += stride) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j + 1 < to.size(); ++j)
        best = std::min(best,
                        point_segment_distance(from[i], to[j], to[j + 1]));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one_sided(a, b), one_sided(b, a));
}

struct AssembledCurve {
  std::vector<double> u;
  std::vector<Vec2> pts;
  std::size_t saddle_index;
};

AssembledCurve assemble(const BranchTrace& to_axis, const BranchTrace& to_diag,
                        const Vec2& saddle) {
  AssembledCurve out;
  // Axis branch recorded saddle->B; reverse it so B comes first, with the
  // forward-flow parameter t = tau_end - tau mapped to u = t/(1+t).
  double tau_end = to_axis.tau.back();
  for (std::size_t i = to_axis.pts.size(); i-- > 0;) {
    double t_fwd = tau_end - to_axis.tau[i];
    out.u.push_back(t_fwd / (1.0 + t_fwd));
    out.pts.push_back(to_axis.pts[i]);
  }
  out.saddle_index = out.pts.size();
  out.u.push_back(1.0);
  out.pts.push_back(saddle);
  double tau_end2 = to_diag.tau.back();
  for (std::size_t i = 0; i < to_diag.pts.size(); ++i) {
    double t_fwd = tau_end2 - to_diag.tau[i];
    out.u.push_back(2.0 - t_fwd / (1.0 + t_fwd));
    out.pts.push_back(to_diag.pts[i]);
  }
  return out;
}

}  // namespace

BoundaryCurve compute_separatrix(const ReactionNetwork& net, const Vec& saddle,
                                 double offset, int max_u_steps) {
  if (net.dim != 2)
    throw std::invalid_argument("compute_separatrix: planar models only");
  JacobianInfo info = jacobian(net, saddle);
  if (info.stability != Stability::saddle)
    throw std::invalid_argument(
        "compute_separatrix: the given point is not a saddle");

  // Stable eigenvector of the 2x2 Jacobian.
  double ls = std::min(info.eigenvalues[0].real(), info.eigenvalues[1].real());
  const auto& J = info.matrix;
  Vec2 v1{J[0][1], ls - J[0][0]};
  Vec2 v2{ls - J[1][1], J[1][0]};
  Vec2 vs = norm(v1) >= norm(v2) ? v1 : v2;
  vs = (1.0 / norm(vs)) * vs;

  Vec2 zt{saddle[0], saddle[1]};
  auto run = [&](double tol, double ds_max) {
    Vec up{saddle[0] + offset * vs.x, saddle[1] + offset * vs.y};
    Vec dn{saddle[0] - offset * vs.x, saddle[1] - offset * vs.y};
    BranchTrace b1 = trace_branch(net, up, tol, max_u_steps, ds_max);
    BranchTrace b2 = trace_branch(net, dn, tol, max_u_steps, ds_max);
    if (b1.face == kFaceAxis && b2.face == kFaceDiagonal)
      return assemble(b1, b2, zt);
    if (b2.face == kFaceAxis && b1.face == kFaceDiagonal)
      return assemble(b2, b1, zt);
    throw std::runtime_error(
        "compute_separatrix: branches did not hit the expected faces "
        "(axis and diagonal)");
  };

  AssembledCurve prev = run(1e-8, 2e-3);
  AssembledCurve cur;
  double tol = 1e-9;
  for (int round = 0; round < 4; ++round, tol /= 10.0) {
    cur = run(tol, 1e-3);
    if (polyline_hausdorff(prev.pts, cur.pts) < 1e-4) break;
    prev = cur;
  }

  BoundaryCurve curve;
  curve.u = std::move(cur.u);
  curve.pts = std::move(cur.pts);
  curve.saddle_index = cur.saddle_index;
  curve.saddle = zt;
  return curve;
}

namespace {

// z0 feasibility predicates from the model-specific constructions: the
// nullcline sign conditions plus the slope constraints measured on the
// computed curve.
struct Z0Constraints {
  std::function<bool(const Vec2&)> ok;
  nlohmann::json witness;
};

double curve_slope(const ReactionNetwork& net, const Vec2& p) {
  Vec b = drift(net, {p.x, p.y});
  if (std::abs(b[0]) < 1e-14) return std::numeric_limits<double>::infinity();
  return b[1] / b[0];
}

Z0Constraints siv_constraints(const BoundaryCurve& curve,
                              const ReactionNetwork& net) {
  Vec2 B = curve.b_end();
  // Ball around B on which the curve slope stays above a positive nu.
  double R1 = 0.45 * norm(curve.saddle - B);
  double nu = std::numeric_limits<double>::infinity();
  Vec2 ball_exit = curve.saddle;
  for (std::size_t i = 0; i <= curve.saddle_index; ++i) {
    const Vec2& p = curve.pts[i];
    if (norm(p - B) > R1) {
      ball_exit = p;
      break;
    }
    if (p.y <= 1e-12) continue;
    double s = curve_slope(net, p);
    if (std::isfinite(s)) nu = std::min(nu, s);
  }
  if (!std::isfinite(nu)) nu = 1e6;  // near-vertical everywhere in the ball
  double max_curve_x = 0.0;
  for (const auto& p : curve.pts) max_curve_x = std::max(max_curve_x, p.x);
  double y_cap = ball_exit.y;

  Z0Constraints c;
  c.witness = {{"R1", R1}, {"nu", nu}, {"max_curve_x", max_curve_x},
               {"y_cap", y_cap}};
  ReactionNetwork netc = net;
  c.ok = [netc, nu, max_curve_x, y_cap](const Vec2& z) {
    Vec b = drift(netc, {z.x, z.y});
    return b[0] < 0.0 && b[1] < 0.0 &&       // above both nullclines
           z.y < nu * z.x &&                 // below the slope line at B
           z.x > max_curve_x &&              // right of the vertical through E
           z.y < y_cap;                      // below the ball exit height
  };
  return c;
}

Z0Constraints s0is1_constraints(const BoundaryCurve& curve,
                                const ReactionNetwork& net) {
  Vec2 B = curve.b_end();
  Vec2 F = curve.e_end();
  const double d = B.x;

  // Slope of the tangent line bound at B: drift direction on the axis.
  double m3 = curve_slope(net, Vec2{1e-7, 0.0});
  double R3 = 0.45 * norm(curve.saddle - B);
  for (std::size_t i = 0; i <= curve.saddle_index; ++i) {
    const Vec2& p = curve.pts[i];
    double r = norm(p - B);
    if (r > R3) break;
    double s = curve_slope(net, p);
    if (std::isfinite(s) && s <= m3) {
      R3 = std::max(1e-3, r);
      break;
    }
  }
  // Near F the tangent is steep; omega is the mildest descent slope there.
  double R2 = 0.45 * norm(curve.saddle - F);
  double omega = std::numeric_limits<double>::infinity();
  for (std::size_t i = curve.pts.size(); i-- > curve.saddle_index + 1;) {
    const Vec2& p = curve.pts[i];
    if (norm(p - F) > R2) break;
    double s = curve_slope(net, p);
    if (std::isfinite(s)) omega = std::min(omega, -s);
  }
  if (!std::isfinite(omega)) omega = 1e6;

  Z0Constraints c;
  c.witness = {{"d", d},   {"m3", m3},       {"R3", R3},
               {"R2", R2}, {"omega", omega}, {"z0_y", 1.0 - d}};
  ReactionNetwork netc = net;
  c.ok = [netc, B, F, d, m3, R3, R2, omega](const Vec2& z) {
    if (std::abs(z.y - (1.0 - d)) > 1e-12) return false;  // line through G
    Vec b = drift(netc, {z.x, z.y});
    if (!(b[0] < 0.0 && b[1] > 0.0)) return false;  // below both nullclines
    if (omega <= 1.0) return false;
    if (!(z.x > (1.0 - z.y) / omega)) return false;          // right of D2.2
    if (!(z.x > B.x + z.y / m3)) return false;               // right of D2.3
    if (!(std::abs(z.x - d) < R3)) return false;             // axis projection
    Vec2 proj{0.0, z.x + z.y};                               // diag projection
    if (!(norm(proj - F) < R2)) return false;
    return true;
  };
  return c;
}

}  // namespace

bool z0_constraints_satisfied(const BoundaryCurve& curve, ModelKind model,
                              const ReactionNetwork& net, const Vec& z0) {
  Z0Constraints cons = model == ModelKind::siv
                           ? siv_constraints(curve, net)
                           : s0is1_constraints(curve, net);
  return cons.ok(Vec2{z0[0], z0[1]});
}

DomainSpec build_domain(const BoundaryCurve& curve, ModelKind model,
                        const ReactionNetwork& net) {
  DomainSpec dom;
  dom.model = model;
  dom.curve = curve;

  std::vector<Vec2> poly = curve.pts;  // B .. saddle .. E/F
  poly.push_back(Vec2{1.0, 0.0});      // diagonal then axis close the region
  if (polygon_signed_area(poly) < 0.0) std::reverse(poly.begin(), poly.end());
  dom.polygon = poly;
  dom.grid = MembershipGrid(dom.polygon, 512);

  Z0Constraints cons = model == ModelKind::siv
                           ? siv_constraints(curve, net)
                           : s0is1_constraints(curve, net);

  Vec2 best{0, 0};
  double best_dist = -1.0;
  if (model == ModelKind::siv) {
    for (double x = 0.0; x <= 1.0; x += 0.005) {
      for (double y = 0.0; x + y <= 1.0; y += 0.005) {
        Vec2 z{x, y};
        if (!cons.ok(z)) continue;
        if (!dom.grid.contains(z)) continue;
        double dist = polygon_distance(dom.polygon, z);
        if (dist > best_dist + 1e-12) {
          best_dist = dist;
          best = z;
        }
      }
    }
  } else {
    double y = 1.0 - curve.b_end().x;
    for (double x = 0.0; x + y <= 1.0; x += 0.001) {
      Vec2 z{x, y};
      if (!cons.ok(z)) continue;
      if (!dom.grid.contains(z)) continue;
      double dist = polygon_distance(dom.polygon, z);
      if (dist > best_dist + 1e-12) {
        best_dist = dist;
        best = z;
      }
    }
  }
  if (best_dist <= 0.0)
    throw std::runtime_error(
        "build_domain: no interior point satisfies the z0 constraints (" +
        cons.witness.dump() + ")");
  dom.z0 = {best.x, best.y};
  dom.interior_ref = dom.z0;
  return dom;
}

bool membership(const DomainSpec& domain, const Vec& z) {
  return domain.grid.contains(Vec2{z[0], z[1]});
}

double distance_to_boundary(const DomainSpec& domain, const Vec& z) {
  return polygon_distance(domain.polygon, Vec2{z[0], z[1]});
}

bool AssumptionReport::all_pass() const {
  for (const auto& it : items)
    if (!it.pass) return false;
  return true;
}

const CheckItem& AssumptionReport::item(const std::string& name) const {
  for (const auto& it : items)
    if (it.name == name) return it;
  throw std::out_of_range("no check item named '" + name + "'");
}

nlohmann::json AssumptionReport::to_json() const {
  nlohmann::json j;
  j["check"] = check;
  j["pass"] = all_pass();
  j["items"] = nlohmann::json::array();
  for (const auto& it : items)
    j["items"].push_back(
        {{"name", it.name}, {"pass", it.pass}, {"details", it.details}});
  return j;
}

}  // namespace ldp
