#include "ldp/fluid.hpp"

#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <stdexcept>

namespace ldp {

namespace {

using state_type = std::vector<double>;

// Snap round-off excursions (< 1e-12) back onto the simplex.
void tidy_state(Vec& z, double cap) {
  for (auto& zi : z)
    if (zi < 0.0 && zi > -1e-12) zi = 0.0;
  double sum = 0.0;
  for (double zi : z) sum += zi;
  if (sum > cap && sum < cap + 1e-12) {
    double scale = cap / sum;
    for (auto& zi : z) zi *= scale;
  }
}

template <class Rhs>
OdeSolution integrate_system(Rhs rhs, const Vec& x0, double t_end, double tol,
                             double cap) {
  namespace odeint = boost::numeric::odeint;
  OdeSolution sol;
  if (t_end == 0.0) {
    sol.times = {0.0};
    sol.states = {x0};
    Vec d0(x0.size());
    rhs(x0, d0, 0.0);
    sol.derivs = {d0};
    return sol;
  }

  auto stepper = odeint::make_dense_output(
      tol, tol, odeint::runge_kutta_dopri5<state_type>());
  state_type x = x0;
  stepper.initialize(x, 0.0, std::min(1e-3, t_end));

  // Output grid fine enough that cubic Hermite interpolation stays well
  // below the integrator tolerance for these smooth planar fields.
  const double h_out = std::min(0.02, t_end / 64.0);

  auto push = [&](double t, const state_type& s) {
    Vec z(s.begin(), s.end());
    tidy_state(z, cap);
    Vec d(z.size());
    rhs(z, d, t);
    sol.times.push_back(t);
    sol.states.push_back(z);
    sol.derivs.push_back(d);
  };
  push(0.0, x);

  double t_emit = h_out;
  while (stepper.current_time() < t_end) {
    try {
      stepper.do_step(rhs);
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("ODE step failed: ") + e.what());
    }
    double t_hi = std::min(stepper.current_time(), t_end);
    while (t_emit < t_hi + 1e-15) {
      state_type xi(x0.size());
      stepper.calc_state(std::min(t_emit, t_hi), xi);
      push(std::min(t_emit, t_hi), xi);
      t_emit += h_out;
    }
  }
  if (sol.times.back() < t_end - 1e-15) {
    state_type xi(x0.size());
    stepper.calc_state(t_end, xi);
    push(t_end, xi);
  } else {
    sol.times.back() = t_end;
  }
  return sol;
}

}  // namespace

Vec OdeSolution::eval(double t) const {
  if (times.size() == 1 || t <= times.front()) return states.front();
  if (t >= times.back()) return states.back();
  auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t i = static_cast<std::size_t>(it - times.begin()) - 1;
  double h = times[i + 1] - times[i];
  double s = (t - times[i]) / h;
  double s2 = s * s, s3 = s2 * s;
  double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  Vec out(states[i].size());
  for (std::size_t c = 0; c < out.size(); ++c)
    out[c] = h00 * states[i][c] + h10 * h * derivs[i][c] +
             h01 * states[i + 1][c] + h11 * h * derivs[i + 1][c];
  return out;
}

OdeSolution integrate(const ReactionNetwork& net, const Vec& z0, double T,
                      double tol) {
  if (!in_simplex(z0, net.simplex_cap, 1e-9))
    throw std::domain_error("integrate: initial state outside the simplex");
  if (T < 0.0) throw std::invalid_argument("integrate: negative horizon");
  auto rhs = [&net](const state_type& x, state_type& dxdt, double) {
    Vec b = drift(net, project_to_simplex(x, net.simplex_cap));
    dxdt.assign(b.begin(), b.end());
  };
  return integrate_system(rhs, z0, T, tol, net.simplex_cap);
}

OdeSolution integrate_rescaled(const ReactionNetwork& net, const Vec& y0,
                               double u_end, double tol) {
  if (u_end >= 1.0)
    throw std::invalid_argument("integrate_rescaled: u_end must be < 1");
  if (!in_simplex(y0, net.simplex_cap, 1e-9))
    throw std::domain_error("integrate_rescaled: initial state outside A");
  auto rhs = [&net](const state_type& x, state_type& dxdt, double u) {
    Vec b = drift(net, project_to_simplex(x, net.simplex_cap));
    double w = 1.0 / ((1.0 - u) * (1.0 - u));
    for (std::size_t i = 0; i < b.size(); ++i) dxdt[i] = w * b[i];
  };
  return integrate_system(rhs, y0, u_end, tol, net.simplex_cap);
}

std::string to_string(Stability s) {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::saddle: return "saddle";
    case Stability::unstable: return "unstable";
    default: return "marginal";
  }
}

JacobianInfo jacobian(const ReactionNetwork& net, const Vec& z, double step) {
  const int d = net.dim;
  for (int i = 0; i < d; ++i) {
    Vec lo = z, hi = z;
    lo[i] -= step;
    hi[i] += step;
    if (!in_simplex(lo, net.simplex_cap, 0.0) ||
        !in_simplex(hi, net.simplex_cap, 0.0))
      throw std::domain_error(
          "jacobian: point too close to the simplex boundary for the stencil");
  }
  JacobianInfo info;
  info.matrix.assign(d, Vec(d, 0.0));
  for (int c = 0; c < d; ++c) {
    Vec lo = z, hi = z;
    lo[c] -= step;
    hi[c] += step;
    Vec blo = drift(net, lo), bhi = drift(net, hi);
    for (int r = 0; r < d; ++r)
      info.matrix[r][c] = (bhi[r] - blo[r]) / (2.0 * step);
  }

  if (d == 1) {
    info.eigenvalues = {std::complex<double>(info.matrix[0][0], 0.0)};
  } else if (d == 2) {
    double tr = info.matrix[0][0] + info.matrix[1][1];
    double det = info.matrix[0][0] * info.matrix[1][1] -
                 info.matrix[0][1] * info.matrix[1][0];
    double disc = tr * tr / 4.0 - det;
    if (disc >= 0.0) {
      double root = std::sqrt(disc);
      info.eigenvalues = {std::complex<double>(tr / 2.0 - root, 0.0),
                          std::complex<double>(tr / 2.0 + root, 0.0)};
    } else {
      double im = std::sqrt(-disc);
      info.eigenvalues = {std::complex<double>(tr / 2.0, -im),
                          std::complex<double>(tr / 2.0, im)};
    }
  } else {
    throw std::invalid_argument("jacobian: eigenvalues implemented for d<=2");
  }

  int neg = 0, pos = 0;
  for (auto& ev : info.eigenvalues) {
    if (ev.real() < -1e-9) ++neg;
    if (ev.real() > 1e-9) ++pos;
  }
  if (neg == d)
    info.stability = Stability::stable;
  else if (pos == d)
    info.stability = Stability::unstable;
  else if (neg > 0 && pos > 0)
    info.stability = Stability::saddle;
  else
    info.stability = Stability::marginal;
  return info;
}

double EquilibriumSet::threshold(const std::string& name) const {
  for (const auto& [k, v] : thresholds)
    if (k == name) return v;
  throw std::out_of_range("unknown threshold '" + name + "'");
}

EquilibriumSet equilibria_siv(const SivParams& p) {
  if (p.beta <= 0.0)
    throw std::invalid_argument("equilibria_siv: beta must be positive");
  const double mg = p.mu + p.gamma;   // mu + gamma
  const double mt = p.mu + p.theta;   // mu + theta
  EquilibriumSet out;
  out.dfe = {0.0, p.eta / (mt + p.eta)};

  const double D1 = -p.beta * p.chi;
  const double D2 = p.chi * (p.beta - mg) - (mt + p.chi * p.eta);
  const double D3 = (mt + p.eta) * (1.0 - mg / p.beta) - (1.0 - p.chi) * p.eta;

  const double beta0 = mg * (mt + p.eta) / (mt + p.chi * p.eta);
  // The published beta1 formula divides by a symbol that collides with the
  // rate supremum; reading it as chi reproduces the two-equilibria regime of
  // the fitted parameters, so that reading is the default. Both are reported.
  auto beta1_with = [&](double s) {
    return mg - (mt + p.chi * p.eta) / s +
           (2.0 / p.chi) * std::sqrt(mg * s * (1.0 - p.chi) * p.eta);
  };
  out.thresholds.emplace_back("beta0", beta0);
  if (p.chi > 0.0) {
    out.thresholds.emplace_back("beta1", beta1_with(p.chi));
    double sup_rate = std::max(
        {p.beta / 4.0, p.chi * p.beta / 4.0, p.gamma, p.theta, p.eta, p.mu});
    if (sup_rate > 0.0)
      out.thresholds.emplace_back("beta1_sup_rate_reading",
                                  beta1_with(sup_rate));
  }
  out.thresholds.emplace_back("two_eq_lhs",
                              (mt + p.chi * p.eta) * (mt + p.chi * p.eta));
  out.thresholds.emplace_back("two_eq_rhs",
                              mg * p.chi * (1.0 - p.chi) * p.eta);

  auto second_coord = [&](double z1) {
    return p.eta * (1.0 - z1) / (mt + p.eta + p.beta * p.chi * z1);
  };

  std::vector<double> roots;
  if (std::abs(D1) < 1e-14) {
    if (std::abs(D2) > 1e-14) roots.push_back(-D3 / D2);
  } else {
    double disc = D2 * D2 - 4.0 * D1 * D3;
    if (disc >= 0.0) {
      double q = -(D2 + std::copysign(std::sqrt(disc), D2)) / 2.0;
      roots.push_back(q / D1);
      if (std::abs(q) > 1e-300) roots.push_back(D3 / q);
    }
  }
  std::vector<Vec> endemic;
  for (double x : roots) {
    if (!(x > 1e-12 && x < 1.0)) continue;
    double y = second_coord(x);
    if (y >= 0.0 && x + y <= 1.0 + 1e-12) endemic.push_back({x, y});
  }
  std::sort(endemic.begin(), endemic.end(),
            [](const Vec& a, const Vec& b) { return a[0] < b[0]; });
  if (endemic.size() == 2) {
    out.regime = EndemicRegime::two;
    out.endemic_unstable = endemic[0];
    out.endemic_stable = endemic[1];
  } else if (endemic.size() == 1) {
    out.regime = EndemicRegime::one;
    out.endemic_stable = endemic[0];
  }
  return out;
}

EquilibriumSet equilibria_s0is1(const S0is1Params& p) {
  if (p.alpha + p.mu <= 0.0)
    throw std::invalid_argument("equilibria_s0is1: alpha + mu must be positive");
  EquilibriumSet out;
  out.dfe = {0.0, 0.0};
  const double R0 = p.beta / (p.alpha + p.mu);
  out.thresholds.emplace_back("R0", R0);
  if (p.r > 0.0) {
    double beta_star =
        std::pow(std::sqrt(p.mu * (p.r - 1.0)) + std::sqrt(p.alpha), 2.0) / p.r;
    out.thresholds.emplace_back("R0_star", beta_star / (p.alpha + p.mu));
    out.thresholds.emplace_back("r_threshold", 1.0 + p.mu / p.alpha);
  }
  if (R0 <= 0.0 || p.r <= 0.0) return out;

  const double base =
      1.0 - 1.0 / (p.r * R0) - p.mu / ((p.alpha + p.mu) * R0);
  const double disc =
      base * base + 4.0 * p.mu * (1.0 - 1.0 / R0) / ((p.alpha + p.mu) * p.r * R0);
  if (disc < 0.0) return out;

  auto second_coord = [&](double z1) {
    return p.alpha * z1 / (p.mu + p.r * p.beta * z1);
  };
  double root = std::sqrt(disc);
  std::vector<Vec> endemic;
  for (double x : {0.5 * (base - root), 0.5 * (base + root)}) {
    if (!(x > 1e-12 && x < 1.0)) continue;
    double y = second_coord(x);
    if (y >= 0.0 && x + y <= 1.0 + 1e-12) endemic.push_back({x, y});
  }
  std::sort(endemic.begin(), endemic.end(),
            [](const Vec& a, const Vec& b) { return a[0] < b[0]; });
  if (endemic.size() == 2) {
    out.regime = EndemicRegime::two;
    out.endemic_unstable = endemic[0];
    out.endemic_stable = endemic[1];
  } else if (endemic.size() == 1) {
    out.regime = EndemicRegime::one;
    out.endemic_stable = endemic[0];
  }
  return out;
}

}  // namespace ldp
