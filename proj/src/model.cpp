#include "ldp/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ldp {

bool in_simplex(const Vec& z, double cap, double tol) {
  double sum = 0.0;
  for (double zi : z) {
    if (zi < -tol) return false;
    sum += zi;
  }
  return sum <= cap + tol;
}

Vec project_to_simplex(const Vec& z, double cap) {
  Vec p(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::max(z[i], 0.0);
    sum += p[i];
  }
  if (sum <= cap) return p;
  // Project onto {z >= 0, sum = cap}: subtract the usual sorted threshold.
  Vec s = p;
  std::sort(s.begin(), s.end(), std::greater<double>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    cum += s[i];
    double cand = (cum - cap) / static_cast<double>(i + 1);
    if (i + 1 == s.size() || s[i + 1] <= cand) {
      theta = cand;
      break;
    }
  }
  for (auto& pi : p) pi = std::max(pi - theta, 0.0);
  return p;
}

double ReactionNetwork::rate(int j, const Vec& z) const {
  if (in_simplex(z, simplex_cap, 0.0)) return std::max(raw_rates[j](z), 0.0);
  if (!in_simplex(z, simplex_cap, 1e-9))
    throw std::domain_error("rate evaluated far outside the simplex");
  Vec proj = project_to_simplex(z, simplex_cap);
  return std::max(raw_rates[j](proj), 0.0);
}

void ReactionNetwork::rates_into(const Vec& z, double* out) const {
  if (in_simplex(z, simplex_cap, 0.0)) {
    for (int j = 0; j < transitions; ++j) out[j] = std::max(raw_rates[j](z), 0.0);
    return;
  }
  for (int j = 0; j < transitions; ++j) out[j] = rate(j, z);
}

namespace {

void require_nonneg(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v))
    throw std::invalid_argument(std::string("parameter '") + name +
                                "' must be a nonnegative finite number");
}

}  // namespace

ReactionNetwork build_siv(const SivParams& p) {
  require_nonneg(p.beta, "beta");
  require_nonneg(p.chi, "chi");
  require_nonneg(p.eta, "eta");
  require_nonneg(p.gamma, "gamma");
  require_nonneg(p.mu, "mu");
  require_nonneg(p.theta, "theta");
  if (p.chi > 1.0)
    throw std::invalid_argument("parameter 'chi' must lie in [0,1]");

  ReactionNetwork net;
  net.dim = 2;
  net.transitions = 7;
  net.jumps = {{1, 0}, {1, -1}, {-1, 0}, {0, -1}, {0, 1}, {-1, 0}, {0, -1}};
  const double beta = p.beta, chi = p.chi, eta = p.eta;
  const double gamma = p.gamma, mu = p.mu, theta = p.theta;
  net.raw_rates = {
      [beta](const Vec& z) { return beta * z[0] * (1.0 - z[0] - z[1]); },
      [chi, beta](const Vec& z) { return chi * beta * z[0] * z[1]; },
      [gamma](const Vec& z) { return gamma * z[0]; },
      [theta](const Vec& z) { return theta * z[1]; },
      [eta](const Vec& z) { return eta * (1.0 - z[0] - z[1]); },
      [mu](const Vec& z) { return mu * z[0]; },
      [mu](const Vec& z) { return mu * z[1]; },
  };
  // Exact suprema over the simplex: z1(1-z1-z2) and z1 z2 peak at 1/4,
  // the linear rates at their coefficient.
  net.sup_rate = std::max({beta / 4.0, chi * beta / 4.0, gamma, theta, eta, mu});
  net.analytic_lipschitz = std::max(
      {std::sqrt(2.0) * beta, chi * beta, gamma, theta, std::sqrt(2.0) * eta, mu});
  return net;
}

ReactionNetwork build_s0is1(const S0is1Params& p) {
  require_nonneg(p.beta, "beta");
  require_nonneg(p.alpha, "alpha");
  require_nonneg(p.mu, "mu");
  require_nonneg(p.r, "r");

  ReactionNetwork net;
  net.dim = 2;
  net.transitions = 5;
  net.jumps = {{1, 0}, {-1, 1}, {-1, 0}, {1, -1}, {0, -1}};
  const double beta = p.beta, alpha = p.alpha, mu = p.mu, r = p.r;
  net.raw_rates = {
      [beta](const Vec& x) { return beta * x[0] * (1.0 - x[0] - x[1]); },
      [alpha](const Vec& x) { return alpha * x[0]; },
      [mu](const Vec& x) { return mu * x[0]; },
      [r, beta](const Vec& x) { return r * beta * x[0] * x[1]; },
      [mu](const Vec& x) { return mu * x[1]; },
  };
  net.sup_rate = std::max({beta / 4.0, alpha, mu, r * beta / 4.0});
  net.analytic_lipschitz =
      std::max({std::sqrt(2.0) * beta, alpha, mu, r * beta});
  return net;
}

Vec drift(const ReactionNetwork& net, const Vec& z) {
  if (static_cast<int>(z.size()) != net.dim)
    throw std::invalid_argument("drift: state dimension mismatch");
  if (!in_simplex(z, net.simplex_cap, 1e-9))
    throw std::domain_error("drift: state outside the simplex");
  Vec b(net.dim, 0.0);
  for (int j = 0; j < net.transitions; ++j) {
    double bj = net.rate(j, z);
    for (int i = 0; i < net.dim; ++i) b[i] += bj * net.jumps[j][i];
  }
  return b;
}

Vec snap_initial(const Vec& z, const MembershipFn& inside, std::int64_t N) {
  if (N < 1) throw std::invalid_argument("snap_initial: N must be >= 1");
  const int d = static_cast<int>(z.size());
  std::vector<std::int64_t> base(d);
  for (int i = 0; i < d; ++i)
    base[i] = static_cast<std::int64_t>(
        std::floor(z[i] * static_cast<double>(N) + 1e-9));

  auto lattice_point = [&](const std::vector<std::int64_t>& c) {
    Vec p(d);
    for (int i = 0; i < d; ++i)
      p[i] = static_cast<double>(c[i]) / static_cast<double>(N);
    return p;
  };
  auto valid = [&](const std::vector<std::int64_t>& c) {
    std::int64_t sum = 0;
    for (auto ci : c) {
      if (ci < 0) return false;
      sum += ci;
    }
    if (sum > N) return false;
    return inside(lattice_point(c));
  };

  if (valid(base)) return lattice_point(base);

  // Expanding search over lattice offsets, nearest (then lexicographically
  // smallest) point of the region wins.
  std::vector<std::int64_t> best;
  double best_dist = std::numeric_limits<double>::infinity();
  const double invN = 1.0 / static_cast<double>(N);
  for (std::int64_t radius = 1; radius <= N + 1; ++radius) {
    if (!best.empty() &&
        best_dist <= static_cast<double>(radius - 1) * invN)
      break;
    std::vector<std::int64_t> c(d);
    std::vector<std::int64_t> off(d, -radius);
    while (true) {
      bool on_shell = false;
      for (int i = 0; i < d; ++i)
        if (std::llabs(off[i]) == radius) on_shell = true;
      if (on_shell) {
        for (int i = 0; i < d; ++i) c[i] = base[i] + off[i];
        if (valid(c)) {
          Vec p = lattice_point(c);
          double dist = 0.0;
          for (int i = 0; i < d; ++i) dist += (p[i] - z[i]) * (p[i] - z[i]);
          dist = std::sqrt(dist);
          if (dist < best_dist - 1e-15 ||
              (std::abs(dist - best_dist) <= 1e-15 && c < best)) {
            best_dist = dist;
            best = c;
          }
        }
      }
      int i = d - 1;
      while (i >= 0 && off[i] == radius) off[i--] = -radius;
      if (i < 0) break;
      ++off[i];
    }
  }
  if (best.empty())
    throw std::runtime_error("snap_initial: no lattice point of the region");
  return lattice_point(best);
}

double lipschitz_estimate(const ReactionNetwork& net, double grid_step) {
  if (!(grid_step > 0.0))
    throw std::invalid_argument("lipschitz_estimate: grid_step must be > 0");
  const int d = net.dim;
  std::vector<Vec> dirs;
  for (int i = 0; i < d; ++i) {
    Vec e(d, 0.0);
    e[i] = 1.0;
    dirs.push_back(e);
  }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      Vec e(d, 0.0);
      e[i] = 1.0;
      e[j] = 1.0;
      dirs.push_back(e);
      e[j] = -1.0;
      dirs.push_back(e);
    }
  for (auto& e : dirs) {
    double n = 0.0;
    for (double c : e) n += c * c;
    n = std::sqrt(n);
    for (auto& c : e) c /= n;
  }

  double best = 0.0;
  const double h = grid_step;
  std::vector<std::int64_t> idx(d, 0);
  const std::int64_t m = static_cast<std::int64_t>(std::floor(1.0 / h));
  // Enumerate the grid of the simplex (d is small here).
  std::function<void(int, double)> walk = [&](int coord, double used) {
    if (coord == d) {
      Vec z(d);
      for (int i = 0; i < d; ++i) z[i] = static_cast<double>(idx[i]) * h;
      for (const auto& e : dirs) {
        Vec y(d);
        for (int i = 0; i < d; ++i) y[i] = z[i] + h * e[i];
        if (!in_simplex(y, net.simplex_cap, 0.0)) continue;
        for (int j = 0; j < net.transitions; ++j) {
          double q = std::abs(net.rate(j, y) - net.rate(j, z)) / h;
          if (q > best) best = q;
        }
      }
      return;
    }
    for (std::int64_t v = 0; v * h + used <= 1.0 + 1e-12 && v <= m; ++v) {
      idx[coord] = v;
      walk(coord + 1, used + static_cast<double>(v) * h);
    }
  };
  walk(0, 0.0);
  return best;
}

}  // namespace ldp
