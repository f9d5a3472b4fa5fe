#include "ldp/rate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ldp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFeasTol = 1e-9;

// Dense solve with partial pivoting; returns false when singular.
bool solve_dense(std::vector<Vec> A, Vec b, Vec& out) {
  const std::size_t n = A.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    if (std::abs(A[piv][col]) < 1e-13) return false;
    std::swap(A[piv], A[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      double f = A[r][col] / A[col][col];
      for (std::size_t c = col; c < n; ++c) A[r][c] -= f * A[col][c];
      b[r] -= f * b[col];
    }
  }
  out.assign(n, 0.0);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t c = r + 1; c < n; ++c) s -= A[r][c] * out[c];
    out[r] = s / A[r][r];
  }
  return true;
}

// Least squares solution of the d x m system (m <= d columns) via normal
// equations; returns false when the columns are dependent.
bool solve_tall(const std::vector<Vec>& cols, const Vec& rhs, Vec& out,
                double& residual) {
  const std::size_t m = cols.size();
  const std::size_t d = rhs.size();
  std::vector<Vec> G(m, Vec(m, 0.0));
  Vec g(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t r = 0; r < d; ++r) G[i][j] += cols[i][r] * cols[j][r];
    for (std::size_t r = 0; r < d; ++r) g[i] += cols[i][r] * rhs[r];
  }
  if (!solve_dense(G, g, out)) return false;
  residual = 0.0;
  for (std::size_t r = 0; r < d; ++r) {
    double s = rhs[r];
    for (std::size_t i = 0; i < m; ++i) s -= cols[i][r] * out[i];
    residual += s * s;
  }
  residual = std::sqrt(residual);
  return true;
}

// Orthonormal-ish basis of the null space of the d x m matrix with the given
// columns, via Gaussian elimination on the transpose.
std::vector<Vec> null_space(const std::vector<Vec>& cols, int d) {
  const int m = static_cast<int>(cols.size());
  // Row-reduce the d x m matrix.
  std::vector<Vec> A(d, Vec(m, 0.0));
  for (int c = 0; c < m; ++c)
    for (int r = 0; r < d; ++r) A[r][c] = cols[c][r];
  std::vector<int> pivot_col;
  int row = 0;
  for (int col = 0; col < m && row < d; ++col) {
    int piv = row;
    for (int r = row + 1; r < d; ++r)
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    if (std::abs(A[piv][col]) < 1e-12) continue;
    std::swap(A[piv], A[row]);
    double scale = A[row][col];
    for (int c = 0; c < m; ++c) A[row][c] /= scale;
    for (int r = 0; r < d; ++r) {
      if (r == row) continue;
      double f = A[r][col];
      if (f == 0.0) continue;
      for (int c = 0; c < m; ++c) A[r][c] -= f * A[row][c];
    }
    pivot_col.push_back(col);
    ++row;
  }
  std::vector<bool> is_pivot(m, false);
  for (int c : pivot_col) is_pivot[c] = true;
  std::vector<Vec> basis;
  for (int freec = 0; freec < m; ++freec) {
    if (is_pivot[freec]) continue;
    Vec vbasis(m, 0.0);
    vbasis[freec] = 1.0;
    for (std::size_t pr = 0; pr < pivot_col.size(); ++pr)
      vbasis[pivot_col[pr]] = -A[pr][freec];
    basis.push_back(vbasis);
  }
  return basis;
}

void enumerate_subsets(int n, int max_size,
                       const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> subset;
  std::function<void(int)> rec = [&](int start) {
    if (!subset.empty()) fn(subset);
    if (static_cast<int>(subset.size()) == max_size) return;
    for (int i = start; i < n; ++i) {
      subset.push_back(i);
      rec(i + 1);
      subset.pop_back();
    }
  };
  rec(0);
}

}  // namespace

double local_rate(double nu, double omega) {
  if (nu < 0.0 || omega < 0.0)
    throw std::invalid_argument("local_rate: arguments must be nonnegative");
  if (nu == 0.0) return omega;
  if (omega == 0.0) return kInf;
  return nu * std::log(nu / omega) - nu + omega;
}

bool SliceSolution::feasible() const { return std::isfinite(value); }

SliceSolution slice_rate(const ReactionNetwork& net, const Vec& z,
                         const Vec& v) {
  const int d = net.dim;
  const int k = net.transitions;
  if (static_cast<int>(v.size()) != d)
    throw std::invalid_argument("slice_rate: velocity dimension mismatch");

  Vec beta(k);
  for (int j = 0; j < k; ++j) beta[j] = net.rate(j, z);

  std::vector<int> free_idx;
  double base = 0.0;
  for (int j = 0; j < k; ++j) {
    if (beta[j] < 1e-15)
      base += beta[j];  // mu_j forced to 0, costs f(0,beta_j) = beta_j
    else
      free_idx.push_back(j);
  }
  const int m = static_cast<int>(free_idx.size());
  std::vector<Vec> cols(m, Vec(d));
  for (int c = 0; c < m; ++c)
    for (int r = 0; r < d; ++r) cols[c][r] = net.jumps[free_idx[c]][r];

  double vnorm = 0.0;
  for (double vi : v) vnorm += vi * vi;
  vnorm = std::sqrt(vnorm);

  // Basic feasible solutions and extreme rays of {mu >= 0 : H mu = v}.
  std::vector<Vec> bfs;
  if (vnorm <= kFeasTol) bfs.push_back(Vec(m, 0.0));
  enumerate_subsets(m, d, [&](const std::vector<int>& S) {
    std::vector<Vec> sub;
    for (int c : S) sub.push_back(cols[c]);
    Vec sol;
    double res;
    if (!solve_tall(sub, v, sol, res)) return;
    if (res > kFeasTol * (1.0 + vnorm)) return;
    for (double s : sol)
      if (s < -kFeasTol) return;
    Vec full(m, 0.0);
    for (std::size_t i = 0; i < S.size(); ++i)
      full[S[i]] = std::max(sol[i], 0.0);
    for (const auto& existing : bfs) {
      double diff = 0.0;
      for (int c = 0; c < m; ++c) diff += std::abs(existing[c] - full[c]);
      if (diff < 1e-10) return;
    }
    bfs.push_back(full);
  });
  if (bfs.empty()) return {kInf, {}};

  std::vector<Vec> rays;
  enumerate_subsets(m, std::min(m, d + 1), [&](const std::vector<int>& S) {
    std::vector<Vec> sub;
    for (int c : S) sub.push_back(cols[c]);
    auto ns = null_space(sub, d);
    for (auto& nvec : ns) {
      bool nonneg = true, nonpos = true;
      for (double c : nvec) {
        if (c < -1e-12) nonneg = false;
        if (c > 1e-12) nonpos = false;
      }
      if (!nonneg && !nonpos) continue;
      Vec full(m, 0.0);
      double total = 0.0;
      for (std::size_t i = 0; i < S.size(); ++i) {
        double c = nonneg ? nvec[i] : -nvec[i];
        full[S[i]] = std::max(c, 0.0);
        total += full[S[i]];
      }
      if (total < 1e-12) continue;
      for (auto& c : full) c /= total;
      bool dup = false;
      for (const auto& existing : rays) {
        double diff = 0.0;
        for (int c = 0; c < m; ++c) diff += std::abs(existing[c] - full[c]);
        if (diff < 1e-9) dup = true;
      }
      if (!dup) rays.push_back(full);
    }
  });

  // Coordinates that can be positive somewhere on the polytope.
  std::vector<bool> can_be_positive(m, false);
  for (const auto& b : bfs)
    for (int c = 0; c < m; ++c)
      if (b[c] > 1e-12) can_be_positive[c] = true;
  for (const auto& r : rays)
    for (int c = 0; c < m; ++c)
      if (r[c] > 1e-12) can_be_positive[c] = true;

  std::vector<int> active;  // indices into free_idx
  for (int c = 0; c < m; ++c) {
    if (can_be_positive[c])
      active.push_back(c);
    else
      base += beta[free_idx[c]];  // identically zero on the polytope
  }
  const int ma = static_cast<int>(active.size());
  if (ma == 0) {
    SliceSolution out{base, Vec(k, 0.0)};
    return out;
  }

  // Strictly positive feasible start: average the vertices, push along rays.
  Vec mu(ma, 0.0);
  for (const auto& b : bfs)
    for (int i = 0; i < ma; ++i) mu[i] += b[active[i]] / bfs.size();
  double scale = 0.0;
  for (int i = 0; i < ma; ++i) scale = std::max(scale, mu[i]);
  double push = 0.05 * (scale + 1.0);
  for (const auto& r : rays)
    for (int i = 0; i < ma; ++i) mu[i] += push * r[active[i]];
  for (int i = 0; i < ma; ++i) mu[i] = std::max(mu[i], 1e-300);

  std::vector<Vec> active_cols(ma);
  Vec beta_a(ma);
  for (int i = 0; i < ma; ++i) {
    active_cols[i] = cols[active[i]];
    beta_a[i] = beta[free_idx[active[i]]];
  }
  auto basis = null_space(active_cols, d);
  const int q = static_cast<int>(basis.size());

  auto objective = [&](const Vec& x, double tau) {
    double val = 0.0;
    for (int i = 0; i < ma; ++i)
      val += local_rate(x[i], beta_a[i]) - tau * std::log(x[i]);
    return val;
  };

  if (q > 0) {
    for (double tau = 1e-1 * (1.0 + scale); tau > 1e-14; tau *= 0.1) {
      for (int iter = 0; iter < 60; ++iter) {
        Vec grad(ma), hdiag(ma);
        for (int i = 0; i < ma; ++i) {
          grad[i] = std::log(mu[i] / beta_a[i]) - tau / mu[i];
          hdiag[i] = 1.0 / mu[i] + tau / (mu[i] * mu[i]);
        }
        Vec gred(q, 0.0);
        std::vector<Vec> hred(q, Vec(q, 0.0));
        for (int a = 0; a < q; ++a) {
          for (int i = 0; i < ma; ++i) gred[a] += basis[a][i] * grad[i];
          for (int b = 0; b <= a; ++b) {
            double s = 0.0;
            for (int i = 0; i < ma; ++i)
              s += basis[a][i] * hdiag[i] * basis[b][i];
            hred[a][b] = hred[b][a] = s;
          }
        }
        double gnorm = 0.0;
        for (double gi : gred) gnorm = std::max(gnorm, std::abs(gi));
        if (gnorm < 1e-11 * (1.0 + scale)) break;
        Vec step_w;
        for (auto& gi : gred) gi = -gi;
        if (!solve_dense(hred, gred, step_w)) break;
        Vec dir(ma, 0.0);
        for (int a = 0; a < q; ++a)
          for (int i = 0; i < ma; ++i) dir[i] += step_w[a] * basis[a][i];
        double alpha = 1.0;
        for (int i = 0; i < ma; ++i)
          if (dir[i] < 0.0) alpha = std::min(alpha, -0.95 * mu[i] / dir[i]);
        double f0 = objective(mu, tau);
        Vec trial(ma);
        bool moved = false;
        for (int ls = 0; ls < 40; ++ls) {
          for (int i = 0; i < ma; ++i)
            trial[i] = std::max(mu[i] + alpha * dir[i], 1e-300);
          if (objective(trial, tau) <= f0 + 1e-14 * std::abs(f0)) {
            mu = trial;
            moved = true;
            break;
          }
          alpha *= 0.5;
        }
        if (!moved) break;
      }
    }
  }

  double value = base;
  for (int i = 0; i < ma; ++i) value += local_rate(mu[i], beta_a[i]);
  Vec control(k, 0.0);
  for (int i = 0; i < ma; ++i) control[free_idx[active[i]]] = mu[i];
  return {value, control};
}

Vec PiecewisePath::eval(double time) const {
  if (time <= t.front()) return x.front();
  if (time >= t.back()) return x.back();
  auto it = std::upper_bound(t.begin(), t.end(), time);
  std::size_t i = static_cast<std::size_t>(it - t.begin()) - 1;
  double w = (time - t[i]) / (t[i + 1] - t[i]);
  Vec out(x[i].size());
  for (std::size_t c = 0; c < out.size(); ++c)
    out[c] = (1.0 - w) * x[i][c] + w * x[i + 1][c];
  return out;
}

bool RateReport::finite() const { return std::isfinite(value); }

namespace {

// Adaptive midpoint quadrature of the slice cost along one linear piece.
double refine_slice(const ReactionNetwork& net, const PiecewisePath& phi,
                    std::size_t slice, double t0, double t1, const Vec& v,
                    double tol, int depth, Vec* control_out) {
  double tm = 0.5 * (t0 + t1);
  SliceSolution mid = slice_rate(net, phi.eval(tm), v);
  if (control_out != nullptr) *control_out = mid.control;
  double whole = (t1 - t0) * mid.value;
  if (!std::isfinite(whole)) return kInf;
  if (depth >= 10) return whole;
  SliceSolution q1 = slice_rate(net, phi.eval(0.5 * (t0 + tm)), v);
  SliceSolution q2 = slice_rate(net, phi.eval(0.5 * (tm + t1)), v);
  double split = 0.5 * (t1 - t0) * (q1.value + q2.value);
  if (!std::isfinite(split)) return kInf;
  if (std::abs(split - whole) < tol) return split;
  double left = refine_slice(net, phi, slice, t0, tm, v, tol / 2, depth + 1,
                             nullptr);
  double right = refine_slice(net, phi, slice, tm, t1, v, tol / 2, depth + 1,
                              nullptr);
  return left + right;
}

}  // namespace

RateReport path_rate(const ReactionNetwork& net, const PiecewisePath& phi) {
  if (phi.t.size() < 2)
    throw std::invalid_argument("path_rate: need at least one slice");
  RateReport rep;
  const std::size_t n = phi.slices();
  const double T = phi.t.back() - phi.t.front();
  rep.slice_costs.resize(n);
  rep.slice_controls.resize(n);
  double total = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    double dt = phi.t[l + 1] - phi.t[l];
    if (!(dt > 0.0))
      throw std::invalid_argument("path_rate: breakpoints must increase");
    Vec v(phi.x[l].size());
    for (std::size_t c = 0; c < v.size(); ++c)
      v[c] = (phi.x[l + 1][c] - phi.x[l][c]) / dt;
    double tol = 1e-6 * dt / std::max(T, 1e-12);
    double cost = refine_slice(net, phi, l, phi.t[l], phi.t[l + 1], v, tol, 0,
                               &rep.slice_controls[l]);
    rep.slice_costs[l] = std::isfinite(cost) ? cost / dt : kInf;
    total += cost;
  }
  rep.value = total;
  return rep;
}

namespace {

// Same adaptive midpoint scheme as path_rate, with the control held fixed;
// using one quadrature on both routes keeps I(phi) <= I(phi|mu) exact.
double fixed_control_quad(const ReactionNetwork& net, const PiecewisePath& phi,
                          const Vec& mu_slice, double t0, double t1,
                          double tol, int depth) {
  auto cost_at = [&](double t) {
    Vec z = phi.eval(t);
    double c = 0.0;
    for (int j = 0; j < net.transitions; ++j) {
      double m = j < static_cast<int>(mu_slice.size()) ? mu_slice[j] : 0.0;
      c += local_rate(m, net.rate(j, z));
    }
    return c;
  };
  double whole = (t1 - t0) * cost_at(0.5 * (t0 + t1));
  if (!std::isfinite(whole) || depth >= 10) return whole;
  double tm = 0.5 * (t0 + t1);
  double split = 0.5 * (t1 - t0) *
                 (cost_at(0.5 * (t0 + tm)) + cost_at(0.5 * (tm + t1)));
  if (!std::isfinite(split)) return kInf;
  if (std::abs(split - whole) < tol) return split;
  return fixed_control_quad(net, phi, mu_slice, t0, tm, tol / 2, depth + 1) +
         fixed_control_quad(net, phi, mu_slice, tm, t1, tol / 2, depth + 1);
}

}  // namespace

double path_rate_given_control(const ReactionNetwork& net,
                               const PiecewisePath& phi,
                               const ControlTrajectory& mu) {
  if (mu.t != phi.t)
    throw std::invalid_argument(
        "path_rate_given_control: control grid must match the path grid");
  const std::size_t n = phi.slices();
  const double T = phi.t.back() - phi.t.front();
  double total = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    double dt = phi.t[l + 1] - phi.t[l];
    auto mu_at = [&](int j) {
      return j < static_cast<int>(mu.mu[l].size()) ? mu.mu[l][j] : 0.0;
    };
    bool windowed = l < mu.suppressed.size() && mu.suppressed[l] != 0;
    if (!windowed) {
      // Feasibility: the control must reproduce the slice velocity.
      for (int r = 0; r < net.dim; ++r) {
        double vr = (phi.x[l + 1][r] - phi.x[l][r]) / dt;
        double mr = 0.0;
        for (int j = 0; j < net.transitions; ++j)
          mr += mu_at(j) * net.jumps[j][r];
        if (std::abs(mr - vr) > 1e-5 * (1.0 + std::abs(vr)))
          throw std::invalid_argument(
              "path_rate_given_control: control infeasible on slice " +
              std::to_string(l));
      }
    }
    double tol = 1e-6 * dt / std::max(T, 1e-12);
    total += fixed_control_quad(net, phi, mu.mu[l], phi.t[l], phi.t[l + 1],
                                tol, 0);
    if (!std::isfinite(total)) return kInf;
  }
  return total;
}

namespace {

std::size_t slice_count(double T, double eps) {
  double ratio = T / eps;
  double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio) ||
      rounded < 1.0)
    throw std::invalid_argument("T/eps must be a positive integer");
  return static_cast<std::size_t>(rounded);
}

}  // namespace

PiecewisePath polygonal_approx(const PathRecord& path, const DomainSpec& domain,
                               double eps, double a) {
  if (!(a >= 0.0 && a < 1.0))
    throw std::invalid_argument("polygonal_approx: a must lie in [0,1)");
  const std::size_t n = slice_count(path.T, eps);
  PiecewisePath out;
  out.t.resize(n + 1);
  out.x.resize(n + 1);
  for (std::size_t l = 0; l <= n; ++l) {
    double tl = std::min(static_cast<double>(l) * eps, path.T);
    Vec z = path.state_at(tl);
    Vec shifted(z.size());
    for (std::size_t c = 0; c < z.size(); ++c)
      shifted[c] = (1.0 - a) * z[c] + a * domain.z0[c];
    out.t[l] = tl;
    out.x[l] = shifted;
  }
  return out;
}

ControlTrajectory empirical_control(const PathRecord& path, double eps,
                                    double a) {
  if (!(a >= 0.0 && a < 1.0))
    throw std::invalid_argument("empirical_control: a must lie in [0,1)");
  const std::size_t n = slice_count(path.T, eps);
  // Transition count: infer from the largest index seen; the caller's
  // network fixes the true k, extra zero rows are harmless.
  int k = 0;
  for (const auto& ev : path.events) k = std::max(k, ev.j + 1);
  ControlTrajectory out;
  out.t.resize(n + 1);
  for (std::size_t l = 0; l <= n; ++l)
    out.t[l] = std::min(static_cast<double>(l) * eps, path.T);
  out.mu.assign(n, Vec(k, 0.0));
  out.suppressed.assign(n, 0);
  const double w =
      (1.0 - a) / (static_cast<double>(path.N) * eps);
  for (const auto& ev : path.events) {
    std::size_t l = std::min(
        n - 1, static_cast<std::size_t>(std::floor(ev.t / eps)));
    out.mu[l][ev.j] += w;
    if (!ev.applied) out.suppressed[l] = 1;
  }
  return out;
}

double g_eps(double eps, double K) {
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("g_eps: eps must lie in (0,1)");
  return K / std::sqrt(std::log(1.0 / eps));
}

double h_eps(double eps, double nu, double K) {
  double g = g_eps(eps, K);
  if (g >= 1.0)
    throw std::invalid_argument("h_eps: requires g(eps) < 1");
  return std::pow(-std::log(std::sqrt(g)), -1.0 / nu);
}

double cramer_rate_poisson(double x, double mean) {
  if (x < 0.0 || !(mean > 0.0))
    throw std::invalid_argument("cramer_rate_poisson: bad arguments");
  if (x == 0.0) return mean;
  return x * std::log(x / mean) - x + mean;
}

}  // namespace ldp
