#ifndef LDPTK_TESTS_ORACLES_HPP
#define LDPTK_TESTS_ORACLES_HPP

// Independent brute-force references used by the unit and acceptance suites.
// These deliberately avoid the library's solver path: feasible points are
// parametrized by free coordinates over a boxed grid and refined locally.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ldp/model.hpp"
#include "ldp/rate.hpp"

namespace ldp_test {

/// Minimum of sum_j f(mu_j, beta_j) over {mu >= 0, sum mu_j h_j = v} by
/// nested grid search over the free coordinates of the polytope.
inline double slice_rate_bruteforce(const ldp::ReactionNetwork& net,
                                    const ldp::Vec& z, const ldp::Vec& v,
                                    double box = 8.0) {
  const int d = net.dim;
  const int k = net.transitions;
  std::vector<double> beta(k);
  double base = 0.0;
  std::vector<int> free_idx;
  for (int j = 0; j < k; ++j) {
    beta[j] = net.rate(j, z);
    if (beta[j] < 1e-15)
      base += beta[j];
    else
      free_idx.push_back(j);
  }
  const int m = static_cast<int>(free_idx.size());
  if (m == 0) {
    double vn = 0.0;
    for (double c : v) vn += std::abs(c);
    return vn < 1e-9 ? base : std::numeric_limits<double>::infinity();
  }

  // Pick the best-conditioned pair of basis columns (d = 2 here).
  int b0 = -1, b1 = -1;
  double best_det = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      double det = net.jumps[free_idx[i]][0] * net.jumps[free_idx[j]][1] -
                   net.jumps[free_idx[i]][1] * net.jumps[free_idx[j]][0];
      if (std::abs(det) > std::abs(best_det)) {
        best_det = det;
        b0 = i;
        b1 = j;
      }
    }
  if (b0 < 0) return std::numeric_limits<double>::infinity();

  std::vector<int> free_cols;
  for (int i = 0; i < m; ++i)
    if (i != b0 && i != b1) free_cols.push_back(i);
  const int f = static_cast<int>(free_cols.size());

  auto cost_at = [&](const std::vector<double>& mu_free, double& out) {
    double r0 = v[0], r1 = v[1];
    for (int i = 0; i < f; ++i) {
      r0 -= mu_free[i] * net.jumps[free_idx[free_cols[i]]][0];
      r1 -= mu_free[i] * net.jumps[free_idx[free_cols[i]]][1];
    }
    double h00 = net.jumps[free_idx[b0]][0], h01 = net.jumps[free_idx[b1]][0];
    double h10 = net.jumps[free_idx[b0]][1], h11 = net.jumps[free_idx[b1]][1];
    double mu0 = (r0 * h11 - r1 * h01) / best_det;
    double mu1 = (h00 * r1 - h10 * r0) / best_det;
    if (mu0 < -1e-12 || mu1 < -1e-12) return false;
    double c = base;
    c += ldp::local_rate(std::max(mu0, 0.0), beta[free_idx[b0]]);
    c += ldp::local_rate(std::max(mu1, 0.0), beta[free_idx[b1]]);
    for (int i = 0; i < f; ++i)
      c += ldp::local_rate(mu_free[i], beta[free_idx[free_cols[i]]]);
    out = c;
    return true;
  };

  std::vector<double> lo(f, 0.0), hi(f, box);
  std::vector<double> best_mu(f, 0.0);
  double best = std::numeric_limits<double>::infinity();
  if (f == 0) {
    cost_at({}, best);
    return best;
  }
  const int pts = 21;
  for (int level = 0; level < 7; ++level) {
    std::vector<int> idx(f, 0);
    bool done = false;
    while (!done) {
      std::vector<double> mu(f);
      for (int i = 0; i < f; ++i)
        mu[i] = lo[i] + (hi[i] - lo[i]) * idx[i] / (pts - 1);
      double c;
      if (cost_at(mu, c) && c < best) {
        best = c;
        best_mu = mu;
      }
      int i = f - 1;
      while (i >= 0 && ++idx[i] == pts) idx[i--] = 0;
      done = i < 0;
    }
    for (int i = 0; i < f; ++i) {
      double span = (hi[i] - lo[i]) / (pts - 1);
      lo[i] = std::max(0.0, best_mu[i] - 1.5 * span);
      hi[i] = best_mu[i] + 1.5 * span;
    }
  }
  return best;
}

}  // namespace ldp_test

#endif
