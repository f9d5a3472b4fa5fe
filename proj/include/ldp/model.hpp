#ifndef LDP_MODEL_HPP
#define LDP_MODEL_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ldp {

using Vec = std::vector<double>;

/// Membership oracle for a closed region (boundary points count as inside).
using MembershipFn = std::function<bool(const Vec&)>;

/// True if z lies in the simplex {z >= 0, sum z_i <= cap} up to tol.
bool in_simplex(const Vec& z, double cap = 1.0, double tol = 1e-9);

/// Euclidean projection onto {z >= 0, sum z_i <= cap}.
Vec project_to_simplex(const Vec& z, double cap = 1.0);

/// A finite family of jump directions h_j in {-1,0,1}^d with state-dependent
/// intensities beta_j defined on the simplex. sup_rate is an upper bound for
/// every beta_j over the whole simplex (the bounds in the tail estimates
/// consume it, so it must majorize, never approximate from below).
struct ReactionNetwork {
  int dim = 0;
  int transitions = 0;
  std::vector<std::vector<int>> jumps;                  // k entries of size dim
  std::vector<std::function<double(const Vec&)>> raw_rates;
  double sup_rate = 0.0;
  double analytic_lipschitz = 0.0;  // 0 when no closed form is known
  double simplex_cap = 1.0;         // widened in some synthetic test networks

  /// beta_j evaluated with the off-simplex clamp: points that have drifted
  /// microscopically outside the simplex are projected back before the rate
  /// is evaluated, and tiny negative values from cancellation are clipped.
  double rate(int j, const Vec& z) const;

  /// All rates at once (same clamping).
  void rates_into(const Vec& z, double* out) const;
};

struct SivParams {
  double beta = 0, chi = 0, eta = 0, gamma = 0, mu = 0, theta = 0;
};

struct S0is1Params {
  double beta = 0, alpha = 0, mu = 0, r = 0;
};

/// S-I-V model with imperfect vaccination: d = 2 (infectious, vaccinated
/// proportions), k = 7 transitions.
ReactionNetwork build_siv(const SivParams& p);

/// Two-level-susceptibility model: d = 2 (infectious, previously infected
/// susceptibles), k = 5 transitions.
ReactionNetwork build_s0is1(const S0is1Params& p);

/// b(z) = sum_j beta_j(z) h_j.
Vec drift(const ReactionNetwork& net, const Vec& z);

/// Lattice snap of an initial condition: floor(N z)/N when that point lies
/// in the region, otherwise the nearest lattice point inside (ties broken
/// lexicographically by coordinates).
Vec snap_initial(const Vec& z, const MembershipFn& inside, std::int64_t N);

/// Numerical estimate of max_j Lip(beta_j) over the simplex from difference
/// quotients along axis and diagonal directions on a grid.
double lipschitz_estimate(const ReactionNetwork& net, double grid_step);

}  // namespace ldp

#endif
