#ifndef LDP_RATE_HPP
#define LDP_RATE_HPP

#include <cstdint>

#include "ldp/boundary.hpp"
#include "ldp/model.hpp"
#include "ldp/simulate.hpp"

namespace ldp {

/// Local cost f(nu, omega) = nu log(nu/omega) - nu + omega, with
/// f(0, omega) = omega, f(nu > 0, 0) = +inf, f(0, 0) = 0.
double local_rate(double nu, double omega);

/// Piecewise-linear absolutely continuous path.
struct PiecewisePath {
  std::vector<double> t;
  std::vector<Vec> x;

  std::size_t slices() const { return t.size() - 1; }
  Vec eval(double time) const;
};

/// Slice-wise constant control; mu[l] has one intensity per transition on
/// [t[l], t[l+1]). suppressed marks slices whose empirical control came from
/// a window containing suppressed jumps (the counting identity with the
/// polygonal path holds only for the free part there).
struct ControlTrajectory {
  std::vector<double> t;
  std::vector<Vec> mu;
  std::vector<std::uint8_t> suppressed;
};

struct SliceSolution {
  double value = 0.0;  // +inf when the velocity is not attainable
  Vec control;         // empty when infeasible
  bool feasible() const;
};

/// Minimum of sum_j f(mu_j, beta_j(z)) over {mu >= 0 : sum_j mu_j h_j = v}.
/// Transitions with beta_j(z) = 0 are forced to zero intensity before the
/// convex solve; feasibility is decided by basic-solution enumeration with
/// tolerance 1e-9, then the reduced problem is solved by Newton iterations
/// on the affine slice with a vanishing log barrier.
SliceSolution slice_rate(const ReactionNetwork& net, const Vec& z,
                         const Vec& v);

struct RateReport {
  double value = 0.0;                  // I_T, possibly +inf
  std::vector<double> slice_costs;     // per-slice average cost rate
  std::vector<Vec> slice_controls;     // minimizer at the slice midpoint
  bool finite() const;
};

/// I_T over a piecewise-linear path: per-slice midpoint quadrature of the
/// slice problem, bisection-refined until the total settles below 1e-6.
RateReport path_rate(const ReactionNetwork& net, const PiecewisePath& phi);

/// I_T(phi | mu) for a given slice-wise control: exact per-slice sum of
/// dt * sum_j f(mu_j, beta_j) at the slice midpoint state.
double path_rate_given_control(const ReactionNetwork& net,
                               const PiecewisePath& phi,
                               const ControlTrajectory& mu);

/// Polygonal approximation of a (shifted) sample path: samples
/// (1-a) Z(l eps) + a z0 at the grid times and interpolates linearly.
/// T/eps must be an integer.
PiecewisePath polygonal_approx(const PathRecord& path, const DomainSpec& domain,
                               double eps, double a);

/// Per-slice empirical control: (1-a)/(N eps) times the per-stream jump
/// counts (applied or suppressed) in each window.
ControlTrajectory empirical_control(const PathRecord& path, double eps,
                                    double a);

/// g(eps) = K / sqrt(log(1/eps)), for eps in (0,1).
double g_eps(double eps, double K);

/// h(eps) = (-log sqrt(g(eps)))^(-1/nu); requires g(eps) < 1.
double h_eps(double eps, double nu, double K);

/// Cramer rate of a Poisson mean estimate: x log(x/mean) - x + mean,
/// with the x = 0 convention giving mean.
double cramer_rate_poisson(double x, double mean);

}  // namespace ldp

#endif
