#ifndef LDP_FLUID_HPP
#define LDP_FLUID_HPP

#include <complex>
#include <optional>
#include <string>

#include "ldp/model.hpp"

namespace ldp {

/// Dense ODE solution: states and drifts on a fine grid, cubic Hermite
/// interpolation between grid points.
struct OdeSolution {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<Vec> derivs;

  Vec eval(double t) const;
  double t_end() const { return times.back(); }
  const Vec& final_state() const { return states.back(); }
};

/// Integrates dY/dt = b(Y) from z0 over [0, T] with local error <= tol.
OdeSolution integrate(const ReactionNetwork& net, const Vec& z0, double T,
                      double tol = 1e-10);

/// Time-rescaled flow on u in [0, 1): dy/du = b(y) / (1-u)^2, equal to the
/// plain solution evaluated at t = u/(1-u).
OdeSolution integrate_rescaled(const ReactionNetwork& net, const Vec& y0,
                               double u_end, double tol = 1e-10);

enum class Stability { stable, saddle, unstable, marginal };

std::string to_string(Stability s);

struct JacobianInfo {
  std::vector<Vec> matrix;  // dim x dim, rows
  std::vector<std::complex<double>> eigenvalues;
  Stability stability = Stability::marginal;
};

/// Central finite-difference Jacobian of the drift (step 1e-6) with
/// eigenvalues and a stability classification. Eigenvalues are computed in
/// closed form; the toolkit's models are planar (d <= 2).
JacobianInfo jacobian(const ReactionNetwork& net, const Vec& z,
                      double step = 1e-6);

enum class EndemicRegime { none, one, two };

struct EquilibriumSet {
  Vec dfe;
  std::optional<Vec> endemic_stable;    // z*
  std::optional<Vec> endemic_unstable;  // z~
  EndemicRegime regime = EndemicRegime::none;
  // Model thresholds by name: SIV reports beta0 plus both readings of the
  // beta1 formula (the published expression has an ambiguous symbol, see
  // equilibria_siv); S0IS1 reports R0 and R0_star.
  std::vector<std::pair<std::string, double>> thresholds;

  double threshold(const std::string& name) const;
};

/// Closed-form equilibria of the SIV fluid limit. Endemic first coordinates
/// are the roots of D1 x^2 + D2 x + D3 = 0 in (0,1); the smaller root is the
/// unstable one.
EquilibriumSet equilibria_siv(const SivParams& p);

/// Closed-form equilibria of the S0IS1 fluid limit together with the basic
/// reproduction numbers R0 and R0*.
EquilibriumSet equilibria_s0is1(const S0is1Params& p);

}  // namespace ldp

#endif
