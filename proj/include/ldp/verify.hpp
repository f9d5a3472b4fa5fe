#ifndef LDP_VERIFY_HPP
#define LDP_VERIFY_HPP

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "ldp/boundary.hpp"
#include "ldp/fluid.hpp"
#include "ldp/model.hpp"
#include "ldp/rate.hpp"

namespace ldp {

struct WilsonInterval {
  double lo = 0.0, hi = 1.0;
};

/// 95% Wilson score interval for a binomial proportion.
WilsonInterval wilson95(std::uint64_t successes, std::uint64_t trials);

/// Least squares slope of y against x.
double lsq_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Two-sample Kolmogorov-Smirnov p-value (asymptotic).
double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b);

/// log P(X > x) for X ~ Poisson(lambda), exact up to double round-off.
double log_poisson_upper_tail(double lambda, double x);

struct ModelConfig {
  ModelKind kind = ModelKind::s0is1;
  SivParams siv;
  S0is1Params s0is1;

  ReactionNetwork build() const;
  EquilibriumSet equilibria() const;
};

/// Start point resolution: a named equilibrium or an explicit point, with an
/// optional shift toward the star center.
struct StartSpec {
  std::string anchor = "zstar";  // zstar | ztilde | dfe | point
  Vec point;
  double shift_toward_z0 = 0.0;
};

Vec resolve_start(const StartSpec& spec, const EquilibriumSet& eq,
                  const DomainSpec* domain);

/// One tabulated estimate; the CSV tables serialize these rows.
struct RateRow {
  double N = 0;
  double p_hat = 0;
  double ci_lo = 0, ci_hi = 0;
  double emp_rate = 0;
  double ref_rate = 0;
  std::uint64_t successes = 0, trials = 0;
};

struct ExperimentResult {
  std::string kind;
  bool pass = false;
  std::vector<RateRow> table;
  nlohmann::json details;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

struct LlnConfig {
  ModelConfig model;
  StartSpec start;
  std::vector<std::int64_t> N_schedule{100, 1000, 10000};
  std::int64_t replicates = 200;
  double T = 5.0;
  double threshold = 0.05;
  bool reflected = true;
  std::uint64_t seed = 1;
  int threads = 1;
};

/// Law-of-large-numbers check: per-N quantiles of the sup distance to the
/// fluid solution; the medians must decrease along the N schedule and end
/// below the threshold.
ExperimentResult verify_lln(const LlnConfig& cfg);

struct TubeConfig {
  ModelConfig model;
  StartSpec anchor;          // fluid segment seed point (default z*)
  Vec direction{1.0, 0.0};   // displacement direction for the segment origin
  double rho = 0.05;         // displacement size
  double tau = 0.5;          // segment duration
  int breakpoints = 64;
  double delta = 0.05;
  std::vector<std::int64_t> N_schedule{50, 100, 200};
  std::int64_t replicates = 100000;
  double rel_tol = 0.30;
  std::uint64_t seed = 1;
  int threads = 1;
};

/// Builds the time-reversed fluid segment used as the positive-cost target.
PiecewisePath backward_fluid_segment(const ReactionNetwork& net,
                                     const Vec& origin, double tau,
                                     int breakpoints);

/// Tube-probability estimate around a target path: empirical rate
/// -(1/N) log p_hat tabulated against I_T, with a relative-gap verdict at
/// the largest N and a nonincreasing-gap trend check.
ExperimentResult estimate_tube_probability(const TubeConfig& cfg);

struct UpperConfig {
  ModelConfig model;
  StartSpec start;
  double T = 0.1;
  double eps = 0.005;
  double K = 0.065;
  double nu = 0.49;
  double s = 0.5;
  double eta = 0.25;
  std::vector<std::int64_t> N_schedule{60, 80, 100};
  std::int64_t replicates = 1000000;
  std::int64_t min_successes = 5;
  // B_eps^c trend sub-experiment at fixed N.
  std::vector<double> eps_schedule{0.02, 0.01, 0.005};
  std::int64_t fixed_N = 200;
  std::int64_t eps_replicates = 20000;
  std::uint64_t seed = 1;
  int threads = 1;
};

/// Upper-bound machinery: frequency of {I_T(Upsilon|mu) > s} on the
/// oscillation event, its decay slope in N, the B_eps^c trend in eps, and
/// the clearance gained by the a-shift.
ExperimentResult verify_upper_machinery(const UpperConfig& cfg);

struct PoissonTailConfig {
  double sigma = 1.0;
  std::vector<double> eps_grid{1e-2, 1e-3, 1e-4};
  std::vector<std::int64_t> N_grid{100, 1000};
  double s = 1.0;
  double K = 1.0;
};

/// Exact Poisson tails against the Chernoff bound exp(-N Lambda*) and the
/// exp(-sN) target; reports the largest eps0 below which the target holds.
ExperimentResult poisson_tail_check(const PoissonTailConfig& cfg);

}  // namespace ldp

#endif
