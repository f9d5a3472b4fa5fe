#ifndef LDP_BOUNDARY_HPP
#define LDP_BOUNDARY_HPP

#include <cstdint>
#include <functional>
#include <string>

#include <json.hpp>

#include "ldp/fluid.hpp"
#include "ldp/geometry.hpp"
#include "ldp/model.hpp"

namespace ldp {

enum class ModelKind { siv, s0is1 };

std::string to_string(ModelKind m);

/// The characteristic boundary: stable manifold of the saddle, stored as a
/// polyline parametrized on [0,2] with the saddle at u = 1. pts.front() is
/// the endpoint on the horizontal axis (B), pts.back() the endpoint on the
/// diagonal face (E/F).
struct BoundaryCurve {
  std::vector<double> u;
  std::vector<Vec2> pts;
  std::size_t saddle_index = 0;
  Vec2 saddle;

  Vec2 b_end() const { return pts.front(); }
  Vec2 e_end() const { return pts.back(); }
};

/// Traces the stable manifold of the saddle by reverse-time shooting along
/// the stable eigenvector (offset 1e-6), refining until successive polylines
/// agree to 1e-4 in Hausdorff distance.
BoundaryCurve compute_separatrix(const ReactionNetwork& net, const Vec& saddle,
                                 double offset = 1e-6,
                                 int max_u_steps = 2000000);

/// The closed region bounded by the characteristic boundary and the simplex
/// faces, with the star center z0 and fast membership structure.
struct DomainSpec {
  ModelKind model = ModelKind::s0is1;
  std::vector<Vec2> polygon;  // positively oriented, simple
  BoundaryCurve curve;
  Vec z0;
  Vec interior_ref;
  MembershipGrid grid;
};

DomainSpec build_domain(const BoundaryCurve& curve, ModelKind model,
                        const ReactionNetwork& net);

/// The model-specific bullet constraints that the star center must satisfy
/// (nullcline signs, slope lines measured on the curve, endpoint balls).
bool z0_constraints_satisfied(const BoundaryCurve& curve, ModelKind model,
                              const ReactionNetwork& net, const Vec& z0);

/// Closed-set membership: boundary points count as inside.
bool membership(const DomainSpec& domain, const Vec& z);

double distance_to_boundary(const DomainSpec& domain, const Vec& z);

struct CheckItem {
  std::string name;
  bool pass = false;
  nlohmann::json details;
};

struct AssumptionReport {
  std::string check;
  std::vector<CheckItem> items;

  bool all_pass() const;
  const CheckItem& item(const std::string& name) const;
  nlohmann::json to_json() const;
};

/// Star-shape geometry: every sampled boundary point is seen from z0 without
/// re-crossing the boundary, and the inward shift z^a = z + a(z0 - z) gains
/// boundary clearance at least c2 * a. Reports the measured c1 and c2.
AssumptionReport check_star_shape(const DomainSpec& domain,
                                  int n_boundary_samples,
                                  const std::vector<double>& a_grid);

/// Rates below lambda1 must increase under the inward shift for shift sizes
/// in (0, lambda2). Grid search for the largest workable pair.
AssumptionReport check_rate_monotonicity(const ReactionNetwork& net,
                                         const DomainSpec& domain,
                                         double grid_step);

/// Lower bound on rates away from the boundary: C_a >= exp(-a^-nu) on the
/// region at distance >= c2 * a, for a below a reported a0.
AssumptionReport check_ca_bound(const ReactionNetwork& net,
                                const DomainSpec& domain, double nu,
                                const std::vector<double>& a_grid, double c2);

/// Drift direction along the S0IS1 characteristic boundary: below the saddle
/// g1 < 0, g2 > 0, g1 + g2 > 0; above it the mirrored statement for -g; and
/// positivity of d(z1+z2)/dt on the half line below the saddle.
AssumptionReport check_sector_condition(const ReactionNetwork& net,
                                        const BoundaryCurve& curve);

struct LyapunovCandidate {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
};

/// Clamped distance-to-boundary candidate.
LyapunovCandidate default_lyapunov(const DomainSpec& domain,
                                   double clamp_level = 0.0);

/// Best-effort numerical check of the Lyapunov-function assumptions against
/// a candidate u; failures are reported, never fatal (the assumption is
/// existential and the candidate may simply be wrong).
AssumptionReport check_lyapunov(const LyapunovCandidate& u,
                                const ReactionNetwork& net,
                                const DomainSpec& domain, std::int64_t N,
                                double grid_step);

}  // namespace ldp

#endif
