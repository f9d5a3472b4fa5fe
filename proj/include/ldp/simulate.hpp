#ifndef LDP_SIMULATE_HPP
#define LDP_SIMULATE_HPP

#include <cstdint>
#include <memory>

#include "ldp/boundary.hpp"
#include "ldp/model.hpp"
#include "ldp/rng.hpp"

namespace ldp {

struct PathEvent {
  double t = 0.0;
  std::int32_t j = -1;
  bool applied = true;
};

/// One cadlag sample path on the lattice Z^d / N: event log plus the state
/// after each event. States are exact lattice points (integer counts over N).
struct PathRecord {
  std::int64_t N = 0;
  double T = 0.0;
  int dim = 0;
  Vec initial;
  std::vector<PathEvent> events;
  std::vector<double> states;  // flattened, dim entries per event

  Vec state_after(std::size_t event_index) const;
  /// State at time t (right-continuous step function).
  Vec state_at(double t) const;
  Vec final_state() const;
};

/// Shared, immutable lattice membership table for one (domain, N) pair.
/// Classifying each lattice point once makes the reflected simulation cheap
/// even when the path lives next to the boundary.
class LatticeMembership {
 public:
  LatticeMembership(const DomainSpec& domain, std::int64_t N);
  bool contains(std::int64_t cx, std::int64_t cy) const;
  std::int64_t N() const { return N_; }

 private:
  const DomainSpec* domain_;
  std::int64_t N_;
  std::int64_t side_;
  std::vector<std::uint8_t> table_;  // dense when small enough, else empty
};

/// Exact event-driven realization of the free process. Statistically
/// equivalent to the random-time-change construction: exponential waiting
/// time at the aggregate rate, transition chosen proportionally to its rate.
PathRecord simulate_free(const ReactionNetwork& net, std::int64_t N,
                         const Vec& z, double T, std::uint64_t seed);

/// Reflected version: a jump whose destination leaves the closed region is
/// suppressed (recorded with applied=false); the clock advances either way.
PathRecord simulate_reflected(const ReactionNetwork& net,
                              const DomainSpec& domain, std::int64_t N,
                              const Vec& z, double T, std::uint64_t seed);

struct DiagnosticsReport {
  double sup_martingale = 0.0;   // sup_t |M(t)|
  double sup_phi = 0.0;          // sup_t |Phi(t)|
  double occupation = 0.0;       // X(T)
  Vec final_martingale;          // M(T)
  std::vector<std::int64_t> suppressed_count;  // per transition
};

/// Reconstructs the martingale decomposition of a reflected path. Rates are
/// constant between events, so the compensator integrals are exact.
DiagnosticsReport diagnostics(const PathRecord& path,
                              const ReactionNetwork& net,
                              const DomainSpec& domain);

/// Streaming simulation core. The observer sees every event in order:
///   obs.on_init(t0, counts, N); obs.on_event(t, j, applied, counts);
///   obs.on_finish(T, counts);
/// counts are integer lattice coordinates (state = counts / N).
template <class Observer>
void simulate_stream(const ReactionNetwork& net, std::int64_t N,
                     const std::vector<std::int64_t>& counts0, double T,
                     Rng& rng, const LatticeMembership* reflect,
                     Observer&& obs) {
  const int d = net.dim;
  const int k = net.transitions;
  std::vector<std::int64_t> counts = counts0;
  Vec z(d);
  std::vector<double> rates(k);
  const double invN = 1.0 / static_cast<double>(N);

  obs.on_init(0.0, counts, N);
  double t = 0.0;
  while (true) {
    for (int i = 0; i < d; ++i) z[i] = static_cast<double>(counts[i]) * invN;
    net.rates_into(z, rates.data());
    double total = 0.0;
    for (int j = 0; j < k; ++j) total += rates[j];
    if (!(total > 0.0)) break;
    t += rng.exponential(static_cast<double>(N) * total);
    if (t > T) break;
    double pick = rng.uniform() * total;
    int j = 0;
    double acc = rates[0];
    while (j + 1 < k && pick >= acc) acc += rates[++j];

    bool applied = true;
    if (reflect != nullptr) {
      std::int64_t cx = counts[0] + net.jumps[j][0];
      std::int64_t cy = d > 1 ? counts[1] + net.jumps[j][1] : 0;
      applied = reflect->contains(cx, cy);
    } else {
      std::int64_t sum = 0;
      bool ok = true;
      for (int i = 0; i < d; ++i) {
        std::int64_t ci = counts[i] + net.jumps[j][i];
        if (ci < 0) ok = false;
        sum += ci;
      }
      if (sum > static_cast<std::int64_t>(net.simplex_cap *
                                          static_cast<double>(N) + 0.5))
        ok = false;
      if (!ok)
        throw std::domain_error(
            "simulate_free: transition " + std::to_string(j) +
            " would leave the state space (its rate fails to vanish)");
    }
    if (applied)
      for (int i = 0; i < d; ++i) counts[i] += net.jumps[j][i];
    obs.on_event(t, j, applied, counts);
  }
  obs.on_finish(T, counts);
}

/// Initial lattice counts for the free process: floor(N z).
std::vector<std::int64_t> free_initial_counts(const Vec& z, std::int64_t N);

/// Initial lattice counts for the reflected process: snap_initial.
std::vector<std::int64_t> reflected_initial_counts(const DomainSpec& domain,
                                                   const Vec& z,
                                                   std::int64_t N);

}  // namespace ldp

#endif
