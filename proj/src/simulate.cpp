#include "ldp/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ldp {

Vec PathRecord::state_after(std::size_t event_index) const {
  Vec out(dim);
  for (int i = 0; i < dim; ++i)
    out[i] = states[event_index * dim + i];
  return out;
}

Vec PathRecord::state_at(double t) const {
  if (events.empty() || t < events.front().t) return initial;
  // Last event with time <= t.
  std::size_t lo = 0, hi = events.size();
  while (lo + 1 < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (events[mid].t <= t)
      lo = mid;
    else
      hi = mid;
  }
  return state_after(lo);
}

Vec PathRecord::final_state() const {
  return events.empty() ? initial : state_after(events.size() - 1);
}

LatticeMembership::LatticeMembership(const DomainSpec& domain, std::int64_t N)
    : domain_(&domain), N_(N), side_(N + 1) {
  if (side_ * side_ <= 64 * 1024 * 1024) {
    table_.assign(static_cast<std::size_t>(side_ * side_), 0);
    const double invN = 1.0 / static_cast<double>(N_);
    for (std::int64_t cy = 0; cy < side_; ++cy)
      for (std::int64_t cx = 0; cx + cy < side_; ++cx)
        if (domain_->grid.contains(Vec2{cx * invN, cy * invN}))
          table_[static_cast<std::size_t>(cy * side_ + cx)] = 1;
  }
}

bool LatticeMembership::contains(std::int64_t cx, std::int64_t cy) const {
  if (cx < 0 || cy < 0 || cx + cy > N_) return false;
  if (!table_.empty())
    return table_[static_cast<std::size_t>(cy * side_ + cx)] != 0;
  const double invN = 1.0 / static_cast<double>(N_);
  return domain_->grid.contains(Vec2{cx * invN, cy * invN});
}

namespace {

struct RecordingObserver {
  PathRecord rec;
  int dim;

  void on_init(double, const std::vector<std::int64_t>& counts,
               std::int64_t N) {
    rec.initial.resize(dim);
    for (int i = 0; i < dim; ++i)
      rec.initial[i] =
          static_cast<double>(counts[i]) / static_cast<double>(N);
  }
  void on_event(double t, int j, bool applied,
                const std::vector<std::int64_t>& counts) {
    rec.events.push_back({t, j, applied});
    for (int i = 0; i < dim; ++i)
      rec.states.push_back(static_cast<double>(counts[i]) /
                           static_cast<double>(rec.N));
  }
  void on_finish(double, const std::vector<std::int64_t>&) {}
};

}  // namespace

std::vector<std::int64_t> free_initial_counts(const Vec& z, std::int64_t N) {
  std::vector<std::int64_t> counts(z.size());
  for (std::size_t i = 0; i < z.size(); ++i)
    counts[i] = static_cast<std::int64_t>(
        std::floor(z[i] * static_cast<double>(N) + 1e-9));
  return counts;
}

std::vector<std::int64_t> reflected_initial_counts(const DomainSpec& domain,
                                                   const Vec& z,
                                                   std::int64_t N) {
  Vec snapped = snap_initial(
      z, [&domain](const Vec& p) { return membership(domain, p); }, N);
  std::vector<std::int64_t> counts(snapped.size());
  for (std::size_t i = 0; i < snapped.size(); ++i)
    counts[i] = static_cast<std::int64_t>(
        std::llround(snapped[i] * static_cast<double>(N)));
  return counts;
}

PathRecord simulate_free(const ReactionNetwork& net, std::int64_t N,
                         const Vec& z, double T, std::uint64_t seed) {
  if (N < 1) throw std::invalid_argument("simulate_free: N must be >= 1");
  if (!(T > 0.0)) throw std::invalid_argument("simulate_free: T must be > 0");
  if (!in_simplex(z, net.simplex_cap, 1e-9))
    throw std::domain_error("simulate_free: start outside the state space");
  RecordingObserver obs;
  obs.dim = net.dim;
  obs.rec.N = N;
  obs.rec.T = T;
  obs.rec.dim = net.dim;
  Rng rng(seed);
  simulate_stream(net, N, free_initial_counts(z, N), T, rng, nullptr, obs);
  return std::move(obs.rec);
}

PathRecord simulate_reflected(const ReactionNetwork& net,
                              const DomainSpec& domain, std::int64_t N,
                              const Vec& z, double T, std::uint64_t seed) {
  if (N < 1)
    throw std::invalid_argument("simulate_reflected: N must be >= 1");
  if (!(T > 0.0))
    throw std::invalid_argument("simulate_reflected: T must be > 0");
  if (!membership(domain, z))
    throw std::domain_error("simulate_reflected: start outside the region");
  RecordingObserver obs;
  obs.dim = net.dim;
  obs.rec.N = N;
  obs.rec.T = T;
  obs.rec.dim = net.dim;
  Rng rng(seed);
  LatticeMembership lattice(domain, N);
  simulate_stream(net, N, reflected_initial_counts(domain, z, N), T, rng,
                  &lattice, obs);
  return std::move(obs.rec);
}

DiagnosticsReport diagnostics(const PathRecord& path,
                              const ReactionNetwork& net,
                              const DomainSpec& domain) {
  if (path.dim != net.dim)
    throw std::invalid_argument("diagnostics: dimension mismatch");
  const int d = net.dim;
  const int k = net.transitions;
  const double invN = 1.0 / static_cast<double>(path.N);

  DiagnosticsReport rep;
  rep.final_martingale.assign(d, 0.0);
  rep.suppressed_count.assign(k, 0);

  // M(t) = sum of applied jumps / N  -  int sum_j 1{z+h_j/N in O} beta_j h_j.
  // Phi(t) = M(t) - int g_N. Both are linear between events; track suprema
  // at both ends of every inter-event interval.
  Vec jumpsum(d, 0.0);          // applied jumps / N
  Vec comp_in(d, 0.0);          // compensator of the kept jumps
  Vec int_gN(d, 0.0);           // integral of g_N
  Vec z = path.initial;
  double t_prev = 0.0;

  auto norm2 = [&](const Vec& m) {
    double s = 0.0;
    for (double v : m) s += v * v;
    return std::sqrt(s);
  };
  auto record_sup = [&]() {
    Vec m(d), phi(d);
    for (int i = 0; i < d; ++i) {
      m[i] = jumpsum[i] - comp_in[i];
      phi[i] = m[i] - int_gN[i];
    }
    rep.sup_martingale = std::max(rep.sup_martingale, norm2(m));
    rep.sup_phi = std::max(rep.sup_phi, norm2(phi));
  };

  auto advance = [&](double dt) {
    if (dt <= 0.0) return;
    for (int j = 0; j < k; ++j) {
      double bj = net.rate(j, z);
      Vec cand(d);
      for (int i = 0; i < d; ++i)
        cand[i] = z[i] + net.jumps[j][i] * invN;
      bool kept = membership(domain, cand);
      for (int i = 0; i < d; ++i) {
        double inc = bj * net.jumps[j][i] * dt;
        if (kept)
          comp_in[i] += inc;
        else
          int_gN[i] += inc;
      }
      if (!kept) rep.occupation += dt;
    }
  };

  record_sup();
  for (std::size_t e = 0; e < path.events.size(); ++e) {
    const auto& ev = path.events[e];
    advance(ev.t - t_prev);
    record_sup();  // just before the jump
    if (ev.applied) {
      Vec next = path.state_after(e);
      for (int i = 0; i < d; ++i) {
        double step = next[i] - z[i];
        if (std::abs(step - net.jumps[ev.j][i] * invN) > 1e-12)
          throw std::invalid_argument(
              "diagnostics: path inconsistent with the network jumps");
        jumpsum[i] += step;
      }
      z = next;
    } else {
      ++rep.suppressed_count[ev.j];
    }
    record_sup();  // just after
    t_prev = ev.t;
  }
  advance(path.T - t_prev);
  record_sup();
  for (int i = 0; i < d; ++i)
    rep.final_martingale[i] = jumpsum[i] - comp_in[i];
  return rep;
}

}  // namespace ldp
