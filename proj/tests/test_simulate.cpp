#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ldp/simulate.hpp"

using namespace ldp;

namespace {

SivParams fitted_siv() { return {3.6, 0.1, 0.3, 1.01, 0.02, 0.03}; }
S0is1Params fitted_s0is1() { return {3.0, 5.0, 0.015, 2.0}; }

ReactionNetwork counting_net(double c, double cap) {
  ReactionNetwork net;
  net.dim = 1;
  net.transitions = 1;
  net.jumps = {{1}};
  net.raw_rates = {[c](const Vec&) { return c; }};
  net.sup_rate = c;
  net.simplex_cap = cap;
  return net;
}

DomainSpec simplex_domain() {
  DomainSpec dom;
  dom.model = ModelKind::s0is1;
  dom.polygon = {{0, 0}, {1, 0}, {0, 1}};
  dom.z0 = {0.25, 0.25};
  dom.interior_ref = dom.z0;
  dom.grid = MembershipGrid(dom.polygon, 256);
  return dom;
}

const DomainSpec& s0is1_domain() {
  static DomainSpec dom = [] {
    ReactionNetwork net = build_s0is1(fitted_s0is1());
    EquilibriumSet eq = equilibria_s0is1(fitted_s0is1());
    BoundaryCurve curve = compute_separatrix(net, *eq.endemic_unstable);
    return build_domain(curve, ModelKind::s0is1, net);
  }();
  return dom;
}

// 99% chi-square critical value (Wilson-Hilferty).
double chi2_crit_99(double dof) {
  double z = 2.3263478740408408;
  double t = 1.0 - 2.0 / (9.0 * dof) + z * std::sqrt(2.0 / (9.0 * dof));
  return dof * t * t * t;
}

double poisson_pmf(int m, double lambda) {
  return std::exp(-lambda + m * std::log(lambda) - std::lgamma(m + 1.0));
}

}  // namespace

TEST_CASE("zero rates give a constant path with no events") {
  ReactionNetwork net = counting_net(0.0, 1.0);
  PathRecord path = simulate_free(net, 100, {0.2}, 3.0, 7);
  CHECK(path.events.empty());
  CHECK(path.initial == Vec{0.2});
  CHECK(path.final_state() == Vec{0.2});
}

TEST_CASE("determinism: identical seeds give identical paths") {
  ReactionNetwork net = build_siv(fitted_siv());
  PathRecord a = simulate_free(net, 500, {0.3, 0.4}, 2.0, 123);
  PathRecord b = simulate_free(net, 500, {0.3, 0.4}, 2.0, 123);
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    CHECK(a.events[i].t == b.events[i].t);
    CHECK(a.events[i].j == b.events[i].j);
    CHECK(a.events[i].applied == b.events[i].applied);
  }
  CHECK(a.states == b.states);
  PathRecord c = simulate_free(net, 500, {0.3, 0.4}, 2.0, 124);
  CHECK(a.events.size() != c.events.size());
}

TEST_CASE("event times increase and conservation holds per applied jump") {
  ReactionNetwork net = build_s0is1(fitted_s0is1());
  PathRecord path = simulate_free(net, 300, {0.2, 0.3}, 3.0, 99);
  REQUIRE(!path.events.empty());
  double prev_t = 0.0;
  Vec prev = path.initial;
  for (std::size_t e = 0; e < path.events.size(); ++e) {
    CHECK(path.events[e].t > prev_t);
    prev_t = path.events[e].t;
    Vec cur = path.state_after(e);
    int j = path.events[e].j;
    for (int i = 0; i < 2; ++i) {
      double expect = path.events[e].applied
                          ? prev[i] + net.jumps[j][i] / 300.0
                          : prev[i];
      CHECK(cur[i] == doctest::Approx(expect).epsilon(1e-14));
    }
    prev = cur;
  }
  CHECK(prev_t <= path.T);
}

TEST_CASE("free process event count is Poisson(N c T): chi-square at 1%") {
  // One-species constant-rate network on a widened state space; the event
  // count over [0, T] has the exact Poisson(N c T) law.
  ReactionNetwork net = counting_net(1.0, 1e15);
  const std::int64_t N = 100;
  const double T = 1.0;
  const int reps = 10000;
  const double lambda = 100.0;

  std::vector<int> counts(reps);
  for (int r = 0; r < reps; ++r) {
    PathRecord p = simulate_free(net, N, {0.0}, T, mix_seed(2024, r));
    counts[r] = static_cast<int>(p.events.size());
  }

  // Adaptive binning with expected mass >= 8 per bin.
  std::vector<int> edges;  // bin = [edges[i], edges[i+1])
  edges.push_back(0);
  double acc = 0.0;
  for (int m = 0; m < 400; ++m) {
    acc += reps * poisson_pmf(m, lambda);
    if (acc >= 8.0 && m + 1 > edges.back()) {
      edges.push_back(m + 1);
      acc = 0.0;
    }
  }
  if (edges.size() < 3) edges.push_back(400);
  edges.back() = 1000000;  // close the tail

  std::size_t nbins = edges.size() - 1;
  std::vector<double> expected(nbins, 0.0);
  std::vector<int> observed(nbins, 0);
  for (std::size_t b = 0; b < nbins; ++b)
    for (int m = edges[b]; m < std::min(edges[b + 1], 400); ++m)
      expected[b] += reps * poisson_pmf(m, lambda);
  expected[nbins - 1] = reps;
  for (std::size_t b = 0; b + 1 < nbins; ++b)
    expected[nbins - 1] -= expected[b];
  for (int c : counts) {
    std::size_t b =
        std::upper_bound(edges.begin(), edges.end(), c) - edges.begin() - 1;
    ++observed[std::min(b, nbins - 1)];
  }
  double stat = 0.0;
  for (std::size_t b = 0; b < nbins; ++b) {
    double diff = observed[b] - expected[b];
    stat += diff * diff / expected[b];
  }
  CHECK(stat < chi2_crit_99(static_cast<double>(nbins - 1)));

  // Compensator sanity: mean and variance of the count match N c T
  // within three standard errors.
  double mean = std::accumulate(counts.begin(), counts.end(), 0.0) / reps;
  double var = 0.0;
  for (int c : counts) var += (c - mean) * (c - mean);
  var /= reps - 1;
  CHECK(std::abs(mean - lambda) < 3.0 * std::sqrt(lambda / reps));
  CHECK(std::abs(var - lambda) <
        3.0 * std::sqrt((2.0 * lambda * lambda + lambda) / reps));
}

TEST_CASE("free process misconfigured to leave the state space aborts") {
  ReactionNetwork net = counting_net(1.0, 1.0);
  CHECK_THROWS_AS(simulate_free(net, 50, {0.98}, 50.0, 5),
                  std::domain_error);
}

TEST_CASE("reflected equals free when the boundary is never tested") {
  ReactionNetwork net = build_siv(fitted_siv());
  DomainSpec dom = simplex_domain();
  Vec start{0.3, 0.4};
  PathRecord free_path = simulate_free(net, 400, start, 1.0, 31);
  PathRecord refl_path = simulate_reflected(net, dom, 400, start, 1.0, 31);
  REQUIRE(free_path.events.size() == refl_path.events.size());
  for (std::size_t i = 0; i < free_path.events.size(); ++i) {
    CHECK(free_path.events[i].t == refl_path.events[i].t);
    CHECK(free_path.events[i].j == refl_path.events[i].j);
    CHECK(refl_path.events[i].applied);
  }
  CHECK(free_path.states == refl_path.states);
}

TEST_CASE("reflected paths stay in the region; suppression bookkeeping") {
  const DomainSpec& dom = s0is1_domain();
  ReactionNetwork net = build_s0is1(fitted_s0is1());
  EquilibriumSet eq = equilibria_s0is1(fitted_s0is1());
  // Start near the saddle, a step toward the star center.
  Vec zt = *eq.endemic_unstable;
  double dx = dom.z0[0] - zt[0], dy = dom.z0[1] - zt[1];
  double len = std::hypot(dx, dy);
  Vec start{zt[0] + 0.02 * dx / len, zt[1] + 0.02 * dy / len};

  int total_suppressed = 0;
  for (int r = 0; r < 12; ++r) {
    PathRecord p = simulate_reflected(net, dom, 250, start, 5.0, 1000 + r);
    Vec prev = p.initial;
    CHECK(membership(dom, prev));
    for (std::size_t e = 0; e < p.events.size(); ++e) {
      Vec cur = p.state_after(e);
      CHECK(membership(dom, cur));
      if (!p.events[e].applied) {
        ++total_suppressed;
        CHECK(cur == prev);
        // The suppressed candidate is indeed outside.
        Vec cand{prev[0] + net.jumps[p.events[e].j][0] / 250.0,
                 prev[1] + net.jumps[p.events[e].j][1] / 250.0};
        CHECK(!membership(dom, cand));
      }
      prev = cur;
    }
  }
  CHECK(total_suppressed > 0);
}

TEST_CASE("occupation near the boundary shrinks with N") {
  const DomainSpec& dom = s0is1_domain();
  ReactionNetwork net = build_s0is1(fitted_s0is1());
  EquilibriumSet eq = equilibria_s0is1(fitted_s0is1());
  Vec zt = *eq.endemic_unstable;
  double dx = dom.z0[0] - zt[0], dy = dom.z0[1] - zt[1];
  double len = std::hypot(dx, dy);
  Vec start{zt[0] + 0.02 * dx / len, zt[1] + 0.02 * dy / len};

  auto median_occupation = [&](std::int64_t N) {
    std::vector<double> occ;
    for (int r = 0; r < 100; ++r) {
      PathRecord p = simulate_reflected(net, dom, N, start, 5.0,
                                        mix_seed(55, 1000 * N + r));
      DiagnosticsReport rep = diagnostics(p, net, dom);
      occ.push_back(rep.occupation);
      CHECK(rep.occupation >= 0.0);
      CHECK(rep.occupation <= net.transitions * 5.0);
    }
    std::sort(occ.begin(), occ.end());
    return 0.5 * (occ[49] + occ[50]);
  };
  double m500 = median_occupation(500);
  double m2000 = median_occupation(2000);
  // Near the saddle the escape is slow and the path hugs the boundary for
  // the whole horizon; the occupation is O(1) at N=500 but must shrink
  // with N (measured ~0.5 at N=500, ~0.25 at N=2000).
  CHECK(m500 < 1.5);
  CHECK(m2000 < m500);
}

TEST_CASE("diagnostics: zero-event path gives zero diagnostics") {
  ReactionNetwork net = counting_net(0.0, 1.0);
  net.dim = 2;
  net.jumps = {{1, 0}};
  DomainSpec dom = simplex_domain();
  PathRecord p = simulate_reflected(net, dom, 100, {0.2, 0.2}, 1.0, 3);
  DiagnosticsReport rep = diagnostics(p, net, dom);
  CHECK(rep.sup_martingale == 0.0);
  CHECK(rep.sup_phi == 0.0);
  CHECK(rep.occupation == 0.0);
}

TEST_CASE("diagnostics decomposition identity") {
  const DomainSpec& dom = s0is1_domain();
  ReactionNetwork net = build_s0is1(fitted_s0is1());
  EquilibriumSet eq = equilibria_s0is1(fitted_s0is1());
  Vec start = *eq.endemic_stable;
  for (int r = 0; r < 5; ++r) {
    PathRecord p = simulate_reflected(net, dom, 300, start, 2.0, 17 + r);
    DiagnosticsReport rep = diagnostics(p, net, dom);

    // Independent reconstruction: M(T) = Z(T) - z0 - int b ds + int g_N ds.
    Vec z = p.initial;
    Vec int_b(2, 0.0), int_g(2, 0.0);
    double t_prev = 0.0;
    auto accumulate = [&](double dt) {
      for (int j = 0; j < net.transitions; ++j) {
        double bj = net.rate(j, z);
        Vec cand{z[0] + net.jumps[j][0] / 300.0,
                 z[1] + net.jumps[j][1] / 300.0};
        bool kept = membership(dom, cand);
        for (int i = 0; i < 2; ++i) {
          int_b[i] += bj * net.jumps[j][i] * dt;
          if (!kept) int_g[i] += bj * net.jumps[j][i] * dt;
        }
      }
    };
    for (std::size_t e = 0; e < p.events.size(); ++e) {
      accumulate(p.events[e].t - t_prev);
      t_prev = p.events[e].t;
      z = p.state_after(e);
    }
    accumulate(p.T - t_prev);
    Vec zT = p.final_state();
    for (int i = 0; i < 2; ++i) {
      double expect = zT[i] - p.initial[i] - int_b[i] + int_g[i];
      CHECK(std::abs(rep.final_martingale[i] - expect) < 1e-12);
    }
  }
}

TEST_CASE("martingale suprema obey the Doob-type bound on average") {
  ReactionNetwork net = build_siv(fitted_siv());
  EquilibriumSet eq = equilibria_siv(fitted_siv());
  DomainSpec dom = simplex_domain();
  const double T = 5.0;
  const double bound_scale =
      4.0 * net.transitions * net.dim * net.sup_rate * T;
  for (std::int64_t N : {100, 1000}) {
    double acc = 0.0;
    const int reps = 100;
    for (int r = 0; r < reps; ++r) {
      PathRecord p = simulate_reflected(net, dom, N, *eq.endemic_stable, T,
                                        mix_seed(808, 100 * N + r));
      DiagnosticsReport rep = diagnostics(p, net, dom);
      acc += rep.sup_martingale * rep.sup_martingale;
    }
    CHECK(acc / reps <= bound_scale / static_cast<double>(N));
  }
}
