#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "lossgame/wardrop.hpp"
#include "oracle_util.hpp"

using namespace lossgame;

TEST_CASE("two-coalition split matches the closed form for caps (2,1)") {
  // B(2,x) = B(1,1-x) reduces to 3x^2 = 2 at total load 1
  const Instance inst({2, 1}, 1.0);
  const WardropSplit ws = solve_we(inst, Partition::singletons(2));
  CHECK(ws.rate_of(Coalition::single(0)) ==
        Catch::Approx(std::sqrt(2.0 / 3.0)).margin(1e-9));
  CHECK(ws.rate_of(Coalition::single(1)) ==
        Catch::Approx(1.0 - std::sqrt(2.0 / 3.0)).margin(1e-9));
  CHECK(ws.blocking == Catch::Approx(erlang_b(2, std::sqrt(2.0 / 3.0))).epsilon(1e-10));
}

TEST_CASE("two-coalition split agrees with the dense-scan oracle") {
  std::mt19937 rng(101);
  std::uniform_int_distribution<int> capd(1, 40);
  std::uniform_real_distribution<double> scale(0.2, 4.0);
  for (int trial = 0; trial < 25; ++trial) {
    const int ca = capd(rng), cb = capd(rng);
    const double lam = scale(rng) * (ca + cb);
    const Instance inst({ca, cb}, lam);
    const Partition duo = Partition::singletons(2);
    const WardropSplit ws = solve_we(inst, duo);
    const double internal0 = ws.rates[0].second;  // largest-capacity side
    const double oracle = testutil::duopoly_oracle(
        inst.capacity(0), inst.capacity(1), inst.offered_load());
    CHECK(internal0 == Catch::Approx(oracle * 1.0).margin(1e-6 * lam));
  }
}

TEST_CASE("degenerate one-coalition split carries the whole market") {
  const Instance inst({3, 2}, 4.0, 2.0);
  const WardropSplit ws = solve_we(inst, Partition::grand(2));
  CHECK(ws.rates.size() == 1);
  CHECK(ws.total() == Catch::Approx(4.0));
  CHECK(ws.blocking == Catch::Approx(erlang_b(5, 2.0)));  // load units
}

TEST_CASE("service rate only rescales the equilibrium") {
  const Instance slow({4, 3, 2}, 6.0, 1.0);
  const Instance fast({4, 3, 2}, 12.0, 2.0);  // same offered load
  const Partition p = Partition::singletons(3);
  const WardropSplit a = solve_we(slow, p);
  const WardropSplit b = solve_we(fast, p);
  for (std::size_t i = 0; i < a.rates.size(); ++i)
    CHECK(b.rates[i].second == Catch::Approx(2.0 * a.rates[i].second).epsilon(1e-9));
  CHECK(a.blocking == Catch::Approx(b.blocking).margin(1e-9));
}

TEST_CASE("multi-coalition equilibrium invariants on random instances") {
  std::mt19937 rng(202);
  for (int trial = 0; trial < 30; ++trial) {
    const Instance inst = testutil::random_instance(rng, 3, 6);
    const Partition p = testutil::random_partition(rng, inst.agents());
    const WardropSplit ws = solve_we(inst, p);

    CHECK(ws.total() == Catch::Approx(inst.market_rate()).margin(1e-9 * inst.market_rate()));

    double bmin = 1.0, bmax = 0.0;
    for (const auto& [coal, r] : ws.rates) {
      CHECK(r >= 0.0);
      const double b =
          erlang_b(inst.coalition_capacity(coal), r / inst.service_rate());
      bmin = std::min(bmin, b);
      bmax = std::max(bmax, b);
    }
    CHECK(bmax - bmin <= 1e-9);

    // larger coalitions run at a per-server rate at least as high
    for (const auto& [ca, ra] : ws.rates)
      for (const auto& [cb, rb] : ws.rates) {
        const int na = inst.coalition_capacity(ca), nb = inst.coalition_capacity(cb);
        if (na > nb) CHECK(ra / na >= rb / nb - 1e-9);
      }
  }
}

TEST_CASE("equilibrium rates grow with the market rate") {
  const std::vector<int> caps{5, 3, 1};
  const Partition p = Partition::singletons(3);
  double prev0 = 0.0;
  for (double lam : {1.0, 3.0, 9.0, 27.0}) {
    const Instance inst(caps, lam);
    const double r0 = solve_we(inst, p).rates[0].second;
    CHECK(r0 > prev0);
    prev0 = r0;
  }
}

TEST_CASE("evaluator caches splits and pessimal worths") {
  Evaluator ev(Instance({4, 2, 2}, 5.0));
  const Partition p = Partition::singletons(3);
  const WardropSplit& a = ev.split(p);
  const WardropSplit& b = ev.split(p);
  CHECK(&a == &b);
  const Pessimal& pa = ev.pessimal(Coalition::of({0}));
  const Pessimal& pb = ev.pessimal(Coalition::of({0}));
  CHECK(&pa == &pb);
}

TEST_CASE("pessimal worth of the grand coalition is the market rate") {
  Evaluator ev(Instance({3, 2, 1}, 4.5));
  const Pessimal& pw = ev.pessimal(Coalition::full(3));
  CHECK(pw.worth == Catch::Approx(4.5));
  CHECK(pw.arrangement == Partition::grand(3));
  CHECK_THROWS_AS(ev.pessimal(Coalition()), std::invalid_argument);
}

TEST_CASE("pessimal worth against a single rival equals the duopoly rate") {
  std::mt19937 rng(303);
  for (int trial = 0; trial < 10; ++trial) {
    const Instance inst = testutil::random_instance(rng, 3, 5);
    Evaluator ev(inst);
    // complement of one provider: only one rival arrangement exists
    const Coalition rest = inst.grand().minus(Coalition::single(0));
    const Partition duo(inst.agents(), {Coalition::single(0), rest});
    CHECK(ev.pessimal(rest).worth == Catch::Approx(ev.rate(duo, rest)).epsilon(1e-12));
  }
}

TEST_CASE("pessimal minimizer is the consolidated complement") {
  std::mt19937 rng(404);
  for (int trial = 0; trial < 12; ++trial) {
    const Instance inst = testutil::random_instance(rng, 3, 5);
    Evaluator ev(inst);
    const int n = inst.agents();
    for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
      const Coalition q{mask};
      const Coalition comp = inst.grand().minus(q);
      const Partition consolidated(n, {q, comp});
      CHECK(ev.pessimal(q).worth ==
            Catch::Approx(ev.rate(consolidated, q)).margin(1e-9 * inst.market_rate()));
    }
  }
}

TEST_CASE("pessimal worth is monotone under inclusion") {
  Evaluator ev(Instance({5, 4, 2, 1}, 9.0));
  double prev = 0.0;
  for (Coalition q : {Coalition::of({3}), Coalition::of({2, 3}),
                      Coalition::of({1, 2, 3}), Coalition::of({0, 1, 2, 3})}) {
    const double w = ev.pessimal(q).worth;
    CHECK(w >= prev - 1e-12);
    prev = w;
  }
}

TEST_CASE("psi at the balanced point is the market rate per server") {
  const Instance inst({3, 3}, 4.0);
  CHECK(psi(inst, 3) == Catch::Approx(4.0 / 6.0).epsilon(1e-10));
  CHECK_THROWS_AS(psi(inst, 2), std::domain_error);  // below half
  CHECK_THROWS_AS(psi(inst, 6), std::domain_error);  // not below N
}

TEST_CASE("achievable larger-side capacities") {
  const Instance inst({10, 2, 2, 2}, 13.0);
  CHECK(achievable_large_capacities(inst) == std::vector<int>{10, 12, 14});
  const Instance pair({4, 4}, 2.0);
  CHECK(achievable_large_capacities(pair) == std::vector<int>{4});
}

TEST_CASE("k-star for the quoted four-provider market") {
  const Instance inst({10, 2, 2, 2}, 13.0);
  const KStarResult res = k_star(inst);
  REQUIRE(res.capacities == std::vector<int>{12});
  CHECK(res.psi_max == Catch::Approx(psi(inst, 12)).epsilon(1e-12));
  REQUIRE(res.coalitions.size() == 3);
  for (Coalition c : res.coalitions) {
    CHECK(inst.coalition_capacity(c) == 12);
    CHECK(c.contains(0));
  }
}

TEST_CASE("k-star of a matched pair is the shared capacity") {
  const KStarResult res = k_star(Instance({4, 4}, 2.0));
  CHECK(res.capacities == std::vector<int>{4});
  CHECK(res.coalitions.size() == 2);
  CHECK_THROWS_AS(k_star(Instance({3}, 1.0)), std::domain_error);
}
