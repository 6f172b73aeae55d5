#pragma once

// Shared test utilities: an independent two-coalition equilibrium oracle and
// random samplers for instances, partitions and consistent payoff vectors.

#include <random>
#include <vector>

#include "lossgame/core.hpp"
#include "lossgame/erlang.hpp"
#include "lossgame/payoffs.hpp"
#include "lossgame/wardrop.hpp"

namespace testutil {

/// Load sent to the cap_a side of a two-coalition equilibrium, located by a
/// dense scan of the blocking balance and refined by bisection inside the
/// bracketing cell. Shares no code path with the production solver.
inline double duopoly_oracle(int cap_a, int cap_b, double total_load,
                             int grid = 65536) {
  using lossgame::erlang_b;
  const auto balance = [&](double x) {
    return erlang_b(cap_a, x) - erlang_b(cap_b, total_load - x);
  };
  double prev = balance(0.0);
  for (int i = 1; i <= grid; ++i) {
    const double x = total_load * i / grid;
    const double cur = balance(x);
    if (cur >= 0.0) {
      double lo = total_load * (i - 1) / grid, hi = x;
      if (prev >= 0.0) return x;  // flat cell, keep the scan point
      for (int it = 0; it < 50; ++it) {
        const double mid = 0.5 * (lo + hi);
        (balance(mid) >= 0.0 ? hi : lo) = mid;
      }
      return 0.5 * (lo + hi);
    }
    prev = cur;
  }
  return total_load;
}

inline lossgame::Instance random_instance(std::mt19937& rng, int min_n = 3,
                                          int max_n = 5, int max_cap = 12) {
  std::uniform_int_distribution<int> nd(min_n, max_n);
  std::uniform_int_distribution<int> capd(1, max_cap);
  std::uniform_real_distribution<double> scale(0.3, 3.0);
  const int n = nd(rng);
  std::vector<int> caps;
  int total = 0;
  for (int i = 0; i < n; ++i) {
    caps.push_back(capd(rng));
    total += caps.back();
  }
  return lossgame::Instance(caps, scale(rng) * total);
}

inline lossgame::Partition random_partition(std::mt19937& rng, int n) {
  std::vector<int> rgs(n, 0);
  int hi = 0;
  for (int i = 1; i < n; ++i) {
    std::uniform_int_distribution<int> d(0, hi + 1);
    rgs[i] = d(rng);
    hi = std::max(hi, rgs[i]);
  }
  std::vector<lossgame::Coalition> blocks(hi + 1);
  for (int i = 0; i < n; ++i)
    blocks[rgs[i]] = blocks[rgs[i]].unite(lossgame::Coalition::single(i));
  return lossgame::Partition(n, std::move(blocks));
}

/// Random payoffs that redistribute each coalition's equilibrium rate.
inline std::vector<double> random_consistent_phi(std::mt19937& rng,
                                                 lossgame::Evaluator& ev,
                                                 const lossgame::Partition& p) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> phi(ev.instance().agents(), 0.0);
  for (const lossgame::Coalition& c : p.blocks()) {
    const double rate = ev.rate(p, c);
    const std::vector<int> mem = c.members();
    std::vector<double> w;
    double sum = 0.0;
    for (std::size_t i = 0; i < mem.size(); ++i) {
      w.push_back(u(rng));
      sum += w.back();
    }
    for (std::size_t i = 0; i < mem.size(); ++i) phi[mem[i]] = rate * w[i] / sum;
  }
  return phi;
}

}  // namespace testutil
