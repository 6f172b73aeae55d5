#pragma once

#include <array>
#include <cmath>

#include "lossgame/core.hpp"
#include "lossgame/wardrop.hpp"

namespace lossgame {

/// Partition plus one payoff per provider (internal index order).
struct Configuration {
  Partition partition;
  std::vector<double> phi;
};

/// Each provider gets its capacity share of the coalition's equilibrium rate.
inline Configuration proportional_payoff(Evaluator& ev, const Partition& p) {
  const Instance& inst = ev.instance();
  std::vector<double> phi(inst.agents(), 0.0);
  const WardropSplit& ws = ev.split(p);
  for (const auto& [coal, r] : ws.rates) {
    const double cap = inst.coalition_capacity(coal);
    for (int i : coal.members()) phi[i] = r * inst.capacity(i) / cap;
  }
  return Configuration{p, std::move(phi)};
}

namespace detail {

inline double shapley_weight(int sub, int block) {
  static constexpr std::array<double, 13> fact = {
      1., 1., 2., 6., 24., 120., 720., 5040., 40320.,
      362880., 3628800., 39916800., 479001600.};
  return fact[sub] * fact[block - sub - 1] / fact[block];
}

}  // namespace detail

/// Shapley value inside each coalition, with sub-coalition worths evaluated
/// in the partition where the rest of the coalition stays together and all
/// other coalitions are unchanged.
inline Configuration shapley_payoff(Evaluator& ev, const Partition& p) {
  const Instance& inst = ev.instance();
  std::vector<double> phi(inst.agents(), 0.0);
  for (int bj = 0; bj < p.size(); ++bj) {
    const Coalition block = p.block(bj);
    const std::vector<int> mem = block.members();
    const int s = static_cast<int>(mem.size());
    if (s > kMaxEnumerationAgents)
      throw std::length_error("shapley: block larger than 12 members");
    if (s == 1) {
      phi[mem[0]] = ev.rate(p, block);
      continue;
    }
    // worth of each sub-coalition (indexed by member-mask)
    std::vector<double> nu(1u << s, 0.0);
    for (std::uint32_t m = 1; m < (1u << s); ++m) {
      Coalition sub;
      for (int i = 0; i < s; ++i)
        if ((m >> i) & 1u) sub = sub.unite(Coalition::single(mem[i]));
      if (sub == block) {
        nu[m] = ev.rate(p, block);
        continue;
      }
      std::vector<Coalition> blocks;
      for (int k = 0; k < p.size(); ++k)
        if (k != bj) blocks.push_back(p.block(k));
      blocks.push_back(sub);
      blocks.push_back(block.minus(sub));
      nu[m] = ev.rate(Partition(inst.agents(), std::move(blocks)), sub);
    }
    for (int i = 0; i < s; ++i) {
      double v = 0.0;
      for (std::uint32_t m = 0; m < (1u << s); ++m) {
        if ((m >> i) & 1u) continue;
        v += detail::shapley_weight(std::popcount(m), s) *
             (nu[m | (1u << i)] - nu[m]);
      }
      phi[mem[i]] = v;
    }
  }
  return Configuration{p, std::move(phi)};
}

struct ConsistencyReport {
  bool ok = false;
  double max_block_residual = 0.0;  ///< worst |sum phi_C - lambda_C|
  double min_payoff = 0.0;
};

/// Checks that payoffs are non-negative and redistribute each coalition's
/// equilibrium rate within `tol` (absolute, rate units).
inline ConsistencyReport check_consistency(Evaluator& ev, const Configuration& conf,
                                           double tol) {
  const Instance& inst = ev.instance();
  if (static_cast<int>(conf.phi.size()) != inst.agents())
    throw std::invalid_argument("consistency: payoff vector has wrong length");
  ConsistencyReport rep;
  rep.min_payoff = *std::min_element(conf.phi.begin(), conf.phi.end());
  for (const Coalition& c : conf.partition.blocks()) {
    double s = 0.0;
    for (int i : c.members()) s += conf.phi[i];
    rep.max_block_residual =
        std::max(rep.max_block_residual, std::abs(s - ev.rate(conf.partition, c)));
  }
  rep.ok = rep.max_block_residual <= tol && rep.min_payoff >= -tol;
  return rep;
}

}  // namespace lossgame
