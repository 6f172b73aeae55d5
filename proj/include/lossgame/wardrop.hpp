#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <utility>

#include "lossgame/core.hpp"
#include "lossgame/erlang.hpp"

namespace lossgame {

/// Equilibrium market split for one partition: per-coalition arrival rates
/// (original rate units) plus the common blocking level.
struct WardropSplit {
  std::vector<std::pair<Coalition, double>> rates;
  double blocking = 0.0;

  double rate_of(Coalition c) const {
    for (const auto& [coal, r] : rates)
      if (coal == c) return r;
    throw std::invalid_argument("wardrop: coalition not in this split");
  }
  double total() const {
    double s = 0.0;
    for (const auto& [coal, r] : rates) s += r;
    return s;
  }
};

namespace detail {

/// Load x <= hi_load with B(servers, x) = target; NaN when the target level
/// is out of reach even at hi_load.
inline double invert_load(int servers, double target_b, double hi_load) {
  if (erlang_b(servers, hi_load) < target_b)
    return std::numeric_limits<double>::quiet_NaN();
  double lo = 0.0, hi = hi_load;
  for (int it = 0; it < 64; ++it) {
    const double mid = 0.5 * (lo + hi);
    (erlang_b(servers, mid) < target_b ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Two-coalition equilibrium: load sent to the cap_a side.
inline double we_two_loads(int cap_a, int cap_b, double total) {
  double lo = 0.0, hi = total;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = erlang_b(cap_a, mid) - erlang_b(cap_b, total - mid);
    (f < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Same bisection against the continuous-server blocking curve.
inline double we_two_loads_real(double cap_a, double cap_b, double total) {
  double lo = 0.0, hi = total;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = erlang_b_real(cap_a, mid) - erlang_b_real(cap_b, total - mid);
    (f < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// General equilibrium loads: outer bisection on the common blocking level,
/// inner per-coalition inversion. Total demand is conserved to ~1e-13
/// relative and the per-coalition blocking spread is far below 1e-9.
inline std::vector<double> we_loads(const std::vector<int>& caps, double total) {
  const int k = static_cast<int>(caps.size());
  if (k == 1) return {total};
  if (k == 2) {
    const double x = we_two_loads(caps[0], caps[1], total);
    return {x, total - x};
  }
  int min_cap = caps[0];
  for (int c : caps) min_cap = std::min(min_cap, c);
  double b_lo = 0.0, b_hi = erlang_b(min_cap, total);
  std::vector<double> loads(k, 0.0), best(k, 0.0);
  bool have_best = false;
  for (int it = 0; it < 120; ++it) {
    const double mid = 0.5 * (b_lo + b_hi);
    double sum = 0.0;
    bool reachable = true;
    for (int j = 0; j < k; ++j) {
      loads[j] = invert_load(caps[j], mid, total);
      if (std::isnan(loads[j])) {
        reachable = false;
        break;
      }
      sum += loads[j];
    }
    if (reachable) {
      best = loads;
      have_best = true;
    }
    ((reachable && sum < total) ? b_lo : b_hi) = mid;
  }
  if (!have_best)
    throw numerical_error("wardrop: blocking-level bisection failed");
  return best;
}

}  // namespace detail

/// Solves the equilibrium split of the whole market across the partition's
/// coalitions (every coalition sees the same blocking, or carries zero load).
inline WardropSplit solve_we(const Instance& inst, const Partition& p) {
  if (p.agents() != inst.agents())
    throw std::invalid_argument("solve_we: partition/instance size mismatch");
  std::vector<int> caps;
  caps.reserve(p.size());
  for (const Coalition& c : p.blocks()) caps.push_back(inst.coalition_capacity(c));
  const std::vector<double> loads = detail::we_loads(caps, inst.offered_load());
  WardropSplit out;
  out.rates.reserve(p.size());
  for (int j = 0; j < p.size(); ++j)
    out.rates.emplace_back(p.block(j), loads[j] * inst.service_rate());
  out.blocking = erlang_b(caps[0], loads[0]);
  return out;
}

/// Worst-case (over rival arrangements) equilibrium rate a coalition can
/// anticipate, together with an arrangement attaining it.
struct Pessimal {
  double worth = 0.0;
  Partition arrangement;
};

/// Per-instance computation hub with equilibrium and pessimal-worth caches.
class Evaluator {
 public:
  explicit Evaluator(Instance inst) : inst_(std::move(inst)) {}

  const Instance& instance() const { return inst_; }

  const WardropSplit& split(const Partition& p) {
    auto it = we_.find(p.key());
    if (it == we_.end()) it = we_.emplace(p.key(), solve_we(inst_, p)).first;
    return it->second;
  }

  double rate(const Partition& p, Coalition c) { return split(p).rate_of(c); }

  const Pessimal& pessimal(Coalition q) {
    if (q.empty()) throw std::invalid_argument("pessimal: empty coalition");
    if (!q.subset_of(inst_.grand()))
      throw std::invalid_argument("pessimal: coalition out of range");
    auto it = pess_.find(q.bits());
    if (it != pess_.end()) return it->second;
    Pessimal result{inst_.market_rate(), Partition::grand(inst_.agents())};
    if (q != inst_.grand()) {
      bool first = true;
      for_each_partition_of(inst_.grand().minus(q), [&](std::vector<Coalition> blocks) {
        blocks.push_back(q);
        Partition full(inst_.agents(), std::move(blocks));
        const double r = rate(full, q);
        if (first || r < result.worth) {
          result = Pessimal{r, full};
          first = false;
        }
      });
    }
    return pess_.emplace(q.bits(), std::move(result)).first->second;
  }

 private:
  Instance inst_;
  std::map<std::vector<std::uint32_t>, WardropSplit> we_;
  std::map<std::uint32_t, Pessimal> pess_;
};

/// Per-server equilibrium rate of the larger side of a (k, N-k) duopoly.
inline double psi(const Instance& inst, int k) {
  const int n_total = inst.total_capacity();
  if (2 * k < n_total || k >= n_total)
    throw std::domain_error("psi: need N/2 <= k < N");
  const double x =
      detail::we_two_loads(k, n_total - k, inst.offered_load());
  return x * inst.service_rate() / static_cast<double>(k);
}

/// Capacities k in [ceil(N/2), N - min capacity] realizable by some proper
/// coalition (subset-sum over the providers).
inline std::vector<int> achievable_large_capacities(const Instance& inst) {
  const int n_total = inst.total_capacity();
  int min_cap = inst.capacity(0);
  for (int i = 0; i < inst.agents(); ++i)
    min_cap = std::min(min_cap, inst.capacity(i));
  std::vector<char> reachable(n_total + 1, 0);
  reachable[0] = 1;
  for (int i = 0; i < inst.agents(); ++i)
    for (int s = n_total; s >= inst.capacity(i); --s)
      if (reachable[s - inst.capacity(i)]) reachable[s] = 1;
  std::vector<int> out;
  const int lo = (n_total + 1) / 2;
  for (int k = lo; k <= n_total - min_cap; ++k)
    if (reachable[k]) out.push_back(k);
  return out;
}

struct KStarResult {
  std::vector<int> capacities;        ///< maximizing k's, ascending
  double psi_max = 0.0;
  std::vector<Coalition> coalitions;  ///< proper coalitions whose size is in k*
};

/// Argmax of psi over the achievable larger-coalition capacities, with ties
/// within 1e-9 relative included, plus the realizing coalitions.
inline KStarResult k_star(const Instance& inst) {
  if (inst.agents() < 2) throw std::domain_error("k_star: need at least two providers");
  const std::vector<int> ks = achievable_large_capacities(inst);
  if (ks.empty()) throw std::domain_error("k_star: no achievable capacity in window");
  std::vector<double> vals;
  vals.reserve(ks.size());
  double best = -1.0;
  for (int k : ks) {
    vals.push_back(psi(inst, k));
    best = std::max(best, vals.back());
  }
  KStarResult res;
  res.psi_max = best;
  for (std::size_t i = 0; i < ks.size(); ++i)
    if (vals[i] >= best * (1.0 - 1e-9)) res.capacities.push_back(ks[i]);
  const int n = inst.agents();
  if (n > 20) throw std::length_error("k_star: coalition scan capped at 20 providers");
  for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
    const Coalition c{mask};
    const int cap = inst.coalition_capacity(c);
    for (int k : res.capacities)
      if (cap == k) {
        res.coalitions.push_back(c);
        break;
      }
  }
  return res;
}

}  // namespace lossgame
