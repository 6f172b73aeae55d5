#pragma once

#include <optional>

#include "lossgame/core.hpp"
#include "lossgame/payoffs.hpp"
#include "lossgame/simplex.hpp"
#include "lossgame/wardrop.hpp"

namespace lossgame {

enum class Rule { GBPA, RBPA, RBIA };

enum class DeviationKind { General, Merger, Split };

/// Strict-improvement threshold: deviations must clear their comparison by
/// more than this, so exact ties (e.g. the merge-to-grand tie) never block.
inline double blocking_epsilon(const Instance& inst) {
  return 1e-9 * inst.market_rate();
}

/// One successful deviation. `margin` is the decisive gap (minimum over the
/// rule's conditions) and is strictly greater than blocking_epsilon.
struct BlockReport {
  Rule rule = Rule::GBPA;
  DeviationKind kind = DeviationKind::General;
  Coalition blocker;
  double anticipated = 0.0;  ///< deviators' guaranteed (pessimal) rate
  double prevailing = 0.0;   ///< what the rule compares it against
  double margin = 0.0;
  std::optional<double> post_split_rate;    ///< RB-IA split: immediate rate
  std::optional<double> payoff_sum;         ///< RB-IA split: current payoffs
  std::optional<Partition> post_partition;  ///< RB-IA split: resulting partition
};

struct Verdict {
  bool stable = true;
  std::vector<BlockReport> blockers;
};

namespace detail {

inline void require_consistent(Evaluator& ev, const Configuration& conf) {
  const double tol = 1e-6 * ev.instance().market_rate();
  if (!check_consistency(ev, conf, tol).ok)
    throw std::invalid_argument(
        "stability: payoffs inconsistent with the partition's equilibrium rates");
}

inline double payoff_sum(const Configuration& conf, Coalition q) {
  double s = 0.0;
  for (int i : q.members()) s += conf.phi[i];
  return s;
}

inline DeviationKind classify_deviation(const Partition& p, Coalition q) {
  for (const Coalition& c : p.blocks())
    if (q != c && q.subset_of(c)) return DeviationKind::Split;
  Coalition covered;
  for (const Coalition& c : p.blocks())
    if (c.subset_of(q)) covered = covered.unite(c);
  if (covered == q) return DeviationKind::Merger;
  return DeviationKind::General;
}

}  // namespace detail

/// Unrestricted blocking: any coalition outside the partition may form and
/// compares its pessimal anticipated rate with its members' payoffs.
inline Verdict check_gbpa(Evaluator& ev, const Configuration& conf) {
  detail::require_consistent(ev, conf);
  const int n = ev.instance().agents();
  if (n > kMaxEnumerationAgents)
    throw std::length_error("check_gbpa: capped at 12 providers");
  const double eps = blocking_epsilon(ev.instance());
  Verdict v;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    const Coalition q{mask};
    if (conf.partition.contains_block(q)) continue;
    const double anticipated = ev.pessimal(q).worth;
    const double prevailing = detail::payoff_sum(conf, q);
    const double margin = anticipated - prevailing;
    if (margin > eps)
      v.blockers.push_back({Rule::GBPA, detail::classify_deviation(conf.partition, q),
                            q, anticipated, prevailing, margin});
  }
  v.stable = v.blockers.empty();
  return v;
}

/// Pessimal-anticipation blocking restricted to mergers of existing
/// coalitions and splinters of a single coalition.
inline Verdict check_rbpa(Evaluator& ev, const Configuration& conf) {
  detail::require_consistent(ev, conf);
  const double eps = blocking_epsilon(ev.instance());
  Verdict v;
  for (const Merger& m : enumerate_mergers(conf.partition)) {
    const double anticipated = ev.pessimal(m.merged).worth;
    const double prevailing = detail::payoff_sum(conf, m.merged);
    const double margin = anticipated - prevailing;
    if (margin > eps)
      v.blockers.push_back({Rule::RBPA, DeviationKind::Merger, m.merged,
                            anticipated, prevailing, margin});
  }
  for (const Split& s : enumerate_splits(conf.partition)) {
    const double anticipated = ev.pessimal(s.part).worth;
    const double prevailing = detail::payoff_sum(conf, s.part);
    const double margin = anticipated - prevailing;
    if (margin > eps)
      v.blockers.push_back({Rule::RBPA, DeviationKind::Split, s.part,
                            anticipated, prevailing, margin});
  }
  v.stable = v.blockers.empty();
  return v;
}

/// Immediate-anticipation blocking: a splinter must both beat its capacity
/// share of the coalition rate in the worst case and gain immediately after
/// the split; a merger compares its pessimal rate with the merging
/// coalitions' combined prevailing rate.
inline Verdict check_rbia(Evaluator& ev, const Configuration& conf) {
  detail::require_consistent(ev, conf);
  const Instance& inst = ev.instance();
  const double eps = blocking_epsilon(inst);
  Verdict v;
  for (const Merger& m : enumerate_mergers(conf.partition)) {
    const double anticipated = ev.pessimal(m.merged).worth;
    double prevailing = 0.0;
    for (int j : m.block_indices) prevailing += ev.rate(conf.partition, conf.partition.block(j));
    const double margin = anticipated - prevailing;
    if (margin > eps)
      v.blockers.push_back({Rule::RBIA, DeviationKind::Merger, m.merged,
                            anticipated, prevailing, margin});
  }
  for (const Split& s : enumerate_splits(conf.partition)) {
    const double parent_rate = ev.rate(conf.partition, s.parent);
    const double share =
        parent_rate * inst.coalition_capacity(s.part) / inst.coalition_capacity(s.parent);
    const double anticipated = ev.pessimal(s.part).worth;
    const double m1 = anticipated - share;
    if (m1 <= eps) continue;
    const Partition after = apply_split(conf.partition, s);
    const double post_rate = ev.rate(after, s.part);
    const double paid = detail::payoff_sum(conf, s.part);
    const double m2 = post_rate - paid;
    if (m2 <= eps) continue;
    BlockReport br{Rule::RBIA, DeviationKind::Split, s.part,
                   anticipated, share, std::min(m1, m2)};
    br.post_split_rate = post_rate;
    br.payoff_sum = paid;
    br.post_partition = after;
    v.blockers.push_back(std::move(br));
  }
  v.stable = v.blockers.empty();
  return v;
}

inline Verdict check_stability(Evaluator& ev, const Configuration& conf, Rule rule) {
  switch (rule) {
    case Rule::GBPA: return check_gbpa(ev, conf);
    case Rule::RBPA: return check_rbpa(ev, conf);
    case Rule::RBIA: return check_rbia(ev, conf);
  }
  throw std::invalid_argument("check_stability: unknown rule");
}

/// Payoff-independent partition stability under immediate anticipation: no
/// merger clears its combined prevailing rate, and no splinter's pessimal
/// rate beats its capacity share of its coalition's rate.
inline Verdict is_stable_partition_rbia(Evaluator& ev, const Partition& p) {
  const Instance& inst = ev.instance();
  const double eps = blocking_epsilon(inst);
  Verdict v;
  for (const Merger& m : enumerate_mergers(p)) {
    const double anticipated = ev.pessimal(m.merged).worth;
    double prevailing = 0.0;
    for (int j : m.block_indices) prevailing += ev.rate(p, p.block(j));
    const double margin = anticipated - prevailing;
    if (margin > eps)
      v.blockers.push_back({Rule::RBIA, DeviationKind::Merger, m.merged,
                            anticipated, prevailing, margin});
  }
  for (const Split& s : enumerate_splits(p)) {
    const double parent_rate = ev.rate(p, s.parent);
    const double share =
        parent_rate * inst.coalition_capacity(s.part) / inst.coalition_capacity(s.parent);
    const double anticipated = ev.pessimal(s.part).worth;
    const double margin = anticipated - share;
    if (margin > eps)
      v.blockers.push_back({Rule::RBIA, DeviationKind::Split, s.part,
                            anticipated, share, margin});
  }
  v.stable = v.blockers.empty();
  return v;
}

/// First stable partition in canonical enumeration order.
inline Partition find_stable_partition_rbia(Evaluator& ev) {
  std::optional<Partition> found;
  for_each_partition(ev.instance().agents(), [&](const Partition& p) {
    if (!found && is_stable_partition_rbia(ev, p).stable) found = p;
  });
  if (!found)
    throw numerical_error("find_stable_partition_rbia: no stable partition found");
  return *found;
}

/// Constructive blocking witness for unrestricted blocking (three or more
/// providers): tries the complement of each singleton when the partition is
/// fully fragmented, otherwise the near-grand coalitions dropping one member
/// of a multi-member coalition and then those members alone, falling back on
/// an exhaustive scan.
inline BlockReport find_blocking_witness_gbpa(Evaluator& ev, const Configuration& conf) {
  detail::require_consistent(ev, conf);
  const Instance& inst = ev.instance();
  const int n = inst.agents();
  if (n < 3)
    throw std::invalid_argument("gbpa witness: needs at least three providers");
  if (n > kMaxEnumerationAgents)
    throw std::length_error("gbpa witness: capped at 12 providers");
  const double eps = blocking_epsilon(inst);

  auto attempt = [&](Coalition q) -> std::optional<BlockReport> {
    if (conf.partition.contains_block(q)) return std::nullopt;
    const double anticipated = ev.pessimal(q).worth;
    const double prevailing = detail::payoff_sum(conf, q);
    const double margin = anticipated - prevailing;
    if (margin <= eps) return std::nullopt;
    return BlockReport{Rule::GBPA, detail::classify_deviation(conf.partition, q),
                       q, anticipated, prevailing, margin};
  };

  bool all_single = true;
  Coalition multi;
  for (const Coalition& c : conf.partition.blocks())
    if (c.size() > 1) {
      multi = c;
      all_single = false;
      break;
    }
  if (all_single) {
    for (int j = 0; j < n; ++j)
      if (auto r = attempt(inst.grand().minus(Coalition::single(j)))) return *r;
  } else {
    for (int a : multi.members())
      if (auto r = attempt(inst.grand().minus(Coalition::single(a)))) return *r;
    for (int a : multi.members())
      if (auto r = attempt(Coalition::single(a))) return *r;
  }
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask)
    if (auto r = attempt(Coalition{mask})) return *r;
  throw numerical_error("gbpa witness: no blocking coalition found");
}

/// Existence analysis for a stable grand-coalition configuration under
/// immediate anticipation, with a constructed witness when one exists.
struct GrandRbia {
  bool exists = false;
  std::optional<double> floor;  ///< minimum payoff the largest provider needs
  std::optional<Configuration> witness;
};

inline GrandRbia grand_coalition_rbia(Evaluator& ev) {
  const Instance& inst = ev.instance();
  const int n = inst.agents();
  if (n == 1)
    return {true, 0.0,
            Configuration{Partition::grand(1), {inst.market_rate()}}};
  if (n > kMaxEnumerationAgents)
    throw std::length_error("grand_coalition_rbia: capped at 12 providers");
  if (2 * inst.capacity(0) < inst.total_capacity()) return {false, {}, {}};
  double floor = 0.0;
  for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask)
    if (mask & 1u) floor = std::max(floor, ev.pessimal(Coalition{mask}).worth);
  const double rest_cap = inst.total_capacity() - inst.capacity(0);
  std::vector<double> phi(n, 0.0);
  phi[0] = floor;
  for (int i = 1; i < n; ++i)
    phi[i] = (inst.market_rate() - floor) * inst.capacity(i) / rest_cap;
  return {true, floor, Configuration{Partition::grand(n), std::move(phi)}};
}

/// Feasibility of the restricted-blocking payoff polytope for a partition:
/// either a merger blocks regardless of payoffs, or the splinter lower
/// bounds define a polytope whose max-min-slack point is returned.
struct PolytopeResult {
  bool feasible = false;
  std::optional<std::vector<double>> phi;
  double slack = 0.0;  ///< max-min slack across splinter bounds (market rate when none)
  std::optional<BlockReport> merger_block;
};

inline PolytopeResult rbpa_polytope(Evaluator& ev, const Partition& p) {
  const Instance& inst = ev.instance();
  const double eps = blocking_epsilon(inst);
  for (const Merger& m : enumerate_mergers(p)) {
    double prevailing = 0.0;
    for (int j : m.block_indices) prevailing += ev.rate(p, p.block(j));
    const double anticipated = ev.pessimal(m.merged).worth;
    if (anticipated - prevailing > eps) {
      PolytopeResult res;
      res.merger_block = BlockReport{Rule::RBPA, DeviationKind::Merger, m.merged,
                                     anticipated, prevailing,
                                     anticipated - prevailing};
      return res;
    }
  }
  const int n = inst.agents();
  lp::Problem pr;
  pr.vars = n + 1;  // payoffs plus the slack variable
  const int tvar = n;
  for (const Coalition& c : p.blocks()) {
    std::vector<double> row(pr.vars, 0.0);
    for (int i : c.members()) row[i] = 1.0;
    pr.eq_a.push_back(std::move(row));
    pr.eq_b.push_back(ev.rate(p, c));
  }
  for (const Split& s : enumerate_splits(p)) {
    std::vector<double> row(pr.vars, 0.0);
    for (int i : s.part.members()) row[i] = 1.0;
    row[tvar] = -1.0;
    pr.ge_a.push_back(std::move(row));
    pr.ge_b.push_back(ev.pessimal(s.part).worth);
  }
  {
    std::vector<double> row(pr.vars, 0.0);
    row[tvar] = -1.0;
    pr.ge_a.push_back(std::move(row));
    pr.ge_b.push_back(-inst.market_rate());
  }
  pr.objective.assign(pr.vars, 0.0);
  pr.objective[tvar] = 1.0;
  const lp::Solution sol = lp::solve(pr);
  if (sol.status != lp::Status::optimal) return {};
  PolytopeResult res;
  res.feasible = true;
  res.phi = std::vector<double>(sol.x.begin(), sol.x.begin() + n);
  res.slack = sol.x[tvar];
  return res;
}

}  // namespace lossgame
