#pragma once

#include <algorithm>
#include <bit>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace lossgame {

/// Raised when an iterative numeric routine fails to converge or a
/// supposedly-guaranteed search comes up empty.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Set of agents, stored as a bitmask over internal (capacity-sorted) indices.
class Coalition {
 public:
  constexpr Coalition() = default;
  constexpr explicit Coalition(std::uint32_t bits) : bits_(bits) {}

  static constexpr Coalition single(int i) { return Coalition(1u << i); }
  static Coalition of(std::initializer_list<int> members) {
    std::uint32_t b = 0;
    for (int i : members) b |= 1u << i;
    return Coalition(b);
  }
  static constexpr Coalition full(int n) {
    return Coalition(n >= 32 ? ~0u : (1u << n) - 1u);
  }

  constexpr std::uint32_t bits() const { return bits_; }
  int size() const { return std::popcount(bits_); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool contains(int i) const { return (bits_ >> i) & 1u; }
  constexpr bool subset_of(Coalition o) const { return (bits_ & ~o.bits_) == 0; }
  constexpr bool intersects(Coalition o) const { return (bits_ & o.bits_) != 0; }
  constexpr Coalition unite(Coalition o) const { return Coalition(bits_ | o.bits_); }
  constexpr Coalition minus(Coalition o) const { return Coalition(bits_ & ~o.bits_); }
  constexpr Coalition intersect(Coalition o) const { return Coalition(bits_ & o.bits_); }

  std::vector<int> members() const {
    std::vector<int> out;
    for (std::uint32_t b = bits_; b; b &= b - 1)
      out.push_back(std::countr_zero(b));
    return out;
  }
  int lowest() const { return std::countr_zero(bits_); }

  auto operator<=>(const Coalition&) const = default;

 private:
  std::uint32_t bits_ = 0;
};

/// Market instance: integer server counts per provider, market arrival rate,
/// per-server service rate. Providers are re-indexed by non-increasing
/// capacity internally; the original 1-based ids stay addressable.
class Instance {
 public:
  Instance(std::vector<int> capacities, double market_rate, double service_rate = 1.0) {
    if (capacities.empty())
      throw std::invalid_argument("instance: need at least one provider");
    if (capacities.size() > 32)
      throw std::length_error("instance: more than 32 providers unsupported");
    for (int c : capacities)
      if (c < 1) throw std::invalid_argument("instance: capacities must be positive integers");
    if (!(market_rate > 0.0))
      throw std::invalid_argument("instance: market rate must be positive");
    if (!(service_rate > 0.0))
      throw std::invalid_argument("instance: service rate must be positive");
    lambda_ = market_rate;
    mu_ = service_rate;
    const int n = static_cast<int>(capacities.size());
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(),
                     [&](int a, int b) { return capacities[a] > capacities[b]; });
    caps_.reserve(n);
    for (int idx : order_) caps_.push_back(capacities[idx]);
    total_ = std::accumulate(caps_.begin(), caps_.end(), 0);
  }

  int agents() const { return static_cast<int>(caps_.size()); }
  double market_rate() const { return lambda_; }
  double service_rate() const { return mu_; }
  double offered_load() const { return lambda_ / mu_; }
  int capacity(int i) const { return caps_.at(i); }
  int total_capacity() const { return total_; }
  int coalition_capacity(Coalition c) const {
    int s = 0;
    for (int i : c.members()) s += caps_.at(i);
    return s;
  }
  /// 1-based id the provider had in the constructor's capacity list.
  int original_id(int internal) const { return order_.at(internal) + 1; }
  int internal_index(int original_one_based) const {
    for (int i = 0; i < agents(); ++i)
      if (order_[i] == original_one_based - 1) return i;
    throw std::invalid_argument("instance: unknown provider id");
  }
  Coalition grand() const { return Coalition::full(agents()); }

 private:
  std::vector<int> caps_;
  std::vector<int> order_;
  int total_ = 0;
  double lambda_ = 0.0;
  double mu_ = 1.0;
};

/// Partition of the agent set into coalitions. Blocks are kept in canonical
/// order (ascending lowest member), which makes partitions directly
/// comparable and usable as cache keys.
class Partition {
 public:
  Partition(int agents, std::vector<Coalition> blocks) : n_(agents) {
    if (agents < 1 || agents > 32)
      throw std::invalid_argument("partition: bad agent count");
    std::uint32_t seen = 0;
    for (const Coalition& c : blocks) {
      if (c.empty()) throw std::invalid_argument("partition: empty block");
      if (c.intersects(Coalition(seen)))
        throw std::invalid_argument("partition: overlapping blocks");
      seen |= c.bits();
    }
    if (seen != Coalition::full(agents).bits())
      throw std::invalid_argument("partition: blocks must cover all agents");
    std::sort(blocks.begin(), blocks.end(),
              [](Coalition a, Coalition b) { return a.lowest() < b.lowest(); });
    blocks_ = std::move(blocks);
  }

  static Partition grand(int n) { return Partition(n, {Coalition::full(n)}); }
  static Partition singletons(int n) {
    std::vector<Coalition> b;
    for (int i = 0; i < n; ++i) b.push_back(Coalition::single(i));
    return Partition(n, std::move(b));
  }

  int agents() const { return n_; }
  int size() const { return static_cast<int>(blocks_.size()); }
  const std::vector<Coalition>& blocks() const { return blocks_; }
  const Coalition& block(int j) const { return blocks_.at(j); }
  int block_index_of(int agent) const {
    for (int j = 0; j < size(); ++j)
      if (blocks_[j].contains(agent)) return j;
    throw std::invalid_argument("partition: agent out of range");
  }
  Coalition block_of(int agent) const { return blocks_[block_index_of(agent)]; }
  bool contains_block(Coalition c) const {
    return std::find(blocks_.begin(), blocks_.end(), c) != blocks_.end();
  }
  /// Canonical key (block bitmasks in canonical order) for map lookups.
  std::vector<std::uint32_t> key() const {
    std::vector<std::uint32_t> k;
    k.reserve(blocks_.size());
    for (const Coalition& c : blocks_) k.push_back(c.bits());
    return k;
  }

  auto operator<=>(const Partition&) const = default;

 private:
  int n_ = 0;
  std::vector<Coalition> blocks_;
};

inline constexpr int kMaxEnumerationAgents = 12;

/// Bell numbers via the Bell triangle; exact in 64 bits through n = 25.
inline unsigned long long bell_number(int n) {
  if (n < 0 || n > 25) throw std::domain_error("bell_number: need 0 <= n <= 25");
  if (n == 0) return 1;
  std::vector<unsigned long long> row{1};
  for (int i = 1; i < n; ++i) {
    std::vector<unsigned long long> next{row.back()};
    for (unsigned long long v : row) next.push_back(next.back() + v);
    row = std::move(next);
  }
  return row.back();
}

namespace detail {

/// Drives a restricted-growth-string scan over set partitions of `members`
/// (any subset of 0..n-1), yielding each block list in canonical order.
template <class F>
void scan_partitions(const std::vector<int>& members, F&& f) {
  const int m = static_cast<int>(members.size());
  if (m == 0) return;
  if (m > kMaxEnumerationAgents)
    throw std::length_error("partition enumeration capped at 12 agents");
  std::vector<int> rgs(m, 0);
  for (;;) {
    int nblocks = *std::max_element(rgs.begin(), rgs.end()) + 1;
    std::vector<Coalition> blocks(nblocks);
    for (int i = 0; i < m; ++i)
      blocks[rgs[i]] = blocks[rgs[i]].unite(Coalition::single(members[i]));
    f(std::move(blocks));
    // next RGS in lexicographic order
    int i = m - 1;
    for (; i > 0; --i) {
      int cap = *std::max_element(rgs.begin(), rgs.begin() + i) + 1;
      if (rgs[i] < cap) break;
    }
    if (i == 0) return;
    ++rgs[i];
    std::fill(rgs.begin() + i + 1, rgs.end(), 0);
  }
}

}  // namespace detail

/// Visits every partition of {0..n-1} exactly once, grand coalition first,
/// all singletons last (lexicographic restricted-growth order).
template <class F>
void for_each_partition(int n, F&& f) {
  std::vector<int> members(n);
  std::iota(members.begin(), members.end(), 0);
  detail::scan_partitions(members, [&](std::vector<Coalition> blocks) {
    f(Partition(n, std::move(blocks)));
  });
}

/// Visits every arrangement of the agents in `subset` into coalitions,
/// yielding the block lists (not full partitions of 0..n-1).
template <class F>
void for_each_partition_of(Coalition subset, F&& f) {
  detail::scan_partitions(subset.members(), std::forward<F>(f));
}

/// Merger candidate: two or more blocks of a partition pooling together.
struct Merger {
  std::vector<int> block_indices;
  Coalition merged;
};

/// Split candidate: a proper non-empty subset leaving its block.
struct Split {
  Coalition part;
  Coalition parent;
  int block_index = -1;
};

inline std::vector<Merger> enumerate_mergers(const Partition& p) {
  const int k = p.size();
  if (k > kMaxEnumerationAgents)
    throw std::length_error("merger enumeration capped at 12 blocks");
  std::vector<Merger> out;
  for (std::uint32_t m = 1; m < (1u << k); ++m) {
    if (std::popcount(m) < 2) continue;
    Merger mg;
    for (int j = 0; j < k; ++j)
      if ((m >> j) & 1u) {
        mg.block_indices.push_back(j);
        mg.merged = mg.merged.unite(p.block(j));
      }
    out.push_back(std::move(mg));
  }
  return out;
}

inline std::vector<Split> enumerate_splits(const Partition& p) {
  std::vector<Split> out;
  for (int j = 0; j < p.size(); ++j) {
    const Coalition block = p.block(j);
    const std::vector<int> mem = block.members();
    const int s = static_cast<int>(mem.size());
    if (s < 2) continue;
    if (s > kMaxEnumerationAgents)
      throw std::length_error("split enumeration capped at 12-member blocks");
    for (std::uint32_t q = 1; q + 1 < (1u << s); ++q) {
      Coalition part;
      for (int i = 0; i < s; ++i)
        if ((q >> i) & 1u) part = part.unite(Coalition::single(mem[i]));
      out.push_back(Split{part, block, j});
    }
  }
  return out;
}

inline Partition apply_merger(const Partition& p, const Merger& m) {
  std::vector<Coalition> blocks;
  for (int j = 0; j < p.size(); ++j)
    if (std::find(m.block_indices.begin(), m.block_indices.end(), j) ==
        m.block_indices.end())
      blocks.push_back(p.block(j));
  blocks.push_back(m.merged);
  return Partition(p.agents(), std::move(blocks));
}

inline Partition apply_split(const Partition& p, const Split& s) {
  std::vector<Coalition> blocks;
  for (int j = 0; j < p.size(); ++j) {
    if (p.block(j) == s.parent) {
      blocks.push_back(s.part);
      blocks.push_back(s.parent.minus(s.part));
    } else {
      blocks.push_back(p.block(j));
    }
  }
  return Partition(p.agents(), std::move(blocks));
}

/// All two-block partitions, in enumeration order.
inline std::vector<Partition> two_block_partitions(int n) {
  if (n < 2) return {};
  if (n > kMaxEnumerationAgents)
    throw std::length_error("two-block enumeration capped at 12 agents");
  std::vector<Partition> out;
  const Coalition all = Coalition::full(n);
  // agent 0 stays on the A side so each pair appears once
  for (std::uint32_t a = 0; a < (1u << (n - 1)); ++a) {
    Coalition left(a << 1 | 1u);
    Coalition right = all.minus(left);
    if (right.empty()) continue;
    out.emplace_back(n, std::vector<Coalition>{left, right});
  }
  return out;
}

inline std::string to_string(const Coalition& c, const Instance& inst) {
  std::vector<int> ids;
  for (int i : c.members()) ids.push_back(inst.original_id(i));
  std::sort(ids.begin(), ids.end());
  std::string s = "{";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(ids[i]);
  }
  return s + "}";
}

inline std::string to_string(const Partition& p, const Instance& inst) {
  std::string s = "[";
  for (int j = 0; j < p.size(); ++j) {
    if (j) s += ",";
    s += to_string(p.block(j), inst);
  }
  return s + "]";
}

}  // namespace lossgame
