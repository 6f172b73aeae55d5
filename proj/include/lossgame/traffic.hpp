#pragma once

#include <cmath>
#include <limits>
#include <optional>

#include "lossgame/core.hpp"
#include "lossgame/stability.hpp"
#include "lossgame/wardrop.hpp"

namespace lossgame {

/// Per-server rate of the larger side of a continuous (k, N-k) duopoly,
/// sampled on a real-valued capacity grid.
inline std::vector<std::pair<double, double>> psi_profile_real(
    const Instance& inst, double lambda, const std::vector<double>& k_grid) {
  if (!(lambda > 0.0))
    throw std::domain_error("psi_profile_real: market rate must be positive");
  const double n_total = inst.total_capacity();
  std::vector<std::pair<double, double>> out;
  out.reserve(k_grid.size());
  for (double k : k_grid) {
    if (k < 0.5 * n_total - 1e-9 || k >= n_total)
      throw std::domain_error("psi_profile_real: grid point outside [N/2, N)");
    const double load = detail::we_two_loads_real(
        k, n_total - k, lambda / inst.service_rate());
    out.emplace_back(k, load * inst.service_rate() / k);
  }
  return out;
}

/// Default capacity grid [N/2, N - margin] for the real-valued profile.
inline std::vector<double> make_k_grid(const Instance& inst, double step = 0.25,
                                       double margin = 0.5) {
  if (!(step > 0.0) || !(margin > 0.0))
    throw std::invalid_argument("make_k_grid: step and margin must be positive");
  std::vector<double> grid;
  const double n_total = inst.total_capacity();
  for (double k = 0.5 * n_total; k <= n_total - margin + 1e-12; k += step)
    grid.push_back(k);
  return grid;
}

/// Duopolies that remain stable as the market rate vanishes: the larger side
/// must not contain a strict sub-coalition with more than half the total
/// capacity. Purely combinatorial.
inline std::vector<Partition> light_traffic_class(const Instance& inst) {
  if (inst.agents() > kMaxEnumerationAgents)
    throw std::length_error("light_traffic_class: capped at 12 providers");
  std::vector<Partition> out;
  for (const Partition& p : two_block_partitions(inst.agents())) {
    const int cap0 = inst.coalition_capacity(p.block(0));
    const int cap1 = inst.coalition_capacity(p.block(1));
    const Coalition larger = cap0 >= cap1 ? p.block(0) : p.block(1);
    int min_member = inst.total_capacity();
    for (int i : larger.members()) min_member = std::min(min_member, inst.capacity(i));
    const int biggest_sub = inst.coalition_capacity(larger) - min_member;
    if (2 * biggest_sub <= inst.total_capacity()) out.push_back(p);
  }
  return out;
}

struct RegimePoint {
  double lambda = 0.0;
  std::vector<char> stable;          ///< aligned with RegimeReport::duopolies
  std::vector<double> larger_share;  ///< larger side's rate / market rate
  double min_larger_share = std::numeric_limits<double>::quiet_NaN();  ///< strict duopolies
  double max_heavy_dev = 0.0;        ///< max |share - N_C1/N|
};

struct RegimeReport {
  std::vector<Partition> duopolies;
  std::vector<int> larger_caps;
  std::vector<char> light_limit;  ///< membership in the light-traffic class
  std::vector<RegimePoint> points;
  bool nested = true;  ///< stable sets grow along the grid
  std::optional<double> light_threshold;  ///< last grid point still matching the light class
  std::optional<double> heavy_threshold;  ///< first grid point from which all are stable
};

/// Sweeps the market rate across the grid and records which duopolies are
/// stable partitions, plus concentration diagnostics at each point.
inline RegimeReport regime_sweep(const Instance& inst,
                                 const std::vector<double>& lambda_grid) {
  if (inst.agents() > 8)
    throw std::length_error("regime_sweep: capped at 8 providers");
  if (lambda_grid.empty() || lambda_grid.size() > 64)
    throw std::invalid_argument("regime_sweep: grid must have 1..64 points");
  std::vector<double> grid = lambda_grid;
  std::sort(grid.begin(), grid.end());
  if (!(grid.front() > 0.0))
    throw std::invalid_argument("regime_sweep: grid points must be positive");

  RegimeReport rep;
  rep.duopolies = two_block_partitions(inst.agents());
  for (const Partition& p : rep.duopolies)
    rep.larger_caps.push_back(std::max(inst.coalition_capacity(p.block(0)),
                                       inst.coalition_capacity(p.block(1))));
  {
    const std::vector<Partition> light = light_traffic_class(inst);
    for (const Partition& p : rep.duopolies)
      rep.light_limit.push_back(
          std::find(light.begin(), light.end(), p) != light.end() ? 1 : 0);
  }

  std::vector<int> original_caps(inst.agents());
  for (int i = 0; i < inst.agents(); ++i)
    original_caps[inst.original_id(i) - 1] = inst.capacity(i);

  for (double lam : grid) {
    Evaluator ev(Instance(original_caps, lam, inst.service_rate()));
    RegimePoint pt;
    pt.lambda = lam;
    for (std::size_t d = 0; d < rep.duopolies.size(); ++d) {
      const Partition& p = rep.duopolies[d];
      pt.stable.push_back(is_stable_partition_rbia(ev, p).stable ? 1 : 0);
      const int cap0 = inst.coalition_capacity(p.block(0));
      const int cap1 = inst.coalition_capacity(p.block(1));
      const Coalition larger = cap0 >= cap1 ? p.block(0) : p.block(1);
      const double share = ev.rate(p, larger) / lam;
      pt.larger_share.push_back(share);
      if (cap0 != cap1) {
        if (std::isnan(pt.min_larger_share) || share < pt.min_larger_share)
          pt.min_larger_share = share;
      }
      const double target = static_cast<double>(rep.larger_caps[d]) /
                            inst.total_capacity();
      pt.max_heavy_dev = std::max(pt.max_heavy_dev, std::abs(share - target));
    }
    rep.points.push_back(std::move(pt));
  }

  for (std::size_t i = 0; i + 1 < rep.points.size(); ++i)
    for (std::size_t d = 0; d < rep.duopolies.size(); ++d)
      if (rep.points[i].stable[d] && !rep.points[i + 1].stable[d])
        rep.nested = false;

  for (const RegimePoint& pt : rep.points) {
    if (pt.stable != rep.light_limit) break;
    rep.light_threshold = pt.lambda;
  }
  for (auto it = rep.points.rbegin(); it != rep.points.rend(); ++it) {
    if (std::find(it->stable.begin(), it->stable.end(), 0) != it->stable.end()) break;
    rep.heavy_threshold = it->lambda;
  }
  return rep;
}

}  // namespace lossgame
