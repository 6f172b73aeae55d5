#pragma once

#include <filesystem>
#include <set>

#include "lossgame/scenario.hpp"
#include "lossgame/traffic.hpp"

namespace lossgame {

inline constexpr const char* kVersion = "0.1.0";

inline nlohmann::json tolerance_manifest() {
  return {{"blocking_epsilon_rel", 1e-9},
          {"equilibrium_residual_rel", 1e-12},
          {"payoff_consistency_rel", 1e-6},
          {"tie_rel", 1e-9}};
}

/// Collects experiment outputs in a directory and finishes with a manifest
/// describing every file, the scenario, and the pinned tolerances.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  const std::filesystem::path& dir() const { return dir_; }

  void write_text(const std::string& name, const std::string& text) {
    std::ofstream f(dir_ / name);
    if (!f) throw std::runtime_error("artifacts: cannot write " + name);
    f << text;
    files_.push_back({{"name", name},
                      {"bytes", text.size()},
                      {"fnv1a64", fnv1a64(text)}});
  }

  void write_json(const std::string& name, const nlohmann::json& j) {
    write_text(name, j.dump(2) + "\n");
  }

  void finish(nlohmann::json meta) {
    meta["version"] = kVersion;
    meta["tolerances"] = tolerance_manifest();
    meta["files"] = files_;
    std::ofstream f(dir_ / "manifest.json");
    f << meta.dump(2) << "\n";
  }

 private:
  std::filesystem::path dir_;
  nlohmann::json files_ = nlohmann::json::array();
};

// ---------------------------------------------------------------------------
// Case study 1: four providers (N1, 2, 2, 2), market rate 13; which
// larger-side capacities w admit an unstable duopoly under restricted
// blocking, for the proportional and Shapley payoffs.

struct Table1Row {
  int n1 = 0;
  std::string rule;
  std::vector<int> unstable_w;
};

struct Table1Report {
  std::vector<Table1Row> rows;
  std::vector<std::string> violations;
  std::vector<std::string> notes;
};

inline std::vector<int> table1_default_n1() { return {2, 5, 9, 10, 13, 17, 18, 29, 40}; }
inline std::vector<int> table1_full_n1() {
  std::vector<int> v;
  for (int n1 = 2; n1 <= 40; ++n1) v.push_back(n1);
  return v;
}

inline Table1Report run_table1(const std::vector<int>& n1_values) {
  Table1Report rep;
  for (int n1 : n1_values) {
    if (n1 < 2 || n1 > 41)
      throw std::invalid_argument("table1: N1 must lie in [2, 41]");
    Evaluator ev(Instance({n1, 2, 2, 2}, 13.0));
    std::set<int> bad_p, bad_s, all_w;
    for (const Partition& p : two_block_partitions(4)) {
      const int w = std::max(ev.instance().coalition_capacity(p.block(0)),
                             ev.instance().coalition_capacity(p.block(1)));
      all_w.insert(w);
      if (!check_rbpa(ev, proportional_payoff(ev, p)).stable) bad_p.insert(w);
      if (!check_rbpa(ev, shapley_payoff(ev, p)).stable) bad_s.insert(w);
    }
    rep.rows.push_back({n1, "proportional", {bad_p.begin(), bad_p.end()}});
    rep.rows.push_back({n1, "shapley", {bad_s.begin(), bad_s.end()}});

    // expected envelopes for the proportional rule, by N1 band
    int lo = 0, hi = -1;  // empty by default
    if (n1 >= 10 && n1 <= 17) lo = 14, hi = 21;
    if (n1 >= 18 && n1 <= 40) lo = 20, hi = 44;
    if (n1 == 41) {
      rep.notes.push_back("N1=41: no reference row, skipping golden check");
    } else {
      for (int w : bad_p)
        if (w < lo || w > hi)
          rep.violations.push_back("N1=" + std::to_string(n1) +
                                   ": proportional unstable w=" + std::to_string(w) +
                                   " outside expected band");
      if (hi >= lo && bad_p.empty())
        rep.violations.push_back("N1=" + std::to_string(n1) +
                                 ": no proportional instability found in a band "
                                 "where the reference reports some");
      if (!bad_s.empty())
        rep.violations.push_back("N1=" + std::to_string(n1) +
                                 ": Shapley configuration unexpectedly unstable");
    }
    if (bad_p == all_w)
      rep.notes.push_back("N1=" + std::to_string(n1) +
                          ": proportional instability covers every achievable w");
  }
  return rep;
}

inline std::string table1_to_csv(const Table1Report& rep) {
  std::ostringstream os;
  os << "n1,rule,unstable_w\n";
  for (const Table1Row& r : rep.rows) {
    os << r.n1 << "," << r.rule << ",\"";
    for (std::size_t i = 0; i < r.unstable_w.size(); ++i) {
      if (i) os << " ";
      os << r.unstable_w[i];
    }
    os << "\"\n";
  }
  return os.str();
}

inline nlohmann::json table1_to_json(const Table1Report& rep) {
  nlohmann::json rows = nlohmann::json::array();
  for (const Table1Row& r : rep.rows)
    rows.push_back({{"n1", r.n1}, {"rule", r.rule}, {"unstable_w", r.unstable_w}});
  return {{"rows", rows}, {"violations", rep.violations}, {"notes", rep.notes}};
}

// ---------------------------------------------------------------------------
// Case study 2: providers (10, 2, 2, 2), market rate 13, partition
// {{1,2,3},{4}} with proportional payoffs under immediate anticipation.

struct SplitCondition {
  Coalition part;
  double anticipated = 0.0;  ///< pessimal rate of the splinter
  double share_bound = 0.0;  ///< its capacity share of the coalition rate
  double post_rate = 0.0;    ///< immediate rate after the split
  bool passes = false;       ///< pessimal beats the share bound
};

struct ExampleRbiaReport {
  Instance instance;
  Partition partition;
  std::vector<int> k_star_caps;
  double psi_max = 0.0;
  std::vector<double> phi_p;
  bool partition_stable = true;
  std::vector<Coalition> config_blockers;
  std::vector<SplitCondition> split_conditions;
  bool region_nonempty = false;
  std::vector<double> region_phi;
  double region_slack = 0.0;
  std::vector<std::string> violations;
};

inline ExampleRbiaReport run_example_rbia() {
  Instance inst({10, 2, 2, 2}, 13.0);
  Evaluator ev(inst);
  const Partition p(4, {Coalition::of({0, 1, 2}), Coalition::of({3})});
  ExampleRbiaReport rep{inst, p, {}, 0.0, {}, true, {}, {}, false, {}, 0.0, {}};

  const KStarResult ks = k_star(inst);
  rep.k_star_caps = ks.capacities;
  rep.psi_max = ks.psi_max;

  const Configuration conf = proportional_payoff(ev, p);
  rep.phi_p = conf.phi;
  rep.partition_stable = is_stable_partition_rbia(ev, p).stable;
  for (const BlockReport& br : check_rbia(ev, conf).blockers)
    rep.config_blockers.push_back(br.blocker);

  const Coalition c1 = p.block(0);
  const double rate_c1 = ev.rate(p, c1);
  for (const Split& s : enumerate_splits(p)) {
    SplitCondition sc;
    sc.part = s.part;
    sc.anticipated = ev.pessimal(s.part).worth;
    sc.share_bound = rate_c1 * inst.coalition_capacity(s.part) /
                     inst.coalition_capacity(c1);
    sc.post_rate = ev.rate(apply_split(p, s), s.part);
    sc.passes = sc.anticipated - sc.share_bound > blocking_epsilon(inst);
    rep.split_conditions.push_back(sc);
  }

  // stable payoff region for this partition: coalition sums fixed, and every
  // splinter that clears its share bound must be paid its post-split rate
  lp::Problem pr;
  pr.vars = 5;
  const int tvar = 4;
  for (int b = 0; b < p.size(); ++b) {
    std::vector<double> row(pr.vars, 0.0);
    for (int i : p.block(b).members()) row[i] = 1.0;
    pr.eq_a.push_back(std::move(row));
    pr.eq_b.push_back(ev.rate(p, p.block(b)));
  }
  for (const SplitCondition& sc : rep.split_conditions) {
    if (!sc.passes) continue;
    std::vector<double> row(pr.vars, 0.0);
    for (int i : sc.part.members()) row[i] = 1.0;
    row[tvar] = -1.0;
    pr.ge_a.push_back(std::move(row));
    pr.ge_b.push_back(sc.post_rate);
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
  if (sol.status == lp::Status::optimal) {
    rep.region_nonempty = true;
    rep.region_phi.assign(sol.x.begin(), sol.x.begin() + 4);
    rep.region_slack = sol.x[tvar];
  }

  if (rep.k_star_caps != std::vector<int>{12})
    rep.violations.push_back("expected k* = {12}");
  if (rep.partition_stable)
    rep.violations.push_back("partition unexpectedly stable");
  const Coalition expected = Coalition::of({0, 1});
  if (std::find(rep.config_blockers.begin(), rep.config_blockers.end(), expected) ==
      rep.config_blockers.end())
    rep.violations.push_back("expected blocking splinter {1,2} missing");
  if (!rep.region_nonempty)
    rep.violations.push_back("stable payoff region is empty");
  return rep;
}

inline nlohmann::json example_rbia_to_json(const ExampleRbiaReport& rep) {
  const Instance& inst = rep.instance;
  nlohmann::json splits = nlohmann::json::array();
  for (const SplitCondition& sc : rep.split_conditions)
    splits.push_back({{"coalition", coalition_to_json(inst, sc.part)},
                      {"anticipated", sc.anticipated},
                      {"share_bound", sc.share_bound},
                      {"post_rate", sc.post_rate},
                      {"passes_share_test", sc.passes}});
  nlohmann::json blockers = nlohmann::json::array();
  for (Coalition c : rep.config_blockers) blockers.push_back(coalition_to_json(inst, c));
  return {{"scenario", scenario_to_json(inst)},
          {"partition", partition_to_json(inst, rep.partition)},
          {"k_star", rep.k_star_caps},
          {"psi_max", rep.psi_max},
          {"phi_proportional", phi_to_json(inst, rep.phi_p)},
          {"partition_stable", rep.partition_stable},
          {"config_blockers", blockers},
          {"split_conditions", splits},
          {"stable_region",
           {{"nonempty", rep.region_nonempty},
            {"witness_phi", rep.region_nonempty ? phi_to_json(inst, rep.region_phi)
                                                : nlohmann::json()},
            {"max_min_slack", rep.region_slack}}},
          {"violations", rep.violations}};
}

// ---------------------------------------------------------------------------
// Case study 3: providers (80, 20, 5), market rate 100, partition
// {{1,2},{3}}; Shapley vs proportional payoffs under restricted blocking.

struct ExampleShapley3Report {
  Instance instance;
  Partition partition;
  std::vector<int> k_star_caps;
  double psi_max = 0.0;
  std::vector<double> phi_s;
  std::vector<double> phi_p;
  bool shapley_stable = false;
  std::vector<Coalition> prop_blockers;
  int larger_cap = 0;
  bool larger_in_k_star = false;
  std::vector<std::string> violations;
};

inline ExampleShapley3Report run_example_shapley3() {
  Instance inst({80, 20, 5}, 100.0);
  Evaluator ev(inst);
  const Partition p(3, {Coalition::of({0, 1}), Coalition::of({2})});
  ExampleShapley3Report rep{inst, p, {}, 0.0, {}, {}, false, {}, 0, false, {}};

  const KStarResult ks = k_star(inst);
  rep.k_star_caps = ks.capacities;
  rep.psi_max = ks.psi_max;

  rep.phi_s = shapley_payoff(ev, p).phi;
  rep.phi_p = proportional_payoff(ev, p).phi;
  rep.shapley_stable = check_rbpa(ev, Configuration{p, rep.phi_s}).stable;
  for (const BlockReport& br : check_rbpa(ev, Configuration{p, rep.phi_p}).blockers)
    rep.prop_blockers.push_back(br.blocker);

  rep.larger_cap = std::max(inst.coalition_capacity(p.block(0)),
                            inst.coalition_capacity(p.block(1)));
  for (int k : rep.k_star_caps)
    if (k == rep.larger_cap) rep.larger_in_k_star = true;

  if (!rep.shapley_stable)
    rep.violations.push_back("Shapley configuration unexpectedly blocked");
  if (rep.prop_blockers != std::vector<Coalition>{Coalition::of({0})})
    rep.violations.push_back("expected the proportional payoff to be blocked "
                             "exactly by provider 1 splitting off");
  if (rep.k_star_caps != std::vector<int>{85})
    rep.violations.push_back("expected k* = {85}");
  if (rep.larger_in_k_star)
    rep.violations.push_back("larger coalition capacity unexpectedly in k*");
  return rep;
}

inline nlohmann::json example_shapley3_to_json(const ExampleShapley3Report& rep) {
  const Instance& inst = rep.instance;
  nlohmann::json blockers = nlohmann::json::array();
  for (Coalition c : rep.prop_blockers) blockers.push_back(coalition_to_json(inst, c));
  return {{"scenario", scenario_to_json(inst)},
          {"partition", partition_to_json(inst, rep.partition)},
          {"k_star", rep.k_star_caps},
          {"psi_max", rep.psi_max},
          {"phi_shapley", phi_to_json(inst, rep.phi_s)},
          {"phi_proportional", phi_to_json(inst, rep.phi_p)},
          {"shapley_stable", rep.shapley_stable},
          {"proportional_blockers", blockers},
          {"larger_cap", rep.larger_cap},
          {"larger_in_k_star", rep.larger_in_k_star},
          {"violations", rep.violations}};
}

// ---------------------------------------------------------------------------
// Case study 4: duopoly stability sweep for providers (7, 2, 2, 2, 2)
// across market rates.

struct FigureReport {
  Instance instance;
  std::vector<double> grid;
  RegimeReport regime;
  std::vector<std::string> violations;
};

inline std::vector<double> default_figure_grid() {
  return parse_grid("log:1e-2:1e3:25");
}

inline FigureReport run_figure(const std::vector<double>& grid = default_figure_grid()) {
  Instance inst({7, 2, 2, 2, 2}, 1.0);
  FigureReport rep{inst, grid, regime_sweep(inst, grid), {}};
  if (rep.regime.points.front().stable != rep.regime.light_limit)
    rep.violations.push_back(
        "stable set at the lightest market rate differs from the light-traffic class");
  for (char s : rep.regime.points.back().stable)
    if (!s) {
      rep.violations.push_back("some duopoly still unstable at the heaviest market rate");
      break;
    }
  if (!rep.regime.nested)
    rep.violations.push_back("stable sets are not nested along the grid");
  return rep;
}

inline std::string regime_to_csv(const RegimeReport& rep) {
  std::ostringstream os;
  os << "lambda,partition_id,stable\n";
  os.precision(12);
  for (const RegimePoint& pt : rep.points)
    for (std::size_t d = 0; d < rep.duopolies.size(); ++d)
      os << pt.lambda << "," << d << "," << int(pt.stable[d]) << "\n";
  return os.str();
}

inline std::string figure_to_csv(const FigureReport& rep) { return regime_to_csv(rep.regime); }

inline nlohmann::json regime_to_json(const Instance& inst, const RegimeReport& rep) {
  nlohmann::json duos = nlohmann::json::array();
  for (std::size_t d = 0; d < rep.duopolies.size(); ++d)
    duos.push_back({{"id", d},
                    {"partition", partition_to_json(inst, rep.duopolies[d])},
                    {"larger_cap", rep.larger_caps[d]},
                    {"light_limit", bool(rep.light_limit[d])}});
  nlohmann::json pts = nlohmann::json::array();
  for (const RegimePoint& pt : rep.points) {
    nlohmann::json stable = nlohmann::json::array();
    for (std::size_t d = 0; d < pt.stable.size(); ++d)
      if (pt.stable[d]) stable.push_back(d);
    pts.push_back({{"lambda", pt.lambda},
                   {"stable_ids", stable},
                   {"larger_share", pt.larger_share},
                   {"min_larger_share", pt.min_larger_share},
                   {"max_heavy_dev", pt.max_heavy_dev}});
  }
  nlohmann::json j{{"duopolies", duos}, {"points", pts}, {"nested", rep.nested}};
  if (rep.light_threshold) j["light_threshold"] = *rep.light_threshold;
  if (rep.heavy_threshold) j["heavy_threshold"] = *rep.heavy_threshold;
  return j;
}

inline nlohmann::json figure_to_json(const FigureReport& rep) {
  nlohmann::json j = regime_to_json(rep.instance, rep.regime);
  j["scenario"] = scenario_to_json(rep.instance);
  j["grid"] = rep.grid;
  j["violations"] = rep.violations;
  return j;
}

}  // namespace lossgame
