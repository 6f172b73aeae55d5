#include <cmath>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lossgame/erlang.hpp"
#include "lossgame/experiments.hpp"
#include "lossgame/payoffs.hpp"
#include "lossgame/scenario.hpp"
#include "lossgame/stability.hpp"
#include "lossgame/traffic.hpp"
#include "lossgame/wardrop.hpp"

namespace {

using nlohmann::json;

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

json split_report(lossgame::Evaluator& ev, const lossgame::Partition& p) {
  const lossgame::Instance& inst = ev.instance();
  const lossgame::WardropSplit& ws = ev.split(p);
  json rates = json::array();
  double spread = 0.0;
  for (const auto& [coal, r] : ws.rates) {
    const double b = lossgame::erlang_b(inst.coalition_capacity(coal),
                                        r / inst.service_rate());
    spread = std::max(spread, std::abs(b - ws.blocking));
    rates.push_back({{"coalition", lossgame::coalition_to_json(inst, coal)},
                     {"capacity", inst.coalition_capacity(coal)},
                     {"rate", r},
                     {"blocking", b}});
  }
  return {{"scenario", lossgame::scenario_to_json(inst)},
          {"partition", lossgame::partition_to_json(inst, p)},
          {"rates", rates},
          {"blocking", ws.blocking},
          {"blocking_spread", spread},
          {"total_rate", ws.total()}};
}

int run_experiment_common(const json& stdout_json,
                          const std::vector<std::string>& violations) {
  emit(stdout_json);
  if (!violations.empty()) {
    for (const std::string& v : violations) std::cerr << "violation: " << v << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coalition formation analysis for Erlang-B service providers"};
  app.require_subcommand(1);

  std::string scenario_path, partition_str, phi_str, grid_str, out_dir = "out";
  std::string rule_str = "rbia", payoff_str = "proportional";
  double servers = 0.0, load = 0.0;
  bool use_real = false, full_range = false;
  int exit_code = 0;

  auto* erl = app.add_subcommand("erlang", "blocking probability of a loss system");
  erl->add_option("--servers", servers, "number of servers")->required();
  erl->add_option("--load", load, "offered load in erlangs")->required();
  erl->add_flag("--real", use_real, "use the continuous-capacity extension");
  erl->callback([&] {
    double b;
    if (use_real) {
      b = lossgame::erlang_b_real(servers, load);
    } else {
      const int m = static_cast<int>(std::lround(servers));
      if (std::abs(servers - m) > 1e-9)
        throw CLI::ValidationError("--servers must be an integer without --real");
      b = lossgame::erlang_b(m, load);
    }
    emit({{"servers", servers}, {"load", load}, {"blocking", b}});
  });

  auto* we = app.add_subcommand("we", "equilibrium market split for a partition");
  we->add_option("--scenario", scenario_path, "scenario JSON file")->required();
  we->add_option("--partition", partition_str, "e.g. [[1,2],[3]]")->required();
  we->callback([&] {
    lossgame::Instance inst = lossgame::load_scenario(scenario_path);
    lossgame::Evaluator ev(inst);
    emit(split_report(ev, lossgame::partition_from_string(inst, partition_str)));
  });

  auto* ks = app.add_subcommand("kstar", "most efficient larger-side capacities");
  ks->add_option("--scenario", scenario_path)->required();
  ks->callback([&] {
    lossgame::Instance inst = lossgame::load_scenario(scenario_path);
    const lossgame::KStarResult res = lossgame::k_star(inst);
    json table = json::array();
    for (int k : lossgame::achievable_large_capacities(inst))
      table.push_back({{"k", k}, {"psi", lossgame::psi(inst, k)}});
    json coals = json::array();
    for (lossgame::Coalition c : res.coalitions)
      coals.push_back(lossgame::coalition_to_json(inst, c));
    emit({{"scenario", lossgame::scenario_to_json(inst)},
          {"psi_table", table},
          {"k_star", res.capacities},
          {"psi_max", res.psi_max},
          {"coalitions", coals}});
  });

  auto* po = app.add_subcommand("payoff", "payoff vector for a partition");
  po->add_option("--scenario", scenario_path)->required();
  po->add_option("--partition", partition_str)->required();
  po->add_option("--rule,--method", payoff_str, "proportional or shapley")
      ->check(CLI::IsMember({"proportional", "shapley"}));
  po->callback([&] {
    lossgame::Instance inst = lossgame::load_scenario(scenario_path);
    lossgame::Evaluator ev(inst);
    const lossgame::Partition p = lossgame::partition_from_string(inst, partition_str);
    const lossgame::Configuration conf = payoff_str == "shapley"
                                             ? lossgame::shapley_payoff(ev, p)
                                             : lossgame::proportional_payoff(ev, p);
    emit({{"scenario", lossgame::scenario_to_json(inst)},
          {"partition", lossgame::partition_to_json(inst, p)},
          {"method", payoff_str},
          {"phi", lossgame::phi_to_json(inst, conf.phi)}});
  });

  auto* st = app.add_subcommand("stability", "blocking analysis of a configuration");
  st->add_option("--scenario", scenario_path)->required();
  st->add_option("--partition", partition_str)->required();
  st->add_option("--rule", rule_str, "gbpa, rbpa or rbia")
      ->check(CLI::IsMember({"gbpa", "rbpa", "rbia"}));
  st->add_option("--payoff", payoff_str, "proportional or shapley")
      ->check(CLI::IsMember({"proportional", "shapley"}));
  st->add_option("--phi", phi_str, "explicit payoffs by provider id, e.g. [8.7,1.7,1.7,0.7]");
  st->callback([&] {
    lossgame::Instance inst = lossgame::load_scenario(scenario_path);
    lossgame::Evaluator ev(inst);
    const lossgame::Partition p = lossgame::partition_from_string(inst, partition_str);
    lossgame::Configuration conf =
        phi_str.empty()
            ? (payoff_str == "shapley" ? lossgame::shapley_payoff(ev, p)
                                       : lossgame::proportional_payoff(ev, p))
            : lossgame::Configuration{p, lossgame::phi_from_string(inst, phi_str)};
    const lossgame::Rule rule = lossgame::rule_from_string(rule_str);
    const lossgame::Verdict v = lossgame::check_stability(ev, conf, rule);
    json j = lossgame::verdict_to_json(inst, v);
    j["scenario"] = lossgame::scenario_to_json(inst);
    j["partition"] = lossgame::partition_to_json(inst, p);
    j["rule"] = rule_str;
    j["phi"] = lossgame::phi_to_json(inst, conf.phi);
    emit(j);
  });

  auto* cl = app.add_subcommand("classify", "payoff-free stability of every partition");
  cl->add_option("--scenario", scenario_path)->required();
  cl->add_option("--rule", rule_str)->check(CLI::IsMember({"rbia"}));
  cl->callback([&] {
    lossgame::Instance inst = lossgame::load_scenario(scenario_path);
    if (inst.agents() > 8)
      throw std::invalid_argument("classify is capped at 8 providers");
    lossgame::Evaluator ev(inst);
    json parts = json::array();
    int stable_count = 0;
    lossgame::for_each_partition(inst.agents(), [&](const lossgame::Partition& p) {
      const lossgame::Verdict v = lossgame::is_stable_partition_rbia(ev, p);
      stable_count += v.stable;
      json pj = lossgame::verdict_to_json(inst, v);
      pj["partition"] = lossgame::partition_to_json(inst, p);
      parts.push_back(std::move(pj));
    });
    emit({{"scenario", lossgame::scenario_to_json(inst)},
          {"rule", rule_str},
          {"partitions", parts},
          {"stable_count", stable_count}});
  });

  auto* sw = app.add_subcommand("sweep", "duopoly stability across market rates");
  sw->add_option("--scenario", scenario_path)->required();
  sw->add_option("--grid", grid_str, "kind:start:stop:count (default log:1e-2:1e3:25)");
  sw->add_option("--out", out_dir, "artifact directory");
  sw->callback([&] {
    lossgame::Instance inst = lossgame::load_scenario(scenario_path);
    const std::string spec = grid_str.empty() ? "log:1e-2:1e3:25" : grid_str;
    const lossgame::RegimeReport rep =
        lossgame::regime_sweep(inst, lossgame::parse_grid(spec));
    lossgame::ArtifactWriter w(out_dir);
    w.write_text("sweep.csv", lossgame::regime_to_csv(rep));
    w.write_json("sweep_diagnostics.json", lossgame::regime_to_json(inst, rep));
    w.finish({{"artifact", "sweep"},
              {"scenario", lossgame::scenario_to_json(inst)},
              {"scenario_hash", lossgame::scenario_hash(inst)},
              {"grid", spec}});
    json summary{{"nested", rep.nested},
                 {"points", rep.points.size()},
                 {"duopolies", rep.duopolies.size()},
                 {"out", out_dir}};
    if (rep.light_threshold) summary["light_threshold"] = *rep.light_threshold;
    if (rep.heavy_threshold) summary["heavy_threshold"] = *rep.heavy_threshold;
    emit(summary);
  });

  auto* t1 = app.add_subcommand("table1", "duopoly instability across N1");
  t1->add_flag("--full", full_range, "run every N1 in [2,40]");
  t1->add_option("--out", out_dir);
  t1->callback([&] {
    const lossgame::Table1Report rep = lossgame::run_table1(
        full_range ? lossgame::table1_full_n1() : lossgame::table1_default_n1());
    lossgame::ArtifactWriter w(out_dir);
    w.write_text("table1.csv", lossgame::table1_to_csv(rep));
    w.write_json("table1.json", lossgame::table1_to_json(rep));
    w.finish({{"artifact", "table1"},
              {"scenario", {{"family", "(N1,2,2,2)"}, {"lambda", 13.0}}}});
    exit_code = run_experiment_common(lossgame::table1_to_json(rep), rep.violations);
  });

  auto* e1 = app.add_subcommand("example-rbia",
                                "splinter analysis for providers (10,2,2,2)");
  e1->add_option("--out", out_dir);
  e1->callback([&] {
    const lossgame::ExampleRbiaReport rep = lossgame::run_example_rbia();
    lossgame::ArtifactWriter w(out_dir);
    w.write_json("example_rbia.json", lossgame::example_rbia_to_json(rep));
    w.finish({{"artifact", "example-rbia"},
              {"scenario", lossgame::scenario_to_json(rep.instance)},
              {"scenario_hash", lossgame::scenario_hash(rep.instance)}});
    exit_code = run_experiment_common(lossgame::example_rbia_to_json(rep), rep.violations);
  });

  auto* e2 = app.add_subcommand("example-shapley3",
                                "payoff comparison for providers (80,20,5)");
  e2->add_option("--out", out_dir);
  e2->callback([&] {
    const lossgame::ExampleShapley3Report rep = lossgame::run_example_shapley3();
    lossgame::ArtifactWriter w(out_dir);
    w.write_json("example_shapley3.json", lossgame::example_shapley3_to_json(rep));
    w.finish({{"artifact", "example-shapley3"},
              {"scenario", lossgame::scenario_to_json(rep.instance)},
              {"scenario_hash", lossgame::scenario_hash(rep.instance)}});
    exit_code =
        run_experiment_common(lossgame::example_shapley3_to_json(rep), rep.violations);
  });

  auto* fg = app.add_subcommand("figure", "stability sweep for providers (7,2,2,2,2)");
  fg->add_option("--grid", grid_str, "kind:start:stop:count (default log:1e-2:1e3:25)");
  fg->add_option("--out", out_dir);
  fg->callback([&] {
    const std::vector<double> grid = grid_str.empty()
                                         ? lossgame::default_figure_grid()
                                         : lossgame::parse_grid(grid_str);
    const lossgame::FigureReport rep = lossgame::run_figure(grid);
    lossgame::ArtifactWriter w(out_dir);
    w.write_text("figure.csv", lossgame::figure_to_csv(rep));
    w.write_json("figure.json", lossgame::figure_to_json(rep));
    w.finish({{"artifact", "figure"},
              {"scenario", lossgame::scenario_to_json(rep.instance)},
              {"scenario_hash", lossgame::scenario_hash(rep.instance)}});
    exit_code = run_experiment_common(lossgame::figure_to_json(rep), rep.violations);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
