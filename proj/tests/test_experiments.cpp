#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "lossgame/experiments.hpp"

using namespace lossgame;
using nlohmann::json;

TEST_CASE("capacity-band study at two reference points") {
  const Table1Report rep = run_table1({5, 10});
  CHECK(rep.violations.empty());
  REQUIRE(rep.rows.size() == 4);

  CHECK(rep.rows[0].n1 == 5);
  CHECK(rep.rows[0].rule == "proportional");
  CHECK(rep.rows[0].unstable_w.empty());
  CHECK(rep.rows[1].unstable_w.empty());  // shapley at 5

  CHECK(rep.rows[2].n1 == 10);
  CHECK(rep.rows[2].unstable_w == std::vector<int>{14});
  CHECK(rep.rows[3].unstable_w.empty());  // shapley at 10

  const std::string csv = table1_to_csv(rep);
  CHECK(csv.find("n1,rule,unstable_w") == 0);
  CHECK(csv.find("10,proportional,\"14\"") != std::string::npos);
  const json j = table1_to_json(rep);
  CHECK(j.at("rows").size() == 4);
  CHECK(j.at("violations").empty());
}

TEST_CASE("capacity-band study rejects out-of-range inputs") {
  CHECK_THROWS_AS(run_table1({1}), std::invalid_argument);
  CHECK_THROWS_AS(run_table1({42}), std::invalid_argument);
  CHECK(table1_default_n1().size() == 9);
  CHECK(table1_full_n1().size() == 39);
}

TEST_CASE("four-provider case study report") {
  const ExampleRbiaReport rep = run_example_rbia();
  CHECK(rep.violations.empty());
  CHECK(rep.k_star_caps == std::vector<int>{12});
  CHECK_FALSE(rep.partition_stable);
  REQUIRE(rep.config_blockers.size() == 2);
  CHECK(rep.config_blockers[0] == Coalition::of({0, 1}));
  CHECK(rep.config_blockers[1] == Coalition::of({0, 2}));

  REQUIRE(rep.split_conditions.size() == 6);
  int passing = 0;
  for (const SplitCondition& sc : rep.split_conditions) {
    if (sc.passes) ++passing;
    if (sc.part == Coalition::of({0, 1})) {
      CHECK(sc.anticipated == Catch::Approx(10.571116).margin(3e-6));
      CHECK(sc.share_bound == Catch::Approx(10.538902).margin(3e-6));
      CHECK(sc.post_rate == Catch::Approx(11.254429).margin(3e-6));
      CHECK(sc.passes);
    }
    if (sc.part == Coalition::of({1, 2})) {
      CHECK(sc.share_bound == Catch::Approx(3.512967).margin(3e-6));
      CHECK_FALSE(sc.passes);
    }
  }
  CHECK(passing == 2);

  // Region witness: coalition sums must hold and every passing splinter is
  // paid at least its post-split rate, with room to spare.
  REQUIRE(rep.region_nonempty);
  CHECK(rep.region_slack > 1.0);
  const double c1_rate = rep.phi_p[0] + rep.phi_p[1] + rep.phi_p[2];
  CHECK(rep.region_phi[0] + rep.region_phi[1] + rep.region_phi[2] ==
        Catch::Approx(c1_rate).margin(1e-6));
  for (const SplitCondition& sc : rep.split_conditions) {
    if (!sc.passes) continue;
    double paid = 0.0;
    for (int i : sc.part.members()) paid += rep.region_phi[i];
    CHECK(paid >= sc.post_rate + rep.region_slack - 1e-6);
  }
  CHECK(rep.region_phi[0] >= 10.21);  // floor on the big provider's payoff

  const json j = example_rbia_to_json(rep);
  CHECK(j.at("k_star") == json::parse("[12]"));
  CHECK(j.at("stable_region").at("nonempty") == true);
  CHECK(j.at("config_blockers") == json::parse("[[1,2],[1,3]]"));
}

TEST_CASE("three-provider case study report") {
  const ExampleShapley3Report rep = run_example_shapley3();
  CHECK(rep.violations.empty());
  CHECK(rep.shapley_stable);
  CHECK(rep.prop_blockers == std::vector<Coalition>{Coalition::of({0})});
  CHECK(rep.k_star_caps == std::vector<int>{85});
  CHECK(rep.larger_cap == 100);
  CHECK_FALSE(rep.larger_in_k_star);
  CHECK(rep.phi_s[0] == Catch::Approx(80.434769).margin(1e-5));
  CHECK(rep.phi_p[0] == Catch::Approx(78.081215).margin(1e-5));
  const json j = example_shapley3_to_json(rep);
  CHECK(j.at("proportional_blockers") == json::parse("[[1]]"));
  CHECK(j.at("shapley_stable") == true);
}

TEST_CASE("duopoly sweep report on a short grid") {
  const FigureReport rep = run_figure({1e-2, 1.0, 1e3});
  CHECK(rep.violations.empty());
  CHECK(rep.regime.nested);
  CHECK(rep.regime.points.front().stable == rep.regime.light_limit);
  const std::string csv = figure_to_csv(rep);
  CHECK(csv.find("lambda,partition_id,stable") == 0);
  const json j = figure_to_json(rep);
  CHECK(j.at("points").size() == 3);
  CHECK(j.at("nested") == true);
  CHECK(j.at("violations").empty());
}

TEST_CASE("artifact writer records files and tolerances") {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "lossgame_artifact_test";
  std::filesystem::remove_all(dir);
  {
    ArtifactWriter w(dir);
    w.write_text("hello.csv", "a,b\n1,2\n");
    w.write_json("data.json", {{"x", 1}});
    w.finish({{"command", "test"}});
  }
  std::ifstream f(dir / "manifest.json");
  REQUIRE(f.good());
  json manifest;
  f >> manifest;
  CHECK(manifest.at("command") == "test");
  CHECK(manifest.at("version") == kVersion);
  CHECK(manifest.at("tolerances").contains("blocking_epsilon_rel"));
  REQUIRE(manifest.at("files").size() == 2);
  CHECK(manifest.at("files")[0].at("name") == "hello.csv");
  CHECK(manifest.at("files")[0].at("fnv1a64") == fnv1a64("a,b\n1,2\n"));
  CHECK(std::filesystem::exists(dir / "data.json"));
  std::filesystem::remove_all(dir);
}
