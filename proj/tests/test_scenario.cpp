#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "lossgame/scenario.hpp"

using namespace lossgame;
using nlohmann::json;

TEST_CASE("scenario round-trips through json") {
  const json j{{"capacities", {2, 10, 5}}, {"lambda", 7.5}, {"mu", 2.0}};
  const Instance inst = scenario_from_json(j);
  CHECK(inst.agents() == 3);
  CHECK(inst.capacity(0) == 10);  // sorted internally, ids preserved
  CHECK(inst.original_id(0) == 2);
  CHECK(inst.market_rate() == 7.5);
  CHECK(inst.service_rate() == 2.0);
  CHECK(scenario_to_json(inst) == j);
}

TEST_CASE("scenario defaults and validation") {
  CHECK(scenario_from_json({{"capacities", {3}}, {"lambda", 1.0}}).service_rate() == 1.0);
  CHECK_THROWS_AS(scenario_from_json(json::array()), std::invalid_argument);
  CHECK_THROWS_AS(scenario_from_json({{"capacities", {3}}}), std::invalid_argument);
  CHECK_THROWS_AS(scenario_from_json({{"capacities", {2.5}}, {"lambda", 1.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(scenario_from_json({{"capacities", {"x"}}, {"lambda", 1.0}}),
                  std::invalid_argument);
}

TEST_CASE("scenario files load from disk") {
  const std::filesystem::path path =
      std::filesystem::temp_directory_path() / "lossgame_scenario_test.json";
  {
    std::ofstream f(path);
    f << R"({"capacities": [4, 2], "lambda": 3.0})";
  }
  const Instance inst = load_scenario(path.string());
  CHECK(inst.total_capacity() == 6);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_scenario("/nonexistent/nope.json"), std::invalid_argument);
}

TEST_CASE("partitions use original provider ids") {
  // Capacities arrive out of order: id 1 has 2 servers, id 2 has 10.
  const Instance inst = scenario_from_json(
      {{"capacities", {2, 10, 5}}, {"lambda", 7.5}});
  const Partition p = partition_from_string(inst, "[[1,2],[3]]");
  REQUIRE(p.blocks().size() == 2);
  CHECK(inst.coalition_capacity(p.block(0)) == 12);
  CHECK(partition_to_json(inst, p) == json::parse("[[1,2],[3]]"));
  CHECK_THROWS_AS(partition_from_string(inst, "[[1],[9]]"), std::invalid_argument);
  CHECK_THROWS_AS(partition_from_string(inst, "{\"a\":1}"), std::invalid_argument);
}

TEST_CASE("payoff vectors map between id order and internal order") {
  const Instance inst = scenario_from_json(
      {{"capacities", {2, 10, 5}}, {"lambda", 7.5}});
  const std::vector<double> phi = phi_from_string(inst, "[0.5, 6.0, 1.0]");
  // Internal order is by descending capacity: ids 2, 3, 1.
  CHECK(phi[0] == 6.0);
  CHECK(phi[1] == 1.0);
  CHECK(phi[2] == 0.5);
  CHECK(phi_to_json(inst, phi) == json::parse("[0.5, 6.0, 1.0]"));
  CHECK_THROWS_AS(phi_from_string(inst, "[1.0]"), std::invalid_argument);
}

TEST_CASE("rule and deviation names round-trip") {
  for (Rule r : {Rule::GBPA, Rule::RBPA, Rule::RBIA})
    CHECK(rule_from_string(rule_name(r)) == r);
  CHECK_THROWS_AS(rule_from_string("nope"), std::invalid_argument);
  CHECK(std::string(deviation_kind_name(DeviationKind::Merger)) == "merger");
}

TEST_CASE("verdict serialization keeps the report fields") {
  const Instance inst = scenario_from_json({{"capacities", {4, 2}}, {"lambda", 3.0}});
  BlockReport br;
  br.rule = Rule::RBIA;
  br.kind = DeviationKind::Split;
  br.blocker = Coalition::of({0});
  br.anticipated = 2.0;
  br.prevailing = 1.5;
  br.margin = 0.5;
  br.post_split_rate = 2.1;
  const json j = verdict_to_json(inst, Verdict{false, {br}});
  CHECK(j.at("stable") == false);
  REQUIRE(j.at("blockers").size() == 1);
  CHECK(j.at("blockers")[0].at("kind") == "split");
  CHECK(j.at("blockers")[0].at("coalition") == json::parse("[1]"));
  CHECK(j.at("blockers")[0].at("post_split_rate") == 2.1);
  CHECK_FALSE(j.at("blockers")[0].contains("payoff_sum"));
}

TEST_CASE("scenario hashes are stable and order-sensitive") {
  const Instance a = scenario_from_json({{"capacities", {4, 2}}, {"lambda", 3.0}});
  const Instance b = scenario_from_json({{"capacities", {2, 4}}, {"lambda", 3.0}});
  CHECK(scenario_hash(a) == scenario_hash(a));
  CHECK(scenario_hash(a) != scenario_hash(b));
  CHECK(fnv1a64("") == 14695981039346656037ull);
}

TEST_CASE("grid specifications parse") {
  const auto lin = parse_grid("lin:0:10:5");
  REQUIRE(lin.size() == 5);
  CHECK(lin[1] == Catch::Approx(2.5));
  const auto lg = parse_grid("log:1e-2:1e3:25");
  REQUIRE(lg.size() == 25);
  CHECK(lg.front() == Catch::Approx(1e-2));
  CHECK(lg.back() == Catch::Approx(1e3));
  CHECK(lg[12] == Catch::Approx(std::sqrt(1e-2 * 1e3)).epsilon(1e-9));
  CHECK(parse_grid("log:5:5:1") == std::vector<double>{5.0});
  CHECK_THROWS_AS(parse_grid("geo:1:2:3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("lin:1:2"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("lin:2:1:3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("log:0:1:3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("lin:1:2:0"), std::invalid_argument);
}
