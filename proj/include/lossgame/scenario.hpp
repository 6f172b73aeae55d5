#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "lossgame/core.hpp"
#include "lossgame/stability.hpp"

namespace lossgame {

inline Instance scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("capacities") || !j.contains("lambda"))
    throw std::invalid_argument(
        "scenario: expected {\"capacities\": [...], \"lambda\": x, \"mu\": y?}");
  std::vector<int> caps;
  for (const auto& v : j.at("capacities")) {
    if (!v.is_number())
      throw std::invalid_argument("scenario: capacities must be numbers");
    const double d = v.get<double>();
    const int c = static_cast<int>(std::lround(d));
    if (std::abs(d - c) > 1e-9)
      throw std::invalid_argument("scenario: capacities must be integers");
    caps.push_back(c);
  }
  return Instance(caps, j.at("lambda").get<double>(), j.value("mu", 1.0));
}

inline nlohmann::json scenario_to_json(const Instance& inst) {
  std::vector<int> caps(inst.agents());
  for (int i = 0; i < inst.agents(); ++i)
    caps[inst.original_id(i) - 1] = inst.capacity(i);
  return {{"capacities", caps},
          {"lambda", inst.market_rate()},
          {"mu", inst.service_rate()}};
}

inline Instance load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("scenario: cannot open " + path);
  nlohmann::json j;
  f >> j;
  return scenario_from_json(j);
}

/// Blocks of 1-based provider ids as they appeared in the scenario file.
inline Partition partition_from_json(const Instance& inst, const nlohmann::json& j) {
  if (!j.is_array())
    throw std::invalid_argument("partition: expected an array of id arrays");
  std::vector<Coalition> blocks;
  for (const auto& blk : j) {
    if (!blk.is_array())
      throw std::invalid_argument("partition: expected an array of id arrays");
    Coalition c;
    for (const auto& v : blk) {
      const int id = v.get<int>();
      if (id < 1 || id > inst.agents())
        throw std::invalid_argument("partition: provider id out of range");
      c = c.unite(Coalition::single(inst.internal_index(id)));
    }
    blocks.push_back(c);
  }
  return Partition(inst.agents(), std::move(blocks));
}

inline Partition partition_from_string(const Instance& inst, const std::string& s) {
  return partition_from_json(inst, nlohmann::json::parse(s));
}

inline nlohmann::json coalition_to_json(const Instance& inst, Coalition c) {
  std::vector<int> ids;
  for (int i : c.members()) ids.push_back(inst.original_id(i));
  std::sort(ids.begin(), ids.end());
  return ids;
}

inline nlohmann::json partition_to_json(const Instance& inst, const Partition& p) {
  nlohmann::json out = nlohmann::json::array();
  for (const Coalition& c : p.blocks()) out.push_back(coalition_to_json(inst, c));
  return out;
}

/// Payoffs listed by original provider id; converts to internal order.
inline std::vector<double> phi_from_json(const Instance& inst, const nlohmann::json& j) {
  if (!j.is_array() || static_cast<int>(j.size()) != inst.agents())
    throw std::invalid_argument("phi: expected one payoff per provider");
  std::vector<double> phi(inst.agents(), 0.0);
  for (int id = 1; id <= inst.agents(); ++id)
    phi[inst.internal_index(id)] = j.at(id - 1).get<double>();
  return phi;
}

inline std::vector<double> phi_from_string(const Instance& inst, const std::string& s) {
  return phi_from_json(inst, nlohmann::json::parse(s));
}

inline nlohmann::json phi_to_json(const Instance& inst, const std::vector<double>& phi) {
  std::vector<double> by_id(inst.agents(), 0.0);
  for (int i = 0; i < inst.agents(); ++i) by_id[inst.original_id(i) - 1] = phi[i];
  return by_id;
}

inline const char* rule_name(Rule r) {
  switch (r) {
    case Rule::GBPA: return "gbpa";
    case Rule::RBPA: return "rbpa";
    case Rule::RBIA: return "rbia";
  }
  return "?";
}

inline Rule rule_from_string(const std::string& s) {
  if (s == "gbpa") return Rule::GBPA;
  if (s == "rbpa") return Rule::RBPA;
  if (s == "rbia") return Rule::RBIA;
  throw std::invalid_argument("rule: expected gbpa, rbpa or rbia");
}

inline const char* deviation_kind_name(DeviationKind k) {
  switch (k) {
    case DeviationKind::General: return "general";
    case DeviationKind::Merger: return "merger";
    case DeviationKind::Split: return "split";
  }
  return "?";
}

inline nlohmann::json block_report_to_json(const Instance& inst, const BlockReport& br) {
  nlohmann::json j{{"rule", rule_name(br.rule)},
                   {"kind", deviation_kind_name(br.kind)},
                   {"coalition", coalition_to_json(inst, br.blocker)},
                   {"anticipated", br.anticipated},
                   {"prevailing", br.prevailing},
                   {"margin", br.margin}};
  if (br.post_split_rate) j["post_split_rate"] = *br.post_split_rate;
  if (br.payoff_sum) j["payoff_sum"] = *br.payoff_sum;
  if (br.post_partition)
    j["post_partition"] = partition_to_json(inst, *br.post_partition);
  return j;
}

inline nlohmann::json verdict_to_json(const Instance& inst, const Verdict& v) {
  nlohmann::json blockers = nlohmann::json::array();
  for (const BlockReport& br : v.blockers)
    blockers.push_back(block_report_to_json(inst, br));
  return {{"stable", v.stable}, {"blockers", blockers}};
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string scenario_hash(const Instance& inst) {
  std::ostringstream os;
  os << std::hex << fnv1a64(scenario_to_json(inst).dump());
  return os.str();
}

/// Grid syntax: "log:1e-2:1e3:25" or "lin:0:10:5".
inline std::vector<double> parse_grid(const std::string& spec) {
  std::istringstream is(spec);
  std::string kind, a_s, b_s, k_s;
  if (!std::getline(is, kind, ':') || !std::getline(is, a_s, ':') ||
      !std::getline(is, b_s, ':') || !std::getline(is, k_s))
    throw std::invalid_argument("grid: expected kind:start:stop:count");
  const double a = std::stod(a_s), b = std::stod(b_s);
  const int k = std::stoi(k_s);
  if (k < 1 || k > 4096) throw std::invalid_argument("grid: count out of range");
  if (!(a <= b)) throw std::invalid_argument("grid: start must not exceed stop");
  std::vector<double> grid;
  if (kind == "lin") {
    for (int i = 0; i < k; ++i)
      grid.push_back(k == 1 ? a : a + (b - a) * i / (k - 1));
  } else if (kind == "log") {
    if (!(a > 0.0)) throw std::invalid_argument("grid: log grid needs start > 0");
    const double la = std::log(a), lb = std::log(b);
    for (int i = 0; i < k; ++i)
      grid.push_back(k == 1 ? a : std::exp(la + (lb - la) * i / (k - 1)));
  } else {
    throw std::invalid_argument("grid: kind must be lin or log");
  }
  return grid;
}

}  // namespace lossgame
