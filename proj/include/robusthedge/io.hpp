#pragma once

#include "robusthedge/deflator.hpp"
#include "robusthedge/models.hpp"
#include "robusthedge/na1.hpp"
#include "robusthedge/simulation.hpp"
#include "robusthedge/superhedge.hpp"

#include <json.hpp>

#include <string>

namespace robusthedge {

using Json = nlohmann::ordered_json;

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
Json parse_json_text(const std::string& text, const std::string& origin);

/// Either an explicit {nodes, edges, models} document or {generator: {...}}
/// with type lattice, binomial or trinomial.
TreeFamily tree_family_from_json(const Json& j);
Json tree_family_to_json(const TreeFamily& fam);

Claim claim_from_json(const Json& j);
Json claim_to_json(const Claim& claim);

Deflator deflator_from_json(const TreeFamily& fam, const Json& j);
Json deflator_to_json(const TreeFamily& fam, const Deflator& Y);

KilledMeasure killed_measure_from_json(const TreeFamily& fam, const Json& j);
Json killed_measure_to_json(const TreeFamily& fam, const KilledMeasure& Q);

UncertaintySpec uncertainty_spec_from_json(const Json& j);
Json uncertainty_spec_to_json(const UncertaintySpec& spec);

Json na1_report_to_json(const TreeFamily& fam, const Na1Report& report);

/// Columns node,parent,time,S_1..S_d,Z,H_1..H_d (ids; empty parent at root).
std::string price_to_csv(const TreeFamily& fam, const std::vector<double>& Z, const HedgeStrategy& H);

struct PriceTable {
  std::vector<double> Z;
  HedgeStrategy H;
};

/// Reads a price CSV back onto the nodes of `fam` (matched by id).
PriceTable price_from_csv(const TreeFamily& fam, const std::string& text);

BsbSurface surface_from_csv(const std::string& text);

/// Fixed-format number used in every CSV artifact.
std::string format_number(double x);

}  // namespace robusthedge
