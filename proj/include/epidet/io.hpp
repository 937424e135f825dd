#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "epidet/cost_model.hpp"
#include "epidet/design.hpp"
#include "epidet/epidemic.hpp"
#include "epidet/loess.hpp"
#include "epidet/srmc.hpp"

namespace epidet {

using nlohmann::json;

void to_json(json& j, const EpidemicParams& p);
void from_json(const json& j, EpidemicParams& p);
void to_json(json& j, const CostParams& c);
void from_json(const json& j, CostParams& c);
void to_json(json& j, const LoessConfig& c);
void from_json(const json& j, LoessConfig& c);
void to_json(json& j, const StateBox& b);
void from_json(const json& j, StateBox& b);
/// Unknown keys are ignored; missing keys keep their defaults.
void to_json(json& j, const SrmcConfig& c);
void from_json(const json& j, SrmcConfig& c);

/// Where a map came from; embedded in every serialized map.
struct Provenance {
  std::string config_hash;
  std::uint64_t master_seed = 0;
  std::string method;  ///< "SRMC" or "RMC (non-sequential)"
};

/// 64-bit FNV-1a of the compact dump, as 16 hex digits.
std::string config_hash(const json& config);

/// Self-contained map document: parameters, loess config, domain, the full
/// design and responses. Reloading refits the memory-based surrogate, which
/// reproduces predictions bit-for-bit.
json map_to_json(const DetectionMap& map, const EpidemicParams& params, const SrmcConfig& config,
                 const Provenance& provenance);

struct LoadedMap {
  DetectionMap map;
  EpidemicParams params;
  SrmcConfig config;
  Provenance provenance;
};

LoadedMap map_from_json(const json& doc);
LoadedMap load_map(const std::string& path);
void save_json(const std::string& path, const json& doc);
json load_json(const std::string& path);

}  // namespace epidet
