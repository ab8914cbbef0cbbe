#pragma once

// Synthetic propagation scenarios: each location draws a distance, a link
// class and a subset of the environment's lobe catalog, and renders them as
// an angular power scan with dB-domain measurement noise.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "beamcodex/pathloss.hpp"
#include "beamcodex/scan.hpp"

namespace beamcodex {

enum class LobeClass { Any, LoS, NLoS };

struct LobeSpec {
  double direction_mean_deg = 0.0;
  double direction_spread_deg = 0.0;
  double width_mean_deg = 30.0;
  double width_spread_deg = 0.0;
  double power_offset_db = 0.0;  // flat-top level relative to the strongest possible lobe
  double occurrence_prob = 1.0;
  LobeClass applies_to = LobeClass::Any;
};

struct Environment {
  std::string name;
  std::vector<LobeSpec> lobe_catalog;
  double noise_floor_dbm = -120.0;   // thermal floor, added in linear power
  double diffuse_floor_db = -25.0;   // scattered power relative to the 0 dB lobe level
  double tx_power_dbm = 30.0;
  double noise_sigma_db = 1.0;
  double los_probability = 0.5;
  double shoulder_deg = 2.0;         // raised-cosine rolloff on each lobe edge
  double min_distance_m = 5.0;
  double max_distance_m = 110.0;
  PathLossComponent pathloss_los;
  PathLossComponent pathloss_nlos;

  void validate() const;
};

struct PlantedLobe {
  double direction_deg = 0.0;
  double width_deg = 0.0;
  double peak_power_dbm = 0.0;  // flat-top level before measurement noise
  std::size_t catalog_index = 0;
};

struct LocationTruth {
  std::string location_id;
  double distance_m = 0.0;
  LinkClass link_class = LinkClass::Unknown;
  double path_loss_db = 0.0;  // including shadowing
  std::vector<PlantedLobe> lobes;
};

struct GroundTruth {
  std::string environment;
  std::uint64_t seed = 0;
  std::vector<LocationTruth> locations;
};

struct GeneratedData {
  std::vector<AngularPowerScan> scans;
  GroundTruth truth;
};

/// Flat top over |offset| <= width/2, raised-cosine shoulder beyond it.
double lobe_shape(double offset_deg, double width_deg, double shoulder_deg);

/// Location i uses random stream i of `seed`.
GeneratedData generate(const Environment& env, std::size_t n_locations, std::uint64_t seed, unsigned jobs = 1);

/// Built-in scenarios: "corridor-los", "office-nlos", "two-lobe-tie".
std::vector<std::string> preset_names();
Environment preset(const std::string& name);

void to_json(nlohmann::json& j, const LobeSpec& l);
void from_json(const nlohmann::json& j, LobeSpec& l);
void to_json(nlohmann::json& j, const Environment& e);
void from_json(const nlohmann::json& j, Environment& e);
void to_json(nlohmann::json& j, const GroundTruth& t);

}  // namespace beamcodex
