#include "beamcodex/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "beamcodex/parallel.hpp"
#include "beamcodex/random.hpp"

namespace beamcodex {

namespace {

bool applies(LobeClass c, LinkClass link) {
  switch (c) {
    case LobeClass::Any:
      return true;
    case LobeClass::LoS:
      return link == LinkClass::LoS;
    case LobeClass::NLoS:
      return link == LinkClass::NLoS;
  }
  return false;
}

std::string lobe_class_name(LobeClass c) {
  switch (c) {
    case LobeClass::LoS:
      return "los";
    case LobeClass::NLoS:
      return "nlos";
    case LobeClass::Any:
      break;
  }
  return "any";
}

LobeClass lobe_class_from(const std::string& s) {
  if (s == "any") return LobeClass::Any;
  if (s == "los") return LobeClass::LoS;
  if (s == "nlos") return LobeClass::NLoS;
  throw InvalidInput("unknown lobe class: " + s);
}

PathLossComponent line(double intercept, double slope, double rms) {
  PathLossComponent c;
  c.intercept_db = intercept;
  c.slope_db_per_decade = slope;
  c.rms_db = rms;
  return c;
}

LocationTruth draw_location(const Environment& env, std::size_t index, Rng& rng, AngularPowerScan::Bins& out) {
  LocationTruth t;
  t.location_id = "loc" + std::to_string(index);
  const double log_lo = std::log(env.min_distance_m);
  const double log_hi = std::log(env.max_distance_m);
  t.distance_m = std::exp(log_lo + (log_hi - log_lo) * uniform01(rng));
  t.link_class = uniform01(rng) < env.los_probability ? LinkClass::LoS : LinkClass::NLoS;
  const auto& pl = t.link_class == LinkClass::LoS ? env.pathloss_los : env.pathloss_nlos;
  t.path_loss_db = pl.predict(std::log10(t.distance_m)) + normal(rng, 0.0, pl.rms_db);

  // Every catalog entry consumes the same draws whether or not it applies,
  // so adding a class-filtered lobe does not reshuffle the others.
  std::vector<PlantedLobe> lobes;
  std::vector<PlantedLobe> fallback;  // most likely applicable lobe, used if none fires
  for (std::size_t k = 0; k < env.lobe_catalog.size(); ++k) {
    const auto& spec = env.lobe_catalog[k];
    const double u = uniform01(rng);
    const double dj = normal(rng, 0.0, 1.0);
    const double wj = normal(rng, 0.0, 1.0);
    if (!applies(spec.applies_to, t.link_class)) continue;
    PlantedLobe lobe;
    lobe.direction_deg = wrap_deg(spec.direction_mean_deg + spec.direction_spread_deg * dj);
    lobe.width_deg = std::max(2.0, spec.width_mean_deg + spec.width_spread_deg * wj);
    lobe.peak_power_dbm = spec.power_offset_db;
    lobe.catalog_index = k;
    if (u < spec.occurrence_prob) lobes.push_back(lobe);
    if (fallback.empty() || spec.occurrence_prob > env.lobe_catalog[fallback[0].catalog_index].occurrence_prob) {
      fallback = {lobe};
    }
  }
  if (lobes.empty()) lobes = fallback;
  if (lobes.empty()) throw InvalidInput(std::string("no lobe applies to class ") + to_string(t.link_class));

  std::array<double, kScanBins> lin{};
  const double diffuse = db_to_linear(env.diffuse_floor_db);
  double mean = 0.0;
  for (int b = 0; b < kScanBins; ++b) {
    double v = diffuse;
    for (const auto& lobe : lobes) {
      v += db_to_linear(lobe.peak_power_dbm) * lobe_shape(circ_distance(b, lobe.direction_deg), lobe.width_deg,
                                                           env.shoulder_deg);
    }
    lin[static_cast<std::size_t>(b)] = v;
    mean += v;
  }
  mean /= kScanBins;

  // Scale so the all-angle mean received power equals tx - path loss.
  const double shift = env.tx_power_dbm - t.path_loss_db - linear_to_db(mean);
  const double floor_lin = db_to_linear(env.noise_floor_dbm);
  for (int b = 0; b < kScanBins; ++b) {
    const double signal = linear_to_db(lin[static_cast<std::size_t>(b)]) + shift;
    double p = linear_to_db(db_to_linear(signal) + floor_lin);
    if (env.noise_sigma_db > 0.0) p += normal(rng, 0.0, env.noise_sigma_db);
    out[static_cast<std::size_t>(b)] = std::clamp(p, -200.0, 50.0);
  }
  for (auto& lobe : lobes) lobe.peak_power_dbm += shift;
  t.lobes = lobes;
  return t;
}

}  // namespace

void Environment::validate() const {
  if (lobe_catalog.empty()) throw InvalidInput("environment needs at least one lobe");
  for (const auto& l : lobe_catalog) {
    if (!(l.occurrence_prob >= 0.0 && l.occurrence_prob <= 1.0)) throw InvalidInput("occurrence_prob outside [0,1]");
    if (!(l.direction_spread_deg >= 0.0 && l.width_spread_deg >= 0.0)) throw InvalidInput("negative lobe spread");
    if (!(l.width_mean_deg > 0.0 && l.width_mean_deg <= 360.0)) throw InvalidInput("lobe width outside (0,360]");
  }
  if (!(noise_sigma_db >= 0.0)) throw InvalidInput("noise_sigma_db must be nonnegative");
  if (!(los_probability >= 0.0 && los_probability <= 1.0)) throw InvalidInput("los_probability outside [0,1]");
  if (!(min_distance_m > 0.0 && max_distance_m >= min_distance_m)) throw InvalidInput("bad distance range");
  if (!(shoulder_deg >= 0.0)) throw InvalidInput("shoulder_deg must be nonnegative");
}

double lobe_shape(double offset_deg, double width_deg, double shoulder_deg) {
  const double a = std::abs(offset_deg);
  const double half = width_deg / 2.0;
  if (a <= half) return 1.0;
  if (shoulder_deg <= 0.0 || a >= half + shoulder_deg) return 0.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * (a - half) / shoulder_deg));
}

GeneratedData generate(const Environment& env, std::size_t n_locations, std::uint64_t seed, unsigned jobs) {
  env.validate();
  if (n_locations == 0) throw InvalidInput("n_locations must be at least 1");
  std::vector<AngularPowerScan::Bins> bins(n_locations);
  GeneratedData data;
  data.truth.environment = env.name;
  data.truth.seed = seed;
  data.truth.locations.resize(n_locations);
  parallel_for(n_locations, jobs, [&](std::size_t i) {
    Rng rng = make_rng(seed, i);
    data.truth.locations[i] = draw_location(env, i, rng, bins[i]);
  });
  data.scans.reserve(n_locations);
  for (std::size_t i = 0; i < n_locations; ++i) {
    const auto& t = data.truth.locations[i];
    data.scans.emplace_back(t.location_id, bins[i], t.distance_m, t.link_class);
  }
  return data;
}

std::vector<std::string> preset_names() { return {"corridor-los", "office-nlos", "two-lobe-tie"}; }

Environment preset(const std::string& name) {
  Environment e;
  e.name = name;
  const auto friis = friis_prior(28.0);
  if (name == "corridor-los") {
    e.los_probability = 0.8;
    e.noise_sigma_db = 0.5;
    e.pathloss_los = line(friis.intercept_db, 20.0, 2.0);
    e.pathloss_nlos = line(friis.intercept_db + 20.0, 25.0, 4.0);
    e.lobe_catalog = {
        {5.0, 1.5, 40.0, 1.0, 0.0, 1.0, LobeClass::Any},
        {185.0, 1.5, 30.0, 1.0, -1.0, 0.9, LobeClass::Any},
        {95.0, 1.5, 20.0, 1.0, -1.5, 0.8, LobeClass::Any},
    };
  } else if (name == "office-nlos") {
    e.los_probability = 0.3;
    e.noise_sigma_db = 0.5;
    e.pathloss_los = line(friis.intercept_db, 20.0, 3.0);
    e.pathloss_nlos = line(friis.intercept_db + 20.0, 25.0, 5.0);
    e.lobe_catalog = {
        {5.0, 2.0, 45.0, 1.5, 0.0, 0.5, LobeClass::Any},
        {65.0, 2.0, 45.0, 1.5, 0.0, 0.5, LobeClass::Any},
        {125.0, 2.0, 45.0, 1.5, 0.0, 0.5, LobeClass::Any},
        {185.0, 2.0, 45.0, 1.5, 0.0, 0.5, LobeClass::Any},
        {245.0, 2.0, 45.0, 1.5, 0.0, 0.5, LobeClass::Any},
        {305.0, 2.0, 45.0, 1.5, 0.0, 0.5, LobeClass::Any},
    };
  } else if (name == "two-lobe-tie") {
    e.los_probability = 0.5;
    e.pathloss_los = line(friis.intercept_db, 20.0, 3.0);
    e.pathloss_nlos = line(friis.intercept_db + 20.0, 25.0, 5.0);
    e.lobe_catalog = {
        {45.0, 2.0, 14.0, 1.0, 0.0, 1.0, LobeClass::Any},
        {225.0, 3.0, 90.0, 4.0, -7.0, 1.0, LobeClass::Any},
    };
  } else {
    throw InvalidInput("unknown preset: " + name);
  }
  return e;
}

void to_json(nlohmann::json& j, const LobeSpec& l) {
  j = {{"direction_mean", l.direction_mean_deg},
       {"direction_spread", l.direction_spread_deg},
       {"width_mean", l.width_mean_deg},
       {"width_spread", l.width_spread_deg},
       {"power_offset_db", l.power_offset_db},
       {"occurrence_prob", l.occurrence_prob},
       {"class", lobe_class_name(l.applies_to)}};
}

void from_json(const nlohmann::json& j, LobeSpec& l) {
  l = LobeSpec{};
  l.direction_mean_deg = j.at("direction_mean").get<double>();
  l.direction_spread_deg = j.value("direction_spread", 0.0);
  l.width_mean_deg = j.at("width_mean").get<double>();
  l.width_spread_deg = j.value("width_spread", 0.0);
  l.power_offset_db = j.value("power_offset_db", 0.0);
  l.occurrence_prob = j.value("occurrence_prob", 1.0);
  l.applies_to = lobe_class_from(j.value("class", std::string("any")));
}

void to_json(nlohmann::json& j, const Environment& e) {
  j = {{"name", e.name},
       {"lobe_catalog", e.lobe_catalog},
       {"noise_floor_dbm", e.noise_floor_dbm},
       {"diffuse_floor_db", e.diffuse_floor_db},
       {"tx_power_dbm", e.tx_power_dbm},
       {"noise_sigma_db", e.noise_sigma_db},
       {"los_probability", e.los_probability},
       {"shoulder_deg", e.shoulder_deg},
       {"min_distance_m", e.min_distance_m},
       {"max_distance_m", e.max_distance_m},
       {"pathloss_los", e.pathloss_los},
       {"pathloss_nlos", e.pathloss_nlos}};
}

void from_json(const nlohmann::json& j, Environment& e) {
  const Environment d;
  e.name = j.value("name", std::string("custom"));
  e.lobe_catalog = j.at("lobe_catalog").get<std::vector<LobeSpec>>();
  e.noise_floor_dbm = j.value("noise_floor_dbm", d.noise_floor_dbm);
  e.diffuse_floor_db = j.value("diffuse_floor_db", d.diffuse_floor_db);
  e.tx_power_dbm = j.value("tx_power_dbm", d.tx_power_dbm);
  e.noise_sigma_db = j.value("noise_sigma_db", d.noise_sigma_db);
  e.los_probability = j.value("los_probability", d.los_probability);
  e.shoulder_deg = j.value("shoulder_deg", d.shoulder_deg);
  e.min_distance_m = j.value("min_distance_m", d.min_distance_m);
  e.max_distance_m = j.value("max_distance_m", d.max_distance_m);
  e.pathloss_los = j.at("pathloss_los").get<PathLossComponent>();
  e.pathloss_nlos = j.at("pathloss_nlos").get<PathLossComponent>();
  e.validate();
}

void to_json(nlohmann::json& j, const GroundTruth& t) {
  nlohmann::json locs = nlohmann::json::array();
  for (const auto& l : t.locations) {
    nlohmann::json lobes = nlohmann::json::array();
    for (const auto& p : l.lobes) {
      lobes.push_back({{"direction_deg", p.direction_deg},
                       {"width_deg", p.width_deg},
                       {"peak_power_dbm", p.peak_power_dbm},
                       {"catalog_index", p.catalog_index}});
    }
    locs.push_back({{"location_id", l.location_id},
                    {"distance_m", l.distance_m},
                    {"class", to_string(l.link_class)},
                    {"path_loss_db", l.path_loss_db},
                    {"lobes", lobes}});
  }
  j = {{"environment", t.environment}, {"seed", t.seed}, {"locations", locs}};
}

}  // namespace beamcodex
