#include "beamcodex/scan.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace beamcodex {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kMinPowerDbm = -200.0;
constexpr double kMaxPowerDbm = 50.0;

}  // namespace

const char* to_string(LinkClass c) {
  switch (c) {
    case LinkClass::LoS:
      return "LoS";
    case LinkClass::NLoS:
      return "NLoS";
    case LinkClass::Unknown:
      break;
  }
  return "Unknown";
}

LinkClass link_class_from_string(const std::string& s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "los") return LinkClass::LoS;
  if (lower == "nlos") return LinkClass::NLoS;
  if (lower.empty() || lower == "unknown" || lower == "unlabeled") return LinkClass::Unknown;
  throw InvalidInput("unknown link class '" + s + "'");
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

double wrap_deg(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r < 0.0) r += 360.0;
  // fmod of a tiny negative value can round up to exactly 360.
  if (r >= 360.0) r -= 360.0;
  return r;
}

double circ_distance(double a_deg, double b_deg) {
  const double d = wrap_deg(std::fabs(a_deg - b_deg));
  return std::min(d, 360.0 - d);
}

double circ_diff(double a_deg, double b_deg) {
  double d = wrap_deg(b_deg - a_deg);
  if (d >= 180.0) d -= 360.0;
  return d;
}

double circ_mean(const std::vector<double>& angles_deg, const std::vector<double>& weights) {
  if (angles_deg.empty()) throw InvalidInput("undefined mean: empty angle list");
  if (weights.size() != angles_deg.size()) {
    throw InvalidInput("circ_mean: weights and angles differ in length");
  }
  double c = 0.0;
  double s = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < angles_deg.size(); ++i) {
    if (weights[i] < 0.0) throw InvalidInput("circ_mean: negative weight");
    c += weights[i] * std::cos(angles_deg[i] * kDegToRad);
    s += weights[i] * std::sin(angles_deg[i] * kDegToRad);
    total += weights[i];
  }
  if (total <= 0.0) throw InvalidInput("undefined mean: all weights zero");
  if (std::hypot(c, s) / total < 1e-9) throw InvalidInput("undefined mean");
  return wrap_deg(std::atan2(s, c) / kDegToRad);
}

double circ_mean(const std::vector<double>& angles_deg) {
  return circ_mean(angles_deg, std::vector<double>(angles_deg.size(), 1.0));
}

AngularPowerScan::AngularPowerScan(std::string location_id, const Bins& power_dbm,
                                   std::optional<double> distance_m, LinkClass tag)
    : location_id_(std::move(location_id)),
      power_dbm_(power_dbm),
      distance_m_(distance_m),
      tag_(tag) {
  validate_and_cache();
}

AngularPowerScan::AngularPowerScan(std::string location_id,
                                   const std::vector<double>& power_dbm,
                                   std::optional<double> distance_m, LinkClass tag)
    : location_id_(std::move(location_id)), distance_m_(distance_m), tag_(tag) {
  if (power_dbm.size() != static_cast<std::size_t>(kScanBins)) {
    throw InvalidInput("scan '" + location_id_ + "' must have exactly 360 bins, got " +
                       std::to_string(power_dbm.size()));
  }
  std::copy(power_dbm.begin(), power_dbm.end(), power_dbm_.begin());
  validate_and_cache();
}

void AngularPowerScan::validate_and_cache() {
  for (std::size_t i = 0; i < power_dbm_.size(); ++i) {
    const double p = power_dbm_[i];
    if (!std::isfinite(p) || p < kMinPowerDbm || p > kMaxPowerDbm) {
      throw InvalidInput("scan '" + location_id_ + "' bin " + std::to_string(i) +
                         " power out of range");
    }
    linear_[i] = db_to_linear(p);
  }
  if (distance_m_ && !(std::isfinite(*distance_m_) && *distance_m_ > 0.0)) {
    throw InvalidInput("scan '" + location_id_ + "' distance must be positive");
  }
}

AngularPowerScan AngularPowerScan::rotated(int shift_deg) const {
  Bins out{};
  for (int d = 0; d < kScanBins; ++d) {
    const int src = ((d - shift_deg) % kScanBins + kScanBins) % kScanBins;
    out[static_cast<std::size_t>(d)] = power_dbm_[static_cast<std::size_t>(src)];
  }
  return AngularPowerScan(location_id_, out, distance_m_, tag_);
}

AngularPowerScan AngularPowerScan::mirrored() const {
  Bins out{};
  for (int d = 0; d < kScanBins; ++d) {
    out[static_cast<std::size_t>(d)] =
        power_dbm_[static_cast<std::size_t>((kScanBins - d) % kScanBins)];
  }
  return AngularPowerScan(location_id_, out, distance_m_, tag_);
}

Beam::Beam(double direction, double width) : direction_deg(wrap_deg(direction)), width_deg(width) {
  if (!std::isfinite(direction)) throw InvalidInput("beam direction must be finite");
  if (!(std::isfinite(width) && width > 0.0 && width <= 360.0)) {
    throw InvalidInput("beam width must lie in (0, 360]");
  }
}

std::vector<int> aperture_bins(const Beam& beam) {
  const double lower = beam.direction_deg - beam.width_deg / 2.0;
  const double upper = beam.direction_deg + beam.width_deg / 2.0;
  const auto first = static_cast<long>(std::ceil(lower));
  const auto last = static_cast<long>(std::ceil(upper)) - 1;
  std::vector<int> bins;
  const long count = std::min<long>(last - first + 1, kScanBins);
  if (count <= 0) return bins;
  bins.reserve(static_cast<std::size_t>(count));
  for (long d = first; d < first + count; ++d) {
    bins.push_back(static_cast<int>(((d % kScanBins) + kScanBins) % kScanBins));
  }
  return bins;
}

std::array<bool, kScanBins> aperture_mask(const Beam& beam) {
  std::array<bool, kScanBins> mask{};
  for (int b : aperture_bins(beam)) mask[static_cast<std::size_t>(b)] = true;
  return mask;
}

void GainGapConfig::validate() const {
  if (!(gamma_db > 0.0)) throw InvalidInput("gamma_db must be positive");
  auto unit = [](double v, const char* name) {
    if (!(v > 0.0 && v <= 1.0)) throw InvalidInput(std::string(name) + " must lie in (0, 1]");
  };
  unit(o_th, "o_th");
  unit(o_th1, "o_th1");
  unit(o_th2, "o_th2");
  if (o_th1 * o_th2 < o_th - 1e-12) {
    throw InvalidInput("o_th1 * o_th2 must be at least o_th");
  }
  if (!(w_min_deg > 0.0 && w_min_deg <= ref_beamwidth_deg && ref_beamwidth_deg <= w_max_deg &&
        w_max_deg <= 360.0)) {
    throw InvalidInput("widths must satisfy 0 < w_min <= ref_beamwidth <= w_max <= 360");
  }
}

double beam_gain_linear(const AngularPowerScan& scan, const Beam& beam) {
  const auto bins = aperture_bins(beam);
  if (bins.empty()) throw InvalidInput("degenerate beam");
  double sum = 0.0;
  for (int b : bins) sum += scan.linear(b);
  return sum / static_cast<double>(bins.size());
}

double beam_gain(const AngularPowerScan& scan, const Beam& beam) {
  return linear_to_db(beam_gain_linear(scan, beam));
}

namespace {

std::pair<int, double> best_reference_probe(const AngularPowerScan& scan,
                                            const GainGapConfig& cfg) {
  int best_dir = 0;
  double best = -1.0;
  for (int d = 0; d < kScanBins; ++d) {
    const double g = beam_gain_linear(scan, Beam(d, cfg.ref_beamwidth_deg));
    if (g > best) {
      best = g;
      best_dir = d;
    }
  }
  return {best_dir, linear_to_db(best)};
}

}  // namespace

double max_gain(const AngularPowerScan& scan, const GainGapConfig& cfg) {
  return best_reference_probe(scan, cfg).second;
}

int max_gain_direction(const AngularPowerScan& scan, const GainGapConfig& cfg) {
  return best_reference_probe(scan, cfg).first;
}

double isotropic_power(const AngularPowerScan& scan) {
  double sum = 0.0;
  for (int d = 0; d < kScanBins; ++d) sum += scan.linear(d);
  return linear_to_db(sum / kScanBins);
}

}  // namespace beamcodex
