#pragma once

// Angular power scans, beams and the flat-top gain model.

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace beamcodex {

inline constexpr int kScanBins = 360;

/// Raised for malformed inputs (bad scans, invalid beams, bad config).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class LinkClass { LoS, NLoS, Unknown };

const char* to_string(LinkClass c);
LinkClass link_class_from_string(const std::string& s);

double db_to_linear(double db);
double linear_to_db(double lin);

/// Reduces an angle to [0, 360).
double wrap_deg(double deg);

/// Smallest angular separation, in [0, 180].
double circ_distance(double a_deg, double b_deg);

/// Signed separation b - a reduced to [-180, 180).
double circ_diff(double a_deg, double b_deg);

/// Direction of the weighted resultant of unit vectors. Throws
/// InvalidInput("undefined mean") when the resultant nearly vanishes.
double circ_mean(const std::vector<double>& angles_deg,
                 const std::vector<double>& weights);
double circ_mean(const std::vector<double>& angles_deg);

/// One location's 1-degree azimuthal received-power profile.
class AngularPowerScan {
 public:
  using Bins = std::array<double, kScanBins>;

  AngularPowerScan(std::string location_id, const Bins& power_dbm,
                   std::optional<double> distance_m = std::nullopt,
                   LinkClass tag = LinkClass::Unknown);
  AngularPowerScan(std::string location_id, const std::vector<double>& power_dbm,
                   std::optional<double> distance_m = std::nullopt,
                   LinkClass tag = LinkClass::Unknown);

  const std::string& location_id() const { return location_id_; }
  const Bins& power_dbm() const { return power_dbm_; }
  double power_dbm(int bin) const { return power_dbm_[static_cast<std::size_t>(bin)]; }
  double linear(int bin) const { return linear_[static_cast<std::size_t>(bin)]; }
  const std::optional<double>& distance_m() const { return distance_m_; }
  LinkClass tag() const { return tag_; }

  /// Rotates the profile by an integer number of degrees: new[d] = old[d - shift].
  AngularPowerScan rotated(int shift_deg) const;
  /// Reflects the profile about 0 degrees: new[d] = old[-d].
  AngularPowerScan mirrored() const;

 private:
  void validate_and_cache();

  std::string location_id_;
  Bins power_dbm_{};
  Bins linear_{};
  std::optional<double> distance_m_;
  LinkClass tag_ = LinkClass::Unknown;
};

/// A training beam: flat-top aperture centred at `direction_deg`.
struct Beam {
  double direction_deg = 0.0;
  double width_deg = 0.0;

  Beam() = default;
  Beam(double direction, double width);

  Beam shifted(double delta_deg) const { return {direction_deg + delta_deg, width_deg}; }
  bool operator==(const Beam&) const = default;
};

/// Integer bins whose centres fall in [dir - w/2, dir + w/2) modulo 360,
/// listed in angular order starting from the lower edge. A bin is listed at
/// most once, so widths above 360 saturate at the full circle.
std::vector<int> aperture_bins(const Beam& beam);

/// Same membership as a 360-entry mask.
std::array<bool, kScanBins> aperture_mask(const Beam& beam);

struct GainGapConfig {
  double gamma_db = 5.0;
  double o_th = 0.9;
  double o_th1 = 0.95;
  double o_th2 = 0.95;
  double w_min_deg = 10.0;
  double w_max_deg = 60.0;
  double ref_beamwidth_deg = 10.0;

  /// Throws InvalidInput when the thresholds or widths are inconsistent.
  void validate() const;
};

/// 10*log10 of the mean linear power over the beam aperture.
double beam_gain(const AngularPowerScan& scan, const Beam& beam);

/// Linear-domain version of beam_gain.
double beam_gain_linear(const AngularPowerScan& scan, const Beam& beam);

/// Best reference-width gain over the 360 one-degree probe positions.
double max_gain(const AngularPowerScan& scan, const GainGapConfig& cfg);

/// Probe direction attaining max_gain (first maximum in increasing direction).
int max_gain_direction(const AngularPowerScan& scan, const GainGapConfig& cfg);

/// Isotropic power: the linear mean over all 360 bins, in dBm.
double isotropic_power(const AngularPowerScan& scan);

}  // namespace beamcodex
