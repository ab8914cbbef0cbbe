#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "beamcodex/scan.hpp"

namespace beamcodex {

/// A (direction, width) observation extracted from one scan: every 1-degree
/// bin of its aperture clears the gain-gap threshold of that scan.
struct BeamCandidate {
  double x_deg = 0.0;  // central-ray direction
  double y_deg = 0.0;  // width
  std::string source_location;
  std::size_t source_index = 0;  // position of the source scan in the input list

  Beam beam() const { return Beam(x_deg, y_deg); }
};

/// Bins whose power reaches max_gain(scan) - gamma.
std::array<bool, kScanBins> gain_gap_mask(const AngularPowerScan& scan, const GainGapConfig& cfg);

/// Maximal circular runs of a mask as (first bin, length); a full circle is
/// reported as a single run of length 360 starting at bin 0.
std::vector<std::pair<int, int>> circular_runs(const std::array<bool, kScanBins>& mask);

/// One candidate per qualifying run; runs wider than w_max are tiled.
std::vector<BeamCandidate> extract_candidates(const AngularPowerScan& scan,
                                              const GainGapConfig& cfg,
                                              std::size_t source_index = 0);

/// extract_candidates over a scan list, preserving scan order.
std::vector<BeamCandidate> extract_all(const std::vector<AngularPowerScan>& scans,
                                       const GainGapConfig& cfg, unsigned jobs = 1);

}  // namespace beamcodex
