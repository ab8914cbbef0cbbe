#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "beamcodex/scan.hpp"

namespace testutil {

struct Block {
  int first_bin;  // inclusive, may wrap past 359
  int length;
  double level_dbm;
};

inline beamcodex::AngularPowerScan block_scan(double floor_dbm, const std::vector<Block>& blocks,
                                              const std::string& id = "loc") {
  beamcodex::AngularPowerScan::Bins bins;
  bins.fill(floor_dbm);
  for (const auto& b : blocks) {
    for (int k = 0; k < b.length; ++k) bins[static_cast<std::size_t>((b.first_bin + k) % 360)] = b.level_dbm;
  }
  return beamcodex::AngularPowerScan(id, bins);
}

// Aperture membership straight from the half-open interval on bin centres.
inline bool in_aperture(int bin, double dir, double width) {
  if (width >= 360.0) return true;
  double off = std::fmod(bin - (dir - width / 2.0), 360.0);
  if (off < 0) off += 360.0;
  return off < width;
}

inline double brute_gain(const beamcodex::AngularPowerScan& s, double dir, double width) {
  double sum = 0.0;
  int n = 0;
  for (int b = 0; b < 360; ++b) {
    if (!in_aperture(b, dir, width)) continue;
    sum += std::pow(10.0, s.power_dbm(b) / 10.0);
    ++n;
  }
  return 10.0 * std::log10(sum / n);
}

}  // namespace testutil
