#include "beamcodex/features.hpp"

#include <cmath>

#include "beamcodex/parallel.hpp"

namespace beamcodex {

std::array<bool, kScanBins> gain_gap_mask(const AngularPowerScan& scan, const GainGapConfig& cfg) {
  const double threshold = max_gain(scan, cfg) - cfg.gamma_db;
  std::array<bool, kScanBins> mask{};
  for (int d = 0; d < kScanBins; ++d) {
    mask[static_cast<std::size_t>(d)] = scan.power_dbm(d) >= threshold;
  }
  return mask;
}

std::vector<std::pair<int, int>> circular_runs(const std::array<bool, kScanBins>& mask) {
  std::vector<std::pair<int, int>> runs;
  int start_scan = -1;
  for (int d = 0; d < kScanBins; ++d) {
    if (!mask[static_cast<std::size_t>(d)]) {
      start_scan = d;
      break;
    }
  }
  if (start_scan < 0) {
    runs.emplace_back(0, kScanBins);
    return runs;
  }
  // Walk once around the circle starting just after a false bin so that
  // runs crossing 359 -> 0 are seen whole.
  int run_start = -1;
  int run_len = 0;
  for (int k = 1; k <= kScanBins; ++k) {
    const int d = (start_scan + k) % kScanBins;
    if (mask[static_cast<std::size_t>(d)]) {
      if (run_len == 0) run_start = d;
      ++run_len;
    } else if (run_len > 0) {
      runs.emplace_back(run_start, run_len);
      run_len = 0;
    }
  }
  return runs;
}

namespace {

BeamCandidate make_candidate(double first_bin, int width, const AngularPowerScan& scan,
                             std::size_t index) {
  BeamCandidate c;
  c.x_deg = wrap_deg(first_bin + (width - 1) / 2.0);
  c.y_deg = width;
  c.source_location = scan.location_id();
  c.source_index = index;
  return c;
}

}  // namespace

std::vector<BeamCandidate> extract_candidates(const AngularPowerScan& scan,
                                              const GainGapConfig& cfg,
                                              std::size_t source_index) {
  const auto runs = circular_runs(gain_gap_mask(scan, cfg));
  const int tile = static_cast<int>(std::floor(cfg.w_max_deg));
  const int step = std::max(1, tile / 2);
  std::vector<BeamCandidate> out;

  if (runs.size() == 1 && runs.front().second == kScanBins) {
    for (int centre = 0; centre < kScanBins; centre += step) {
      BeamCandidate c;
      c.x_deg = centre;
      c.y_deg = tile;
      c.source_location = scan.location_id();
      c.source_index = source_index;
      out.push_back(std::move(c));
    }
    return out;
  }

  for (const auto& [start, len] : runs) {
    if (len < cfg.w_min_deg) continue;
    if (len <= cfg.w_max_deg) {
      out.push_back(make_candidate(start, len, scan, source_index));
      continue;
    }
    // Over-wide run: tiles of width w_max at half-width steps, the last one
    // flush with the run end so no tile leaves the run.
    int offset = 0;
    for (; offset + tile <= len; offset += step) {
      out.push_back(make_candidate(start + offset, tile, scan, source_index));
    }
    const int last = offset - step;
    if (last + tile < len) {
      out.push_back(make_candidate(start + len - tile, tile, scan, source_index));
    }
  }
  return out;
}

std::vector<BeamCandidate> extract_all(const std::vector<AngularPowerScan>& scans,
                                       const GainGapConfig& cfg, unsigned jobs) {
  std::vector<std::vector<BeamCandidate>> per_scan(scans.size());
  parallel_for(scans.size(), jobs,
               [&](std::size_t i) { per_scan[i] = extract_candidates(scans[i], cfg, i); });
  std::vector<BeamCandidate> all;
  for (auto& v : per_scan) {
    for (auto& c : v) all.push_back(std::move(c));
  }
  return all;
}

}  // namespace beamcodex
