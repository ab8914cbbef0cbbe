#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "beamcodex/scan.hpp"

namespace beamcodex {

/// Parses `location_id,angle_deg,power_dbm[,distance_m][,tag]`. Locations keep
/// their order of first appearance. Samples finer than 1 degree are averaged
/// in linear power into bin round(angle) mod 360; every bin must be hit.
std::vector<AngularPowerScan> read_scans_csv(std::istream& in);
std::vector<AngularPowerScan> read_scans_csv(const std::filesystem::path& path);

/// Writes one row per (location, degree); distance/tag columns appear when
/// any scan carries them. Numbers use the shortest round-trip form.
void write_scans_csv(std::ostream& out, const std::vector<AngularPowerScan>& scans);

/// Shortest decimal that parses back to exactly `v`.
std::string format_double(double v);

std::string read_text_file(const std::filesystem::path& path);

/// 64-bit FNV-1a, printed as 16 hex digits.
std::string content_hash(const std::string& bytes);

/// Collects outputs as temporary files and renames them into place only on
/// commit(); anything not committed is removed on destruction.
class OutputSet {
 public:
  OutputSet() = default;
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;
  ~OutputSet();

  void add(const std::filesystem::path& path, const std::string& content);
  void commit();
  /// (path, content hash) for every staged file, in insertion order.
  const std::vector<std::pair<std::filesystem::path, std::string>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<std::filesystem::path, std::filesystem::path>> staged_;  // (temp, final)
  std::vector<std::pair<std::filesystem::path, std::string>> entries_;
  bool committed_ = false;
};

}  // namespace beamcodex
