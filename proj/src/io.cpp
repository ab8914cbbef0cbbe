#include "beamcodex/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <system_error>
#include <unistd.h>

namespace beamcodex {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& field, std::size_t line_no) {
  const std::string s = trim(field);
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s[0] == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw InvalidInput("line " + std::to_string(line_no) + ": not a number: '" + s + "'");
  }
  return v;
}

struct Accum {
  std::array<double, kScanBins> sum{};
  std::array<int, kScanBins> hits{};
  std::array<double, kScanBins> first_db{};
  std::optional<double> distance;
  LinkClass tag = LinkClass::Unknown;
};

}  // namespace

std::vector<AngularPowerScan> read_scans_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw InvalidInput("empty scan file");
  ++line_no;
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_fields(line);
  int col_id = -1, col_angle = -1, col_power = -1, col_dist = -1, col_tag = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto h = trim(header[c]);
    const int ci = static_cast<int>(c);
    if (h == "location_id") col_id = ci;
    else if (h == "angle_deg") col_angle = ci;
    else if (h == "power_dbm") col_power = ci;
    else if (h == "distance_m") col_dist = ci;
    else if (h == "tag") col_tag = ci;
  }
  if (col_id < 0 || col_angle < 0 || col_power < 0) {
    throw InvalidInput("scan header must contain location_id,angle_deg,power_dbm");
  }

  std::vector<std::string> order;
  std::map<std::string, Accum> acc;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != header.size()) {
      throw InvalidInput("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                         " fields");
    }
    const std::string id = trim(f[static_cast<std::size_t>(col_id)]);
    if (id.empty()) throw InvalidInput("line " + std::to_string(line_no) + ": empty location_id");
    auto [it, inserted] = acc.try_emplace(id);
    if (inserted) order.push_back(id);
    Accum& a = it->second;
    const double angle = parse_number(f[static_cast<std::size_t>(col_angle)], line_no);
    const double power = parse_number(f[static_cast<std::size_t>(col_power)], line_no);
    if (!std::isfinite(angle) || !std::isfinite(power)) {
      throw InvalidInput("line " + std::to_string(line_no) + ": non-finite value");
    }
    const int bin = static_cast<int>(std::lround(wrap_deg(angle))) % kScanBins;
    if (a.hits[static_cast<std::size_t>(bin)] == 0) a.first_db[static_cast<std::size_t>(bin)] = power;
    a.sum[static_cast<std::size_t>(bin)] += db_to_linear(power);
    ++a.hits[static_cast<std::size_t>(bin)];
    if (col_dist >= 0) {
      const std::string d = trim(f[static_cast<std::size_t>(col_dist)]);
      if (!d.empty()) a.distance = parse_number(d, line_no);
    }
    if (col_tag >= 0) {
      const std::string t = trim(f[static_cast<std::size_t>(col_tag)]);
      if (!t.empty()) a.tag = link_class_from_string(t);
    }
  }
  if (order.empty()) throw InvalidInput("scan file has no rows");

  std::vector<AngularPowerScan> scans;
  scans.reserve(order.size());
  for (const auto& id : order) {
    const Accum& a = acc.at(id);
    AngularPowerScan::Bins bins{};
    int covered = 0;
    for (int b = 0; b < kScanBins; ++b) {
      const auto k = static_cast<std::size_t>(b);
      if (a.hits[k] == 0) continue;
      ++covered;
      bins[k] = a.hits[k] == 1 ? a.first_db[k] : linear_to_db(a.sum[k] / a.hits[k]);
    }
    if (covered != kScanBins) {
      throw InvalidInput("location " + id + " covers " + std::to_string(covered) + " of 360 bins");
    }
    scans.emplace_back(id, bins, a.distance, a.tag);
  }
  return scans;
}

std::vector<AngularPowerScan> read_scans_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  return read_scans_csv(in);
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

void write_scans_csv(std::ostream& out, const std::vector<AngularPowerScan>& scans) {
  bool any_distance = false, any_tag = false;
  for (const auto& s : scans) {
    any_distance = any_distance || s.distance_m().has_value();
    any_tag = any_tag || s.tag() != LinkClass::Unknown;
  }
  out << "location_id,angle_deg,power_dbm";
  if (any_distance) out << ",distance_m";
  if (any_tag) out << ",tag";
  out << '\n';
  for (const auto& s : scans) {
    const std::string dist = s.distance_m() ? format_double(*s.distance_m()) : std::string{};
    for (int b = 0; b < kScanBins; ++b) {
      out << s.location_id() << ',' << b << ',' << format_double(s.power_dbm(b));
      if (any_distance) out << ',' << dist;
      if (any_tag) out << ',' << to_string(s.tag());
      out << '\n';
    }
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string content_hash(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

OutputSet::~OutputSet() {
  if (committed_) return;
  std::error_code ec;
  for (const auto& [tmp, final_path] : staged_) std::filesystem::remove(tmp, ec);
}

void OutputSet::add(const std::filesystem::path& path, const std::string& content) {
  if (committed_) throw std::logic_error("output set already committed");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  staged_.emplace_back(tmp, path);
  entries_.emplace_back(path, content_hash(content));
}

void OutputSet::commit() {
  std::vector<std::filesystem::path> done;
  try {
    for (const auto& [tmp, final_path] : staged_) {
      std::filesystem::rename(tmp, final_path);
      done.push_back(final_path);
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& p : done) std::filesystem::remove(p, ec);
    throw;
  }
  committed_ = true;
}

}  // namespace beamcodex
