#pragma once

// Network files (JSON) and region exports (CSV, JSON).

#include <afrelay/capacity.hpp>
#include <afrelay/channel.hpp>
#include <afrelay/duality.hpp>
#include <afrelay/multihop.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace afrelay {

/// Malformed or inconsistent network file.
class ConfigError : public Error {
public:
  using Error::Error;
};

namespace io {

using nlohmann::json;

/// Round-trippable decimal form (17 significant digits, '.' separator).
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Parses JSON text; syntax errors report the 1-based line and column.
inline json parse_json(const std::string& text, const std::string& source = "<input>") {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    // The library message repeats the position; keep only its description.
    if (const auto pos = what.find(": ", what.find("parse error")); pos != std::string::npos) what = what.substr(pos + 2);
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace detail {

inline const json& field(const json& j, const char* key) {
  if (!j.is_object()) throw ConfigError("network file: top level must be an object");
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError(std::string("network file: missing key \"") + key + "\"");
  return *it;
}

inline double number(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number()) throw ConfigError(std::string("network file: \"") + key + "\" must be a number");
  return v.get<double>();
}

inline std::vector<double> numbers(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_array()) throw ConfigError(std::string("network file: \"") + key + "\" must be an array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(std::string("network file: \"") + key + "\" must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

inline Vector vector_of(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Re-raise library validation failures as configuration errors.
template <class Net>
Net checked(Net net) {
  try {
    validate(net);
  } catch (const Error& e) {
    throw ConfigError(std::string("network file: ") + e.what());
  }
  return net;
}

}  // namespace detail

inline PtpChannel ptp_from_json(const json& j) {
  return detail::checked(PtpChannel{DiagChannel(detail::numbers(j, "f")), DiagChannel(detail::numbers(j, "g")),
                                    detail::number(j, "p"), detail::number(j, "p_relay")});
}

inline MacChannel mac_from_json(const json& j) {
  return detail::checked(MacChannel{DiagChannel(detail::numbers(j, "f1")), DiagChannel(detail::numbers(j, "f2")),
                                    DiagChannel(detail::numbers(j, "g")), detail::number(j, "p1"),
                                    detail::number(j, "p2"), detail::number(j, "p_relay")});
}

inline BcChannel bc_from_json(const json& j) {
  return detail::checked(BcChannel{DiagChannel(detail::numbers(j, "g")), DiagChannel(detail::numbers(j, "f1")),
                                   DiagChannel(detail::numbers(j, "f2")), detail::number(j, "p_source"),
                                   detail::number(j, "p_relay")});
}

/// Missing block lists mean single-antenna relays.
inline ThreeHopNetwork three_hop_from_json(const json& j) {
  ThreeHopNetwork net;
  net.f1_bar = detail::vector_of(detail::numbers(j, "f1_bar"));
  net.f2_bar = detail::vector_of(detail::numbers(j, "f2_bar"));
  net.g_bar = detail::vector_of(detail::numbers(j, "g_bar"));
  const json& h = detail::field(j, "h");
  if (!h.is_array()) throw ConfigError("network file: \"h\" must be an array of rows");
  net.h = Matrix::Zero(static_cast<Eigen::Index>(h.size()), h.empty() ? 0 : static_cast<Eigen::Index>(h[0].size()));
  for (std::size_t r = 0; r < h.size(); ++r) {
    if (!h[r].is_array() || h[r].size() != h[0].size())
      throw ConfigError("network file: \"h\" rows must be arrays of equal length");
    for (std::size_t c = 0; c < h[r].size(); ++c) {
      if (!h[r][c].is_number()) throw ConfigError("network file: \"h\" must hold numbers");
      net.h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = h[r][c].get<double>();
    }
  }
  auto blocks = [&](const char* key, Eigen::Index n) {
    if (!j.contains(key)) return std::vector<int>(static_cast<std::size_t>(n), 1);
    const json& b = j.at(key);
    if (!b.is_array()) throw ConfigError(std::string("network file: \"") + key + "\" must be an array");
    std::vector<int> out;
    for (const auto& x : b) {
      if (!x.is_number_integer()) throw ConfigError(std::string("network file: \"") + key + "\" must hold integers");
      out.push_back(x.get<int>());
    }
    return out;
  };
  net.blocks_a = blocks("blocks_a", net.n1());
  net.blocks_b = blocks("blocks_b", net.n2());
  net.p1 = detail::number(j, "p1");
  net.p2 = detail::number(j, "p2");
  net.p_r1 = detail::number(j, "p_r1");
  net.p_r2 = detail::number(j, "p_r2");
  return detail::checked(std::move(net));
}

// ---------------------------------------------------------------------------
// Exports
// ---------------------------------------------------------------------------

/// Rate column suffix and scale: nats by default, bits divide by ln 2.
struct RateUnit {
  const char* suffix = "nats";
  double scale = 1.0;
};
inline RateUnit nats() { return {}; }
inline RateUnit bits() { return {"bits", 1.0 / std::log(2.0)}; }

inline void write_region_csv(std::ostream& os, const RegionBoundary& region, RateUnit unit = nats()) {
  os << "label,theta,r1_" << unit.suffix << ",r2_" << unit.suffix << "\n";
  for (const auto& p : region.points)
    os << p.label << "," << (p.theta ? fmt(*p.theta) : "") << "," << fmt(p.r1 * unit.scale) << ","
       << fmt(p.r2 * unit.scale) << "\n";
}

inline json point_to_json(const RatePoint& p, RateUnit unit = nats()) {
  json j;
  j["label"] = p.label;
  j["theta"] = p.theta ? json(*p.theta) : json(nullptr);
  j[std::string("r1_") + unit.suffix] = p.r1 * unit.scale;
  j[std::string("r2_") + unit.suffix] = p.r2 * unit.scale;
  return j;
}

inline json region_to_json(const RegionBoundary& region, RateUnit unit = nats()) {
  json pts = json::array();
  for (const auto& p : region.points) pts.push_back(point_to_json(p, unit));
  return pts;
}

/// Corner summary of a MAC region.
inline json region_summary_json(const RegionBoundary& region, RateUnit unit = nats()) {
  const auto& s = region.sum_rate;
  json j;
  j["unit"] = unit.suffix;
  j["c1_10"] = region.user1.favored * unit.scale;
  j["c2_10"] = region.user1.other * unit.scale;
  j["c2_01"] = region.user2.favored * unit.scale;
  j["c1_01"] = region.user2.other * unit.scale;
  j["c11"] = s.capacity * unit.scale;
  j["snr_star"] = s.snr_star;
  j["theta11"] = s.theta11;
  j["theta11_degenerate"] = s.theta11_degenerate;
  j["beta"] = s.beta;
  j["a11"] = s.a11;
  j["a22"] = s.a22;
  j["a12"] = s.a12;
  j["corner_c"] = point_to_json(s.corner_1_then_2, unit);
  j["corner_d"] = point_to_json(s.corner_2_then_1, unit);
  return j;
}

inline void write_bc_splits_csv(std::ostream& os, const BcRegion& region, RateUnit unit = nats()) {
  os << "p1,p2,label,theta,r1_" << unit.suffix << ",r2_" << unit.suffix << "\n";
  for (const auto& s : region.per_split)
    for (const auto& p : s.boundary.points)
      os << fmt(s.p1) << "," << fmt(s.p2) << "," << p.label << "," << (p.theta ? fmt(*p.theta) : "") << ","
         << fmt(p.r1 * unit.scale) << "," << fmt(p.r2 * unit.scale) << "\n";
}

inline void write_frontier_csv(std::ostream& os, const std::vector<RatePoint>& frontier, RateUnit unit = nats()) {
  os << "r1_" << unit.suffix << ",r2_" << unit.suffix << "\n";
  for (const auto& p : frontier) os << fmt(p.r1 * unit.scale) << "," << fmt(p.r2 * unit.scale) << "\n";
}

inline json bc_region_to_json(const BcRegion& region, RateUnit unit = nats()) {
  json splits = json::array();
  for (const auto& s : region.per_split)
    splits.push_back({{"p1", s.p1}, {"p2", s.p2}, {"points", region_to_json(s.boundary, unit)}});
  json frontier = json::array();
  for (const auto& p : region.frontier)
    frontier.push_back({{std::string("r1_") + unit.suffix, p.r1 * unit.scale},
                        {std::string("r2_") + unit.suffix, p.r2 * unit.scale}});
  return {{"splits", splits}, {"frontier", frontier}};
}

inline json gain_to_json(const RelayGain& d) { return json(d.vec()); }

}  // namespace io
}  // namespace afrelay
