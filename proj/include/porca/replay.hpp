#pragma once

#include <algorithm>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "porca/geom.hpp"

namespace porca {

/// Per-step log as written by write_step_record, reassembled into tracks.
struct TrialLog {
  std::vector<Vector2> vehicle;
  std::vector<int> collision_steps;
  double vehicle_radius = 1.0;
  std::map<int, std::vector<Vector2>> pedestrians;
  std::map<int, double> pedestrian_radius;
  double duration = 0.0;
};

class LogError : public std::runtime_error {
 public:
  LogError(std::size_t line, const std::string& what)
      : std::runtime_error("log line " + std::to_string(line) + ": " + what) {}
};

inline TrialLog read_trial_log(std::istream& in) {
  TrialLog log;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto rec = nlohmann::json::parse(line);
      const auto& v = rec.at("vehicle");
      log.vehicle.push_back({v.at("x").get<double>(), v.at("y").get<double>()});
      log.vehicle_radius = v.value("radius", log.vehicle_radius);
      log.duration = rec.at("t").get<double>();
      if (rec.value("collision", false)) log.collision_steps.push_back(rec.at("step").get<int>());
      for (const auto& p : rec.at("pedestrians")) {
        const int id = p.at("id").get<int>();
        log.pedestrians[id].push_back({p.at("x").get<double>(), p.at("y").get<double>()});
        log.pedestrian_radius[id] = p.value("r", 0.3);
      }
    } catch (const nlohmann::json::exception& e) {
      throw LogError(lineno, e.what());
    }
  }
  return log;
}

/// Static picture of a trial: the vehicle's trace, every pedestrian's trace and
/// final disc, and red markers where contact happened.
inline std::string render_svg(const TrialLog& log, double pixels_per_metre = 30.0) {
  double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x;
  double hi_x = -lo_x, hi_y = -lo_x;
  auto grow = [&](Vector2 p, double r) {
    lo_x = std::min(lo_x, p.x - r);
    lo_y = std::min(lo_y, p.y - r);
    hi_x = std::max(hi_x, p.x + r);
    hi_y = std::max(hi_y, p.y + r);
  };
  for (const auto& p : log.vehicle) grow(p, log.vehicle_radius);
  for (const auto& [id, track] : log.pedestrians)
    for (const auto& p : track) grow(p, log.pedestrian_radius.at(id));
  if (!(lo_x <= hi_x)) lo_x = lo_y = -1.0, hi_x = hi_y = 1.0;
  const double margin = 1.0;
  lo_x -= margin, lo_y -= margin, hi_x += margin, hi_y += margin;

  char buf[256];
  std::ostringstream out;
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return std::string(buf);
  };
  // World y points up; SVG y points down.
  auto pt = [&](Vector2 p) { return num(p.x - lo_x) + "," + num(hi_y - p.y); };
  auto polyline = [&](const std::vector<Vector2>& track, const char* colour, double width) {
    out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"" << num(width)
        << "\" points=\"";
    for (std::size_t i = 0; i < track.size(); ++i) out << (i ? " " : "") << pt(track[i]);
    out << "\"/>\n";
  };
  auto disc = [&](Vector2 c, double r, const char* fill, const char* stroke) {
    const auto xy = pt(c);
    const auto comma = xy.find(',');
    out << "<circle cx=\"" << xy.substr(0, comma) << "\" cy=\"" << xy.substr(comma + 1)
        << "\" r=\"" << num(r) << "\" fill=\"" << fill << "\" stroke=\"" << stroke
        << "\" stroke-width=\"0.04\"/>\n";
  };

  const double w = hi_x - lo_x, h = hi_y - lo_y;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w * pixels_per_metre)
      << "\" height=\"" << num(h * pixels_per_metre) << "\" viewBox=\"0 0 " << num(w) << ' '
      << num(h) << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << num(w) << "\" height=\"" << num(h)
      << "\" fill=\"white\"/>\n";
  for (const auto& [id, track] : log.pedestrians) {
    polyline(track, "#4a7bd0", 0.05);
    disc(track.back(), log.pedestrian_radius.at(id), "#b8cdf0", "#4a7bd0");
  }
  if (!log.vehicle.empty()) {
    polyline(log.vehicle, "#333333", 0.08);
    disc(log.vehicle.back(), log.vehicle_radius, "none", "#333333");
  }
  for (const int step : log.collision_steps) {
    // Steps are 1-based and the log holds one record per step.
    const auto i = static_cast<std::size_t>(std::max(step - 1, 0));
    if (i < log.vehicle.size()) disc(log.vehicle[i], 0.15, "#d03a3a", "#d03a3a");
  }
  out << "<text x=\"0.2\" y=\"0.6\" font-size=\"0.5\" font-family=\"sans-serif\">t = "
      << num(log.duration) << " s, contacts: " << log.collision_steps.size() << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace porca
