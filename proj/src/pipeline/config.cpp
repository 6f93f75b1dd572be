#include "trafficlens/pipeline/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace trafficlens::pipeline {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Thrown by value parsers; the caller adds source and line.
struct BadValue {
  std::string what;
};

double to_double(std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw BadValue{"expected a number, got '" + std::string(v) + "'"};
  }
  return out;
}

template <class Int>
Int to_int(std::string_view v) {
  Int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw BadValue{"expected an integer, got '" + std::string(v) + "'"};
  }
  return out;
}

Dimensions to_dimensions(std::string_view v) {
  const auto x = v.find('x');
  if (x == std::string_view::npos) throw BadValue{"expected 'length x width', got '" + std::string(v) + "'"};
  return {to_double(trim(v.substr(0, x))), to_double(trim(v.substr(x + 1)))};
}

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

using Setter = std::function<void(Config&, std::string_view)>;
using Getter = std::function<std::string(const Config&)>;

struct Field {
  Setter set;
  Getter get;
};

template <class T>
Field number(T Config::*member) {
  return {[member](Config& c, std::string_view v) {
            if constexpr (std::is_floating_point_v<T>) {
              c.*member = to_double(v);
            } else {
              c.*member = to_int<T>(v);
            }
          },
          [member](const Config& c) {
            if constexpr (std::is_floating_point_v<T>) return fmt(c.*member);
            else return std::to_string(c.*member);
          }};
}

template <class S, class T>
Field nested(S Config::*outer, T S::*member) {
  return {[outer, member](Config& c, std::string_view v) {
            if constexpr (std::is_floating_point_v<T>) {
              c.*outer.*member = to_double(v);
            } else {
              c.*outer.*member = to_int<T>(v);
            }
          },
          [outer, member](const Config& c) {
            if constexpr (std::is_floating_point_v<T>) return fmt(c.*outer.*member);
            else return std::to_string(c.*outer.*member);
          }};
}

const std::map<std::string, Field, std::less<>>& fields() {
  static const std::map<std::string, Field, std::less<>> table = [] {
    std::map<std::string, Field, std::less<>> t;
    t["fps"] = number(&Config::fps);
    t["iota_m_per_px"] = number(&Config::iota_m_per_px);
    t["image_width"] = number(&Config::image_width);
    t["image_height"] = number(&Config::image_height);

    t["iou_min"] = nested(&Config::tracker, &TrackerConfig::iou_min);
    t["max_age"] = nested(&Config::tracker, &TrackerConfig::max_age);
    t["min_hits"] = nested(&Config::tracker, &TrackerConfig::min_hits);
    t["objectness_min"] = nested(&Config::tracker, &TrackerConfig::objectness_min);

    t["ransac_tau_px"] = nested(&Config::ransac, &RansacParams::tau_z);
    t["ransac_rho"] = nested(&Config::ransac, &RansacParams::rho);
    t["ransac_max_iter"] = nested(&Config::ransac, &RansacParams::max_iter);

    t["kf_jerk_density"] = nested(&Config::motion, &MotionConfig::jerk_density);
    t["kf_measurement_var"] = nested(&Config::motion, &MotionConfig::measurement_var);
    t["kf_initial_velocity_var"] = nested(&Config::motion, &MotionConfig::initial_velocity_var);
    t["kf_initial_accel_var"] = nested(&Config::motion, &MotionConfig::initial_accel_var);
    t["occlusion_buffer"] = nested(&Config::motion, &MotionConfig::occlusion_buffer);
    t["speed_axis"] = {[](Config& c, std::string_view v) {
                         if (v == "planar") c.motion.x_only_speed = false;
                         else if (v == "x_only") c.motion.x_only_speed = true;
                         else throw BadValue{"speed_axis must be 'planar' or 'x_only'"};
                       },
                       [](const Config& c) { return std::string(c.motion.x_only_speed ? "x_only" : "planar"); }};

    t["srg_tau"] = nested(&Config::srg, &SrgParams::tau_alpha);
    t["boundary_radius_px"] = number(&Config::boundary_radius_px);

    t["speed_limit_mph"] = nested(&Config::analytics, &AnalyticsConfig::speed_limit_mph);
    t["park_speed_mph"] = nested(&Config::analytics, &AnalyticsConfig::park_speed_mph);
    t["park_seconds"] = nested(&Config::analytics, &AnalyticsConfig::park_seconds);
    t["park_border_m"] = nested(&Config::analytics, &AnalyticsConfig::park_border_m);
    t["proximity_risk_m"] = nested(&Config::analytics, &AnalyticsConfig::proximity_risk_m);
    t["congestion_distance_m"] = nested(&Config::analytics, &AnalyticsConfig::congestion_distance_m);
    t["congestion_speed_mph"] = nested(&Config::analytics, &AnalyticsConfig::congestion_speed_mph);

    t["beta"] = number(&Config::beta);
    t["background_alpha"] = number(&Config::background_alpha);
    t["background_frames"] = number(&Config::background_frames);
    t["es_lambda"] = nested(&Config::es, &EsOptions::lambda);
    t["es_max_generations"] = nested(&Config::es, &EsOptions::max_generations);
    t["es_initial_step"] = nested(&Config::es, &EsOptions::initial_step);
    t["heat_floor"] = nested(&Config::render, &RenderOptions::floor);
    t["heat_alpha"] = nested(&Config::render, &RenderOptions::alpha);
    t["seed"] = number(&Config::seed);

    for (int i = 0; i < kNumClasses; ++i) {
      const auto cls = static_cast<ObjectClass>(i);
      t["prior." + std::string(class_name(cls))] = {
          [cls](Config& c, std::string_view v) {
            try {
              c.priors.set(cls, to_dimensions(v));
            } catch (const Error& e) {
              throw BadValue{e.detail()};
            }
          },
          [cls](const Config& c) {
            const auto d = c.priors.get(cls);
            return d ? fmt(d->length) + " x " + fmt(d->width) : std::string("missing");
          }};
    }
    return t;
  }();
  return table;
}

}  // namespace

void Config::validate() const {
  if (!(fps > 0.0)) throw Error(ErrorKind::ConfigError, "fps must be positive");
  if (!(iota_m_per_px > 0.0)) throw Error(ErrorKind::ConfigError, "iota_m_per_px must be positive");
  if (image_width < 1 || image_height < 1) throw Error(ErrorKind::ConfigError, "image size must be positive");
  tracker.validate();
  try {
    ransac.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::ConfigError, e.detail());
  }
  motion.validate();
  srg.validate();
  analytics.validate();
  if (!(beta > 0.0)) throw Error(ErrorKind::ConfigError, "beta must be positive");
  if (!(boundary_radius_px > 0.0)) throw Error(ErrorKind::ConfigError, "boundary_radius_px must be positive");
  if (!(background_alpha > 0.0 && background_alpha < 1.0)) {
    throw Error(ErrorKind::ConfigError, "background_alpha must lie in (0, 1)");
  }
  if (background_frames < 1) throw Error(ErrorKind::ConfigError, "background_frames must be positive");
  if (es.lambda < 1 || es.max_generations < 0 || !(es.initial_step > 0.0)) {
    throw Error(ErrorKind::ConfigError, "invalid evolution strategy settings");
  }
  if (!(render.floor >= 0.0 && render.floor <= 255.0)) throw Error(ErrorKind::ConfigError, "heat_floor out of range");
  if (!(render.alpha >= 0.0 && render.alpha <= 1.0)) throw Error(ErrorKind::ConfigError, "heat_alpha out of range");
}

Config parse_config(std::string_view text, const std::string& source) {
  Config cfg;
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto where = [&] { return source + ":" + std::to_string(line_no) + ": "; };

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorKind::ConfigError, where() + "expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = fields().find(key);
    if (it == fields().end()) throw Error(ErrorKind::ConfigError, where() + "unknown key '" + std::string(key) + "'");
    if (!seen.emplace(key).second) {
      throw Error(ErrorKind::ConfigError, where() + "duplicate key '" + std::string(key) + "'");
    }
    if (value.empty()) throw Error(ErrorKind::ConfigError, where() + "missing value for '" + std::string(key) + "'");
    try {
      it->second.set(cfg, value);
    } catch (const BadValue& bad) {
      throw Error(ErrorKind::ConfigError, where() + std::string(key) + ": " + bad.what);
    }
  }
  cfg.motion.fps = cfg.fps;
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::ConfigError, source + ": " + e.detail());
  }
  return cfg;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::string format_config(const Config& cfg) {
  std::string out;
  for (const auto& [key, field] : fields()) out += key + " = " + field.get(cfg) + "\n";
  return out;
}

}  // namespace trafficlens::pipeline
