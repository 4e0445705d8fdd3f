#include "uavwet/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "uavwet/errors.hpp"

namespace uavwet {

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::Magrl: return "magrl";
    case Variant::MagrlHoe: return "magrl-hoe";
    case Variant::MagrlG: return "magrl-g";
    case Variant::MagrlHoeG: return "magrl-hoe-g";
  }
  return "magrl";
}

Variant parse_variant(const std::string& s) {
  if (s == "magrl") return Variant::Magrl;
  if (s == "magrl-hoe") return Variant::MagrlHoe;
  if (s == "magrl-g") return Variant::MagrlG;
  if (s == "magrl-hoe-g") return Variant::MagrlHoeG;
  throw ConfigError("unknown variant: " + s);
}

double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }

WorldConfig WorldConfig::defaults() {
  WorldConfig c;
  c.harvester.p_sen = dbm_to_watts(c.p_sen_dbm);
  c.harvester.p_sat = dbm_to_watts(c.p_sat_dbm);
  return c;
}

void WorldConfig::validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(channel.a > 0.0 && channel.b > 0.0, "channel: a, b must be > 0");
  require(channel.g0 > 0.0, "channel: g0 must be > 0");
  require(channel.alpha_nlos > channel.alpha_los && channel.alpha_los > 0.0,
          "channel: require alpha_nlos > alpha_los > 0");
  require(channel.h_fix > 0.0, "channel: h_fix must be > 0");
  require(propulsion.p_blade > 0.0 && propulsion.p_induced > 0.0 &&
              propulsion.v_tip > 0.0 && propulsion.v_induced_hover > 0.0 &&
              propulsion.drag_ratio > 0.0 && propulsion.solidity > 0.0 &&
              propulsion.air_density > 0.0 && propulsion.rotor_area > 0.0,
          "propulsion: all constants must be > 0");
  require(harvester.p_sen > 0.0 && harvester.p_sen < harvester.p_sat,
          "harvester: require 0 < p_sen < p_sat");
  require(harvester.peak_efficiency > 0.0 && harvester.peak_efficiency <= 1.0,
          "harvester: peak efficiency in (0, 1]");
  require(energy.uav_reserve < energy.uav_capacity,
          "energy: uav reserve must be below capacity");
  require(energy.dev_threshold <= energy.dev_capacity,
          "energy: device threshold above capacity");
  require(energy.dev_init_lo >= 0.0 && energy.dev_init_lo <= energy.dev_init_hi,
          "energy: bad device init battery range");
  require(energy.dev_init_hi <= energy.dev_capacity,
          "energy: device init battery above capacity");
  require(energy.wet_power > 0.0, "energy: wet power must be > 0");
  require(mdp.slot_seconds > 0.0, "mdp: slot length must be > 0");
  require(mdp.v_max > 0.0, "mdp: v_max must be > 0");
  require(mdp.d_min > 0.0, "mdp: d_min must be > 0");
  require(mdp.varrho2 > 0.0, "mdp: varrho2 must be > 0");
  require(mdp.reward_device_unit > 0.0, "mdp: reward device unit must be > 0");
  require(train.gamma > 0.0 && train.gamma < 1.0, "train: gamma in (0,1)");
  require(train.epsilon > 0.0 && train.epsilon <= 1.0,
          "train: epsilon in (0,1]");
  require(train.tau >= 0.0 && train.tau < 1.0, "train: tau in [0,1)");
  require(train.lr > 0.0 && train.policy_lr > 0.0 && train.alpha_lr > 0.0,
          "train: learning rates must be > 0");
  require(train.alpha_init > 0.0, "train: alpha_init must be > 0");
  require(train.buffer_capacity > 0, "train: buffer capacity must be > 0");
  require(train.minibatch > 0 && train.minibatch <= train.buffer_capacity,
          "train: minibatch must be in [1, buffer capacity]");
  require(train.episodes > 0, "train: episodes must be > 0");
  require(train.hidden_width > 0 && train.global_hidden_width > 0,
          "train: hidden widths must be > 0");
  require(train.grad_clip > 0.0, "train: grad clip must be > 0");
}

void Scenario::validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(area_w > 0.0 && area_l > 0.0, "scenario: area must be positive");
  require(num_uavs >= 2, "scenario: at least 2 UAVs");
  require(num_devices >= 1, "scenario: at least 1 device");
  require(horizon >= 1, "scenario: horizon must be >= 1");
  require(device_x.size() == static_cast<std::size_t>(num_devices) &&
              device_y.size() == static_cast<std::size_t>(num_devices),
          "scenario: device position lists must match num_devices");
  for (int i = 0; i < num_devices; ++i) {
    require(device_x[i] >= 0.0 && device_x[i] <= area_w &&
                device_y[i] >= 0.0 && device_y[i] <= area_l,
            "scenario: device position outside area");
  }
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt_double(v[i]);
  }
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for key '" + key + "': " + s);
  }
}

int parse_int(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw ConfigError("bad integer value for key '" + key + "': " + s);
  }
}

bool parse_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError("bad boolean value for key '" + key + "': " + s);
}

std::vector<double> parse_list(const std::string& s, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("empty list element for key " + key);
    out.push_back(parse_double(item, key));
  }
  return out;
}

// Keyed setter table: one entry per known (section, key).
struct Setter {
  std::function<void(LoadedConfig&, const std::string&, const std::string&)> fn;
};

using SetterMap = std::map<std::string, Setter>;

SetterMap build_setters() {
  SetterMap m;
  auto dbl = [&m](const std::string& sk, double WorldConfig::* field) {
    m[sk] = {[field](LoadedConfig& c, const std::string& key,
                     const std::string& v) {
      c.world.*field = parse_double(v, key);
    }};
  };
  (void)dbl;
  auto add = [&m](const std::string& sk, auto fn) { m[sk] = {fn}; };

#define UAVWET_DBL(SK, REF)                                        \
  add(SK, [](LoadedConfig& c, const std::string& key,              \
             const std::string& v) { c.REF = parse_double(v, key); })
#define UAVWET_INT(SK, REF)                                        \
  add(SK, [](LoadedConfig& c, const std::string& key,              \
             const std::string& v) { c.REF = parse_int(v, key); })
#define UAVWET_BOOL(SK, REF)                                       \
  add(SK, [](LoadedConfig& c, const std::string& key,              \
             const std::string& v) { c.REF = parse_bool(v, key); })

  UAVWET_DBL("channel.a", world.channel.a);
  UAVWET_DBL("channel.b", world.channel.b);
  UAVWET_DBL("channel.g0", world.channel.g0);
  UAVWET_DBL("channel.alpha_los", world.channel.alpha_los);
  UAVWET_DBL("channel.alpha_nlos", world.channel.alpha_nlos);
  UAVWET_DBL("channel.h_fix", world.channel.h_fix);

  UAVWET_DBL("propulsion.p_blade", world.propulsion.p_blade);
  UAVWET_DBL("propulsion.p_induced", world.propulsion.p_induced);
  UAVWET_DBL("propulsion.v_tip", world.propulsion.v_tip);
  UAVWET_DBL("propulsion.v_induced_hover", world.propulsion.v_induced_hover);
  UAVWET_DBL("propulsion.drag_ratio", world.propulsion.drag_ratio);
  UAVWET_DBL("propulsion.solidity", world.propulsion.solidity);
  UAVWET_DBL("propulsion.air_density", world.propulsion.air_density);
  UAVWET_DBL("propulsion.rotor_area", world.propulsion.rotor_area);

  add("harvester.p_sen_dbm",
      [](LoadedConfig& c, const std::string& key, const std::string& v) {
        c.world.p_sen_dbm = parse_double(v, key);
        c.world.harvester.p_sen = dbm_to_watts(c.world.p_sen_dbm);
      });
  add("harvester.p_sat_dbm",
      [](LoadedConfig& c, const std::string& key, const std::string& v) {
        c.world.p_sat_dbm = parse_double(v, key);
        c.world.harvester.p_sat = dbm_to_watts(c.world.p_sat_dbm);
      });
  UAVWET_DBL("harvester.peak_efficiency", world.harvester.peak_efficiency);
  UAVWET_DBL("harvester.steepness", world.harvester.steepness);
  UAVWET_DBL("harvester.midpoint_w", world.harvester.midpoint);

  UAVWET_DBL("energy.uav_capacity", world.energy.uav_capacity);
  UAVWET_DBL("energy.uav_reserve", world.energy.uav_reserve);
  UAVWET_DBL("energy.dev_capacity", world.energy.dev_capacity);
  UAVWET_DBL("energy.dev_threshold", world.energy.dev_threshold);
  UAVWET_DBL("energy.wet_power", world.energy.wet_power);
  UAVWET_DBL("energy.dev_init_lo", world.energy.dev_init_lo);
  UAVWET_DBL("energy.dev_init_hi", world.energy.dev_init_hi);

  UAVWET_DBL("mdp.slot_seconds", world.mdp.slot_seconds);
  UAVWET_DBL("mdp.v_max", world.mdp.v_max);
  UAVWET_DBL("mdp.d_min", world.mdp.d_min);
  UAVWET_DBL("mdp.xi0", world.mdp.xi0);
  UAVWET_DBL("mdp.xi1", world.mdp.xi1);
  UAVWET_DBL("mdp.xi2", world.mdp.xi2);
  UAVWET_DBL("mdp.varrho2", world.mdp.varrho2);
  UAVWET_BOOL("mdp.shared_penalty", world.mdp.shared_penalty);
  UAVWET_DBL("mdp.reward_device_unit", world.mdp.reward_device_unit);

  UAVWET_DBL("train.gamma", world.train.gamma);
  UAVWET_DBL("train.epsilon", world.train.epsilon);
  UAVWET_DBL("train.tau", world.train.tau);
  UAVWET_DBL("train.lr", world.train.lr);
  UAVWET_DBL("train.policy_lr", world.train.policy_lr);
  UAVWET_DBL("train.alpha_lr", world.train.alpha_lr);
  UAVWET_DBL("train.alpha_init", world.train.alpha_init);
  UAVWET_INT("train.buffer_capacity", world.train.buffer_capacity);
  UAVWET_INT("train.minibatch", world.train.minibatch);
  UAVWET_INT("train.episodes", world.train.episodes);
  UAVWET_INT("train.hidden_width", world.train.hidden_width);
  UAVWET_INT("train.global_hidden_width", world.train.global_hidden_width);
  UAVWET_DBL("train.grad_clip", world.train.grad_clip);
  UAVWET_BOOL("train.squash_correction", world.train.squash_correction);
  add("train.variant",
      [](LoadedConfig& c, const std::string&, const std::string& v) {
        c.world.train.variant = parse_variant(v);
      });

  add("scenario.name",
      [](LoadedConfig& c, const std::string&, const std::string& v) {
        c.scenario.name = v;
      });
  UAVWET_DBL("scenario.area_w", scenario.area_w);
  UAVWET_DBL("scenario.area_l", scenario.area_l);
  UAVWET_INT("scenario.num_uavs", scenario.num_uavs);
  UAVWET_INT("scenario.num_devices", scenario.num_devices);
  UAVWET_INT("scenario.horizon", scenario.horizon);
  add("scenario.device_x",
      [](LoadedConfig& c, const std::string& key, const std::string& v) {
        c.scenario.device_x = parse_list(v, key);
      });
  add("scenario.device_y",
      [](LoadedConfig& c, const std::string& key, const std::string& v) {
        c.scenario.device_y = parse_list(v, key);
      });

#undef UAVWET_DBL
#undef UAVWET_INT
#undef UAVWET_BOOL
  return m;
}

const SetterMap& setters() {
  static const SetterMap m = build_setters();
  return m;
}

}  // namespace

LoadedConfig load_config(const std::string& path, const LoadedConfig& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);

  LoadedConfig cfg = base;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw ConfigError(path + ":" + std::to_string(lineno) +
                          ": malformed section header");
      }
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    const std::string qualified = section + "." + key;
    auto it = setters().find(qualified);
    if (it == setters().end()) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": unknown key '" + qualified + "'");
    }
    it->second.fn(cfg, qualified, value);
  }
  cfg.world.validate();
  cfg.scenario.validate();
  return cfg;
}

LoadedConfig load_config(const std::string& path) {
  LoadedConfig base;
  base.world = WorldConfig::defaults();
  base.scenario = Scenario{};
  // Default test scenario layout; overridden by any file that sets devices.
  base.scenario.device_x = {50.0, 75.0, 145.0};
  base.scenario.device_y = {140.0, 155.0, 60.0};
  return load_config(path, base);
}

std::string serialize_config(const LoadedConfig& cfg) {
  const WorldConfig& w = cfg.world;
  const Scenario& s = cfg.scenario;
  std::ostringstream out;
  out << "[channel]\n"
      << "a = " << fmt_double(w.channel.a) << "\n"
      << "b = " << fmt_double(w.channel.b) << "\n"
      << "g0 = " << fmt_double(w.channel.g0) << "\n"
      << "alpha_los = " << fmt_double(w.channel.alpha_los) << "\n"
      << "alpha_nlos = " << fmt_double(w.channel.alpha_nlos) << "\n"
      << "h_fix = " << fmt_double(w.channel.h_fix) << "\n\n";
  out << "[propulsion]\n"
      << "p_blade = " << fmt_double(w.propulsion.p_blade) << "\n"
      << "p_induced = " << fmt_double(w.propulsion.p_induced) << "\n"
      << "v_tip = " << fmt_double(w.propulsion.v_tip) << "\n"
      << "v_induced_hover = " << fmt_double(w.propulsion.v_induced_hover)
      << "\n"
      << "drag_ratio = " << fmt_double(w.propulsion.drag_ratio) << "\n"
      << "solidity = " << fmt_double(w.propulsion.solidity) << "\n"
      << "air_density = " << fmt_double(w.propulsion.air_density) << "\n"
      << "rotor_area = " << fmt_double(w.propulsion.rotor_area) << "\n\n";
  out << "[harvester]\n"
      << "p_sen_dbm = " << fmt_double(w.p_sen_dbm) << "\n"
      << "p_sat_dbm = " << fmt_double(w.p_sat_dbm) << "\n"
      << "peak_efficiency = " << fmt_double(w.harvester.peak_efficiency)
      << "\n"
      << "steepness = " << fmt_double(w.harvester.steepness) << "\n"
      << "midpoint_w = " << fmt_double(w.harvester.midpoint) << "\n\n";
  out << "[energy]\n"
      << "uav_capacity = " << fmt_double(w.energy.uav_capacity) << "\n"
      << "uav_reserve = " << fmt_double(w.energy.uav_reserve) << "\n"
      << "dev_capacity = " << fmt_double(w.energy.dev_capacity) << "\n"
      << "dev_threshold = " << fmt_double(w.energy.dev_threshold) << "\n"
      << "wet_power = " << fmt_double(w.energy.wet_power) << "\n"
      << "dev_init_lo = " << fmt_double(w.energy.dev_init_lo) << "\n"
      << "dev_init_hi = " << fmt_double(w.energy.dev_init_hi) << "\n\n";
  out << "[mdp]\n"
      << "slot_seconds = " << fmt_double(w.mdp.slot_seconds) << "\n"
      << "v_max = " << fmt_double(w.mdp.v_max) << "\n"
      << "d_min = " << fmt_double(w.mdp.d_min) << "\n"
      << "xi0 = " << fmt_double(w.mdp.xi0) << "\n"
      << "xi1 = " << fmt_double(w.mdp.xi1) << "\n"
      << "xi2 = " << fmt_double(w.mdp.xi2) << "\n"
      << "varrho2 = " << fmt_double(w.mdp.varrho2) << "\n"
      << "shared_penalty = " << (w.mdp.shared_penalty ? "true" : "false")
      << "\n"
      << "reward_device_unit = " << fmt_double(w.mdp.reward_device_unit)
      << "\n\n";
  out << "[train]\n"
      << "gamma = " << fmt_double(w.train.gamma) << "\n"
      << "epsilon = " << fmt_double(w.train.epsilon) << "\n"
      << "tau = " << fmt_double(w.train.tau) << "\n"
      << "lr = " << fmt_double(w.train.lr) << "\n"
      << "policy_lr = " << fmt_double(w.train.policy_lr) << "\n"
      << "alpha_lr = " << fmt_double(w.train.alpha_lr) << "\n"
      << "alpha_init = " << fmt_double(w.train.alpha_init) << "\n"
      << "buffer_capacity = " << w.train.buffer_capacity << "\n"
      << "minibatch = " << w.train.minibatch << "\n"
      << "episodes = " << w.train.episodes << "\n"
      << "hidden_width = " << w.train.hidden_width << "\n"
      << "global_hidden_width = " << w.train.global_hidden_width << "\n"
      << "grad_clip = " << fmt_double(w.train.grad_clip) << "\n"
      << "squash_correction = "
      << (w.train.squash_correction ? "true" : "false") << "\n"
      << "variant = " << variant_name(w.train.variant) << "\n\n";
  out << "[scenario]\n"
      << "name = " << s.name << "\n"
      << "area_w = " << fmt_double(s.area_w) << "\n"
      << "area_l = " << fmt_double(s.area_l) << "\n"
      << "num_uavs = " << s.num_uavs << "\n"
      << "num_devices = " << s.num_devices << "\n"
      << "horizon = " << s.horizon << "\n"
      << "device_x = " << fmt_list(s.device_x) << "\n"
      << "device_y = " << fmt_list(s.device_y) << "\n";
  return out.str();
}

void save_config(const std::string& path, const LoadedConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config file: " + path);
  out << serialize_config(cfg);
  if (!out) throw IoError("failed writing config file: " + path);
}

}  // namespace uavwet
