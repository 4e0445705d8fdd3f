#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "uavwet/config.hpp"
#include "uavwet/errors.hpp"

using namespace uavwet;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << body;
  return path;
}

LoadedConfig base_cfg() {
  LoadedConfig c;
  c.world = WorldConfig::defaults();
  c.scenario = Scenario{};
  c.scenario.device_x = {50.0, 75.0, 145.0};
  c.scenario.device_y = {140.0, 155.0, 60.0};
  return c;
}

bool world_equal(const WorldConfig& a, const WorldConfig& b) {
  return a.channel.a == b.channel.a && a.channel.b == b.channel.b &&
         a.channel.g0 == b.channel.g0 && a.channel.alpha_los == b.channel.alpha_los &&
         a.channel.alpha_nlos == b.channel.alpha_nlos && a.channel.h_fix == b.channel.h_fix &&
         a.propulsion.p_blade == b.propulsion.p_blade &&
         a.propulsion.p_induced == b.propulsion.p_induced &&
         a.propulsion.v_tip == b.propulsion.v_tip &&
         a.propulsion.v_induced_hover == b.propulsion.v_induced_hover &&
         a.propulsion.drag_ratio == b.propulsion.drag_ratio &&
         a.propulsion.solidity == b.propulsion.solidity &&
         a.propulsion.air_density == b.propulsion.air_density &&
         a.propulsion.rotor_area == b.propulsion.rotor_area &&
         a.harvester.p_sen == b.harvester.p_sen && a.harvester.p_sat == b.harvester.p_sat &&
         a.harvester.peak_efficiency == b.harvester.peak_efficiency &&
         a.harvester.steepness == b.harvester.steepness &&
         a.harvester.midpoint == b.harvester.midpoint &&
         a.energy.uav_capacity == b.energy.uav_capacity &&
         a.energy.uav_reserve == b.energy.uav_reserve &&
         a.energy.dev_capacity == b.energy.dev_capacity &&
         a.energy.dev_threshold == b.energy.dev_threshold &&
         a.energy.wet_power == b.energy.wet_power &&
         a.energy.dev_init_lo == b.energy.dev_init_lo &&
         a.energy.dev_init_hi == b.energy.dev_init_hi &&
         a.mdp.slot_seconds == b.mdp.slot_seconds && a.mdp.v_max == b.mdp.v_max &&
         a.mdp.d_min == b.mdp.d_min && a.mdp.xi0 == b.mdp.xi0 &&
         a.mdp.xi1 == b.mdp.xi1 && a.mdp.xi2 == b.mdp.xi2 &&
         a.mdp.varrho2 == b.mdp.varrho2 && a.mdp.shared_penalty == b.mdp.shared_penalty &&
         a.train.gamma == b.train.gamma && a.train.epsilon == b.train.epsilon &&
         a.train.tau == b.train.tau && a.train.lr == b.train.lr &&
         a.train.policy_lr == b.train.policy_lr && a.train.alpha_lr == b.train.alpha_lr &&
         a.train.alpha_init == b.train.alpha_init &&
         a.train.buffer_capacity == b.train.buffer_capacity &&
         a.train.minibatch == b.train.minibatch && a.train.episodes == b.train.episodes &&
         a.train.hidden_width == b.train.hidden_width &&
         a.train.global_hidden_width == b.train.global_hidden_width &&
         a.train.grad_clip == b.train.grad_clip &&
         a.train.squash_correction == b.train.squash_correction &&
         a.train.variant == b.train.variant && a.p_sen_dbm == b.p_sen_dbm &&
         a.p_sat_dbm == b.p_sat_dbm;
}

}  // namespace

TEST_CASE("table defaults and unit conversion") {
  const WorldConfig w = WorldConfig::defaults();
  CHECK(w.channel.h_fix == 5.0);
  CHECK(w.energy.wet_power == 1.0);
  CHECK(w.channel.alpha_los == 3.0);
  CHECK(w.channel.alpha_nlos == 5.0);
  CHECK(w.energy.uav_reserve == 20000.0);
  CHECK(w.energy.uav_capacity == 140000.0);
  CHECK(w.train.gamma == 0.985);
  CHECK(w.train.epsilon == 0.8);
  CHECK(w.train.tau == 0.999);
  CHECK(w.mdp.xi0 == 0.25);
  CHECK(w.mdp.xi1 == 1.0);
  CHECK(w.mdp.xi2 == 1e-5);
  CHECK(w.energy.dev_threshold == 0.01);
  CHECK(w.mdp.d_min == 5.0);
  CHECK(w.channel.a == 12.08);
  CHECK(w.channel.b == 0.11);
  CHECK(w.mdp.varrho2 == 100.0);
  CHECK(w.train.buffer_capacity == (1 << 17));
  CHECK(w.train.minibatch == 128);
  CHECK(w.train.alpha_lr == 2e-4);
  CHECK(w.train.lr == 2e-4);
  CHECK(w.train.policy_lr == 3e-4);

  CHECK(w.harvester.p_sen == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(w.harvester.p_sat == doctest::Approx(5.011872336272722e-3).epsilon(1e-12));
  CHECK(dbm_to_watts(-10.0) == doctest::Approx(1e-4).epsilon(1e-14));
  CHECK(dbm_to_watts(0.0) == doctest::Approx(1e-3).epsilon(1e-14));
}

TEST_CASE("empty override file keeps the defaults") {
  const auto path = write_temp("uavwet_empty.ini", "# nothing here\n");
  const LoadedConfig got = load_config(path.string(), base_cfg());
  CHECK(world_equal(got.world, base_cfg().world));
}

TEST_CASE("save/load round trip is bit-identical") {
  LoadedConfig cfg = base_cfg();
  cfg.world.channel.g0 = 2.718281828459045;
  cfg.world.mdp.xi2 = 1.2345678901234567e-5;
  cfg.world.train.variant = Variant::MagrlHoe;
  const auto path = std::filesystem::temp_directory_path() / "uavwet_rt.ini";
  save_config(path.string(), cfg);
  const LoadedConfig got = load_config(path.string(), base_cfg());
  CHECK(world_equal(got.world, cfg.world));
  CHECK(got.scenario.device_x == cfg.scenario.device_x);
  CHECK(got.scenario.device_y == cfg.scenario.device_y);
  CHECK(got.scenario.horizon == cfg.scenario.horizon);
}

TEST_CASE("bad configs are rejected") {
  SUBCASE("unknown key") {
    const auto path = write_temp("uavwet_badkey.ini", "[channel]\nzz = 1\n");
    CHECK_THROWS_AS(load_config(path.string(), base_cfg()), ConfigError);
  }
  SUBCASE("unknown section") {
    const auto path = write_temp("uavwet_badsec.ini", "[nope]\na = 1\n");
    CHECK_THROWS_AS(load_config(path.string(), base_cfg()), ConfigError);
  }
  SUBCASE("threshold above capacity") {
    const auto path = write_temp("uavwet_thr.ini",
                                 "[energy]\ndev_threshold = 0.5\n");
    CHECK_THROWS_AS(load_config(path.string(), base_cfg()), ConfigError);
  }
  SUBCASE("device outside area") {
    const auto path = write_temp("uavwet_dev.ini",
                                 "[scenario]\ndevice_x = 500, 75, 145\n");
    CHECK_THROWS_AS(load_config(path.string(), base_cfg()), ConfigError);
  }
  SUBCASE("malformed number") {
    const auto path = write_temp("uavwet_num.ini", "[channel]\na = 12.o8\n");
    CHECK_THROWS_AS(load_config(path.string(), base_cfg()), ConfigError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_config("/nonexistent/x.ini", base_cfg()), ConfigError);
  }
}

TEST_CASE("variant names round trip") {
  for (Variant v : {Variant::Magrl, Variant::MagrlHoe, Variant::MagrlG,
                    Variant::MagrlHoeG}) {
    CHECK(parse_variant(variant_name(v)) == v);
  }
  CHECK_THROWS_AS(parse_variant("bogus"), ConfigError);
}
