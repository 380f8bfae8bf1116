#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sdm/config.hpp"
#include "sdm/errors.hpp"

using namespace sdm;

namespace {

const char* kMinimal = R"(
[scenario]
name = tiny

[domain]
origin = 0 0 0
size = 40 20 10
cells = 4 2 5

[particles]
per_cell = 8
seed = 99

[time]
dt = 0.5
steps = 12

[model]
z0 = 0.01
z_lm = 50

[boundary]
ustar = 0.3
top_velocity = 6 0 0

[turbine]
model = non-rotating
hub = 20 10 5
radius = 4
nacelle_radius = 0.5
induction = 0.25
a_nacelle = 0.3
disc_speed = cell-mean
)";

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "sdm_config_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("minimal scenario") {
    std::istringstream in(kMinimal);
    const ScenarioConfig c = parse_scenario(in);
    CHECK(c.name == "tiny");
    CHECK(c.cells == std::array<int, 3>{4, 2, 5});
    CHECK(c.spacing().x == doctest::Approx(10.0));
    CHECK(c.spacing().z == doctest::Approx(2.0));
    CHECK(c.per_cell == 8);
    CHECK(c.seed == 99);
    CHECK(c.dt == 0.5);
    CHECK(c.steps == 12);
    CHECK(c.warmup_steps == 12);
    CHECK(c.constants.z0 == 0.01);
    CHECK(c.constants.rotta == 1.8);
    CHECK(c.top_velocity.x == 6.0);
    REQUIRE(c.turbines.size() == 1);
    const TurbineConfig& t = c.turbines[0];
    CHECK(t.model == TurbineModel::NonRotating);
    CHECK(t.disc_speed == DiscSpeedMode::CellMean);
    CHECK(t.thickness == doctest::Approx(10.0));
    CHECK(t.induction == 0.25);
    CHECK(c.make_grid().num_cells() == 40);
}

TEST_CASE("invalid scenarios are rejected") {
    const auto bad = [](const std::string& from, const std::string& to) {
        std::string text = kMinimal;
        const auto at = text.find(from);
        REQUIRE(at != std::string::npos);
        text.replace(at, from.size(), to);
        std::istringstream in(text);
        return parse_scenario(in);
    };
    CHECK_THROWS_AS(bad("per_cell = 8", "per_cell = 1"), ConfigError);
    CHECK_THROWS_AS(bad("dt = 0.5", "dt = 0"), ConfigError);
    CHECK_THROWS_AS(bad("cells = 4 2 5", "cells = 4 2 5.5"), ConfigError);
    CHECK_THROWS_AS(bad("induction = 0.25", "induction = 1.0"), ConfigError);
    CHECK_THROWS_AS(bad("hub = 20 10 5", "hub = 90 10 5"), ConfigError);
    CHECK_THROWS_AS(bad("[domain]\norigin = 0 0 0", "[domain]\nspacing = 16 10 2\norigin = 0 0 0"), ConfigError);
    CHECK_THROWS_AS(bad("z0 = 0.01", "z0 = 2"), ConfigError);
    CHECK_THROWS_AS(bad("ustar = 0.3", "ustar = nope"), ConfigError);
}

TEST_CASE("blade and polar CSV files") {
    const auto blade = scratch("blade.csv");
    {
        std::ofstream o(blade);
        o << "# radial stations\nr_m,chord_m,twist_deg\n1,2.0,10\n3,1.0,0\n";
    }
    const BladeGeometry b = read_blade_csv(blade);
    CHECK(b.radius == std::vector<double>{1.0, 3.0});
    CHECK(b.pitch[0] == doctest::Approx(10.0 * M_PI / 180.0));
    const auto polar = scratch("polar.csv");
    {
        std::ofstream o(polar);
        o << "-5,-0.4,1e-2\n0,0.1,8E-3\n5,0.6,1.2e-2\n";
    }
    const AirfoilPolar p = read_polar_csv(polar);
    REQUIRE(p.alpha().size() == 3);
    CHECK(p.cd()[1] == doctest::Approx(0.008));
    CHECK(p.alpha()[2] == doctest::Approx(5.0 * M_PI / 180.0));
    CHECK_THROWS_AS(read_polar_csv(scratch("missing.csv")), IoError);
}

TEST_CASE("bundled scenarios load") {
    const std::string dir = std::string(SDM_SOURCE_DIR) + "/scenarios/";
    for (const char* name : {"atmospheric.ini", "atmospheric_nr.ini", "atmospheric_desk.ini",
                             "atmospheric_desk_nr.ini", "tunnel.ini"}) {
        CAPTURE(name);
        const ScenarioConfig c = load_scenario(dir + name);
        CHECK(c.turbines.size() == 1);
        for (int a = 0; a < 3; ++a) CHECK(c.spacing()[a] * c.cells[static_cast<std::size_t>(a)] == doctest::Approx(c.size[a]));
    }
    const ScenarioConfig atm = load_scenario(dir + "atmospheric.ini");
    CHECK(atm.size.x == 1488.0);
    CHECK(atm.spacing().x == doctest::Approx(16.0));
    CHECK(atm.spacing().z == doctest::Approx(3.75));
    CHECK(atm.ustar == 0.42);
    CHECK(atm.top_velocity.x == 10.63);
    CHECK(atm.constants.c_eps == 0.08);
    CHECK(atm.turbines[0].radius == 20.5);
    CHECK(atm.turbines[0].hub.z == 50.0);
    const ScenarioConfig tunnel = load_scenario(dir + "tunnel.ini");
    CHECK(tunnel.constants.c_eps == 0.068);
    CHECK(tunnel.hub_speed == 2.2);
}
