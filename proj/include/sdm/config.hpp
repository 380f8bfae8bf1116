#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sdm/domain.hpp"

namespace sdm {

/// Complete description of one run, read from an INI-style scenario file.
///
/// Sections: [domain] [particles] [time] [model] [boundary] [numerics]
/// [output] and one [turbine*] section per turbine (e.g. [turbine],
/// [turbine2]). Relative file names are resolved against the scenario file.
struct ScenarioConfig {
    std::string name = "scenario";

    Vec3 origin;
    Vec3 size;
    std::array<int, 3> cells{1, 1, 1};

    std::size_t per_cell = 32;
    std::uint64_t seed = 1;

    double dt = 1.0;
    int steps = 0;
    int warmup_steps = 0;

    ModelConstants constants;

    double ustar = 0.0;             ///< log-law friction velocity of the inflow
    Vec3 top_velocity;              ///< U_G imposed at the top
    double tke_init_factor = 3.75;  ///< initial k = factor * u_*^2
    /// Height above which the initial k tapers linearly to zero at the top;
    /// a value <= 0 keeps the initial k uniform.
    double tke_init_taper = 0.0;

    bool correct_particles = true;
    bool keep_level_mean = true;

    std::vector<TurbineConfig> turbines;

    int threads = 1;
    int field_every = 0;   ///< 0 disables periodic field output
    int average_window = 20;
    double hub_speed = 0.0;        ///< U_hub for the turbulence intensity
    std::vector<double> stations;  ///< downstream positions in rotor diameters
    double histogram_bin = 0.25;

    Vec3 spacing() const;
    CartesianGrid make_grid() const;
    void validate() const;
};

ScenarioConfig parse_scenario(std::istream& in, const std::filesystem::path& base_dir = ".");
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Blade stations from CSV columns r_m, chord_m, twist_deg.
BladeGeometry read_blade_csv(const std::filesystem::path& path);

/// Polar from CSV columns alpha_deg, CL, CD.
AirfoilPolar read_polar_csv(const std::filesystem::path& path);

}  // namespace sdm
