// Command-line front end: warmup, simulate, bem, histogram, profiles.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sdm/bem.hpp"
#include "sdm/config.hpp"
#include "sdm/diagnostics.hpp"
#include "sdm/errors.hpp"
#include "sdm/simulation.hpp"

namespace fs = std::filesystem;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> steps;
    std::optional<int> warmup_steps;
    std::optional<int> threads;
    std::string out = "out";
    bool verbose = false;
};

void add_common(CLI::App* app, Common& c, bool with_steps = true) {
    app->add_option("--config", c.config, "Scenario file")->required()->check(CLI::ExistingFile);
    app->add_option("--seed", c.seed, "Random seed (overrides the scenario)");
    if (with_steps) {
        app->add_option("--steps", c.steps, "Production steps (warmup for the warmup command)");
        app->add_option("--warmup-steps", c.warmup_steps, "Warmup steps before production");
    }
    app->add_option("--out", c.out, "Output directory");
    app->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
    app->add_flag("-v,--verbose", c.verbose, "Log every step");
}

sdm::ScenarioConfig load(const Common& c) {
    sdm::ScenarioConfig cfg = sdm::load_scenario(c.config);
    if (c.seed) cfg.seed = *c.seed;
    if (c.threads) cfg.threads = *c.threads;
    cfg.validate();
    return cfg;
}

fs::path out_dir(const Common& c) {
    fs::create_directories(c.out);
    return c.out;
}

// Step log on stderr and, with field_every > 0, instantaneous cell fields every that many steps.
void observe(sdm::Simulation& sim, const Common& c, const fs::path& dir, const std::string& label) {
    const int every = sim.config().field_every;
    if (!c.verbose && every <= 0) return;
    sim.set_observer([label, every, verbose = c.verbose, dir](const sdm::Simulation& s) {
        const sdm::StepStats& st = s.last_stats();
        if (verbose) {
            std::cerr << label << " step " << st.step << ": top " << st.top << ", floor " << st.floor
                      << ", recycled " << st.recycled << ", inflow " << st.inflow << ", pushed " << st.pushed
                      << ", div " << st.divergence_before << " -> " << st.divergence_after << '\n';
        }
        if (every > 0 && s.steps_done() % every == 0) {
            const std::vector<sdm::CellRecord> now(s.grid().cells().begin(), s.grid().cells().end());
            sdm::write_fields(s.grid(), now, dir / (label + "_step" + std::to_string(s.steps_done())));
        }
    });
}

struct Production {
    sdm::EmpiricalProfile profile;
    std::vector<sdm::CellRecord> fields;
    std::vector<sdm::Particle> particles;
    sdm::CartesianGrid grid;
};

Production simulate(const sdm::ScenarioConfig& cfg, const Common& c, const fs::path& dir) {
    const int warm_steps = c.warmup_steps.value_or(cfg.warmup_steps);
    const int prod_steps = c.steps.value_or(cfg.steps);
    sdm::Simulation warm(cfg, sdm::InflowProfile::log_law(cfg.ustar, cfg.constants, cfg.origin.z), false);
    warm.initialize();
    observe(warm, c, dir, "warmup");
    warm.run(warm_steps);
    Production p;
    p.profile = sdm::warmup_profile(warm);
    sdm::Simulation prod(cfg, sdm::InflowProfile::empirical(p.profile), true);
    prod.set_particles(warm.particles(), warm.steps_done());
    observe(prod, c, dir, "production");
    prod.run(prod_steps);
    p.fields = prod.averaged_fields();
    p.particles = prod.particles();
    p.grid = prod.grid();
    return p;
}

void write_profiles(const sdm::ScenarioConfig& cfg, const Production& p, const fs::path& dir) {
    if (cfg.turbines.empty() || cfg.stations.empty()) return;
    const sdm::TurbineConfig& t = cfg.turbines.front();
    const double hub_speed = cfg.hub_speed > 0.0 ? cfg.hub_speed : 1.0;
    const sdm::ProfileSet set =
        sdm::extract_profiles(p.grid, p.fields, t.hub, 2.0 * t.radius, cfg.stations, hub_speed);
    for (double s : set.skipped) std::cerr << "warning: station " << s << " D lies outside the domain\n";
    std::ofstream out(dir / "profiles.csv");
    sdm::write_profiles_csv(set, out);
}

void write_histograms(const sdm::ScenarioConfig& cfg, const Production& p, const fs::path& dir) {
    if (cfg.turbines.empty()) return;
    const sdm::TurbineConfig& t = cfg.turbines.front();
    const sdm::Box box = p.grid.box();
    std::ofstream summary(dir / "histogram_modes.csv");
    summary << "station_D,x,mode,samples\n" << std::setprecision(9);
    for (double s : cfg.stations) {
        const sdm::Vec3 probe{t.hub.x + s * 2.0 * t.radius, 0.5 * (box.lo.y + box.hi.y), t.hub.z};
        if (!box.contains_strict(probe)) continue;
        const sdm::VelocityHistogram h = sdm::velocity_histogram(p.particles, p.grid, probe, cfg.histogram_bin);
        std::ostringstream name;
        name << "histogram_" << s << "D.csv";
        std::ofstream out(dir / name.str());
        sdm::write_histogram_csv(h, out);
        summary << s << ',' << probe.x << ',' << h.mode() << ',' << h.samples << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic Lagrangian wind flow and turbine wake simulator"};
    app.require_subcommand(1);

    Common warm_opts, sim_opts, bem_opts, hist_opts, prof_opts;
    CLI::App* warm = app.add_subcommand("warmup", "Run the turbine-free warmup and store inflow profiles");
    add_common(warm, warm_opts);
    CLI::App* sim = app.add_subcommand("simulate", "Warmup followed by the production run with turbines");
    add_common(sim, sim_opts);
    CLI::App* bem = app.add_subcommand("bem", "BEM thrust and equivalent non-rotating disc");
    add_common(bem, bem_opts, false);
    std::optional<double> particle_thrust;
    bem->add_option("--particle-thrust", particle_thrust, "Particle estimate of F/rho to add as a second row");
    CLI::App* hist = app.add_subcommand("histogram", "Velocity histograms at the downstream stations");
    add_common(hist, hist_opts);
    CLI::App* prof = app.add_subcommand("profiles", "Vertical profiles at the downstream stations");
    add_common(prof, prof_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        const auto start = std::chrono::steady_clock::now();
        if (warm->parsed()) {
            const sdm::ScenarioConfig cfg = load(warm_opts);
            sdm::Simulation s(cfg, sdm::InflowProfile::log_law(cfg.ustar, cfg.constants, cfg.origin.z), false);
            s.initialize();
            const fs::path dir = out_dir(warm_opts);
            observe(s, warm_opts, dir, "warmup");
            s.run(warm_opts.steps.value_or(cfg.warmup_steps));
            sdm::warmup_profile(s).write_csv((dir / "inflow_profile.csv").string());
            const auto fields = s.averaged_fields();
            sdm::write_fields(s.grid(), fields, dir / "warmup_fields");
        } else if (sim->parsed()) {
            const sdm::ScenarioConfig cfg = load(sim_opts);
            const fs::path dir = out_dir(sim_opts);
            const Production p = simulate(cfg, sim_opts, dir);
            p.profile.write_csv((dir / "inflow_profile.csv").string());
            sdm::write_fields(p.grid, p.fields, dir / "fields");
            write_profiles(cfg, p, dir);
            write_histograms(cfg, p, dir);
        } else if (bem->parsed()) {
            const sdm::ScenarioConfig cfg = load(bem_opts);
            if (cfg.turbines.empty()) throw sdm::ConfigError("scenario has no turbine");
            const sdm::TurbineConfig& t = cfg.turbines.front();
            const double u_inf = sdm::u_infinity(cfg.ustar, cfg.constants.kappa, cfg.constants.z0,
                                                 t.hub.z - cfg.origin.z, t.radius);
            const sdm::BemSolution sol = sdm::bem_solve(t, u_inf);
            const fs::path dir = out_dir(bem_opts);
            std::ofstream out(dir / "thrust.csv");
            std::ostringstream table;
            table << std::setprecision(9) << "method,F_over_rho,a,C_T\n";
            const auto row = [&](const char* name, double thrust) {
                const sdm::EquivalentDisc d = sdm::equivalent_disc(thrust, u_inf, t.disc_area(), t.nacelle_area());
                table << name << ',' << std::abs(thrust) << ',' << d.a << ',' << d.ct << '\n';
            };
            row("BEM", sol.thrust);
            if (particle_thrust) row("particles", *particle_thrust);
            out << table.str();
            std::cout << "U_inf = " << std::setprecision(9) << u_inf << " m/s"
                      << (sol.converged ? "" : " (some annuli did not converge)") << '\n'
                      << table.str();
        } else if (hist->parsed()) {
            const sdm::ScenarioConfig cfg = load(hist_opts);
            const fs::path dir = out_dir(hist_opts);
            const Production p = simulate(cfg, hist_opts, dir);
            write_histograms(cfg, p, dir);
        } else if (prof->parsed()) {
            const sdm::ScenarioConfig cfg = load(prof_opts);
            const fs::path dir = out_dir(prof_opts);
            const Production p = simulate(cfg, prof_opts, dir);
            write_profiles(cfg, p, dir);
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cerr << "done in " << std::fixed << std::setprecision(1) << secs << " s\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
