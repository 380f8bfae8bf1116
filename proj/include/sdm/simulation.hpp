#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sdm/boundaries.hpp"
#include "sdm/config.hpp"
#include "sdm/constraints.hpp"
#include "sdm/domain.hpp"
#include "sdm/estimators.hpp"

namespace sdm {

/// Phases of one time step, in execution order.
enum class Phase { Estimate, Closure, Predict, Boundary, Transport, Projection, Diagnostics };

const char* phase_name(Phase p);

struct StepStats {
    int step = 0;
    std::size_t top = 0;
    std::size_t inflow = 0;
    std::size_t floor = 0;
    std::size_t recycled = 0;
    std::size_t pushed = 0;
    std::size_t wall_fallbacks = 0;
    double divergence_before = 0.0;
    double divergence_after = 0.0;
};

/// Particle solver state: the bulk-synchronous step of the stochastic model.
class Simulation {
public:
    /// `inflow` feeds the recycled particles; turbines are taken from the
    /// config only when `with_turbines` is set.
    Simulation(const ScenarioConfig& config, InflowProfile inflow, bool with_turbines);
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    /// Uniform positions, log-law mean plus isotropic Gaussian velocities,
    /// grouped by cell.
    void initialize();
    /// Continues from an existing cloud (grouped by cell) after `steps_done` steps.
    void set_particles(std::vector<Particle> particles, int steps_done = 0);

    /// One step: estimate, closure, predict, boundary, transport,
    /// projection, diagnostics.
    void step();
    /// Runs `steps` steps; the last `average_window` of them are averaged.
    void run(int steps);

    /// Called at the start of every phase.
    void set_trace(std::function<void(int step, Phase)> trace) { trace_ = std::move(trace); }

    /// Steps whose final state enters the averaged fields; clears the average.
    void set_average_window(int first_step, int last_step);

    const ScenarioConfig& config() const { return config_; }
    const CartesianGrid& grid() const { return grid_; }
    const std::vector<Particle>& particles() const { return particles_; }
    int steps_done() const { return step_; }
    const StepStats& last_stats() const { return stats_; }
    const std::vector<TurbineConfig>& turbines() const { return turbines_; }

    /// CIC average over the window; partitioning estimates of the current
    /// state when the window is empty.
    std::vector<CellRecord> averaged_fields() const;
    std::size_t averaged_samples() const { return deposit_.samples(); }

    /// Hook called after every completed step.
    void set_observer(std::function<void(const Simulation&)> obs) { observer_ = std::move(obs); }

private:
    ScenarioConfig config_;
    InflowProfile inflow_;
    std::vector<TurbineConfig> turbines_;
    CartesianGrid grid_;
    std::vector<Particle> particles_;
    SpectralPoisson poisson_;
    CicDeposit deposit_;
    int step_ = 0;
    int window_first_ = 1;
    int window_last_ = 0;
    StepStats stats_;
    std::function<void(int, Phase)> trace_;
    std::function<void(const Simulation&)> observer_;

    void mark(Phase p) {
        if (trace_) trace_(step_, p);
    }
};

/// Profile source for the production run: window-averaged fields of a
/// warmup averaged over x and y.
EmpiricalProfile warmup_profile(const Simulation& warmup);

struct RunOutputs {
    EmpiricalProfile profile;
    std::vector<CellRecord> warmup_fields;
    std::vector<CellRecord> fields;
    std::vector<Particle> particles;
    CartesianGrid grid;
};

/// Warmup (no turbines, log-law inflow) followed by the production run
/// with turbines and the empirical inflow. Steps default to the config.
RunOutputs run_simulation(const ScenarioConfig& config, std::optional<int> warmup_steps = std::nullopt,
                          std::optional<int> steps = std::nullopt);

}  // namespace sdm
