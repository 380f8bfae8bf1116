#include "sdm/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "sdm/errors.hpp"
#include "sdm/parallel.hpp"
#include "sdm/rng.hpp"
#include "sdm/sde.hpp"
#include "sdm/turbine.hpp"

namespace sdm {

const char* phase_name(Phase p) {
    switch (p) {
        case Phase::Estimate: return "estimate";
        case Phase::Closure: return "closure";
        case Phase::Predict: return "predict";
        case Phase::Boundary: return "boundary";
        case Phase::Transport: return "transport";
        case Phase::Projection: return "projection";
        case Phase::Diagnostics: return "diagnostics";
    }
    return "?";
}

Simulation::Simulation(const ScenarioConfig& config, InflowProfile inflow, bool with_turbines)
    : config_(config),
      inflow_(std::move(inflow)),
      turbines_(with_turbines ? config.turbines : std::vector<TurbineConfig>{}),
      grid_(config.make_grid()),
      poisson_(grid_),
      deposit_(grid_) {
    config_.validate();
}

void Simulation::initialize() {
    const std::size_t n = grid_.num_cells() * config_.per_cell;
    particles_.assign(n, Particle{});
    const double k_surface = config_.tke_init_factor * config_.ustar * config_.ustar;
    const double top = grid_.box().hi.z;
    const double ground = grid_.origin().z;
    const double taper = config_.tke_init_taper;
    const Vec3& d = grid_.spacing();
    parallel_for(grid_.num_cells(), config_.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t c = begin; c < end; ++c) {
            const CellIndex ci = grid_.unravel(c);
            const Vec3 lo = grid_.origin() + Vec3{ci.i * d.x, ci.j * d.y, ci.k * d.z};
            for (std::size_t m = 0; m < config_.per_cell; ++m) {
                const std::size_t q = c * config_.per_cell + m;
                Particle& p = particles_[q];
                p.id = q;
                ParticleStream s(config_.seed, p.id, 0, StreamPurpose::Initialization);
                p.position = lo + Vec3{s.uniform() * d.x, s.uniform() * d.y, s.uniform() * d.z};
                double k = k_surface;
                if (taper > 0.0 && p.position.z - ground > taper) {
                    k *= std::max(0.0, (top - p.position.z) / (top - ground - taper));
                }
                const double sd = std::sqrt(2.0 * k / 3.0);
                p.velocity = Vec3{log_law_speed(p.position.z - ground, config_.ustar, config_.constants.kappa,
                                                config_.constants.z0),
                                  0.0, 0.0} +
                             Vec3{s.normal(), s.normal(), s.normal()} * sd;
            }
        }
    });
    step_ = 0;
}

void Simulation::set_particles(std::vector<Particle> particles, int steps_done) {
    if (particles.size() != grid_.num_cells() * config_.per_cell) {
        throw ConfigError("particle count does not match cells times particles per cell");
    }
    particles_ = std::move(particles);
    step_ = steps_done;
}

void Simulation::set_average_window(int first_step, int last_step) {
    window_first_ = first_step;
    window_last_ = last_step;
    deposit_ = CicDeposit(grid_);
}

void Simulation::run(int steps) {
    const int window = std::min(steps, config_.average_window);
    set_average_window(step_ + steps - window + 1, step_ + steps);
    for (int s = 0; s < steps; ++s) step();
}

void Simulation::step() {
    ++step_;
    const std::size_t per_cell = config_.per_cell;
    const int threads = config_.threads;
    StepStats stats;
    stats.step = step_;
    try {
        mark(Phase::Estimate);
        estimate_sorted_cell_statistics(particles_, grid_, per_cell, threads);

        mark(Phase::Closure);
        const std::vector<ClosureFields> closure = compute_closure(grid_, config_.constants, threads);
        const WallState wall(grid_, config_.constants);

        mark(Phase::Predict);
        const std::vector<Vec3> forces = turbine_forces(particles_, turbines_, &grid_, threads);
        std::vector<Prediction> predicted(particles_.size());
        parallel_for(particles_.size(), threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t q = begin; q < end; ++q) {
                const std::size_t c = q / per_cell;
                ParticleStream s(config_.seed, particles_[q].id, static_cast<std::uint64_t>(step_),
                                 StreamPurpose::Prediction);
                predicted[q] = predict_particle(particles_[q], closure[c], grid_.cell(c).mean,
                                                forces.empty() ? Vec3{} : forces[q], config_.dt, s);
            }
        });

        mark(Phase::Boundary);
        const BoundaryContext ctx{&grid_, &wall, &inflow_, config_.top_velocity, config_.dt};
        std::vector<BoundaryOutcome> outcomes(particles_.size());
        parallel_for(particles_.size(), threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t q = begin; q < end; ++q) {
                const std::size_t c = q / per_cell;
                ParticleStream s(config_.seed, particles_[q].id, static_cast<std::uint64_t>(step_),
                                 StreamPurpose::Boundary);
                outcomes[q] = apply_boundary(particles_[q], predicted[q], ctx, closure[c], grid_.cell(c).mean,
                                             forces.empty() ? Vec3{} : forces[q], s);
            }
        });
        for (std::size_t q = 0; q < particles_.size(); ++q) {
            const BoundaryOutcome& o = outcomes[q];
            particles_[q] = o.particle;
            switch (o.event) {
                case BoundaryEvent::Top: ++stats.top; break;
                case BoundaryEvent::Inflow: ++stats.inflow; break;
                case BoundaryEvent::Floor: ++stats.floor; break;
                case BoundaryEvent::Recycle: ++stats.recycled; break;
                case BoundaryEvent::None: break;
            }
            stats.pushed += o.pushed ? 1 : 0;
            stats.wall_fallbacks += o.wall_fallback ? 1 : 0;
        }

        mark(Phase::Transport);
        triangular_transport(particles_, grid_, per_cell, threads);

        mark(Phase::Projection);
        estimate_sorted_cell_statistics(particles_, grid_, per_cell, threads);
        ProjectionOptions opt;
        opt.correct_particles = config_.correct_particles;
        opt.keep_level_mean = config_.keep_level_mean;
        const ProjectionReport rep = project_divergence_free(grid_, particles_, per_cell, opt, &poisson_);
        stats.divergence_before = rep.divergence_before;
        stats.divergence_after = rep.divergence_after;

        mark(Phase::Diagnostics);
        if (step_ >= window_first_ && step_ <= window_last_) deposit_.add(particles_);
    } catch (const Error& e) {
        throw Error("step " + std::to_string(step_) + ": " + e.what());
    }
    stats_ = stats;
    if (observer_) observer_(*this);
}

std::vector<CellRecord> Simulation::averaged_fields() const {
    if (deposit_.samples() == 0) {
        CartesianGrid g = grid_;
        estimate_sorted_cell_statistics(particles_, g, config_.per_cell, config_.threads);
        return g.cells();
    }
    return deposit_.finalize();
}

EmpiricalProfile warmup_profile(const Simulation& warmup) {
    CartesianGrid g = warmup.grid();
    g.cells() = warmup.averaged_fields();
    return column_profiles(g);
}

RunOutputs run_simulation(const ScenarioConfig& config, std::optional<int> warmup_steps, std::optional<int> steps) {
    RunOutputs out;
    Simulation warm(config, InflowProfile::log_law(config.ustar, config.constants, config.origin.z), false);
    warm.initialize();
    warm.run(warmup_steps.value_or(config.warmup_steps));
    out.warmup_fields = warm.averaged_fields();
    out.profile = warmup_profile(warm);

    Simulation prod(config, InflowProfile::empirical(out.profile), true);
    prod.set_particles(warm.particles(), warm.steps_done());
    prod.run(steps.value_or(config.steps));
    out.fields = prod.averaged_fields();
    out.particles = prod.particles();
    out.grid = prod.grid();
    return out;
}

}  // namespace sdm
