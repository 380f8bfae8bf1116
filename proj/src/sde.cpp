#include "sdm/sde.hpp"

#include <algorithm>
#include <cmath>

#include "sdm/errors.hpp"
#include "sdm/parallel.hpp"

namespace sdm {

double mixing_length(double z, const ModelConstants& constants) {
    return constants.kappa * std::min(std::max(z, 0.0), constants.z_lm);
}

Dissipation dissipation(double k, double mixing_len, const ModelConstants& constants) {
    if (!(mixing_len > 0.0)) throw ConfigError("mixing length must be positive");
    const double kk = std::max(k, 0.0);
    Dissipation d;
    d.rate = constants.c_eps * std::sqrt(kk) / mixing_len;
    d.epsilon = d.rate * kk;
    return d;
}

Production production(const SymTensor& moments, const Tensor3& gradient) {
    Production out;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) {
                s += moments(i, k) * gradient[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] +
                     moments(j, k) * gradient[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
            }
            out.tensor[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = -s;
        }
    }
    out.scalar = 0.5 * (out.tensor[0][0] + out.tensor[1][1] + out.tensor[2][2]);
    return out;
}

double c0_coefficient(double production, double epsilon, const ModelConstants& constants) {
    if (!(epsilon > 0.0)) return 0.0;
    const double c0 = (2.0 / 3.0) * (constants.rotta + constants.c2 * production / epsilon - 1.0);
    return std::max(c0, 0.0);
}

Tensor3 drift_tensor(double k, double mixing_len, const Tensor3& gradient, const ModelConstants& constants) {
    const double rotta = -0.5 * constants.rotta * dissipation(k, mixing_len, constants).rate;
    Tensor3 g{};
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) g[i][j] = constants.c2 * gradient[i][j] + (i == j ? rotta : 0.0);
    }
    return g;
}

double ou_step(double z, double alpha, double beta, double m, double sigma, double dt, double eta) {
    const GaussianMoments g = ou_step_moments(z, alpha, beta, m, sigma, dt);
    return g.mean + std::sqrt(g.variance) * eta;
}

GaussianMoments ou_step_moments(double z, double alpha, double beta, double m, double sigma, double dt) {
    if (alpha > 0.0) throw StabilityError("exponential scheme needs a non-positive relaxation rate");
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    if (alpha == 0.0) return {z + beta * dt, sigma * sigma * dt};
    // expm1 keeps the small |alpha dt| regime exact instead of cancelling.
    const double decay = std::expm1(alpha * dt);
    GaussianMoments g;
    g.mean = z + (z - m) * decay + (beta / alpha) * decay;
    g.variance = sigma * sigma * std::expm1(2.0 * alpha * dt) / (2.0 * alpha);
    return g;
}

Tensor3 mean_velocity_gradient(const CartesianGrid& grid, int i, int j, int k) {
    Tensor3 grad{};
    const int idx[3] = {i, j, k};
    for (int axis = 0; axis < 3; ++axis) {
        const int n = grid.count(axis);
        if (n < 2) continue;
        int lo[3] = {i, j, k};
        int hi[3] = {i, j, k};
        double span = grid.spacing()[axis];
        if (idx[axis] == 0) {
            hi[axis] = 1;
        } else if (idx[axis] == n - 1) {
            lo[axis] = n - 2;
        } else {
            lo[axis] -= 1;
            hi[axis] += 1;
            span *= 2.0;
        }
        const Vec3& a = grid.cell(lo[0], lo[1], lo[2]).mean;
        const Vec3& b = grid.cell(hi[0], hi[1], hi[2]).mean;
        for (int comp = 0; comp < 3; ++comp) {
            grad[static_cast<std::size_t>(comp)][static_cast<std::size_t>(axis)] = (b[comp] - a[comp]) / span;
        }
    }
    return grad;
}

std::vector<ClosureFields> compute_closure(CartesianGrid& grid, const ModelConstants& constants, int threads) {
    std::vector<ClosureFields> out(grid.num_cells());
    parallel_for(grid.num_cells(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t c = begin; c < end; ++c) {
            const CellIndex ci = grid.unravel(c);
            CellRecord& rec = grid.cell(c);
            const double lm = mixing_length(grid.cell_center(ci).z, constants);
            const Tensor3 grad = mean_velocity_gradient(grid, ci.i, ci.j, ci.k);
            const Dissipation d = dissipation(rec.tke, lm, constants);
            ClosureFields& f = out[c];
            f.drift = drift_tensor(rec.tke, lm, grad, constants);
            f.relaxation = -0.5 * constants.rotta * d.rate;
            f.epsilon = d.epsilon;
            f.production = production(rec.moments, grad).scalar;
            f.c0 = c0_coefficient(f.production, f.epsilon, constants);
            f.diffusion = std::sqrt(f.c0 * f.epsilon);
            rec.dissipation = d.epsilon;
        }
    });
    return out;
}

Vec3 advance_velocity(const Vec3& velocity, const ClosureFields& closure, const Vec3& cell_mean,
                      const Vec3& force, double dt, ParticleStream& stream) {
    const Vec3 fluct = velocity - cell_mean;
    Vec3 next;
    for (int i = 0; i < 3; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        double beta = force[i];
        for (int j = 0; j < 3; ++j) {
            const auto uj = static_cast<std::size_t>(j);
            const double coupling = closure.drift[ui][uj] - (i == j ? closure.relaxation : 0.0);
            beta += coupling * fluct[j];
        }
        next[i] = ou_step(velocity[i], closure.relaxation, beta, cell_mean[i], closure.diffusion, dt,
                          stream.normal());
    }
    return next;
}

Prediction predict_particle(const Particle& particle, const ClosureFields& closure, const Vec3& cell_mean,
                            const Vec3& force, double dt, ParticleStream& stream) {
    return {particle.position + particle.velocity * dt,
            advance_velocity(particle.velocity, closure, cell_mean, force, dt, stream)};
}

}  // namespace sdm
