#pragma once

#include <vector>

#include "sdm/domain.hpp"
#include "sdm/rng.hpp"

namespace sdm {

/// Piecewise-linear mixing length: kappa z below z_lm, kappa z_lm above.
double mixing_length(double z, const ModelConstants& constants);

struct Dissipation {
    double epsilon = 0.0;  ///< C_eps k^{3/2} / l_m, m^2/s^3
    double rate = 0.0;     ///< epsilon / k evaluated as C_eps sqrt(k) / l_m, 1/s
};

/// Dissipation from tke and mixing length. The ratio epsilon/k is never
/// formed as a quotient, so k = 0 is regular.
Dissipation dissipation(double k, double mixing_len, const ModelConstants& constants);

struct Production {
    Tensor3 tensor{};    ///< P_ij, m^2/s^3
    double scalar = 0.0; ///< P = trace / 2
};

/// P_ij = -sum_k (<u_i u_k> d<u_j>/dx_k + <u_j u_k> d<u_i>/dx_k).
/// `gradient[i][k]` holds d<u_i>/dx_k.
Production production(const SymTensor& moments, const Tensor3& gradient);

/// Isotropization-of-production C_0, clamped below at zero; 0 when epsilon = 0.
double c0_coefficient(double production, double epsilon, const ModelConstants& constants);

/// G_ij = -(C_R/2)(eps/k) delta_ij + C_2 d<u_i>/dx_j, entering the velocity
/// equation as +G (U - <U>).
Tensor3 drift_tensor(double k, double mixing_len, const Tensor3& gradient, const ModelConstants& constants);

/// One exact step of dZ = alpha (Z - m) dt + beta dt + sigma dW with frozen
/// coefficients; `eta` is a standard normal draw. alpha must be <= 0.
double ou_step(double z, double alpha, double beta, double m, double sigma, double dt, double eta);

struct GaussianMoments {
    double mean = 0.0;
    double variance = 0.0;
};

/// Law of the step above: Z' ~ N(mean, variance).
GaussianMoments ou_step_moments(double z, double alpha, double beta, double m, double sigma, double dt);

/// Per-cell coefficients of the particle velocity equation, frozen over a step.
struct ClosureFields {
    Tensor3 drift{};          ///< full G tensor, 1/s
    double relaxation = 0.0;  ///< isotropic Rotta part of G (<= 0), 1/s
    double diffusion = 0.0;   ///< C = sqrt(C_0 eps)
    double epsilon = 0.0;
    double c0 = 0.0;
    double production = 0.0;
};

/// d<u_i>/dx_k at a cell: centred differences inside, one-sided at faces.
Tensor3 mean_velocity_gradient(const CartesianGrid& grid, int i, int j, int k);

/// Closure fields for every cell; also stores epsilon in the grid records.
std::vector<ClosureFields> compute_closure(CartesianGrid& grid, const ModelConstants& constants,
                                           int threads = 1);

/// Advances a velocity over `dt` with the partial exponential scheme: the
/// Rotta rate is the exact linear part, the C_2 gradient coupling and the
/// body force `force` form the frozen affine part.
Vec3 advance_velocity(const Vec3& velocity, const ClosureFields& closure, const Vec3& cell_mean,
                      const Vec3& force, double dt, ParticleStream& stream);

struct Prediction {
    Vec3 position;
    Vec3 velocity;
};

/// Prediction step: ballistic position update and exponential velocity update.
Prediction predict_particle(const Particle& particle, const ClosureFields& closure, const Vec3& cell_mean,
                            const Vec3& force, double dt, ParticleStream& stream);

}  // namespace sdm
