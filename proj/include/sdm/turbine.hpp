#pragma once

#include <span>
#include <vector>

#include "sdm/domain.hpp"

namespace sdm {

struct AeroCoefficients {
    double cl = 0.0;
    double cd = 0.0;
    bool clamped = false;  ///< alpha was outside the polar range
};

/// Lift and drag at angle of attack `alpha` (rad); out-of-range angles are
/// clamped to the ends. Throws ConfigError for an empty polar.
AeroCoefficients airfoil_coeffs(double alpha, const AirfoilPolar& polar);

/// Non-rotating disc: f_x = -(1/dx)(2a/(1-a)) U_D^2. Throws ModelError
/// unless 0 <= a < 1.
double nr_adm_force(double disc_speed, double induction, double thickness);

struct BladeForce {
    double axial = 0.0;       ///< f_x, m/s^2
    double tangential = 0.0;  ///< f_theta, m/s^2
    double phi = 0.0;         ///< flow angle, rad
    double alpha = 0.0;       ///< angle of attack, rad
    double relative_speed = 0.0;
    bool clamped = false;     ///< blade station or polar range clamped
};

/// Rotating disc blade-element force from the particle's own velocity.
BladeForce r_adm_force(const Vec3& position, const Vec3& velocity, const TurbineConfig& turbine);

/// Permeable nacelle: f_x = -(1/dx)(2 a_n/(1-a_n)) u^2.
double nacelle_force(double axial_speed, double a_nacelle, double thickness);

/// Disc speed U_D of a non-rotating turbine for the configured mode, given
/// the particle, its cell mean and the step's disc average.
double select_disc_speed(const TurbineConfig& turbine, const Vec3& velocity, const Vec3& cell_mean,
                         double disc_average);

/// Total force per unit mass on one particle from one turbine, Cartesian.
Vec3 turbine_force(const Particle& particle, const TurbineConfig& turbine, const Vec3& cell_mean,
                   double disc_average);

/// Per-particle force from all turbines. `grid` supplies cell means (the
/// CellMean disc speed mode); disc averages are reduced first.
std::vector<Vec3> turbine_forces(std::span<const Particle> particles, const std::vector<TurbineConfig>& turbines,
                                 const CartesianGrid* grid, int threads = 1);

/// Explicit increment U += f dt; identity without turbines.
void apply_turbine_forces(std::span<Particle> particles, const std::vector<TurbineConfig>& turbines, double dt,
                          const CartesianGrid* grid = nullptr, int threads = 1);

}  // namespace sdm
