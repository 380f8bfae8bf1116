#pragma once

#include <span>
#include <vector>

#include "sdm/domain.hpp"

namespace sdm {

/// Rotor-averaged log-law speed (1/2R) int_{h-R}^{h+R} (u_*/kappa) log(z/z_0) dz.
/// Throws ConfigError if h - R <= z_0.
double u_infinity(double ustar, double kappa, double z0, double hub_height, double radius);

/// C_T = 4a(1-a) for 0 <= a < 1.
double thrust_coefficient(double a);

/// Root a = (1 - sqrt(1 - C_T)) / 2; throws ModelError for C_T outside [0, 1].
double induction_from_ct(double ct);

/// Rotor thrust over density from particles in the blade region:
/// F/rho = R * mean over the region of 2 pi r dx f_x. Negative for a thrust
/// opposing the flow. Throws EstimatorError for an empty region.
double particle_thrust(std::span<const Particle> particles, const TurbineConfig& turbine);

struct BemOptions {
    double dr = 1.0;
    double relaxation = 0.5;
    double tolerance = 1e-6;
    int max_iterations = 500;
};

struct BemAnnulus {
    double r = 0.0;
    double a = 0.0;
    double a_prime = 0.0;
    double phi = 0.0;
    double alpha = 0.0;
    double relative_speed = 0.0;
    double dfx_dr = 0.0;      ///< axial force per unit span over density, m^3/s^2
    double dftheta_dr = 0.0;  ///< tangential force per unit span over density
    int iterations = 0;
    bool converged = false;
};

struct BemSolution {
    std::vector<BemAnnulus> annuli;
    double thrust = 0.0;  ///< F_x/rho over all blades (trapezoid rule), m^4/s^2
    bool converged = true;
};

/// Fixed-point iteration for (a, a') at one radius.
BemAnnulus bem_annulus(double r, double chord, double pitch, const AirfoilPolar& polar, int blades,
                       double u_inf, double omega, const BemOptions& options = {});

/// BEM over stations r_nacelle, r_nacelle + dr, ..., R using the turbine's
/// blade, polar and rotation rate.
BemSolution bem_solve(const TurbineConfig& turbine, double u_inf, const BemOptions& options = {});

struct EquivalentDisc {
    double a = 0.0;
    double ct = 0.0;
};

/// Non-rotating disc with the same thrust: C_T = 2 |F/rho| / ((A - A_n) U_inf^2).
EquivalentDisc equivalent_disc(double thrust_over_rho, double u_inf, double area, double nacelle_area);

}  // namespace sdm
