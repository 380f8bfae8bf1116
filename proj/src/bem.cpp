#include "sdm/bem.hpp"

#include <cmath>
#include <numbers>

#include "sdm/errors.hpp"
#include "sdm/turbine.hpp"

namespace sdm {

double u_infinity(double ustar, double kappa, double z0, double hub_height, double radius) {
    if (!(hub_height - radius > z0)) throw ConfigError("rotor must lie above the roughness length");
    if (radius == 0.0) return ustar / kappa * std::log(hub_height / z0);
    const auto antiderivative = [z0](double z) { return z * (std::log(z / z0) - 1.0); };
    const double integral = antiderivative(hub_height + radius) - antiderivative(hub_height - radius);
    return ustar / kappa * integral / (2.0 * radius);
}

double thrust_coefficient(double a) {
    if (!(a >= 0.0 && a < 1.0)) throw ModelError("axial induction must lie in [0, 1)");
    return 4.0 * a * (1.0 - a);
}

double induction_from_ct(double ct) {
    if (!(ct >= 0.0 && ct <= 1.0)) throw ModelError("thrust coefficient outside momentum theory range [0, 1]");
    return 0.5 * (1.0 - std::sqrt(1.0 - ct));
}

double particle_thrust(std::span<const Particle> particles, const TurbineConfig& turbine) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const Particle& p : particles) {
        if (classify_turbine_region(p.position, turbine) != TurbineRegion::Blades) continue;
        const BladeForce f = r_adm_force(p.position, p.velocity, turbine);
        sum += 2.0 * std::numbers::pi * disc_coordinates(p.position, turbine).radius * turbine.thickness * f.axial;
        ++count;
    }
    if (count == 0) throw EstimatorError("no particles in the blade region");
    return turbine.radius * sum / static_cast<double>(count);
}

BemAnnulus bem_annulus(double r, double chord, double pitch, const AirfoilPolar& polar, int blades,
                       double u_inf, double omega, const BemOptions& options) {
    if (!(u_inf > 0.0 && omega > 0.0 && r > 0.0)) throw ConfigError("BEM needs positive speed, rotation and radius");
    BemAnnulus s;
    s.r = r;
    const double solidity = blades * chord / (8.0 * std::numbers::pi * r);
    for (int it = 1; it <= options.max_iterations; ++it) {
        s.iterations = it;
        const double phi = std::atan2((1.0 - s.a) * u_inf, (1.0 + s.a_prime) * omega * r);
        const AeroCoefficients c = airfoil_coeffs(phi - pitch, polar);
        const double sp = std::sin(phi);
        const double cp = std::cos(phi);
        const double kx = solidity * (c.cl * cp + c.cd * sp) / (sp * sp);
        const double kt = solidity * (c.cl * sp - c.cd * cp) / (sp * cp);
        double a_target = kx / (1.0 + kx);
        const double ap_target = kt / (1.0 - kt);
        if (!std::isfinite(a_target) || a_target >= 1.0) a_target = std::nextafter(1.0, 0.0);
        const double a_new = s.a + options.relaxation * (a_target - s.a);
        const double ap_new = s.a_prime + options.relaxation * (ap_target - s.a_prime);
        const double change = std::abs(a_new - s.a) + std::abs(ap_new - s.a_prime);
        s.a = a_new;
        s.a_prime = ap_new;
        if (change < options.tolerance) {
            s.converged = true;
            break;
        }
    }
    const double ux = (1.0 - s.a) * u_inf;
    const double ut = (1.0 + s.a_prime) * omega * r;
    s.phi = std::atan2(ux, ut);
    s.alpha = s.phi - pitch;
    s.relative_speed = std::hypot(ux, ut);
    const AeroCoefficients c = airfoil_coeffs(s.alpha, polar);
    const double q = 0.5 * blades * chord * s.relative_speed * s.relative_speed;
    s.dfx_dr = -q * (c.cl * std::cos(s.phi) + c.cd * std::sin(s.phi));
    s.dftheta_dr = q * (c.cl * std::sin(s.phi) - c.cd * std::cos(s.phi));
    return s;
}

BemSolution bem_solve(const TurbineConfig& turbine, double u_inf, const BemOptions& options) {
    if (!(options.dr > 0.0)) throw ConfigError("BEM annulus width must be positive");
    BemSolution sol;
    const double r0 = turbine.nacelle_radius;
    const double r1 = turbine.radius;
    const int steps = std::max(1, static_cast<int>(std::ceil((r1 - r0) / options.dr - 1e-9)));
    for (int m = 0; m <= steps; ++m) {
        const double r = m == steps ? r1 : r0 + m * options.dr;
        const BladeGeometry::Section sec = turbine.blade.at(r);
        sol.annuli.push_back(
            bem_annulus(r, sec.chord, sec.pitch, turbine.polar, turbine.blades, u_inf, turbine.omega, options));
        sol.converged = sol.converged && sol.annuli.back().converged;
    }
    for (std::size_t m = 1; m < sol.annuli.size(); ++m) {
        const BemAnnulus& lo = sol.annuli[m - 1];
        const BemAnnulus& hi = sol.annuli[m];
        sol.thrust += 0.5 * (lo.dfx_dr + hi.dfx_dr) * (hi.r - lo.r);
    }
    return sol;
}

EquivalentDisc equivalent_disc(double thrust_over_rho, double u_inf, double area, double nacelle_area) {
    if (!(u_inf > 0.0)) throw ConfigError("free-stream speed must be positive");
    if (!(area > nacelle_area)) throw ConfigError("rotor area must exceed the nacelle area");
    EquivalentDisc d;
    d.ct = 2.0 * std::abs(thrust_over_rho) / ((area - nacelle_area) * u_inf * u_inf);
    d.a = induction_from_ct(d.ct);
    return d;
}

}  // namespace sdm
