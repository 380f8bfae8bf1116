#include "sdm/turbine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sdm/errors.hpp"
#include "sdm/estimators.hpp"
#include "sdm/parallel.hpp"

namespace sdm {

AeroCoefficients airfoil_coeffs(double alpha, const AirfoilPolar& polar) {
    if (polar.empty()) throw ConfigError("empty airfoil polar");
    AeroCoefficients out;
    const double lo = polar.alpha_min();
    const double hi = polar.alpha_max();
    if (alpha < lo || alpha > hi) {
        out.clamped = true;
        alpha = std::clamp(alpha, lo, hi);
    }
    if (!polar.is_tabulated()) {
        const AirfoilPolar::Analytic& p = polar.analytic_params();
        out.cl = std::clamp(p.lift_slope * (alpha - p.zero_lift_alpha), -p.cl_max, p.cl_max);
        const double d = alpha - p.alpha_cd;
        out.cd = p.cd0 + p.cd2 * d * d;
        return out;
    }
    const auto& a = polar.alpha();
    if (a.size() == 1) {
        out.cl = polar.cl().front();
        out.cd = polar.cd().front();
        return out;
    }
    const auto it = std::upper_bound(a.begin(), a.end(), alpha);
    const std::size_t hi_i = std::clamp<std::size_t>(static_cast<std::size_t>(it - a.begin()), 1, a.size() - 1);
    const std::size_t lo_i = hi_i - 1;
    const double t = (alpha - a[lo_i]) / (a[hi_i] - a[lo_i]);
    out.cl = polar.cl()[lo_i] + t * (polar.cl()[hi_i] - polar.cl()[lo_i]);
    out.cd = polar.cd()[lo_i] + t * (polar.cd()[hi_i] - polar.cd()[lo_i]);
    return out;
}

double nr_adm_force(double disc_speed, double induction, double thickness) {
    if (!(induction >= 0.0 && induction < 1.0)) throw ModelError("axial induction must lie in [0, 1)");
    return -(1.0 / thickness) * (2.0 * induction / (1.0 - induction)) * disc_speed * disc_speed;
}

BladeForce r_adm_force(const Vec3& position, const Vec3& velocity, const TurbineConfig& turbine) {
    const CylindricalFrame frame = local_frame(position, turbine);
    const double r = frame.radius;
    const double u = velocity.x;
    const double tangential = dot(velocity, frame.tangential) + turbine.omega * r;
    BladeForce f;
    f.relative_speed = std::hypot(u, tangential);
    f.phi = std::atan2(u, tangential);
    const BladeGeometry::Section section = turbine.blade.at(r);
    f.alpha = f.phi - section.pitch;
    const AeroCoefficients c = airfoil_coeffs(f.alpha, turbine.polar);
    f.clamped = section.clamped || c.clamped;
    const double k = turbine.blades / (4.0 * std::numbers::pi * r * turbine.thickness) * f.relative_speed *
                     f.relative_speed * section.chord;
    const double cp = std::cos(f.phi);
    const double sp = std::sin(f.phi);
    f.axial = -k * (c.cl * cp + c.cd * sp);
    f.tangential = k * (c.cl * sp - c.cd * cp);
    return f;
}

double nacelle_force(double axial_speed, double a_nacelle, double thickness) {
    if (!(a_nacelle >= 0.0 && a_nacelle < 1.0)) throw ModelError("nacelle induction must lie in [0, 1)");
    return -(1.0 / thickness) * (2.0 * a_nacelle / (1.0 - a_nacelle)) * axial_speed * axial_speed;
}

double select_disc_speed(const TurbineConfig& turbine, const Vec3& velocity, const Vec3& cell_mean,
                         double disc_average) {
    switch (turbine.disc_speed) {
        case DiscSpeedMode::ParticleSpeed: return std::abs(velocity.x);
        case DiscSpeedMode::CellMean: return std::abs(cell_mean.x);
        case DiscSpeedMode::DiscAverage: break;
    }
    return disc_average;
}

Vec3 turbine_force(const Particle& particle, const TurbineConfig& turbine, const Vec3& cell_mean,
                   double disc_average) {
    switch (classify_turbine_region(particle.position, turbine)) {
        case TurbineRegion::Outside: return {};
        case TurbineRegion::Nacelle:
            return {nacelle_force(particle.velocity.x, turbine.a_nacelle, turbine.thickness), 0.0, 0.0};
        case TurbineRegion::Blades: break;
    }
    if (turbine.model == TurbineModel::NonRotating) {
        const double ud = select_disc_speed(turbine, particle.velocity, cell_mean, disc_average);
        return {nr_adm_force(ud, turbine.induction, turbine.thickness), 0.0, 0.0};
    }
    const BladeForce f = r_adm_force(particle.position, particle.velocity, turbine);
    const CylindricalFrame frame = local_frame(particle.position, turbine);
    return Vec3{f.axial, 0.0, 0.0} + frame.tangential * f.tangential;
}

std::vector<Vec3> turbine_forces(std::span<const Particle> particles, const std::vector<TurbineConfig>& turbines,
                                 const CartesianGrid* grid, int threads) {
    std::vector<Vec3> out(particles.size());
    if (turbines.empty()) return out;
    std::vector<double> averages(turbines.size(), 0.0);
    for (std::size_t t = 0; t < turbines.size(); ++t) {
        const TurbineConfig& tb = turbines[t];
        if (tb.model == TurbineModel::NonRotating && tb.disc_speed == DiscSpeedMode::DiscAverage) {
            averages[t] = disc_mean_speed(particles, tb);
        }
        if (tb.model == TurbineModel::NonRotating && tb.disc_speed == DiscSpeedMode::CellMean && grid == nullptr) {
            throw ConfigError("cell-mean disc speed needs the grid");
        }
    }
    parallel_for(particles.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t q = begin; q < end; ++q) {
            const Particle& p = particles[q];
            for (std::size_t t = 0; t < turbines.size(); ++t) {
                if (classify_turbine_region(p.position, turbines[t]) == TurbineRegion::Outside) continue;
                Vec3 mean;
                if (grid != nullptr) mean = grid->cell(grid->linear(grid->cell_index(p.position))).mean;
                out[q] += turbine_force(p, turbines[t], mean, averages[t]);
            }
        }
    });
    return out;
}

void apply_turbine_forces(std::span<Particle> particles, const std::vector<TurbineConfig>& turbines, double dt,
                          const CartesianGrid* grid, int threads) {
    if (turbines.empty()) return;
    const std::vector<Vec3> f = turbine_forces(particles, turbines, grid, threads);
    for (std::size_t q = 0; q < particles.size(); ++q) particles[q].velocity += f[q] * dt;
}

}  // namespace sdm
