#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "sdm/domain.hpp"

namespace testing {

inline sdm::TurbineConfig simple_turbine() {
    sdm::TurbineConfig t;
    t.hub = {100.0, 50.0, 50.0};
    t.radius = 20.0;
    t.nacelle_radius = 2.0;
    t.thickness = 4.0;
    t.omega = 2.0;
    t.blades = 3;
    t.a_nacelle = 0.4;
    t.induction = 0.2;
    t.blade.radius = {2.0, 20.0};
    t.blade.chord = {1.5, 1.5};
    t.blade.pitch = {0.0, 0.0};
    sdm::AirfoilPolar::Analytic p;
    p.lift_slope = 2.0 * M_PI;
    t.polar = sdm::AirfoilPolar::analytic(p);
    return t;
}

/// Uniform cloud in the grid box, `per_cell` particles in every cell, in
/// linear cell order.
inline std::vector<sdm::Particle> sorted_cloud(const sdm::CartesianGrid& g, std::size_t per_cell, unsigned seed,
                                               double sd = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> n01(0.0, sd);
    std::vector<sdm::Particle> out;
    const sdm::Vec3& d = g.spacing();
    for (std::size_t c = 0; c < g.num_cells(); ++c) {
        const sdm::CellIndex ci = g.unravel(c);
        for (std::size_t m = 0; m < per_cell; ++m) {
            sdm::Particle p;
            p.id = out.size();
            p.position = g.origin() + sdm::Vec3{(ci.i + u01(rng)) * d.x, (ci.j + u01(rng)) * d.y,
                                                (ci.k + u01(rng)) * d.z};
            p.velocity = {n01(rng), n01(rng), n01(rng)};
            out.push_back(p);
        }
    }
    return out;
}

/// Kolmogorov-Smirnov statistic of `xs` against a normal law.
inline double ks_normal(std::vector<double> xs, double mean, double sd) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = 0.5 * std::erfc(-(xs[i] - mean) / (sd * std::sqrt(2.0)));
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
inline double ks_critical_1pct(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

}  // namespace testing
