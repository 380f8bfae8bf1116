#include "sdm/boundaries.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sdm/errors.hpp"

namespace sdm {

double friction_velocity(double u, double v, double z_c, const ModelConstants& constants) {
    if (!(z_c > constants.z0)) throw ConfigError("first cell centre must lie above the roughness length");
    return constants.kappa * std::hypot(u, v) / std::log(z_c / constants.z0);
}

std::pair<double, double> wall_covariances(double u, double v, double ustar) {
    const double speed = std::hypot(u, v);
    if (speed == 0.0) return {0.0, 0.0};
    const double s2 = ustar * ustar;
    return {-(u / speed) * s2, -(v / speed) * s2};
}

WallState::WallState(const CartesianGrid& grid, const ModelConstants& constants)
    : nx_(grid.nx()), ny_(grid.ny()), columns_(static_cast<std::size_t>(grid.nx() * grid.ny())) {
    const double z_c = 0.5 * grid.spacing().z;
    z_mirror_ = grid.origin().z + 0.5 * z_c;
    for (int i = 0; i < nx_; ++i) {
        for (int j = 0; j < ny_; ++j) {
            const CellRecord& floor = grid.cell(i, j, 0);
            WallColumn& col = columns_[static_cast<std::size_t>(i * ny_ + j)];
            col.z_c = z_c;
            col.z_mirror = z_mirror_;
            col.ustar = friction_velocity(floor.mean.x, floor.mean.y, z_c, constants);
            std::tie(col.uw, col.vw) = wall_covariances(floor.mean.x, floor.mean.y, col.ustar);
            col.ww = floor.moments.zz;
        }
    }
}

const WallColumn& WallState::below(const Vec3& position, const CartesianGrid& grid) const {
    const auto idx = [&](int axis) {
        const double rel = (position[axis] - grid.origin()[axis]) / grid.spacing()[axis];
        return std::clamp(static_cast<int>(std::floor(rel)), 0, grid.count(axis) - 1);
    };
    return at(idx(0), idx(1));
}

Particle mirror_reflect(const Particle& particle, double z_mirror, double uw, double vw, double ww,
                        bool* fallback) {
    Particle out = particle;
    out.position.z = 2.0 * z_mirror - particle.position.z;
    const double w = particle.velocity.z;
    bool specular = false;
    if (w < 0.0) {
        if (ww < kWallVarianceFloor) {
            specular = true;
        } else {
            out.velocity.x = particle.velocity.x - 2.0 * (uw / ww) * w;
            out.velocity.y = particle.velocity.y - 2.0 * (vw / ww) * w;
        }
        out.velocity.z = -w;
    }
    if (fallback) *fallback = specular;
    return out;
}

Vec3 corner_push(const Vec3& position, const Box& box, double min_spacing) {
    Vec3 out = position;
    int violated = 0;
    Vec3 dir;
    for (int a = 0; a < 3; ++a) {
        if (position[a] <= box.lo[a]) {
            out[a] = box.lo[a];
            dir[a] = 1.0;
            ++violated;
        } else if (position[a] >= box.hi[a]) {
            out[a] = box.hi[a];
            dir[a] = -1.0;
            ++violated;
        }
    }
    if (violated == 0) return position;
    const double step = 1e-6 * min_spacing / std::sqrt(static_cast<double>(violated));
    return out + dir * step;
}

Vec3 sample_velocity(const Vec3& mean, const SymTensor& cov, ParticleStream& stream) {
    const Tensor3 l = psd_factor(cov);
    const Vec3 eta{stream.normal(), stream.normal(), stream.normal()};
    Vec3 out = mean;
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) out[static_cast<int>(i)] += l[i][j] * eta[static_cast<int>(j)];
    }
    return out;
}

double log_law_speed(double z, double ustar, double kappa, double z0) {
    if (!(z > z0)) return 0.0;
    return ustar / kappa * std::log(z / z0);
}

InflowProfile InflowProfile::log_law(double ustar, const ModelConstants& constants, double ground) {
    InflowProfile p;
    p.ground_ = ground;
    p.ustar_ = ustar;
    p.kappa_ = constants.kappa;
    p.z0_ = constants.z0;
    return p;
}

InflowProfile InflowProfile::empirical(EmpiricalProfile profile) {
    if (profile.empty()) throw ConfigError("empirical inflow profile has no levels");
    InflowProfile p;
    p.profile_ = std::move(profile);
    return p;
}

Vec3 InflowProfile::mean(double z) const {
    if (!profile_.empty()) return profile_.at(z).mean;
    return {log_law_speed(z - ground_, ustar_, kappa_, z0_), 0.0, 0.0};
}

SymTensor InflowProfile::covariance(double z) const {
    if (profile_.empty()) throw ConfigError("log-law inflow carries no covariance");
    return profile_.at(z).moments;
}

Particle recycle_inflow(const Particle& exiting, Face face, const Box& box, const Vec3& mean,
                        const SymTensor& cov, ParticleStream& stream) {
    Particle out = exiting;
    const Vec3 size = box.size();
    switch (face) {
        case Face::XMax: out.position.x -= size.x; break;
        case Face::YMin: out.position.y += size.y; break;
        case Face::YMax: out.position.y -= size.y; break;
        default: throw DomainError("recycling applies to the outflow and lateral faces only");
    }
    out.velocity = sample_velocity(mean, cov, stream);
    return out;
}

Particle specular_boundary(const Particle& before, double s, const Vec3& exterior,
                           const ClosureFields& closure, const Vec3& cell_mean, const Vec3& force,
                           double dt, ParticleStream& stream) {
    s = std::clamp(s, 0.0, 1.0);
    const double t1 = s * dt;
    const double t2 = dt - t1;
    Vec3 u = before.velocity;
    if (t1 > 0.0) u = advance_velocity(u, closure, cell_mean, force, t1, stream);
    u = velocity_jump(u, exterior);
    if (t2 > 0.0) u = advance_velocity(u, closure, cell_mean, force, t2, stream);
    const Vec3 x_out = before.position + before.velocity * t1;
    Particle out = before;
    out.position = x_out - before.velocity * t2;
    out.velocity = u;
    return out;
}

namespace {

struct Exit {
    Face face = Face::Top;
    double s = std::numeric_limits<double>::infinity();
};

void consider(Exit& best, Face face, double from, double to, double plane) {
    const double d = to - from;
    const double s = d == 0.0 ? 0.0 : std::clamp((plane - from) / d, 0.0, 1.0);
    if (s < best.s) best = {face, s};
}

}  // namespace

BoundaryOutcome apply_boundary(const Particle& before, const Prediction& predicted, const BoundaryContext& ctx,
                               const ClosureFields& closure, const Vec3& cell_mean, const Vec3& force,
                               ParticleStream& stream) {
    const CartesianGrid& grid = *ctx.grid;
    const Box box = grid.box();
    const Vec3& a = before.position;
    const Vec3& b = predicted.position;
    const double z_mirror = ctx.wall->z_mirror();

    BoundaryOutcome res;
    res.particle = before;
    res.particle.position = b;
    res.particle.velocity = predicted.velocity;

    Exit exit;
    if (b.x < box.lo.x) consider(exit, Face::XMin, a.x, b.x, box.lo.x);
    if (b.x >= box.hi.x) consider(exit, Face::XMax, a.x, b.x, box.hi.x);
    if (b.y <= box.lo.y) consider(exit, Face::YMin, a.y, b.y, box.lo.y);
    if (b.y >= box.hi.y) consider(exit, Face::YMax, a.y, b.y, box.hi.y);
    if (b.z >= box.hi.z) consider(exit, Face::Top, a.z, b.z, box.hi.z);
    // The wall sits at the mirror plane; particles already below it (the
    // transport step fills the whole floor cell) reflect as soon as they
    // move further down.
    if (b.z < z_mirror && b.z < a.z) consider(exit, Face::Floor, a.z, b.z, std::min(a.z, z_mirror));

    if (exit.s != std::numeric_limits<double>::infinity()) {
        switch (exit.face) {
            case Face::Top:
                res.event = BoundaryEvent::Top;
                res.particle = specular_boundary(before, exit.s, ctx.top_velocity, closure, cell_mean, force,
                                                 ctx.dt, stream);
                break;
            case Face::XMin: {
                res.event = BoundaryEvent::Inflow;
                const Vec3 ext = ctx.inflow->mean(a.z + exit.s * (b.z - a.z));
                res.particle = specular_boundary(before, exit.s, ext, closure, cell_mean, force, ctx.dt, stream);
                break;
            }
            case Face::Floor: {
                res.event = BoundaryEvent::Floor;
                const WallColumn& col = ctx.wall->below(b, grid);
                bool fallback = false;
                res.particle = mirror_reflect(res.particle, z_mirror, col.uw, col.vw, col.ww, &fallback);
                res.wall_fallback = fallback;
                break;
            }
            default: {
                res.event = BoundaryEvent::Recycle;
                const double height = b.z;
                const Vec3 mean = ctx.inflow->mean(height);
                const SymTensor cov = ctx.inflow->has_covariance() ? ctx.inflow->covariance(height)
                                                                   : grid.cell(grid.linear(grid.cell_index(a))).moments;
                res.particle = recycle_inflow(res.particle, exit.face, box, mean, cov, stream);
                break;
            }
        }
    }
    if (!box.contains_strict(res.particle.position)) {
        res.particle.position = corner_push(res.particle.position, box, grid.min_spacing());
        res.pushed = true;
    }
    return res;
}

}  // namespace sdm
