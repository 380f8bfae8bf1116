#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "sdm/domain.hpp"
#include "sdm/estimators.hpp"
#include "sdm/rng.hpp"
#include "sdm/sde.hpp"

namespace sdm {

/// u_* = kappa |U_h| / log(z_c / z_0). Throws ConfigError if z_c <= z_0.
double friction_velocity(double u, double v, double z_c, const ModelConstants& constants);

/// Forced (<u'w'>, <v'w'>): magnitude u_*^2, opposing the horizontal wind.
/// Zero wind returns (0, 0).
std::pair<double, double> wall_covariances(double u, double v, double ustar);

struct WallColumn {
    double ustar = 0.0;
    double uw = 0.0;
    double vw = 0.0;
    double ww = 0.0;        ///< <w'^2> of the floor cell
    double z_mirror = 0.0;  ///< absolute height of the mirror plane
    double z_c = 0.0;       ///< first cell centre height above the floor
};

/// Wall-function state of every floor column, built once per step.
class WallState {
public:
    WallState() = default;
    WallState(const CartesianGrid& grid, const ModelConstants& constants);

    const WallColumn& at(int i, int j) const { return columns_[static_cast<std::size_t>(i * ny_ + j)]; }
    /// Column under a horizontal position, clamped to the grid.
    const WallColumn& below(const Vec3& position, const CartesianGrid& grid) const;
    double z_mirror() const { return z_mirror_; }

private:
    int nx_ = 0;
    int ny_ = 0;
    double z_mirror_ = 0.0;
    std::vector<WallColumn> columns_;
};

inline constexpr double kWallVarianceFloor = 1e-10;

/// Mirror reflection about z = z_mirror that keeps the forced covariances.
/// The velocity transform is applied when w < 0; below the variance floor it
/// degrades to a specular reflection and sets `*fallback`.
Particle mirror_reflect(const Particle& particle, double z_mirror, double uw, double vw, double ww,
                        bool* fallback = nullptr);

/// Velocity jump at a Dirichlet face: U+ = 2 U_ext - U-.
inline Vec3 velocity_jump(const Vec3& before, const Vec3& exterior) { return 2.0 * exterior - before; }

/// Pushes a position lying outside `box` back onto it and 1e-6 min_spacing
/// inward along the normal (face) or diagonal (edge, corner). No-op inside.
Vec3 corner_push(const Vec3& position, const Box& box, double min_spacing);

/// Gaussian velocity from N(mean, cov) with a PSD square-root factor.
Vec3 sample_velocity(const Vec3& mean, const SymTensor& cov, ParticleStream& stream);

/// Inflow statistics used for re-inserted particles.
class InflowProfile {
public:
    InflowProfile() = default;

    /// Warmup source: log-law mean above the floor height `ground`; the
    /// covariance comes from the exit cell.
    static InflowProfile log_law(double ustar, const ModelConstants& constants, double ground = 0.0);
    /// Production source: stored horizontally averaged profiles.
    static InflowProfile empirical(EmpiricalProfile profile);

    bool has_covariance() const { return !profile_.empty(); }
    /// Mean at absolute height z.
    Vec3 mean(double z) const;
    /// Covariance at absolute height z; only for empirical profiles.
    SymTensor covariance(double z) const;

    const EmpiricalProfile& profile() const { return profile_; }

private:
    double ustar_ = 0.0;
    double kappa_ = 0.4;
    double z0_ = 0.03;
    double ground_ = 0.0;
    EmpiricalProfile profile_;
};

/// Log-law mean speed (u_*/kappa) log(z/z_0), zero at or below z_0.
double log_law_speed(double z, double ustar, double kappa, double z0);

enum class Face { XMin, XMax, YMin, YMax, Floor, Top };

/// Re-inserts a particle that left through `face` (x-max or a y face) at
/// the opposite face, keeping its other coordinates, with velocity drawn
/// from N(mean, cov).
Particle recycle_inflow(const Particle& exiting, Face face, const Box& box, const Vec3& mean,
                        const SymTensor& cov, ParticleStream& stream);

enum class BoundaryEvent { None, Top, Inflow, Floor, Recycle };

struct BoundaryContext {
    const CartesianGrid* grid = nullptr;
    const WallState* wall = nullptr;
    const InflowProfile* inflow = nullptr;
    Vec3 top_velocity;  ///< U_G
    double dt = 0.0;
};

struct BoundaryOutcome {
    Particle particle;
    BoundaryEvent event = BoundaryEvent::None;
    bool pushed = false;
    bool wall_fallback = false;
};

/// Specular exit through a Dirichlet face at fraction `s` of the step:
/// exponential step to t_out, velocity jump, exponential step to t_n; the
/// position is X_out - (t_n - t_out) U_{n-1}.
Particle specular_boundary(const Particle& before, double s, const Vec3& exterior,
                           const ClosureFields& closure, const Vec3& cell_mean, const Vec3& force,
                           double dt, ParticleStream& stream);

/// All boundary treatments for one particle. `before` is the particle at
/// t_{n-1} (inside the box), `predicted` its unconstrained state at t_n.
/// At most one event is processed; a particle still outside afterwards is
/// corner-pushed.
BoundaryOutcome apply_boundary(const Particle& before, const Prediction& predicted, const BoundaryContext& ctx,
                               const ClosureFields& closure, const Vec3& cell_mean, const Vec3& force,
                               ParticleStream& stream);

}  // namespace sdm
