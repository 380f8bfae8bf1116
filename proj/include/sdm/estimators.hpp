#pragma once

#include <array>
#include <cmath>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sdm/domain.hpp"
#include "sdm/errors.hpp"

namespace sdm {

/// Arithmetic mean of f(U) over the particles of one cell (order-0 estimator).
template <class F>
double partition_mean(std::span<const Particle> cell_particles, F&& f) {
    if (cell_particles.empty()) throw EstimatorError("partition_mean on an empty cell");
    double sum = 0.0;
    for (const Particle& p : cell_particles) sum += f(p.velocity);
    return sum / static_cast<double>(cell_particles.size());
}

struct MomentStats {
    Vec3 mean;
    SymTensor moments;  ///< central second moments about `mean`
    double tke = 0.0;
};

/// Cell mean and central second moments; needs at least two particles.
MomentStats second_moments(std::span<const Particle> cell_particles);

/// Mean only; defined for a single particle too.
Vec3 mean_velocity(std::span<const Particle> cell_particles);

/// Repairs a noisy covariance by clipping negative eigenvalues to zero.
SymTensor clip_psd(const SymTensor& m);

/// Returns L with L L^T = m (symmetric square root of the clipped matrix).
Tensor3 psd_factor(const SymTensor& m);

enum class Kernel {
    Gaussian,   ///< exp(-|u|^2 / 2)
    Indicator,  ///< 1 on the half-open unit cube (-1/2, 1/2]^3
};

/// Kernel-weighted conditional mean at `x`; bandwidth is per axis.
template <class F>
double nadaraya_watson_mean(const Vec3& x, std::span<const Particle> particles, const Vec3& bandwidth,
                            F&& f, Kernel kernel = Kernel::Gaussian) {
    for (int a = 0; a < 3; ++a) {
        if (!(bandwidth[a] > 0.0)) throw EstimatorError("kernel bandwidth must be positive");
    }
    // Gaussian weights are shifted by the smallest exponent so that a wide
    // cloud with a tiny bandwidth does not underflow every weight to zero.
    double min_q = 0.0;
    if (kernel == Kernel::Gaussian) {
        min_q = INFINITY;
        for (const Particle& p : particles) {
            double q = 0.0;
            for (int a = 0; a < 3; ++a) {
                const double u = (x[a] - p.position[a]) / bandwidth[a];
                q += u * u;
            }
            min_q = std::min(min_q, q);
        }
    }
    double num = 0.0;
    double den = 0.0;
    for (const Particle& p : particles) {
        double w = 1.0;
        if (kernel == Kernel::Gaussian) {
            double q = 0.0;
            for (int a = 0; a < 3; ++a) {
                const double u = (x[a] - p.position[a]) / bandwidth[a];
                q += u * u;
            }
            w = std::exp(-0.5 * (q - min_q));
        } else {
            for (int a = 0; a < 3; ++a) {
                const double u = (x[a] - p.position[a]) / bandwidth[a];
                if (!(u > -0.5 && u <= 0.5)) w = 0.0;
            }
        }
        if (w > 0.0) {
            num += w * f(p.velocity);
            den += w;
        }
    }
    if (!(den > 0.0)) throw EstimatorError("kernel estimator has no support at the query point");
    return num / den;
}

template <class F>
double nadaraya_watson_mean(const Vec3& x, std::span<const Particle> particles, double bandwidth, F&& f,
                            Kernel kernel = Kernel::Gaussian) {
    return nadaraya_watson_mean(x, particles, Vec3{bandwidth, bandwidth, bandwidth}, f, kernel);
}

/// |E[u | X in C_blades]| over the blade region of one turbine.
double disc_mean_speed(std::span<const Particle> particles, const TurbineConfig& turbine);

/// Per-cell partitioning statistics for an arbitrary particle order.
/// Throws EstimatorError if a cell holds fewer than `min_per_cell` particles.
void estimate_cell_statistics(std::span<const Particle> particles, CartesianGrid& grid,
                              std::size_t min_per_cell = 2);

/// Same, for an array grouped by cell with `per_cell` particles each in
/// linear cell order (the layout the transport step produces).
void estimate_sorted_cell_statistics(std::span<const Particle> particles, CartesianGrid& grid,
                                     std::size_t per_cell, int threads = 1);

struct CicWeight {
    std::size_t cell = 0;
    double weight = 0.0;
};

/// Trilinear (cloud-in-cell) weights of a point on the cell centers.
/// Points in the outer half cells are clamped onto the boundary layer of centers.
std::array<CicWeight, 8> cic_weights(const Vec3& position, const CartesianGrid& grid);

/// Weighted moment sums deposited on cell centers; accumulates over calls.
class CicDeposit {
public:
    explicit CicDeposit(const CartesianGrid& grid);

    void add(std::span<const Particle> particles);
    std::size_t samples() const { return samples_; }
    const std::vector<double>& weight() const { return weight_; }

    /// Weighted means and central moments; empty cells report zeros.
    std::vector<CellRecord> finalize() const;

private:
    const CartesianGrid* grid_;
    std::vector<double> weight_;
    std::vector<Vec3> first_;
    std::vector<SymTensor> second_;
    std::size_t samples_ = 0;
};

/// One-shot deposit; the records' `tke` is filled, `dissipation` left zero.
std::vector<CellRecord> cic_deposit(std::span<const Particle> particles, const CartesianGrid& grid);

/// Horizontally averaged statistics per z level.
class EmpiricalProfile {
public:
    struct Level {
        double z = 0.0;
        Vec3 mean;
        SymTensor moments;
    };

    EmpiricalProfile() = default;
    explicit EmpiricalProfile(std::vector<Level> levels);

    const std::vector<Level>& levels() const { return levels_; }
    bool empty() const { return levels_.empty(); }

    /// Linear interpolation between level heights, constant beyond the ends.
    Level at(double z) const;

    void write_csv(std::ostream& out) const;
    void write_csv(const std::string& path) const;
    static EmpiricalProfile read_csv(std::istream& in);
    static EmpiricalProfile read_csv(const std::string& path);

private:
    std::vector<Level> levels_;
};

/// Per-level average of cell means; the level covariance adds the spread of
/// the cell means to the mean cell covariance (law of total variance).
EmpiricalProfile column_profiles(const CartesianGrid& grid);

}  // namespace sdm
