#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sdm/domain.hpp"

namespace sdm {

/// Rearranges the particles so that every cell holds exactly `per_cell` of
/// them. Three sequential passes (x over the whole cloud, y within x-slabs, z
/// within columns) sort by (coordinate, id); the particle of rank q belongs to
/// slab q / M, and only particles whose slab changes are moved, to the same
/// relative position inside the new slab. On return the array is grouped by
/// linear cell index. Velocities are untouched.
void triangular_transport(std::vector<Particle>& particles, const CartesianGrid& grid, std::size_t per_cell,
                          int threads = 1);

/// Cell-centred scalar and vector fields in linear cell order.
using ScalarField = std::vector<double>;
using VectorField = std::vector<Vec3>;

/// Centred gradient with zero-normal-derivative ghosts (phi_{-1} = phi_0).
VectorField gradient(const CartesianGrid& grid, const ScalarField& phi);

/// Centred divergence with no-penetration ghosts (u_{-1} = -u_0), the exact
/// negative adjoint of `gradient`.
ScalarField divergence(const CartesianGrid& grid, const VectorField& u);

/// divergence(gradient(phi)): symmetric, negative semidefinite, null space
/// the constants.
ScalarField laplacian(const CartesianGrid& grid, const ScalarField& phi);

struct PoissonWorkspace {
    ScalarField phi;
    ScalarField rhs;
    double tolerance = 1e-8;  ///< relative residual
    int max_iterations = 0;   ///< 0 selects 10 * cells
    int iterations = 0;       ///< filled by the solver
    double residual = 0.0;    ///< final relative residual
};

/// Conjugate gradients on laplacian(phi) = rhs with zero-mean gauge. The rhs
/// mean is removed first. Throws SolverError when not converged.
void solve_poisson(const CartesianGrid& grid, PoissonWorkspace& ws);

/// Direct solver for the same operator: the Laplacian is a Kronecker sum of
/// three 1-D matrices, diagonalised once per grid.
class SpectralPoisson {
public:
    explicit SpectralPoisson(const CartesianGrid& grid);

    /// Zero-mean solution of laplacian(phi) = rhs - mean(rhs).
    ScalarField solve(const ScalarField& rhs) const;

private:
    std::array<int, 3> n_{};
    std::array<Eigen::MatrixXd, 3> basis_;
    std::array<Eigen::VectorXd, 3> eig_;
};

struct ProjectionOptions {
    bool correct_particles = true;
    /// Project only the departure from the per-level horizontal mean, so a
    /// mean flow through the inflow and outflow faces is kept.
    bool keep_level_mean = true;
    bool use_cg = false;
    double tolerance = 1e-8;
};

struct ProjectionReport {
    double divergence_before = 0.0;  ///< max-norm of the projected part's divergence
    double divergence_after = 0.0;
    int iterations = 0;
};

/// <U> <- <U~> - grad phi with laplacian(phi) = div <U~>; the same cellwise
/// shift is applied to the particles. `particles` must be grouped by cell with
/// `per_cell` each, or `per_cell` = 0 to locate cells from positions.
ProjectionReport project_divergence_free(CartesianGrid& grid, std::span<Particle> particles, std::size_t per_cell,
                                         const ProjectionOptions& options = {},
                                         const SpectralPoisson* solver = nullptr);

double max_abs(const ScalarField& f);

}  // namespace sdm
