#include "sdm/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sdm/errors.hpp"
#include "sdm/parallel.hpp"

namespace sdm {

namespace {

int slab_of(double x, double lo, double delta, int n) {
    return std::clamp(static_cast<int>(std::floor((x - lo) / delta)), 0, n - 1);
}

// Regroups `span` into `n` slabs of `per_slab` particles along `axis`.
void redistribute(std::span<Particle> span, int axis, int n, std::size_t per_slab, double lo, double delta,
                  std::vector<Particle>& scratch) {
    if (span.size() != per_slab * static_cast<std::size_t>(n)) {
        throw ConfigError("particle count does not match cells times particles per cell");
    }
    std::vector<std::size_t> start(static_cast<std::size_t>(n) + 1, 0);
    for (const Particle& p : span) ++start[static_cast<std::size_t>(slab_of(p.position[axis], lo, delta, n)) + 1];
    std::partial_sum(start.begin(), start.end(), start.begin());
    scratch.resize(span.size());
    std::vector<std::size_t> fill(start.begin(), start.end() - 1);
    for (const Particle& p : span) {
        scratch[fill[static_cast<std::size_t>(slab_of(p.position[axis], lo, delta, n))]++] = p;
    }
    const auto less = [axis](const Particle& a, const Particle& b) {
        const double xa = a.position[axis];
        const double xb = b.position[axis];
        return xa < xb || (xa == xb && a.id < b.id);
    };
    for (int b = 0; b < n; ++b) {
        auto first = scratch.begin() + static_cast<std::ptrdiff_t>(start[static_cast<std::size_t>(b)]);
        auto last = scratch.begin() + static_cast<std::ptrdiff_t>(start[static_cast<std::size_t>(b) + 1]);
        const std::size_t lo_rank = static_cast<std::size_t>(b) * per_slab;
        const bool settled = start[static_cast<std::size_t>(b)] >= lo_rank &&
                             start[static_cast<std::size_t>(b) + 1] <= lo_rank + per_slab;
        if (!settled) std::sort(first, last, less);
    }
    // Particles arriving from lower slabs sort first in their destination and
    // those from higher slabs last. Each run is spread evenly over the gap
    // between the slab face and the nearest resident, so order is preserved.
    for (int b = 0; b < n; ++b) {
        const std::size_t first = static_cast<std::size_t>(b) * per_slab;
        const std::size_t last = first + per_slab;
        const double low = lo + b * delta;
        const double high = std::nextafter(lo + (b + 1) * delta, low);
        std::size_t below = 0, above = 0;
        double resident_lo = high, resident_hi = low;
        for (std::size_t q = first; q < last; ++q) {
            const int from = slab_of(scratch[q].position[axis], lo, delta, n);
            if (from < b) {
                ++below;
            } else if (from > b) {
                ++above;
            } else {
                resident_lo = std::min(resident_lo, scratch[q].position[axis]);
                resident_hi = std::max(resident_hi, scratch[q].position[axis]);
            }
        }
        if (below + above == per_slab) {
            resident_lo = resident_hi = low + (static_cast<double>(below) / static_cast<double>(per_slab)) * delta;
        }
        const auto spread = [&](std::size_t begin, std::size_t count, double a, double c) {
            for (std::size_t j = 0; j < count; ++j) {
                double x = a + (static_cast<double>(j) + 0.5) / static_cast<double>(count) * (c - a);
                x = std::clamp(x, low, high);
                while (slab_of(x, lo, delta, n) > b) x = std::nextafter(x, low);
                while (slab_of(x, lo, delta, n) < b) x = std::nextafter(x, high);
                scratch[begin + j].position[axis] = x;
            }
        };
        spread(first, below, low, resident_lo);
        spread(last - above, above, resident_hi, high);
    }
    std::copy(scratch.begin(), scratch.end(), span.begin());
}

}  // namespace

void triangular_transport(std::vector<Particle>& particles, const CartesianGrid& grid, std::size_t per_cell,
                          int threads) {
    if (per_cell == 0 || particles.size() != per_cell * grid.num_cells()) {
        throw ConfigError("particle count does not match cells times particles per cell");
    }
    const auto nx = static_cast<std::size_t>(grid.nx());
    const auto ny = static_cast<std::size_t>(grid.ny());
    const auto nz = static_cast<std::size_t>(grid.nz());
    const Vec3& o = grid.origin();
    const Vec3& d = grid.spacing();
    std::span<Particle> all(particles);
    {
        std::vector<Particle> scratch;
        redistribute(all, 0, grid.nx(), per_cell * ny * nz, o.x, d.x, scratch);
    }
    const std::size_t slab = per_cell * ny * nz;
    parallel_for(nx, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<Particle> scratch;
        for (std::size_t i = begin; i < end; ++i) {
            std::span<Particle> s = all.subspan(i * slab, slab);
            redistribute(s, 1, grid.ny(), per_cell * nz, o.y, d.y, scratch);
            for (std::size_t j = 0; j < ny; ++j) {
                redistribute(s.subspan(j * per_cell * nz, per_cell * nz), 2, grid.nz(), per_cell, o.z, d.z,
                             scratch);
            }
        }
    });
}

namespace {

// Applies a 1-D operator along `axis` to every grid line.
template <class Line>
void for_each_line(const CartesianGrid& grid, int axis, Line&& line) {
    const int n[3] = {grid.nx(), grid.ny(), grid.nz()};
    const int a1 = (axis + 1) % 3;
    const int a2 = (axis + 2) % 3;
    std::size_t stride = 1;
    if (axis == 0) stride = static_cast<std::size_t>(n[1]) * static_cast<std::size_t>(n[2]);
    if (axis == 1) stride = static_cast<std::size_t>(n[2]);
    for (int p = 0; p < n[a1]; ++p) {
        for (int q = 0; q < n[a2]; ++q) {
            int idx[3];
            idx[axis] = 0;
            idx[a1] = p;
            idx[a2] = q;
            line(grid.linear(idx[0], idx[1], idx[2]), stride, n[axis]);
        }
    }
}

}  // namespace

VectorField gradient(const CartesianGrid& grid, const ScalarField& phi) {
    VectorField g(grid.num_cells());
    for (int axis = 0; axis < 3; ++axis) {
        const double inv = 1.0 / (2.0 * grid.spacing()[axis]);
        for_each_line(grid, axis, [&](std::size_t base, std::size_t stride, int n) {
            if (n < 2) return;
            const auto at = [&](int m) { return phi[base + static_cast<std::size_t>(m) * stride]; };
            for (int m = 0; m < n; ++m) {
                const double left = m == 0 ? at(0) : at(m - 1);
                const double right = m == n - 1 ? at(n - 1) : at(m + 1);
                g[base + static_cast<std::size_t>(m) * stride][axis] = (right - left) * inv;
            }
        });
    }
    return g;
}

ScalarField divergence(const CartesianGrid& grid, const VectorField& u) {
    ScalarField div(grid.num_cells(), 0.0);
    for (int axis = 0; axis < 3; ++axis) {
        const double inv = 1.0 / (2.0 * grid.spacing()[axis]);
        for_each_line(grid, axis, [&](std::size_t base, std::size_t stride, int n) {
            if (n < 2) return;
            const auto at = [&](int m) { return u[base + static_cast<std::size_t>(m) * stride][axis]; };
            for (int m = 0; m < n; ++m) {
                const double left = m == 0 ? -at(0) : at(m - 1);
                const double right = m == n - 1 ? -at(n - 1) : at(m + 1);
                div[base + static_cast<std::size_t>(m) * stride] += (right - left) * inv;
            }
        });
    }
    return div;
}

ScalarField laplacian(const CartesianGrid& grid, const ScalarField& phi) {
    return divergence(grid, gradient(grid, phi));
}

double max_abs(const ScalarField& f) {
    double m = 0.0;
    for (double v : f) m = std::max(m, std::abs(v));
    return m;
}

namespace {

double dot(const ScalarField& a, const ScalarField& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void remove_mean(ScalarField& f) {
    if (f.empty()) return;
    const double m = std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(f.size());
    for (double& v : f) v -= m;
}

}  // namespace

void solve_poisson(const CartesianGrid& grid, PoissonWorkspace& ws) {
    const std::size_t n = grid.num_cells();
    if (ws.rhs.size() != n) throw ConfigError("Poisson right-hand side has the wrong size");
    ScalarField b = ws.rhs;
    remove_mean(b);
    // CG on the positive semidefinite operator -L.
    for (double& v : b) v = -v;
    ws.phi.assign(n, 0.0);
    ws.iterations = 0;
    ws.residual = 0.0;
    const double bnorm = std::sqrt(dot(b, b));
    if (bnorm == 0.0 || n == 1) return;
    const int max_it = ws.max_iterations > 0 ? ws.max_iterations : static_cast<int>(10 * n);
    ScalarField r = b;
    ScalarField p = r;
    double rr = dot(r, r);
    for (int it = 1; it <= max_it; ++it) {
        ScalarField ap = laplacian(grid, p);
        for (double& v : ap) v = -v;
        const double alpha = rr / dot(p, ap);
        for (std::size_t i = 0; i < n; ++i) {
            ws.phi[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        remove_mean(r);
        const double rr_new = dot(r, r);
        ws.iterations = it;
        ws.residual = std::sqrt(rr_new) / bnorm;
        if (ws.residual <= ws.tolerance) {
            remove_mean(ws.phi);
            return;
        }
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    }
    throw SolverError("Poisson solve did not converge", ws.residual, ws.iterations);
}

SpectralPoisson::SpectralPoisson(const CartesianGrid& grid) : n_{grid.nx(), grid.ny(), grid.nz()} {
    for (int axis = 0; axis < 3; ++axis) {
        const int n = n_[static_cast<std::size_t>(axis)];
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
        const double inv = 1.0 / (2.0 * grid.spacing()[axis]);
        if (n >= 2) {
            for (int m = 0; m < n; ++m) {
                g(m, m == n - 1 ? n - 1 : m + 1) += inv;
                g(m, m == 0 ? 0 : m - 1) -= inv;
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.transpose() * g);
        basis_[static_cast<std::size_t>(axis)] = es.eigenvectors();
        eig_[static_cast<std::size_t>(axis)] = es.eigenvalues();
    }
}

ScalarField SpectralPoisson::solve(const ScalarField& rhs) const {
    const int nx = n_[0], ny = n_[1], nz = n_[2];
    const std::size_t total = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
    if (rhs.size() != total) throw ConfigError("Poisson right-hand side has the wrong size");
    // Data laid out as (i * ny + j) * nz + k; apply Q_a^T (forward) or Q_a
    // (inverse) along each axis.
    Eigen::VectorXd f = Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(total));
    f.array() -= f.mean();
    const auto apply = [&](Eigen::VectorXd& v, bool forward) {
        // z axis: contiguous blocks of length nz.
        {
            Eigen::Map<Eigen::MatrixXd> m(v.data(), nz, nx * ny);
            m = forward ? Eigen::MatrixXd(basis_[2].transpose() * m) : Eigen::MatrixXd(basis_[2] * m);
        }
        // y axis: for each i, an nz x ny block.
        for (int i = 0; i < nx; ++i) {
            Eigen::Map<Eigen::MatrixXd> m(v.data() + static_cast<std::ptrdiff_t>(i) * ny * nz, nz, ny);
            m = forward ? Eigen::MatrixXd(m * basis_[1]) : Eigen::MatrixXd(m * basis_[1].transpose());
        }
        // x axis: an (ny nz) x nx block.
        {
            Eigen::Map<Eigen::MatrixXd> m(v.data(), ny * nz, nx);
            m = forward ? Eigen::MatrixXd(m * basis_[0]) : Eigen::MatrixXd(m * basis_[0].transpose());
        }
    };
    apply(f, true);
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            for (int k = 0; k < nz; ++k) {
                const std::size_t c = (static_cast<std::size_t>(i) * ny + j) * nz + k;
                if (i == 0 && j == 0 && k == 0) {
                    // Eigenvalues are ascending, so index 0 on every axis is the constant mode.
                    f[static_cast<Eigen::Index>(c)] = 0.0;
                    continue;
                }
                const double lambda = eig_[0][i] + eig_[1][j] + eig_[2][k];
                f[static_cast<Eigen::Index>(c)] /= -lambda;
            }
        }
    }
    apply(f, false);
    ScalarField phi(f.data(), f.data() + f.size());
    remove_mean(phi);
    return phi;
}

ProjectionReport project_divergence_free(CartesianGrid& grid, std::span<Particle> particles, std::size_t per_cell,
                                         const ProjectionOptions& options, const SpectralPoisson* solver) {
    const std::size_t n = grid.num_cells();
    VectorField u(n);
    for (std::size_t c = 0; c < n; ++c) u[c] = grid.cell(c).mean;
    if (options.keep_level_mean) {
        const int nz = grid.nz();
        std::vector<Vec3> level(static_cast<std::size_t>(nz));
        for (std::size_t c = 0; c < n; ++c) level[c % static_cast<std::size_t>(nz)] += u[c];
        const double cols = static_cast<double>(grid.nx()) * grid.ny();
        for (std::size_t c = 0; c < n; ++c) u[c] -= level[c % static_cast<std::size_t>(nz)] * (1.0 / cols);
    }
    ScalarField div = divergence(grid, u);
    ProjectionReport report;
    report.divergence_before = max_abs(div);
    ScalarField phi;
    if (options.use_cg || solver == nullptr) {
        if (!options.use_cg && solver == nullptr) {
            const SpectralPoisson direct(grid);
            phi = direct.solve(div);
        } else {
            PoissonWorkspace ws;
            ws.rhs = div;
            ws.tolerance = options.tolerance;
            solve_poisson(grid, ws);
            phi = std::move(ws.phi);
            report.iterations = ws.iterations;
        }
    } else {
        phi = solver->solve(div);
    }
    const VectorField corr = gradient(grid, phi);
    for (std::size_t c = 0; c < n; ++c) {
        grid.cell(c).mean -= corr[c];
        u[c] -= corr[c];
    }
    report.divergence_after = max_abs(divergence(grid, u));
    if (options.correct_particles) {
        if (per_cell > 0) {
            if (particles.size() != per_cell * n) throw ConfigError("particle array is not grouped by cell");
            for (std::size_t q = 0; q < particles.size(); ++q) particles[q].velocity -= corr[q / per_cell];
        } else {
            for (Particle& p : particles) p.velocity -= corr[grid.linear(grid.cell_index(p.position))];
        }
    }
    return report;
}

}  // namespace sdm
