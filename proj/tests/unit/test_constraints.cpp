#include <doctest.h>

#include <algorithm>
#include <random>

#include "sdm/constraints.hpp"
#include "sdm/errors.hpp"
#include "sdm/estimators.hpp"
#include "support.hpp"

using namespace sdm;

namespace {

std::vector<std::size_t> counts(const std::vector<Particle>& ps, const CartesianGrid& g) {
    std::vector<std::size_t> n(g.num_cells(), 0);
    for (const Particle& p : ps) ++n[g.linear(g.cell_index(p.position))];
    return n;
}

ScalarField random_field(const CartesianGrid& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    ScalarField f(g.num_cells());
    for (double& v : f) v = n(rng);
    return f;
}

double field_mean(const ScalarField& f) {
    double s = 0.0;
    for (double v : f) s += v;
    return s / static_cast<double>(f.size());
}

}  // namespace

TEST_CASE("transport leaves a uniform cloud alone") {
    CartesianGrid g({3, 3, 3}, {1.0, 2.0, 0.5});
    std::vector<Particle> ps = testing::sorted_cloud(g, 6, 1);
    const std::vector<Particle> before = ps;
    triangular_transport(ps, g, 6);
    for (const Particle& p : before) {
        const auto it = std::find_if(ps.begin(), ps.end(), [&](const Particle& q) { return q.id == p.id; });
        REQUIRE(it != ps.end());
        CHECK(it->position == p.position);
    }
}

TEST_CASE("transport in one dimension moves the surplus particle") {
    CartesianGrid g({2, 1, 1}, {1.0, 1.0, 1.0});
    std::vector<Particle> ps{{{0.1, 0.5, 0.5}, {1, 0, 0}, 0},
                             {{0.4, 0.5, 0.5}, {2, 0, 0}, 1},
                             {{0.9, 0.5, 0.5}, {3, 0, 0}, 2},
                             {{1.5, 0.5, 0.5}, {4, 0, 0}, 3}};
    triangular_transport(ps, g, 2);
    const auto n = counts(ps, g);
    CHECK(n[0] == 2);
    CHECK(n[1] == 2);
    for (const Particle& p : ps) {
        const bool moved = g.cell_index(p.position).i == 1 && p.id != 3;
        CHECK(moved == (p.id == 2));
        if (p.id != 2) {
            CHECK(p.position.x == doctest::Approx(std::vector<double>{0.1, 0.4, 0.9, 1.5}[p.id]));
        } else {
            // Rank 0 of 2 in the destination cell.
            CHECK(p.position.x == doctest::Approx(1.25));
        }
    }
}

TEST_CASE("transport keeps the order along a line") {
    CartesianGrid g({12, 1, 1}, {2.0, 1.0, 1.0});
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Particle> ps(12 * 40);
    for (std::size_t q = 0; q < ps.size(); ++q) ps[q] = {{24.0 * u(rng) * u(rng), 0.5, 0.5}, {}, q};
    const auto order = [](std::vector<Particle> v) {
        std::sort(v.begin(), v.end(), [](const Particle& a, const Particle& b) { return a.position.x < b.position.x; });
        std::vector<std::size_t> ids;
        for (const Particle& p : v) ids.push_back(p.id);
        return ids;
    };
    const auto before = order(ps);
    triangular_transport(ps, g, 40);
    CHECK(order(ps) == before);
    for (std::size_t n : counts(ps, g)) CHECK(n == 40);
}

TEST_CASE("transport restores exact counts and keeps velocities") {
    CartesianGrid g({5, 4, 6}, {1.0, 1.0, 1.0});
    const std::size_t per = 8;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> ux(0.0, 5.0), uy(0.0, 4.0), uz(0.0, 6.0);
    std::vector<Particle> ps(g.num_cells() * per);
    for (std::size_t q = 0; q < ps.size(); ++q) {
        // Skewed towards the origin corner.
        const double s = std::pow(ux(rng) / 5.0, 2.0);
        ps[q] = {{5.0 * s, uy(rng), uz(rng)}, {double(q), -double(q), 0.5 * double(q)}, q};
    }
    std::vector<double> vel_before;
    for (const Particle& p : ps) vel_before.push_back(p.velocity.x);
    for (int threads : {1, 3}) {
        std::vector<Particle> work = ps;
        triangular_transport(work, g, per, threads);
        for (std::size_t n : counts(work, g)) CHECK(n == per);
        for (std::size_t q = 0; q < work.size(); ++q) CHECK(g.linear(g.cell_index(work[q].position)) == q / per);
        std::vector<double> vel_after;
        for (const Particle& p : work) {
            vel_after.push_back(p.velocity.x);
            CHECK(p.velocity.y == -p.velocity.x);
        }
        std::sort(vel_after.begin(), vel_after.end());
        CHECK(vel_after == vel_before);
    }
    std::vector<Particle> wrong(ps.begin(), ps.end() - 1);
    CHECK_THROWS(triangular_transport(wrong, g, per));
}

TEST_CASE("transport is independent of the thread count") {
    CartesianGrid g({6, 3, 4}, {1.0, 1.0, 1.0});
    std::vector<Particle> ps = testing::sorted_cloud(g, 10, 3);
    std::mt19937_64 rng(4);
    std::shuffle(ps.begin(), ps.end(), rng);
    for (Particle& p : ps) p.position.x = std::min(p.position.x * 0.7 + 1.5, 5.999);
    std::vector<Particle> a = ps, b = ps;
    triangular_transport(a, g, 10, 1);
    triangular_transport(b, g, 10, 4);
    for (std::size_t q = 0; q < a.size(); ++q) {
        CHECK(a[q].id == b[q].id);
        CHECK(a[q].position == b[q].position);
    }
}

TEST_CASE("divergence on simple fields") {
    CartesianGrid g({6, 5, 4}, {2.0, 1.0, 0.5});
    VectorField c(g.num_cells(), Vec3{1.0, -2.0, 0.5});
    const ScalarField dc = divergence(g, c);
    VectorField lin(g.num_cells());
    for (std::size_t q = 0; q < g.num_cells(); ++q) lin[q] = {0.3 * g.cell_center(q).x, 0.0, 0.0};
    const ScalarField dl = divergence(g, lin);
    for (std::size_t q = 0; q < g.num_cells(); ++q) {
        const CellIndex ci = g.unravel(q);
        const bool interior = ci.i > 0 && ci.i < 5 && ci.j > 0 && ci.j < 4 && ci.k > 0 && ci.k < 3;
        if (interior) {
            CHECK(std::abs(dc[q]) <= 1e-14);
            CHECK(dl[q] == doctest::Approx(0.3));
        }
    }
}

TEST_CASE("divergence of a gradient is the Laplacian and the pair is adjoint") {
    CartesianGrid g({5, 4, 3}, {1.0, 2.0, 0.5});
    const ScalarField phi = random_field(g, 5);
    const ScalarField a = divergence(g, gradient(g, phi));
    const ScalarField b = laplacian(g, phi);
    for (std::size_t q = 0; q < a.size(); ++q) CHECK(std::abs(a[q] - b[q]) <= 1e-12);

    const ScalarField psi = random_field(g, 6);
    VectorField u(g.num_cells());
    const ScalarField r1 = random_field(g, 7), r2 = random_field(g, 8), r3 = random_field(g, 9);
    for (std::size_t q = 0; q < u.size(); ++q) u[q] = {r1[q], r2[q], r3[q]};
    const VectorField gp = gradient(g, psi);
    const ScalarField du = divergence(g, u);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t q = 0; q < u.size(); ++q) {
        lhs += dot(gp[q], u[q]);
        rhs -= psi[q] * du[q];
    }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    // Constants lie in the null space.
    for (double v : laplacian(g, ScalarField(g.num_cells(), 3.0))) CHECK(std::abs(v) <= 1e-12);
}

TEST_CASE("Poisson solvers") {
    CartesianGrid g({6, 5, 4}, {1.0, 1.0, 2.0});
    PoissonWorkspace zero;
    zero.rhs.assign(g.num_cells(), 0.0);
    solve_poisson(g, zero);
    CHECK(max_abs(zero.phi) == 0.0);

    ScalarField phi0 = random_field(g, 10);
    const double m = field_mean(phi0);
    const ScalarField rhs = laplacian(g, phi0);
    PoissonWorkspace ws;
    ws.rhs = rhs;
    solve_poisson(g, ws);
    CHECK(ws.residual <= 1e-8);
    const SpectralPoisson spectral(g);
    const ScalarField direct = spectral.solve(rhs);
    for (std::size_t q = 0; q < phi0.size(); ++q) {
        CHECK(ws.phi[q] == doctest::Approx(phi0[q] - m).epsilon(1e-6).scale(1.0));
        CHECK(std::abs(direct[q] - (phi0[q] - m)) <= 1e-9);
    }

    CartesianGrid one({1, 1, 1}, {1.0, 1.0, 1.0});
    PoissonWorkspace single;
    single.rhs = {4.0};
    solve_poisson(one, single);
    CHECK(single.phi == ScalarField{0.0});
    CHECK(SpectralPoisson(one).solve({4.0}) == ScalarField{0.0});

    PoissonWorkspace starved;
    starved.rhs = rhs;
    starved.max_iterations = 1;
    CHECK_THROWS_AS(solve_poisson(g, starved), SolverError);
}

namespace {

void set_means(CartesianGrid& g, const VectorField& u) {
    for (std::size_t q = 0; q < g.num_cells(); ++q) g.cell(q).mean = u[q];
}

VectorField means(const CartesianGrid& g) {
    VectorField u;
    for (const CellRecord& r : g.cells()) u.push_back(r.mean);
    return u;
}

}  // namespace

TEST_CASE("projection removes manufactured gradients and is idempotent") {
    CartesianGrid g({8, 6, 5}, {2.0, 1.0, 1.0});
    ProjectionOptions opt;
    opt.keep_level_mean = false;
    for (bool cg : {false, true}) {
        opt.use_cg = cg;
        set_means(g, gradient(g, random_field(g, 11)));
        std::vector<Particle> none;
        const ProjectionReport rep = project_divergence_free(g, none, 0, opt);
        CHECK(rep.divergence_after <= 1e-6 * rep.divergence_before);
        for (const Vec3& v : means(g)) CHECK(norm(v) <= 1e-6);

        const ScalarField a = random_field(g, 12), b = random_field(g, 13), c = random_field(g, 14);
        VectorField u(g.num_cells());
        for (std::size_t q = 0; q < u.size(); ++q) u[q] = {a[q], b[q], c[q]};
        set_means(g, u);
        project_divergence_free(g, none, 0, opt);
        const VectorField once = means(g);
        const ProjectionReport again = project_divergence_free(g, none, 0, opt);
        const VectorField twice = means(g);
        for (std::size_t q = 0; q < u.size(); ++q) CHECK(norm(once[q] - twice[q]) <= 10.0 * opt.tolerance);
        CHECK(again.divergence_before <= 1e-6);
    }
}

TEST_CASE("projection shifts particles cellwise and keeps the fluctuations") {
    CartesianGrid g({4, 3, 5}, {1.0, 1.0, 1.0});
    const std::size_t per = 6;
    std::vector<Particle> ps = testing::sorted_cloud(g, per, 15);
    for (Particle& p : ps) p.velocity.x += 0.4 * std::sin(p.position.x) * p.position.z;
    estimate_sorted_cell_statistics(ps, g, per);
    const std::vector<CellRecord> before = g.cells();
    const ProjectionReport rep = project_divergence_free(g, ps, per);
    CHECK(rep.divergence_after <= 1e-10 * std::max(rep.divergence_before, 1.0));
    CartesianGrid check = g;
    estimate_sorted_cell_statistics(ps, check, per);
    for (std::size_t c = 0; c < g.num_cells(); ++c) {
        CHECK(norm(check.cell(c).mean - g.cell(c).mean) <= 1e-12);
        CHECK(std::abs(check.cell(c).moments.xx - before[c].moments.xx) <= 1e-12);
        CHECK(std::abs(check.cell(c).moments.xz - before[c].moments.xz) <= 1e-12);
    }
}

TEST_CASE("level-mean projection keeps a uniform through-flow") {
    CartesianGrid g({6, 4, 3}, {1.0, 1.0, 1.0});
    for (std::size_t q = 0; q < g.num_cells(); ++q) g.cell(q).mean = {5.0 + g.cell_center(q).z, 0.0, 0.0};
    std::vector<Particle> none;
    const ProjectionReport rep = project_divergence_free(g, none, 0);
    CHECK(rep.divergence_before <= 1e-12);
    for (std::size_t q = 0; q < g.num_cells(); ++q) CHECK(g.cell(q).mean.x == doctest::Approx(5.0 + g.cell_center(q).z));
}
