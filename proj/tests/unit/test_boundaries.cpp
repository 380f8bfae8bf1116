#include <doctest.h>

#include <random>

#include "sdm/boundaries.hpp"
#include "sdm/errors.hpp"
#include "support.hpp"

using namespace sdm;

TEST_CASE("friction velocity") {
    ModelConstants c;
    CHECK(friction_velocity(4.34, 0.0, 1.875, c) == doctest::Approx(0.42).epsilon(1e-3));
    CHECK(friction_velocity(0.0, 0.0, 1.875, c) == 0.0);
    CHECK_THROWS_AS(friction_velocity(1.0, 0.0, 0.03, c), ConfigError);
    for (double us = 0.05; us <= 1.0; us += 0.05) {
        for (double zc : {0.5, 1.875, 10.0}) {
            const double u = log_law_speed(zc, us, c.kappa, c.z0);
            CHECK(std::abs(friction_velocity(u, 0.0, zc, c) - us) <= 1e-12);
        }
    }
}

TEST_CASE("wall covariances") {
    auto [uw, vw] = wall_covariances(5.0, 0.0, 0.4);
    CHECK(uw == doctest::Approx(-0.16));
    CHECK(vw == 0.0);
    std::tie(uw, vw) = wall_covariances(3.0, 3.0, 0.4);
    CHECK(uw == doctest::Approx(-0.16 / std::sqrt(2.0)));
    CHECK(vw == doctest::Approx(uw));
    std::tie(uw, vw) = wall_covariances(-2.0, 7.0, 0.3);
    CHECK(std::hypot(uw, vw) == doctest::Approx(0.09).epsilon(1e-14));
    std::tie(uw, vw) = wall_covariances(0.0, 0.0, 0.3);
    CHECK(uw == 0.0);
    CHECK(vw == 0.0);
}

TEST_CASE("mirror reflection") {
    const Particle p{{1.0, 1.0, 0.2}, {2.0, 0.3, -0.5}, 0};
    const Particle s = mirror_reflect(p, 0.5, 0.0, 0.0, 1.0);
    CHECK(s.velocity.z == doctest::Approx(0.5));
    CHECK(s.velocity.x == 2.0);
    CHECK(s.velocity.y == 0.3);
    CHECK(s.position.z == doctest::Approx(0.8));

    const Particle q{{1.0, 1.0, 0.2}, {2.0, 0.0, -1.0}, 0};
    const Particle r = mirror_reflect(q, 0.5, 0.7, 0.0, 0.7);
    CHECK(r.velocity.x == doctest::Approx(4.0));
    CHECK(r.velocity.z == doctest::Approx(1.0));

    // Reflecting the mirror image back restores the state.
    Particle back = r;
    back.velocity.z = -back.velocity.z;
    const Particle twice = mirror_reflect(back, 0.5, -0.7, 0.0, 0.7);
    CHECK(twice.position.z == doctest::Approx(q.position.z));
    CHECK(twice.velocity.x == doctest::Approx(q.velocity.x));
    CHECK(std::abs(twice.velocity.z) == doctest::Approx(std::abs(q.velocity.z)));

    bool fallback = false;
    const Particle f = mirror_reflect(q, 0.5, 0.7, 0.0, 1e-12, &fallback);
    CHECK(fallback);
    CHECK(f.velocity.x == 2.0);
    CHECK(f.velocity.z == 1.0);
}

TEST_CASE("velocity jump") {
    CHECK(velocity_jump({1.0, -2.0, 3.0}, {}) == Vec3{-1.0, 2.0, -3.0});
    CHECK(velocity_jump({4.0, 1.0, 0.0}, {4.0, 1.0, 0.0}) == Vec3{4.0, 1.0, 0.0});
}

TEST_CASE("specular exit through the top uses the frozen old velocity") {
    const double H = 100.0, dt = 2.0;
    const Particle p{{5.0, 5.0, H - 0.5 * dt}, {0.0, 0.0, 1.0}, 0};
    ParticleStream s(1, 0, 1, StreamPurpose::Boundary);
    const Particle out = specular_boundary(p, 0.5, {}, ClosureFields{}, {}, {}, dt, s);
    CHECK(out.position.z == doctest::Approx(H - 0.5 * dt));
    CHECK(out.velocity.z == doctest::Approx(-1.0));
}

TEST_CASE("corner push") {
    const Box b{{0, 0, 0}, {10, 10, 10}};
    const Vec3 inside{3, 4, 5};
    CHECK(corner_push(inside, b, 1.0) == inside);
    const Vec3 face = corner_push({12.0, 4.0, 5.0}, b, 2.0);
    CHECK(face.x == doctest::Approx(10.0 - 2e-6));
    CHECK(face.y == 4.0);
    CHECK(b.contains_strict(face));
    const Vec3 corner = corner_push({-1.0, 11.0, -3.0}, b, 1.0);
    const double d = 1e-6 / std::sqrt(3.0);
    CHECK(corner.x == doctest::Approx(d));
    CHECK(corner.y == doctest::Approx(10.0 - d));
    CHECK(corner.z == doctest::Approx(d));
    CHECK(b.contains_strict(corner));
}

TEST_CASE("recycling") {
    const Box b{{0, 0, 0}, {100, 50, 40}};
    ParticleStream s(3, 1, 1, StreamPurpose::Boundary);
    const Particle out{{101.0, 20.0, 7.0}, {9.0, 9.0, 9.0}, 1};
    const Particle in = recycle_inflow(out, Face::XMax, b, {6.0, 0.5, 0.0}, SymTensor{}, s);
    CHECK(in.position.x == doctest::Approx(1.0));
    CHECK(in.position.y == 20.0);
    CHECK(in.position.z == 7.0);
    CHECK(in.velocity == Vec3{6.0, 0.5, 0.0});
    const Particle side = recycle_inflow({{3.0, -0.5, 2.0}, {}, 2}, Face::YMin, b, {}, SymTensor{}, s);
    CHECK(side.position.y == doctest::Approx(49.5));
    CHECK_THROWS_AS(recycle_inflow(out, Face::Top, b, {}, SymTensor{}, s), DomainError);
}

TEST_CASE("recycled velocities follow the requested Gaussian") {
    const SymTensor cov{1.0, 2.0, 0.5, 0.8, -0.5, 0.3};
    const Vec3 mean{log_law_speed(20.0, 0.42, 0.4, 0.03), 0.0, 0.0};
    const std::size_t n = 100000;
    std::vector<Vec3> v(n);
    Vec3 m;
    for (std::size_t q = 0; q < n; ++q) {
        ParticleStream s(5, q, 1, StreamPurpose::Boundary);
        v[q] = sample_velocity(mean, cov, s);
        m += v[q];
    }
    m *= 1.0 / static_cast<double>(n);
    CHECK(std::abs(m.x - mean.x) <= 3.0 * std::sqrt(cov.xx / static_cast<double>(n)));
    for (int i = 0; i < 3; ++i) {
        for (int j = i; j < 3; ++j) {
            double c = 0.0;
            for (const Vec3& x : v) c += (x[i] - m[i]) * (x[j] - m[j]);
            c /= static_cast<double>(n - 1);
            CHECK(c == doctest::Approx(cov(i, j)).epsilon(0.03));
        }
    }
}

TEST_CASE("inflow profiles") {
    ModelConstants c;
    const InflowProfile ll = InflowProfile::log_law(0.42, c, 10.0);
    CHECK(ll.mean(60.0).x == doctest::Approx(0.42 / 0.4 * std::log(50.0 / 0.03)));
    CHECK(ll.mean(10.0).x == 0.0);
    CHECK_FALSE(ll.has_covariance());
    CHECK_THROWS_AS(ll.covariance(5.0), ConfigError);
    const InflowProfile em = InflowProfile::empirical(EmpiricalProfile({{1.0, {2.0, 0, 0}, {0.5, 0, 0, 0, 0, 0}}}));
    CHECK(em.mean(3.0).x == 2.0);
    CHECK(em.covariance(3.0).xx == 0.5);
    CHECK_THROWS_AS(InflowProfile::empirical(EmpiricalProfile{}), ConfigError);
}

namespace {

struct Fixture {
    CartesianGrid grid{{8, 6, 5}, {4.0, 4.0, 2.0}};
    ModelConstants constants;
    WallState wall;
    InflowProfile inflow = InflowProfile::log_law(0.4, constants);
    BoundaryContext ctx;

    Fixture() {
        for (std::size_t c = 0; c < grid.num_cells(); ++c) {
            grid.cell(c).mean = {5.0, 1.0, 0.0};
            grid.cell(c).moments = {1.0, 1.0, 0.5, 0.0, -0.16, 0.0};
        }
        wall = WallState(grid, constants);
        ctx = {&grid, &wall, &inflow, {8.0, 0.0, 0.0}, 1.0};
    }

    BoundaryOutcome run(const Particle& before, const Vec3& to, const Vec3& new_velocity, std::uint64_t seed = 1) {
        ParticleStream s(seed, before.id, 1, StreamPurpose::Boundary);
        return apply_boundary(before, {to, new_velocity}, ctx, ClosureFields{}, {5.0, 1.0, 0.0}, {}, s);
    }
};

}  // namespace

TEST_CASE("boundary dispatch") {
    Fixture f;
    const Box b = f.grid.box();
    SUBCASE("interior move is untouched") {
        const BoundaryOutcome o = f.run({{10, 10, 5}, {1, 0, 0}, 0}, {11, 10, 5}, {1.2, 0, 0});
        CHECK(o.event == BoundaryEvent::None);
        CHECK(o.particle.position == Vec3{11, 10, 5});
    }
    SUBCASE("top") {
        const BoundaryOutcome o = f.run({{10, 10, b.hi.z - 0.5}, {0, 0, 1}, 0}, {10, 10, b.hi.z + 0.5}, {0, 0, 1});
        CHECK(o.event == BoundaryEvent::Top);
        CHECK(o.particle.position.z == doctest::Approx(b.hi.z - 0.5));
        CHECK(o.particle.velocity.x == doctest::Approx(16.0));
    }
    SUBCASE("outflow recycles at the inflow face") {
        const BoundaryOutcome o = f.run({{b.hi.x - 0.5, 10, 5}, {1, 0, 0}, 3}, {b.hi.x + 0.5, 10, 5}, {1, 0, 0});
        CHECK(o.event == BoundaryEvent::Recycle);
        CHECK(o.particle.position.x == doctest::Approx(0.5));
    }
    SUBCASE("inflow face is specular about the log-law mean") {
        const BoundaryOutcome o = f.run({{0.5, 10, 5}, {-1, 0, 0}, 4}, {-0.5, 10, 5}, {-1, 0, 0});
        CHECK(o.event == BoundaryEvent::Inflow);
        CHECK(o.particle.position.x == doctest::Approx(0.5));
    }
    SUBCASE("floor mirror") {
        const double zm = f.wall.z_mirror();
        CHECK(zm == doctest::Approx(0.5));
        const BoundaryOutcome o = f.run({{10, 10, 0.7}, {0, 0, -0.4}, 5}, {10, 10, 0.3}, {5, 1, -0.4});
        CHECK(o.event == BoundaryEvent::Floor);
        CHECK(o.particle.position.z == doctest::Approx(0.7));
        CHECK(o.particle.velocity.z == doctest::Approx(0.4));
        // Forced <u'w'> opposes the wind, so the reflected u drops.
        CHECK(o.particle.velocity.x < 5.0);
    }
}

TEST_CASE("every particle ends strictly inside after the boundary phase") {
    Fixture f;
    const Box b = f.grid.box();
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> ux(0.0, 32.0), uy(0.0, 24.0), uz(0.0, 10.0);
    std::normal_distribution<double> jump(0.0, 6.0);
    for (std::uint64_t n = 0; n < 20000; ++n) {
        const Particle p{{ux(rng), uy(rng), uz(rng)}, {jump(rng), jump(rng), jump(rng)}, n};
        if (!b.contains_strict(p.position)) continue;
        const Vec3 to = p.position + p.velocity;
        const BoundaryOutcome o = f.run(p, to, {jump(rng), jump(rng), jump(rng)}, n);
        CHECK(b.contains_strict(o.particle.position));
        CHECK(is_finite(o.particle.velocity));
    }
}
