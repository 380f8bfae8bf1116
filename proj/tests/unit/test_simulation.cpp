#include <doctest.h>

#include <sstream>

#include "sdm/config.hpp"
#include "sdm/simulation.hpp"

using namespace sdm;

namespace {

ScenarioConfig small_config(int threads = 1) {
    std::istringstream in(R"(
[domain]
size = 160 60 60
cells = 8 4 8
[particles]
per_cell = 16
seed = 5
[time]
dt = 1
steps = 4
warmup_steps = 4
[model]
z_lm = 30
[boundary]
ustar = 0.42
top_velocity = 9 0 0
[output]
average_window = 2
[turbine]
model = rotating
hub = 60 30 25
radius = 12
nacelle_radius = 2
thickness = 10
omega = 3
a_nacelle = 0.3
polar = analytic
polar_lift_slope = 5.7
polar_cl_max = 1.4
polar_cd0 = 0.01
blade_file = )" + std::string(SDM_SOURCE_DIR) + R"(/data/tunnel_blade.csv
)");
    ScenarioConfig c = parse_scenario(in);
    c.threads = threads;
    BladeGeometry& b = c.turbines.front().blade;
    b.radius = {2.0, 12.0};
    b.chord = {1.0, 0.5};
    b.pitch = {0.3, 0.05};
    return c;
}

void check_state(const Simulation& s) {
    const CartesianGrid& g = s.grid();
    const Box box = g.box();
    std::vector<std::size_t> count(g.num_cells(), 0);
    for (const Particle& p : s.particles()) {
        CHECK(box.contains(p.position));
        CHECK(is_finite(p.velocity));
        ++count[g.linear(g.cell_index(p.position))];
    }
    for (std::size_t n : count) CHECK(n == s.config().per_cell);
    for (const CellRecord& r : g.cells()) {
        CHECK(r.tke == doctest::Approx(0.5 * r.moments.trace()));
        CHECK(r.tke >= 0.0);
        CHECK(r.moments.xx >= 0.0);
        CHECK(r.moments.zz >= 0.0);
    }
}

}  // namespace

TEST_CASE("step phases run in a fixed order") {
    const ScenarioConfig c = small_config();
    Simulation s(c, InflowProfile::log_law(c.ustar, c.constants), true);
    s.initialize();
    std::vector<std::string> trace;
    s.set_trace([&](int step, Phase p) { trace.push_back(std::to_string(step) + ":" + phase_name(p)); });
    s.run(2);
    const std::vector<std::string> golden{
        "1:estimate", "1:closure", "1:predict", "1:boundary", "1:transport", "1:projection", "1:diagnostics",
        "2:estimate", "2:closure", "2:predict", "2:boundary", "2:transport", "2:projection", "2:diagnostics"};
    CHECK(trace == golden);
}

TEST_CASE("zero steps report the initial state") {
    const ScenarioConfig c = small_config();
    Simulation s(c, InflowProfile::log_law(c.ustar, c.constants), false);
    s.initialize();
    s.run(0);
    CHECK(s.steps_done() == 0);
    CHECK(s.averaged_samples() == 0);
    const auto f = s.averaged_fields();
    CHECK(f.size() == s.grid().num_cells());
    CHECK(f.front().tke > 0.0);
}

TEST_CASE("state invariants hold after every step") {
    const ScenarioConfig c = small_config();
    Simulation s(c, InflowProfile::log_law(c.ustar, c.constants), true);
    s.initialize();
    int seen = 0;
    s.set_observer([&](const Simulation& sim) {
        check_state(sim);
        CHECK(sim.last_stats().divergence_after <= 1e-9 * std::max(1.0, sim.last_stats().divergence_before));
        ++seen;
    });
    s.run(4);
    CHECK(seen == 4);
    CHECK(s.averaged_samples() == 2);
}

TEST_CASE("results do not depend on the thread count") {
    const auto run = [](int threads) {
        Simulation s(small_config(threads), InflowProfile::log_law(0.42, ModelConstants{}), true);
        s.initialize();
        s.run(3);
        return std::make_pair(s.particles(), s.averaged_fields());
    };
    const auto [pa, fa] = run(1);
    const auto [pb, fb] = run(3);
    REQUIRE(pa.size() == pb.size());
    for (std::size_t q = 0; q < pa.size(); ++q) {
        CHECK(pa[q].id == pb[q].id);
        CHECK(pa[q].position == pb[q].position);
        CHECK(pa[q].velocity == pb[q].velocity);
    }
    for (std::size_t c = 0; c < fa.size(); ++c) {
        CHECK(fa[c].mean == fb[c].mean);
        CHECK(fa[c].moments == fb[c].moments);
    }
}

TEST_CASE("warmup then production") {
    const RunOutputs out = run_simulation(small_config(), 3, 2);
    CHECK(out.profile.levels().size() == 8);
    CHECK(out.fields.size() == out.grid.num_cells());
    CHECK(out.particles.size() == out.grid.num_cells() * 16);
    CHECK(out.profile.levels().back().mean.x > out.profile.levels().front().mean.x);
}
