#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "vnslab/errors.hpp"
#include "vnslab/flowmap.hpp"
#include "vnslab/scenarios.hpp"
#include "vnslab/sim.hpp"

using namespace vnslab;

namespace {

RunConfig base_config(int res, double dt, double horizon) {
    RunConfig cfg;
    cfg.domain = Domain::unit_square();
    cfg.fluid.resolution[0] = cfg.fluid.resolution[1] = res;
    cfg.fluid.dt = dt;
    cfg.particle_count = 2000;
    cfg.seed = 12;
    cfg.horizon = horizon;
    cfg.snapshot_stride = 0;
    return cfg;
}

}  // namespace

TEST_CASE("build_confinement: worked instance, rejection, point-mass limit") {
    Domain d = Domain::unit_square();
    // gap d(B(a,eps), boundary) = 0.3 with a at the center: eps = 0.2
    ScenarioBuild b = build_confinement(d, Vec(0.5, 0.5), 0.2, 0.1);
    CHECK(b.config.gap == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(b.config.delta_conf == doctest::Approx(0.025).epsilon(1e-14));
    CHECK(b.config.confinement_radius == doctest::Approx(0.2 + 0.15).epsilon(1e-14));

    // 2R = 0.4 >= 0.3 rejected
    CHECK_THROWS_AS(build_confinement(d, Vec(0.5, 0.5), 0.2, 0.2), ValidationError);

    // eps -> 0: delta -> (d(a, boundary)/2 - R) / 2
    ScenarioBuild p = build_confinement(d, Vec(0.5, 0.5), 1e-9, 0.1);
    CHECK(p.config.delta_conf == doctest::Approx(0.5 * (0.25 - 0.1)).epsilon(1e-6));
}

TEST_CASE("build_escape: worked threshold numbers and the T -> infinity limit") {
    // box chosen so the circumradius about the center is 1/2, i.e. L = 1
    double side = 1.0 / std::sqrt(2.0);
    Domain d = Domain::box(2, Vec(0, 0), Vec(side, side), Vec(side / 2, side / 2));
    ScenarioBuild b = build_escape(d, d.ref_point, 0.1, 1.0);
    CHECK(b.config.big_l == doctest::Approx(1.0).epsilon(1e-12));
    double threshold = 2.1 / (1.0 - std::exp(-1.0));
    CHECK(threshold == doctest::Approx(3.32216).epsilon(1e-5));
    CHECK(b.config.r2 == doctest::Approx(1.05 * threshold).epsilon(1e-12));
    CHECK(b.config.r2 == doctest::Approx(3.48827).epsilon(1e-5));
    CHECK(b.config.budget_limit == doctest::Approx(1.0 / 8.0).epsilon(1e-12));

    ScenarioBuild slow = build_escape(d, d.ref_point, 0.1, 50.0);
    CHECK(slow.config.r2 == doctest::Approx(1.05 * 2.1).epsilon(1e-6));

    // velocity law bounded above: annulus [R, 2R]
    CHECK(b.init.strata[0].v_law.kind == VelocityLaw::Kind::annulus);
    CHECK(b.init.strata[0].v_law.r_hi == doctest::Approx(2.0 * b.config.r2));
}

TEST_CASE("escape construction: every free-flow trajectory exits by T") {
    Domain d = Domain::unit_square();
    ScenarioBuild b = build_escape(d, Vec(0.5, 0.5), 0.1, 1.0, 400, 3);
    ParticleEnsemble e = sample_initial(b.init, d);
    GridSpec g = GridSpec::make(d, 8);
    MacField zero(g);
    auto s = FlowSnapshotSeries::constant_field(d, zero, 0.0, 1.2, 120);
    for (std::int64_t i = 0; i < e.size(); ++i) {
        auto ev = exit_time_forward(s, 0.0, {e.x[i], e.v[i]}, 1.2);
        REQUIRE(ev.has_value());
        CHECK(ev->tau <= 1.0);
    }
}

TEST_CASE("build_mixed: degenerate alphas and the stratified split") {
    Domain d = Domain::unit_square();
    ScenarioBuild pure_conf = build_mixed(d, Vec(0.5, 0.5), 0.1, 1.0, 1.0);
    CHECK(pure_conf.init.strata.size() == 1);
    CHECK(pure_conf.init.strata[0].v_law.kind == VelocityLaw::Kind::ball);

    ScenarioBuild pure_esc = build_mixed(d, Vec(0.5, 0.5), 0.1, 0.0, 1.0);
    CHECK(pure_esc.init.strata.size() == 1);
    CHECK(pure_esc.init.strata[0].v_law.kind == VelocityLaw::Kind::annulus);

    ScenarioBuild mixed = build_mixed(d, Vec(0.5, 0.5), 0.1, 0.3, 1.0);
    REQUIRE(mixed.init.strata.size() == 2);
    CHECK(mixed.init.strata[0].mass == 0.3);
    CHECK(mixed.config.r1 < mixed.config.r2);
    ParticleEnsemble e = sample_initial(mixed.init, d);
    CHECK(e.stratum_mass_alive(0) == 0.3);
    CHECK(e.stratum_mass_alive(1) == 1.0 - 0.3);

    CHECK_THROWS_AS(build_mixed(d, Vec(0.5, 0.5), 0.1, 1.5, 1.0), ValidationError);
}

TEST_CASE("run_scenario: confinement holds at desk scale") {
    RunConfig base = base_config(32, 5e-3, 2.0);
    base.u0.kind = InitialVelocitySpec::Kind::single_mode;
    base.u0.amplitude = 1e-3;
    ScenarioConfig sc;
    sc.kind = ScenarioKind::confinement;
    sc.center = Vec(0.5, 0.5);
    sc.eps = 0.2;
    sc.r = 0.1;
    ScenarioRun run = run_scenario(sc, base);
    CHECK(run.report.pass);
    CHECK(run.report.absorbed_mass == 0.0);
    CHECK(run.report.measured_max_radius <= 0.35);
    CHECK(run.report.final_mass == 1.0);
    CHECK(run.outputs.ensemble.grazing_exits == 0);
}

TEST_CASE("run_scenario: escape empties the domain by T") {
    RunConfig base = base_config(32, 5e-3, 1.5);
    ScenarioConfig sc;
    sc.kind = ScenarioKind::escape;
    sc.center = Vec(0.5, 0.5);
    sc.eps = 0.1;
    sc.horizon_T = 1.0;
    ScenarioRun run = run_scenario(sc, base);
    CHECK(run.report.pass);
    CHECK(run.report.final_mass == 0.0);
    CHECK(run.report.first_empty_time <= 1.0);
    // scenario validation is a pure function of the config
    ScenarioRun run2 = run_scenario(sc, base);
    CHECK(run2.report.final_mass == run.report.final_mass);
    CHECK(run2.report.measured_max_radius == run.report.measured_max_radius);
}

TEST_CASE("run_scenario: mixed hits alpha exactly") {
    RunConfig base = base_config(32, 5e-3, 1.5);
    ScenarioConfig sc;
    sc.kind = ScenarioKind::mixed;
    sc.center = Vec(0.5, 0.5);
    sc.eps = 0.1;
    sc.alpha = 0.3;
    sc.horizon_T = 1.0;
    ScenarioRun run = run_scenario(sc, base);
    CHECK(run.report.final_mass == 0.3);
    CHECK(run.report.pass);
}

TEST_CASE("scenario report serializes to JSON with the required blocks") {
    Domain d = Domain::unit_square();
    ScenarioBuild b = build_confinement(d, Vec(0.5, 0.5), 0.2, 0.1);
    ScenarioReport rep;
    rep.config = b.config;
    rep.pass = true;
    std::string j = rep.to_json();
    CHECK(j.find("\"kind\"") != std::string::npos);
    CHECK(j.find("\"derived\"") != std::string::npos);
    CHECK(j.find("\"predictions\"") != std::string::npos);
    CHECK(j.find("\"measured\"") != std::string::npos);
    CHECK(j.find("\"pass\"") != std::string::npos);
}
