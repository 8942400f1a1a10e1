#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <algorithm>
#include "vnslab/flowmap.hpp"

#include "oracles.hpp"
#include "vnslab/errors.hpp"
#include "vnslab/io.hpp"

using namespace vnslab;
namespace fs = std::filesystem;

namespace {

RunConfig demo_config(const std::string& outdir) {
    RunConfig cfg;
    cfg.domain = Domain::unit_square();
    cfg.fluid.resolution[0] = cfg.fluid.resolution[1] = 16;
    cfg.fluid.dt = 1e-2;
    cfg.particle_count = 500;
    cfg.seed = 77;
    InitialDataSpec spec;
    Stratum st;
    st.x_law.center = Vec(0.5, 0.5);
    st.x_law.radius = 0.2;
    st.v_law.r_hi = 0.1;
    st.mass = 1.0;
    spec.strata.push_back(st);
    cfg.initial_data = spec;
    cfg.u0.kind = InitialVelocitySpec::Kind::single_mode;
    cfg.u0.amplitude = 1e-3;
    cfg.horizon = 0.2;
    cfg.snapshot_stride = 1;
    cfg.output_dir = outdir;
    return cfg;
}

std::string csv_of(const RunOutputs& out) {
    std::ostringstream os;
    out.history.write_csv(os);
    return os.str();
}

}  // namespace

TEST_CASE("config: json roundtrip preserves every field that matters") {
    RunConfig cfg = demo_config("x");
    cfg.monitors.delta = 0.07;
    cfg.kinetic_only = true;
    cfg.rho_sample_stride = 5;
    std::string j = config_to_json(cfg);
    RunConfig back = config_from_json(j);
    CHECK(back.domain.dim == 2);
    CHECK(back.domain.hi[0] == cfg.domain.hi[0]);
    CHECK(back.fluid.resolution[0] == 16);
    CHECK(back.fluid.dt == cfg.fluid.dt);
    CHECK(back.particle_count == 500);
    CHECK(back.seed == 77);
    REQUIRE(back.initial_data.has_value());
    CHECK(back.initial_data->strata[0].x_law.radius == 0.2);
    CHECK(back.initial_data->strata[0].v_law.r_hi == 0.1);
    CHECK(back.u0.amplitude == 1e-3);
    CHECK(back.horizon == 0.2);
    CHECK(back.monitors.delta == 0.07);
    CHECK(back.kinetic_only);
    CHECK(back.rho_sample_stride == 5);

    CHECK_THROWS_AS(config_from_json("{not json"), ValidationError);
    CHECK_THROWS_AS(config_from_json("{}"), ValidationError);
}

TEST_CASE("field dumps roundtrip bitwise with sidecar metadata") {
    fs::path dir = fs::temp_directory_path() / "vnslab_io_test";
    fs::create_directories(dir);
    Domain d = Domain::unit_square();
    GridSpec g = GridSpec::make(d, 8);
    ScalarField f(g);
    for (std::size_t i = 0; i < f.v.size(); ++i) f.v[i] = std::sin(0.1 * i) * 1e-3;
    dump_scalar_field((dir / "rho").string(), f, 1.25);
    ScalarField back = load_scalar_field((dir / "rho").string(), g);
    for (std::size_t i = 0; i < f.v.size(); ++i) CHECK(back.v[i] == f.v[i]);

    std::ifstream sc(dir / "rho.json");
    std::stringstream ss;
    ss << sc.rdbuf();
    CHECK(ss.str().find("\"dim\"") != std::string::npos);
    CHECK(ss.str().find("\"shape\"") != std::string::npos);
    CHECK(ss.str().find("\"component\"") != std::string::npos);
    CHECK(ss.str().find("\"time\"") != std::string::npos);
    CHECK(ss.str().find("\"dx\"") != std::string::npos);

    MacField u(g);
    for (int a = 0; a < 2; ++a) {
        for (std::size_t i = 0; i < u.comp[a].size(); ++i) u.comp[a][i] = 0.01 * a + 1e-4 * i;
    }
    dump_mac_component((dir / "u").string(), u, 0, 0.0);
    dump_mac_component((dir / "u").string(), u, 1, 0.0);
    MacField v(g);
    load_mac_component((dir / "u").string(), v, 0);
    load_mac_component((dir / "u").string(), v, 1);
    for (int a = 0; a < 2; ++a) {
        for (std::size_t i = 0; i < u.comp[a].size(); ++i) CHECK(v.comp[a][i] == u.comp[a][i]);
    }
    fs::remove_all(dir);
}

TEST_CASE("determinism: identical configs give bitwise-identical timeseries") {
    RunConfig cfg = demo_config("y");
    RunOutputs a = run_coupled(cfg);
    RunOutputs b = run_coupled(cfg);
    CHECK(csv_of(a) == csv_of(b));
    // and bitwise-identical ledgers / final states
    CHECK(a.ensemble.mass_alive() == b.ensemble.mass_alive());
    for (std::int64_t i = 0; i < a.ensemble.size(); ++i) {
        CHECK(a.ensemble.x[i][0] == b.ensemble.x[i][0]);
        CHECK(a.ensemble.v[i][1] == b.ensemble.v[i][1]);
    }
}

TEST_CASE("manifest: emits, reloads, checksums verify, snapshots replay bitwise") {
    fs::path dir = fs::temp_directory_path() / "vnslab_run_test";
    fs::remove_all(dir);
    RunConfig cfg = demo_config(dir.string());
    RunOutputs out = run_coupled(cfg);
    RunManifest m = emit_run_artifacts(out, dir.string());
    CHECK_FALSE(m.failed);
    CHECK(m.files.size() > 4);
    for (const auto& f : m.files) {
        fs::path p = dir / f.path;
        REQUIRE(fs::exists(p));
        CHECK(fs::file_size(p) == f.bytes);
        CHECK(fnv1a_file(p.string()) == f.checksum);
    }

    RunManifest loaded = RunManifest::from_json_file((dir / "manifest.json").string());
    CHECK(loaded.config_hash == m.config_hash);
    CHECK(loaded.snapshot_times.size() == out.snapshots->size());

    // replay never needs information outside the output directory
    RunConfig cfg2 = config_from_json(loaded.config_json);
    auto series = load_snapshots(loaded, dir.string(), cfg2);
    REQUIRE(series->size() == out.snapshots->size());

    // bitwise path identity: replaying particle 0 from its initial state
    // through the stored snapshots reproduces the final particle state
    ParticleEnsemble fresh = sample_initial(out.init, cfg.domain);
    std::int64_t pick = -1;
    for (std::int64_t i = 0; i < out.ensemble.size(); ++i) {
        if (out.ensemble.status[i] == ParticleStatus::alive) {
            pick = i;
            break;
        }
    }
    REQUIRE(pick >= 0);
    PhaseState z{fresh.x[pick], fresh.v[pick]};
    PhaseState end = flow(*series, 0.0, series->t_back(), z);
    CHECK(end.x[0] == out.ensemble.x[pick][0]);
    CHECK(end.x[1] == out.ensemble.x[pick][1]);
    CHECK(end.v[0] == out.ensemble.v[pick][0]);
    CHECK(end.v[1] == out.ensemble.v[pick][1]);
    fs::remove_all(dir);
}

TEST_CASE("trajectory dump: CSV rows (s, x..., v..., detJ)") {
    fs::path dir = fs::temp_directory_path() / "vnslab_traj_test";
    fs::create_directories(dir);
    Domain d = Domain::unit_square();
    GridSpec g = GridSpec::make(d, 16);
    MacField zero(g);
    auto s = FlowSnapshotSeries::constant_field(d, zero, 0.0, 1.0, 10);
    write_trajectory_csv((dir / "traj.csv").string(), s, {Vec(0.5, 0.5), Vec(0.1, 0.0)},
                         0.0, 1.0, 11);
    std::ifstream is(dir / "traj.csv");
    std::string header;
    std::getline(is, header);
    CHECK(header == "s,x0,x1,v0,v1,detJ");
    int rows = 0;
    std::string line;
    double last_det = 0.0, last_x0 = 0.0;
    while (std::getline(is, line)) {
        rows += 1;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double t, x0, x1, v0, v1, det;
        ls >> t >> x0 >> x1 >> v0 >> v1 >> det;
        last_det = det;
        last_x0 = x0;
    }
    CHECK(rows == 11);
    CHECK(last_det == doctest::Approx(std::exp(-2.0)).epsilon(1e-9));
    CHECK(last_x0 == doctest::Approx(0.5 + 0.1 * (1 - std::exp(-1.0))).epsilon(1e-9));
    fs::remove_all(dir);
}

TEST_CASE("metrics.csv emitted when density samples are captured") {
    fs::path dir = fs::temp_directory_path() / "vnslab_metrics_test";
    fs::remove_all(dir);
    RunConfig cfg = demo_config(dir.string());
    cfg.rho_sample_stride = 5;
    cfg.rho_sample_resolution = 16;
    RunOutputs out = run_coupled(cfg);
    emit_run_artifacts(out, dir.string());
    REQUIRE(fs::exists(dir / "metrics.csv"));
    std::ifstream is(dir / "metrics.csv");
    std::string header;
    std::getline(is, header);
    CHECK(header == "t,w1_monokinetic,hminus1_to_final");
    CHECK(fs::exists(dir / "decay_fit.json"));
    fs::remove_all(dir);
}

TEST_CASE("cli binary: exit codes and artifacts") {
    // the binary sits next to the test tree in the build directory
    fs::path bin = fs::path("..") / "tools" / "vnslab";
    if (!fs::exists(bin)) {
        MESSAGE("vnslab binary not found; skipping the end-to-end check");
        return;
    }
    fs::path dir = fs::temp_directory_path() / "vnslab_cli_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    RunConfig cfg = demo_config((dir / "out").string());
    {
        std::ofstream os(dir / "cfg.json");
        os << config_to_json(cfg);
    }
    std::string cmd = bin.string() + " run --config " + (dir / "cfg.json").string() +
                      " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(rc) == 0);
    CHECK(fs::exists(dir / "out" / "manifest.json"));
    CHECK(fs::exists(dir / "out" / "timeseries.csv"));
    CHECK(fs::exists(dir / "out" / "ledger.csv"));

    std::string replay = bin.string() + " replay --manifest " +
                         (dir / "out" / "manifest.json").string() +
                         " --task representation-check > /dev/null 2>&1";
    rc = std::system(replay.c_str());
    CHECK(WEXITSTATUS(rc) == 0);
    CHECK(fs::exists(dir / "out" / "replay_representation-check.json"));

    // validation failure -> exit 2
    std::string bad = bin.string() + " run --config /nonexistent.json > /dev/null 2>&1";
    rc = std::system(bad.c_str());
    CHECK(WEXITSTATUS(rc) == 2);
    fs::remove_all(dir);
}
