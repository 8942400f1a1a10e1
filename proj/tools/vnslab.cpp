// vnslab: coupled particle-fluid runs on a box with absorbing particle
// boundary, plus post-hoc characteristics replay.
//
//   vnslab run --config cfg.json
//   vnslab scenario <confinement|escape|mixed> [--alpha X] [--out DIR] ...
//   vnslab replay --manifest out/manifest.json --task <xinfty|profiles|representation-check>
//
// Exit codes: 0 success, 2 validation failure, 3 numeric failure.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "vnslab/asymptotics.hpp"
#include "vnslab/errors.hpp"
#include "vnslab/io.hpp"
#include "vnslab/sim.hpp"

namespace fs = std::filesystem;
using namespace vnslab;

namespace {

void write_failed_manifest(const std::string& dir, const RunConfig& cfg,
                           const std::string& error) {
    try {
        fs::create_directories(dir);
        RunManifest m;
        m.config_json = config_to_json(cfg);
        m.config_hash = fnv1a_bytes(m.config_json.data(), m.config_json.size());
        m.version = code_version();
        m.failed = true;
        m.error = error;
        std::ofstream os(dir + "/manifest.json");
        os << m.to_json();
    } catch (...) {
        // nothing more we can do
    }
}

int cmd_run(const std::string& config_path) {
    RunConfig cfg = config_from_file(config_path);
    try {
        std::cerr << "vnslab run: horizon " << cfg.horizon << ", dt " << cfg.fluid.dt << ", "
                  << cfg.particle_count << " particles\n";
        RunOutputs out = run_coupled(cfg);
        RunManifest m = emit_run_artifacts(out, cfg.output_dir);
        if (out.cfl_warned) {
            std::cerr << "warning: CFL bound max|u| dt > h was exceeded during the run\n";
        }
        std::cout << cfg.output_dir << "/manifest.json\n";
        return 0;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        write_failed_manifest(cfg.output_dir, cfg, e.what());
        return 3;
    }
}

int cmd_scenario(const std::string& kind_str, double alpha, const std::string& out_dir,
                 const std::string& base_config, double eps, double r, double horizon_T,
                 std::int64_t count, std::uint64_t seed) {
    RunConfig base;
    if (!base_config.empty()) {
        base = config_from_file(base_config);
    } else {
        base.domain = Domain::unit_square();
        base.fluid.resolution[0] = base.fluid.resolution[1] = 64;
        base.fluid.dt = 2e-3;
        base.horizon = 6.0;
        base.u0.kind = InitialVelocitySpec::Kind::single_mode;
        base.u0.amplitude = 1e-3;
    }
    base.particle_count = count > 0 ? count : base.particle_count;
    if (seed) base.seed = seed;
    base.output_dir = out_dir;

    ScenarioConfig sc;
    sc.kind = kind_str == "confinement" ? ScenarioKind::confinement
              : kind_str == "escape"    ? ScenarioKind::escape
                                        : ScenarioKind::mixed;
    sc.center = base.domain.ref_point;
    sc.eps = eps;
    sc.r = r;
    sc.alpha = alpha;
    sc.horizon_T = horizon_T;

    try {
        ScenarioRun sr = run_scenario(sc, base);
        emit_run_artifacts(sr.outputs, out_dir);
        std::ofstream os(out_dir + "/scenario_report.json");
        os << sr.report.to_json() << "\n";
        std::cout << sr.report.to_json() << "\n";
        return sr.report.pass ? 0 : 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        write_failed_manifest(out_dir, base, e.what());
        return 3;
    }
}

int cmd_replay(const std::string& manifest_path, const std::string& task) {
    RunManifest m = RunManifest::from_json_file(manifest_path);
    if (m.failed) throw ValidationError("replay: manifest is marked failed");
    std::string dir = fs::path(manifest_path).parent_path().string();
    if (dir.empty()) dir = ".";
    RunConfig cfg = config_from_json(m.config_json);
    auto series = load_snapshots(m, dir, cfg);

    try {
        nlohmann::json report;
        report["task"] = task;
        if (task == "xinfty") {
            TailModel tail = fit_tail(*series);
            double tol = 1e-4 * cfg.domain.diameter();
            InitialDataSpec spec = resolve_initial_data(cfg);
            spec.count = std::min<std::int64_t>(cfg.particle_count, 4000);
            spec.seed = cfg.seed + 1;
            ParticleEnsemble probes = sample_initial(spec, cfg.domain);
            std::int64_t survivors = 0;
            double max_tail = 0.0;
            for (std::int64_t i = 0; i < probes.size(); ++i) {
                XinftyResult r = compute_xinfty(*series, {probes.x[i], probes.v[i]},
                                                std::max(tol, tail.integral_from(series->t_back())),
                                                tail);
                survivors += r.survives;
                max_tail = std::max(max_tail, r.tail_bound);
            }
            report["samples"] = probes.size();
            report["survivors"] = survivors;
            report["survivor_fraction"] = double(survivors) / double(probes.size());
            report["max_tail_bound"] = max_tail;
        } else if (task == "profiles") {
            GridSpec grid = GridSpec::make(cfg.domain, 32);
            double tol = 0.1 * cfg.domain.diameter();
            InitialDataSpec spec = resolve_initial_data(cfg);
            ProfileEstimate push = profile_pushforward(spec, cfg.domain, *series, grid, tol,
                                                       cfg.particle_count, cfg.seed + 2);
            ProfileEstimate cov =
                profile_change_of_variables(spec, cfg.domain, *series, grid, tol);
            double gap = (push.mass > 0.0 && cov.mass > 0.0) ? w1_grid(push.rho, cov.rho) : 0.0;
            std::vector<std::string> written;
            dump_scalar_field(dir + "/profile_pushforward", push.rho, series->t_back(),
                              &written);
            dump_scalar_field(dir + "/profile_change_of_variables", cov.rho, series->t_back(),
                              &written);
            report["pushforward_mass"] = push.mass;
            report["change_of_variables_mass"] = cov.mass;
            report["w1_gap"] = gap;
            report["pushforward_error_estimate"] = push.error_estimate;
            report["change_of_variables_error_estimate"] = cov.error_estimate;
        } else if (task == "representation-check") {
            // Phase-space quadrature of the backward-characteristics density
            // against the alive mass. Evaluated at a moderate time: past a
            // few relaxation times the velocity support shrinks like e^{-t}
            // and a fixed quadrature cannot resolve it.
            InitialDataSpec spec = resolve_initial_data(cfg);
            const Domain& d = cfg.domain;
            double t = std::min(series->t_back(), 1.0);
            const int nx = 28, nv = 24;
            double v0max = 0.0, x_rad = 0.0;
            Vec a = cfg.scenario ? cfg.scenario->center : d.ref_point;
            for (const auto& st : spec.strata) {
                v0max = std::max(v0max, st.v_law.r_hi);
                x_rad = std::max(x_rad, st.x_law.max_radius_about(d.dim, a));
            }
            double drift = series->integral_u_linf(0.0, t);
            // |V(t)| <= e^{-t}|v0| + int e^{s-t} ||u|| ds
            double vmax = 1.1 * (v0max * std::exp(-t) + drift) + 1e-6;
            double reach = x_rad + v0max + 2.0 * drift;  // |X(t)-a| bound
            double mass = 0.0;
            double hx[3] = {d.extent(0) / nx, d.extent(1) / nx,
                            d.dim > 2 ? d.extent(2) / nx : 1.0};
            double hv = 2.0 * vmax / nv;
            std::function<void(int, Vec&)> loop_x = [&](int axis, Vec& x) {
                if (axis == d.dim) {
                    if (norm(x - a) > reach + hx[0]) return;  // outside the support
                    std::function<void(int, Vec&)> loop_v = [&](int vaxis, Vec& v) {
                        if (vaxis == d.dim) {
                            double f = representation_eval(spec, d, *series, t, x, v);
                            if (f > 0.0) {
                                double w = 1.0;
                                for (int ax = 0; ax < d.dim; ++ax) w *= hx[ax] * hv;
                                mass += f * w;
                            }
                            return;
                        }
                        for (int i = 0; i < nv; ++i) {
                            v[vaxis] = -vmax + (i + 0.5) * hv;
                            loop_v(vaxis + 1, v);
                        }
                    };
                    Vec v;
                    loop_v(0, v);
                    return;
                }
                for (int i = 0; i < nx; ++i) {
                    x[axis] = d.lo[axis] + (i + 0.5) * hx[axis];
                    loop_x(axis + 1, x);
                }
            };
            Vec x;
            loop_x(0, x);
            report["t"] = t;
            report["quadrature_mass"] = mass;
            report["note"] =
                "compare against the mass_alive column of timeseries.csv at this t";
        } else {
            throw ValidationError("replay: unknown task " + task);
        }
        std::ofstream os(dir + "/replay_" + task + ".json");
        os << report.dump(2) << "\n";
        std::cout << report.dump(2) << "\n";
        return 0;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vnslab: particle-laden incompressible flow laboratory on a box"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "execute a configured run");
    run->add_option("--config", config_path, "JSON run configuration")->required();

    std::string kind, out_dir = "out", base_config;
    double alpha = 1.0, eps = 0.2, radius = 0.1, horizon_T = 1.0;
    std::int64_t count = 0;
    std::uint64_t seed = 0;
    auto* scn = app.add_subcommand("scenario", "build and run a constructive scenario");
    scn->add_option("kind", kind, "confinement | escape | mixed")
        ->required()
        ->check(CLI::IsMember({"confinement", "escape", "mixed"}));
    scn->add_option("--alpha", alpha, "mixed: confined mass share");
    scn->add_option("--out", out_dir, "output directory");
    scn->add_option("--config", base_config, "base run configuration");
    scn->add_option("--eps", eps, "spatial ball radius");
    scn->add_option("--radius", radius, "confinement velocity radius R");
    scn->add_option("--deadline", horizon_T, "escape deadline T");
    scn->add_option("--particles", count, "particle count");
    scn->add_option("--seed", seed, "RNG seed");

    std::string manifest_path, task;
    auto* rep = app.add_subcommand("replay", "post-hoc computations from stored snapshots");
    rep->add_option("--manifest", manifest_path, "manifest.json of a finished run")->required();
    rep->add_option("--task", task, "xinfty | profiles | representation-check")->required();

    try {
        app.parse(argc, argv);
        if (run->parsed()) return cmd_run(config_path);
        if (scn->parsed()) {
            return cmd_scenario(kind, alpha, out_dir, base_config, eps, radius, horizon_T,
                                count, seed);
        }
        if (rep->parsed()) return cmd_replay(manifest_path, task);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const ValidationError& e) {
        std::cerr << "validation failure: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
