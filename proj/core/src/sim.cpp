#include "vnslab/sim.hpp"

#include <algorithm>
#include <cmath>

#include "vnslab/errors.hpp"

namespace vnslab {

std::string code_version() { return "vnslab 0.1.0"; }

void RunConfig::validate() const {
    fluid.validate(domain.dim);
    if (!(horizon > 0.0)) throw ValidationError("config: horizon must be positive");
    if (particle_count <= 0) throw ValidationError("config: particle count must be positive");
    if (snapshot_stride < 0) throw ValidationError("config: snapshot stride must be >= 0");
    if (!initial_data && !scenario) {
        throw ValidationError("config: either initial_data or scenario must be given");
    }
    if (!(monitors.q > domain.dim + 1)) {
        throw ValidationError("config: pointwise decay order q must exceed dim+1");
    }
}

namespace {

std::function<Vec(const Vec&)> make_u0(const Domain& d, const InitialVelocitySpec& spec) {
    if (spec.kind == InitialVelocitySpec::Kind::zero || spec.amplitude == 0.0) {
        return [](const Vec&) { return Vec(); };
    }
    // Stream-function mode: psi = A (sin(pi x^) sin(pi y^))^2 (sin^2(pi z^)),
    // u = curl psi; vanishes on the wall, divergence free, max|u| ~ amplitude.
    double amp = spec.amplitude / M_PI;
    Domain dom = d;
    return [dom, amp](const Vec& p) {
        double lx = dom.extent(0), ly = dom.extent(1);
        double xh = (p[0] - dom.lo[0]) / lx;
        double yh = (p[1] - dom.lo[1]) / ly;
        double sx = std::sin(M_PI * xh), sy = std::sin(M_PI * yh);
        double zfac = 1.0;
        if (dom.dim == 3) {
            double zh = (p[2] - dom.lo[2]) / dom.extent(2);
            double sz = std::sin(M_PI * zh);
            zfac = sz * sz;
        }
        Vec u;
        u[0] = amp * (M_PI / ly) * sx * sx * std::sin(2.0 * M_PI * yh) * zfac;
        u[1] = -amp * (M_PI / lx) * std::sin(2.0 * M_PI * xh) * sy * sy * zfac;
        return u;
    };
}

double force_l2_sq(const ForceField& f) {
    double acc = 0.0;
    for (int a = 0; a < f.g.dim; ++a) {
        for (double x : f.comp[a]) acc += x * x;
    }
    return acc * f.g.cell_volume();
}

}  // namespace

InitialDataSpec resolve_initial_data(const RunConfig& cfg) {
    InitialDataSpec init;
    if (cfg.initial_data) {
        init = *cfg.initial_data;
    } else if (cfg.scenario) {
        switch (cfg.scenario->kind) {
            case ScenarioKind::confinement:
                init = build_confinement(cfg.domain, cfg.scenario->center, cfg.scenario->eps,
                                         cfg.scenario->r, cfg.particle_count, cfg.seed)
                           .init;
                break;
            case ScenarioKind::escape:
                init = build_escape(cfg.domain, cfg.scenario->center, cfg.scenario->eps,
                                    cfg.scenario->horizon_T, cfg.particle_count, cfg.seed)
                           .init;
                break;
            case ScenarioKind::mixed:
                init = build_mixed(cfg.domain, cfg.scenario->center, cfg.scenario->eps,
                                   cfg.scenario->alpha, cfg.scenario->horizon_T,
                                   cfg.particle_count, cfg.seed, cfg.scenario->r1)
                           .init;
                break;
        }
    } else {
        throw ValidationError("config: either initial_data or scenario must be given");
    }
    init.count = cfg.particle_count;
    init.seed = cfg.seed;
    return init;
}

RunOutputs run_coupled(const RunConfig& cfg, const StepObserver& observer) {
    cfg.validate();
    RunOutputs out;
    out.config = cfg;
    InitialDataSpec init = resolve_initial_data(cfg);
    out.init = init;

    out.solver = std::make_unique<FluidSolver>(cfg.domain, cfg.fluid);
    FluidSolver& solver = *out.solver;
    out.fluid = std::make_unique<FluidState>(
        cfg.u0.kind == InitialVelocitySpec::Kind::zero && cfg.u0.amplitude == 0.0
            ? solver.make_rest()
            : solver.make_initial(make_u0(cfg.domain, cfg.u0)));
    FluidState& fluid = *out.fluid;
    out.ensemble = sample_initial(init, cfg.domain);
    ParticleEnsemble& ens = out.ensemble;

    if (cfg.snapshot_stride > 0) {
        out.snapshots = std::make_shared<FlowSnapshotSeries>(cfg.domain, 1);
        if (cfg.snapshot_stride == 1) out.snapshots->set_uniform_dt(cfg.fluid.dt);
    }

    out.history = DiagnosticsHistory(cfg.monitors);
    DiagnosticsHistory& hist = out.history;

    const double dt = cfg.fluid.dt;
    const auto nsteps = static_cast<std::int64_t>(std::llround(cfg.horizon / dt));
    const Vec support_center = cfg.scenario ? cfg.scenario->center : cfg.domain.ref_point;

    GridSpec rho_grid;
    bool sample_rho = cfg.rho_sample_stride > 0;
    if (sample_rho) rho_grid = GridSpec::make(cfg.domain, cfg.rho_sample_resolution);
    auto capture_rho = [&](double t) {
        ScalarField r(rho_grid);
        for (std::int64_t i = 0; i < ens.size(); ++i) {
            if (ens.status[i] == ParticleStatus::alive) deposit_cell(r, ens.x[i], ens.w[i]);
        }
        double inv_vol = 1.0 / rho_grid.cell_volume();
        for (double& v : r.v) v *= inv_vol;
        out.rho_sample_times.push_back(t);
        out.rho_samples.push_back(std::move(r));
    };

    KineticMoments moments = deposit_moments(ens, cfg.domain, solver.grid(), cfg.monitors.q);
    hist.record_step(solver, fluid, ens, moments, 0.0);
    out.max_support_radius = ens.max_support_radius(support_center);
    if (sample_rho) capture_rho(0.0);
    if (observer) observer(ens, hist.back());

    for (std::int64_t n = 0; n < nsteps; ++n) {
        ForceField force(solver.grid());
        double fsq = 0.0;
        if (!cfg.kinetic_only) {
            force = brinkman_force(moments, fluid.u);
            fsq = force_l2_sq(force);
        }
        double t_pre = fluid.t;
        MacField u_pre = fluid.u;  // particles see the pre-step field
        if (out.snapshots && n % cfg.snapshot_stride == 0) {
            out.snapshots->push_back(t_pre, u_pre);
        }
        if (cfg.kinetic_only) {
            fluid.t += dt;
        } else {
            solver.step(fluid, force);
            out.cfl_warned = out.cfl_warned || solver.last_step_cfl_violated();
        }
        PushRecord rec = push_particles_recorded(ens, cfg.domain, u_pre, dt);
        rec.t0 = t_pre;
        absorb(ens, cfg.domain, rec);

        moments = deposit_moments(ens, cfg.domain, solver.grid(), cfg.monitors.q);
        hist.record_step(solver, fluid, ens, moments, fsq);
        out.max_support_radius =
            std::max(out.max_support_radius, ens.max_support_radius(support_center));
        if (sample_rho && (n + 1) % cfg.rho_sample_stride == 0) capture_rho(fluid.t);
        if (observer) observer(ens, hist.back());
    }
    if (out.snapshots) out.snapshots->push_back(fluid.t, fluid.u);
    return out;
}

ScenarioRun run_scenario(const ScenarioConfig& scenario, const RunConfig& base) {
    ScenarioBuild build;
    switch (scenario.kind) {
        case ScenarioKind::confinement:
            build = build_confinement(base.domain, scenario.center, scenario.eps, scenario.r,
                                      base.particle_count, base.seed);
            break;
        case ScenarioKind::escape:
            build = build_escape(base.domain, scenario.center, scenario.eps, scenario.horizon_T,
                                 base.particle_count, base.seed);
            break;
        case ScenarioKind::mixed:
            build = build_mixed(base.domain, scenario.center, scenario.eps, scenario.alpha,
                                scenario.horizon_T, base.particle_count, base.seed, scenario.r1);
            break;
    }
    RunConfig cfg = base;
    cfg.scenario = build.config;
    cfg.initial_data = build.init;
    if (build.config.kind != ScenarioKind::confinement &&
        cfg.horizon < 1.5 * build.config.horizon_T) {
        cfg.horizon = 1.5 * build.config.horizon_T;
    }

    ScenarioRun sr;
    // Track the support radius across the run via a per-step callback would
    // need hooks; instead rerun the light bookkeeping here.
    RunOutputs out = run_coupled(cfg);
    ScenarioReport rep;
    rep.config = build.config;
    rep.predicted_max_radius = build.config.confinement_radius;
    rep.escape_deadline = build.config.horizon_T;
    switch (build.config.kind) {
        case ScenarioKind::confinement: rep.predicted_final_mass = 1.0; break;
        case ScenarioKind::escape: rep.predicted_final_mass = 0.0; break;
        case ScenarioKind::mixed: rep.predicted_final_mass = build.config.alpha; break;
    }
    rep.measured_max_radius = out.max_support_radius;
    rep.absorbed_mass = out.ensemble.mass_absorbed();
    rep.final_mass = out.ensemble.mass_alive();
    rep.grazing_exits = out.ensemble.grazing_exits;
    const auto& rows = out.history.rows();
    for (const auto& r : rows) {
        if (r.mass_alive == 0.0) {
            rep.first_empty_time = r.t;
            break;
        }
    }
    rep.budget_u_l1linf = out.history.integral_u_linf(rows.front().t, rows.back().t);
    rep.budget_ok = rep.budget_u_l1linf < build.config.budget_limit;
    try {
        DecayFit fit = fit_decay(out.history.times(), out.history.energies());
        rep.decay_lambda = fit.lambda;
        rep.decay_r2 = fit.r_squared;
    } catch (const ValidationError&) {
        rep.decay_lambda = 0.0;
        rep.decay_r2 = 0.0;
    }

    switch (build.config.kind) {
        case ScenarioKind::confinement:
            rep.pass = rep.absorbed_mass == 0.0 &&
                       rep.measured_max_radius <= rep.predicted_max_radius + 1e-12;
            rep.detail = "confinement: zero absorption and support radius bound";
            break;
        case ScenarioKind::escape: {
            bool empty_after_T = true;
            bool seen = false;
            for (const auto& r : rows) {
                if (r.t >= build.config.horizon_T - 1e-12) {
                    seen = true;
                    if (r.mass_alive != 0.0) empty_after_T = false;
                }
            }
            rep.pass = seen && empty_after_T;
            rep.detail = "escape: alive mass zero for all recorded t >= T";
            break;
        }
        case ScenarioKind::mixed:
            rep.pass = rep.final_mass == build.config.alpha;
            rep.detail = "mixed: final mass equals alpha exactly";
            break;
    }
    sr.report = rep;
    sr.outputs = std::move(out);
    return sr;
}

}  // namespace vnslab
