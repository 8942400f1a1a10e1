#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "vnslab/asymptotics.hpp"
#include "vnslab/sim.hpp"

using namespace vnslab;

namespace {

InitialDataSpec ball_spec(std::int64_t n) {
    InitialDataSpec spec;
    Stratum st;
    st.x_law.center = Vec(0.5, 0.5);
    st.x_law.radius = 0.2;
    st.v_law.r_hi = 0.1;
    st.mass = 1.0;
    spec.strata.push_back(st);
    spec.count = n;
    spec.seed = 3;
    return spec;
}

MacField demo_field(const GridSpec& g) {
    MacField u(g);
    for (int a = 0; a < g.dim; ++a) {
        for (int i = 0; i < u.size(a, 0); ++i) {
            for (int j = 0; j < u.size(a, 1); ++j) {
                Vec p = u.pos(a, i, j, 0);
                double sx = std::sin(M_PI * p[0]), sy = std::sin(M_PI * p[1]);
                u.at(a, i, j, 0) = 0.01 * sx * sx * sy * (a == 0 ? 1.0 : -1.0);
            }
        }
    }
    u.zero_boundary_normals();
    return u;
}

}  // namespace

static void BM_push_particles(benchmark::State& state) {
    Domain d = Domain::unit_square();
    GridSpec g = GridSpec::make(d, 64);
    MacField u = demo_field(g);
    ParticleEnsemble e = sample_initial(ball_spec(state.range(0)), d);
    for (auto _ : state) {
        push_particles(e, d, u, 1e-3);
        benchmark::DoNotOptimize(e.x.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_push_particles)->Arg(10000)->Arg(100000);

static void BM_deposit_moments(benchmark::State& state) {
    Domain d = Domain::unit_square();
    GridSpec g = GridSpec::make(d, 64);
    ParticleEnsemble e = sample_initial(ball_spec(state.range(0)), d);
    for (auto _ : state) {
        KineticMoments m = deposit_moments(e, d, g);
        benchmark::DoNotOptimize(m.m2);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_deposit_moments)->Arg(10000)->Arg(100000);

static void BM_poisson_dirichlet_fft(benchmark::State& state) {
    Domain d = Domain::unit_square();
    GridSpec g = GridSpec::make(d, static_cast<int>(state.range(0)));
    PoissonSolver ps(g);
    ScalarField rhs(g);
    std::mt19937_64 rng(1);
    for (double& v : rhs.v) v = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
    for (auto _ : state) {
        ScalarField phi = ps.solve_dirichlet(rhs);
        benchmark::DoNotOptimize(phi.v.data());
    }
}
BENCHMARK(BM_poisson_dirichlet_fft)->Arg(64)->Arg(128)->Arg(256);

static void BM_poisson_dirichlet_cg(benchmark::State& state) {
    Domain d = Domain::unit_square();
    GridSpec g = GridSpec::make(d, static_cast<int>(state.range(0)));
    SolverOpts opts;
    opts.engine = PoissonEngine::cg;
    PoissonSolver ps(g, opts);
    ScalarField rhs(g);
    std::mt19937_64 rng(1);
    for (double& v : rhs.v) v = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
    for (auto _ : state) {
        ScalarField phi = ps.solve_dirichlet(rhs);
        benchmark::DoNotOptimize(phi.v.data());
    }
}
BENCHMARK(BM_poisson_dirichlet_cg)->Arg(64)->Arg(128);

static void BM_fluid_step(benchmark::State& state) {
    Domain d = Domain::unit_square();
    FluidParams p;
    p.resolution[0] = p.resolution[1] = static_cast<int>(state.range(0));
    p.dt = 2e-3;
    FluidSolver solver(d, p);
    FluidState s = solver.make_initial([](const Vec& q) {
        double sx = std::sin(M_PI * q[0]), sy = std::sin(M_PI * q[1]);
        Vec u;
        u[0] = 1e-3 * M_PI * sx * sx * std::sin(2 * M_PI * q[1]);
        u[1] = -1e-3 * M_PI * std::sin(2 * M_PI * q[0]) * sy * sy;
        return u;
    });
    ForceField f(solver.grid());
    for (auto _ : state) {
        solver.step(s, f);
        benchmark::DoNotOptimize(s.u.comp[0].data());
    }
}
BENCHMARK(BM_fluid_step)->Arg(64)->Arg(128);

static void BM_w1_empirical(benchmark::State& state) {
    std::mt19937_64 rng(5);
    auto uni = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    const int n = static_cast<int>(state.range(0));
    std::vector<WeightedPoint> mu, nu;
    for (int i = 0; i < n; ++i) {
        mu.push_back({Vec(uni(), uni()), 1.0});
        nu.push_back({Vec(uni(), uni()), 1.0});
    }
    for (auto _ : state) {
        double c = w1_empirical(mu, nu);
        benchmark::DoNotOptimize(c);
    }
}
BENCHMARK(BM_w1_empirical)->Arg(50)->Arg(200)->Arg(500);

static void BM_coupled_run_50_steps(benchmark::State& state) {
    RunConfig cfg;
    cfg.domain = Domain::unit_square();
    cfg.fluid.resolution[0] = cfg.fluid.resolution[1] = 64;
    cfg.fluid.dt = 2e-3;
    cfg.particle_count = state.range(0);
    cfg.initial_data = ball_spec(state.range(0));
    cfg.horizon = 50 * cfg.fluid.dt;
    cfg.snapshot_stride = 0;
    for (auto _ : state) {
        RunOutputs out = run_coupled(cfg);
        benchmark::DoNotOptimize(out.history.rows().size());
    }
    state.SetItemsProcessed(state.iterations() * 50);
}
BENCHMARK(BM_coupled_run_50_steps)->Arg(10000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
