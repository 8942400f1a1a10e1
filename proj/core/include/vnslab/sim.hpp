#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "vnslab/diagnostics.hpp"
#include "vnslab/scenarios.hpp"

namespace vnslab {

struct InitialVelocitySpec {
    enum class Kind { zero, single_mode } kind = Kind::zero;
    double amplitude = 0.0;
};

struct RunConfig {
    Domain domain = Domain::unit_square();
    FluidParams fluid;
    std::int64_t particle_count = 10000;
    std::uint64_t seed = 1;
    std::optional<InitialDataSpec> initial_data;  // explicit law, or...
    std::optional<ScenarioConfig> scenario;       // ...a scenario builder
    InitialVelocitySpec u0;
    double horizon = 1.0;
    int snapshot_stride = 1;  // 0 = no snapshots
    std::string output_dir = "out";
    bool deterministic = true;
    bool kinetic_only = false;  // fluid frozen at zero
    MonitorConstants monitors;
    bool metric_w1 = true;
    bool metric_hminus1 = true;
    int rho_sample_stride = 0;     // coarse rho_f(t) capture for metric series
    int rho_sample_resolution = 32;

    void validate() const;
};

// Everything a run produces, in memory. The CLI persists it via io.hpp.
struct RunOutputs {
    RunConfig config;
    InitialDataSpec init;
    DiagnosticsHistory history;
    ParticleEnsemble ensemble;   // final state
    std::unique_ptr<FluidState> fluid;
    std::unique_ptr<FluidSolver> solver;
    std::shared_ptr<FlowSnapshotSeries> snapshots;  // null when stride == 0
    std::vector<double> rho_sample_times;
    std::vector<ScalarField> rho_samples;
    double max_support_radius = 0.0;  // over the run, about the scenario center
    bool cfl_warned = false;
};

// Called after every recorded step with the live ensemble and the row just
// appended; used by audits that must see every step.
using StepObserver = std::function<void(const ParticleEnsemble&, const DiagnosticsRecord&)>;

// The initial data actually used by a run: the explicit law when given,
// else the scenario construction's.
InitialDataSpec resolve_initial_data(const RunConfig& cfg);

// The coupled loop. Step order is normative: deposit moments from the
// current ensemble, form F = j - rho u, step the fluid, push and absorb the
// particles with the pre-step fluid field, record diagnostics.
RunOutputs run_coupled(const RunConfig& cfg, const StepObserver& observer = {});

// Scenario driver: builds the initial data, runs the loop, evaluates the
// scenario's prediction and returns the report plus the raw outputs.
struct ScenarioRun {
    ScenarioReport report;
    RunOutputs outputs;
};

ScenarioRun run_scenario(const ScenarioConfig& scenario, const RunConfig& base);

std::string code_version();

}  // namespace vnslab
