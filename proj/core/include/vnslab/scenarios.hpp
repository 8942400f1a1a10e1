#pragma once

#include <string>

#include "vnslab/kinetic.hpp"

namespace vnslab {

enum class ScenarioKind { confinement, escape, mixed };

const char* to_string(ScenarioKind k);

// Constructive initial-data regimes: confinement (no absorption), escape
// (total absorption by time T), mixed (prescribed asymptotic mass alpha).
struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::confinement;
    Vec center;          // a
    double eps = 0.1;    // spatial ball radius
    double r = 0.1;      // confinement velocity radius R
    double r1 = 0.0;     // mixed: confined component radius
    double r2 = 0.0;     // mixed/escape: escaping component inner radius
    double alpha = 1.0;  // mixed: confined mass share
    double horizon_T = 1.0;  // escape deadline

    // Derived quantities.
    double gap = 0.0;           // d(closure of B(a,eps), boundary)
    double delta_conf = 0.0;    // (gap/2 - R)/2
    double confinement_radius = 0.0;  // eps + R + 2 delta
    double big_l = 0.0;         // L = 2 * circumradius(Omega, a)
    double budget_limit = 0.0;  // L/8, required ||u||_{L1 Linf} bound
};

struct ScenarioBuild {
    ScenarioConfig config;
    InitialDataSpec init;
};

// Validates 2R < gap; derives delta and the predicted confinement ball
// radius eps + R + 2 delta. Throws ValidationError when violated.
ScenarioBuild build_confinement(const Domain& d, const Vec& a, double eps, double r,
                                std::int64_t count = 10000, std::uint64_t seed = 1);

// L = 2 circumradius(Omega, a); R = 1.05 (2L+eps)/(1-e^{-T}); velocity law
// uniform on {R <= |v| <= 2R}. Records the L/8 budget requirement.
ScenarioBuild build_escape(const Domain& d, const Vec& a, double eps, double horizon_T,
                           std::int64_t count = 10000, std::uint64_t seed = 1);

// Stratified mix: confined component below R1 with mass alpha, escaping
// component above R2 with mass 1-alpha. alpha in [0,1]; degenerate alphas
// fall back to the pure scenarios' laws.
ScenarioBuild build_mixed(const Domain& d, const Vec& a, double eps, double alpha,
                          double horizon_T, std::int64_t count = 10000,
                          std::uint64_t seed = 1, double r1 = -1.0);

struct ScenarioReport {
    ScenarioConfig config;
    // Predictions.
    double predicted_max_radius = 0.0;  // confinement
    double predicted_final_mass = 0.0;
    double escape_deadline = 0.0;
    // Measured.
    double measured_max_radius = 0.0;
    double absorbed_mass = 0.0;
    double final_mass = 0.0;
    double first_empty_time = -1.0;  // first recorded t with zero alive mass
    double budget_u_l1linf = 0.0;    // int ||u||_Linf over the run
    bool budget_ok = false;
    double decay_lambda = 0.0;
    double decay_r2 = 0.0;
    std::int64_t grazing_exits = 0;
    bool pass = false;
    std::string detail;

    std::string to_json() const;
};

}  // namespace vnslab
