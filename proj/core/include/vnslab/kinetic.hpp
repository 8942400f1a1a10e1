#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "vnslab/fluid.hpp"
#include "vnslab/geometry.hpp"
#include "vnslab/grid.hpp"

namespace vnslab {

// Spatial law: uniform on the ball B(a, eps) or uniform on a product box.
struct SpatialLaw {
    enum class Kind { ball, box } kind = Kind::ball;
    Vec center;         // ball
    double radius = 0;  // ball
    Vec lo, hi;         // box

    double density(int dim, const Vec& x) const;  // normalized to mass 1
    Vec sample(int dim, std::mt19937_64& rng) const;
    double max_radius_about(int dim, const Vec& a) const;
};

// Velocity law: uniform ball B(0,R) or uniform annulus r_lo <= |v| <= r_hi.
struct VelocityLaw {
    enum class Kind { ball, annulus } kind = Kind::ball;
    double r_lo = 0.0;
    double r_hi = 1.0;  // ball radius, or annulus outer radius

    double density(int dim, const Vec& v) const;
    Vec sample(int dim, std::mt19937_64& rng) const;
};

// One stratum = one (spatial, velocity) product law with a fixed mass share.
struct Stratum {
    SpatialLaw x_law;
    VelocityLaw v_law;
    double mass = 1.0;
};

// Admissible initial condition: nonnegative, mass 1, compact support in
// Omega x R^d. Mixtures (confined + escaping components) are stratified.
struct InitialDataSpec {
    std::vector<Stratum> strata;  // masses sum to 1
    std::int64_t count = 10000;   // particles across all strata
    std::uint64_t seed = 1;

    double density(int dim, const Vec& x, const Vec& v) const;
    void validate(const Domain& d) const;  // supports inside Omega, mass 1
};

enum class ParticleStatus : std::uint8_t { alive = 0, absorbed = 1 };

struct AbsorptionEvent {
    double t_exit;
    Vec x_exit;
    Vec v_exit;
    double weight;
    PhaseBoundaryClass boundary_class;
    std::int64_t particle;
};

// Weighted phase-space particles with an exact absorption ledger.
//
// Mass bookkeeping is done in integer quanta per stratum: stratum s carries
// quantum q_s (a power-of-two scaling of its mass share, so every quanta
// count below 2^53 converts to a double without rounding) and each particle
// holds an integer number of quanta. Alive + absorbed quanta per stratum is
// conserved exactly; the double-valued masses derived from the counts sum
// bitwise to the initial mass.
struct ParticleEnsemble {
    int dim = 2;
    std::vector<Vec> x;
    std::vector<Vec> v;
    std::vector<double> w;  // quanta * quantum, the physical weight
    std::vector<std::uint64_t> quanta;
    std::vector<std::uint8_t> stratum;
    std::vector<ParticleStatus> status;
    std::vector<AbsorptionEvent> ledger;

    struct StratumAccount {
        double quantum = 0.0;      // exact power-of-two multiple of the share's ulp
        std::uint64_t total = 0;   // quanta at t=0
        std::uint64_t alive = 0;
        std::uint64_t absorbed = 0;
        double mass_total = 0.0;   // total * quantum, exact
    };
    std::vector<StratumAccount> accounts;
    std::uint64_t seed = 0;
    std::int64_t grazing_exits = 0;  // Sigma0 absorptions, reported

    std::int64_t size() const { return static_cast<std::int64_t>(x.size()); }
    std::int64_t alive_count() const;

    // Exact masses: every per-stratum sum n*q is a single rounding-free
    // double; mass_absorbed is the exact complement so that
    // mass_alive() + mass_absorbed() == mass_initial() bitwise.
    double mass_initial() const;
    double mass_alive() const;
    double mass_absorbed() const { return mass_initial() - mass_alive(); }
    double stratum_mass_alive(int s) const;
    bool quanta_conserved() const;

    double max_support_radius(const Vec& a) const;  // over alive particles
};

// Kinetic moments deposited on the grid plus global scalar moments.
struct KineticMoments {
    ScalarField rho;          // cell-centered mass density
    ScalarField j_cell[3];    // cell-centered momentum density (diagnostics)
    MacField j;               // momentum density on the staggered grid
    MacField rho_faces;       // mass density co-located with each j component
    double m0 = 0.0;          // alive mass
    double m1 = 0.0;          // sum w |v|
    double m2 = 0.0;          // sum w |v|^2
    double m6 = 0.0;          // sum w |v|^6
    double nq = 0.0;          // pointwise decay estimate N_q
    double q = 5.0;
    double sup_rho = 0.0;     // max cell rho
    double sup_j = 0.0;       // max cell |j|
};

ParticleEnsemble sample_initial(const InitialDataSpec& spec, const Domain& d);

// Exact one-step solution of Xdot = V, Vdot = ubar - V with ubar frozen at
// the step start: V+ = e^{-dt} V + (1-e^{-dt}) ubar,
// X+ = X + (1-e^{-dt}) V + (dt-1+e^{-dt}) ubar.
void push_particles(ParticleEnsemble& e, const Domain& d, const MacField& u,
                    double dt);

// Mark particles that left the closed box as absorbed; the crossing time is
// located on the frozen-field closed-form sub-path by scan + bisection to
// 1e-10 in time. The last push's start states must be passed in.
struct PushRecord {
    std::vector<Vec> x0, v0;  // states at step start, alive slots only valid
    std::vector<Vec> ubar;    // frozen field per particle
    double t0 = 0.0;
    double dt = 0.0;
};

// Runs push and returns the record needed by absorb.
PushRecord push_particles_recorded(ParticleEnsemble& e, const Domain& d,
                                   const MacField& u, double dt);

void absorb(ParticleEnsemble& e, const Domain& d, const PushRecord& rec);

KineticMoments deposit_moments(const ParticleEnsemble& e, const Domain& d,
                               const GridSpec& g, double q = 5.0);

// F = j_f - rho_f u on the staggered grid.
ForceField brinkman_force(const KineticMoments& m, const MacField& u);

// Evaluate the trajectory of the frozen-field scheme on the closed-form
// sub-path at offset s in [0, dt] from (x0, v0) with frozen ubar.
Vec substep_position(const Vec& x0, const Vec& v0, const Vec& ubar, double s);
Vec substep_velocity(const Vec& v0, const Vec& ubar, double s);

class FlowSnapshotSeries;  // flowmap.hpp

// Representation-formula evaluation: backward characteristics from (t,x,v);
// returns e^{d t} f0(Z_{0,t}(x,v)) when the backward path stays in Omega on
// [0,t], else zero. Throws NumericError if the series does not cover [0,t].
double representation_eval(const InitialDataSpec& f0, const Domain& d,
                           const FlowSnapshotSeries& flow, double t, const Vec& x,
                           const Vec& v);

}  // namespace vnslab
