#pragma once

#include <optional>
#include <vector>

#include "vnslab/flowmap.hpp"
#include "vnslab/kinetic.hpp"

namespace vnslab {

// E = 1/2 ||u||_L2^2 + 1/2 M2 f ; D = sum_i w_i |u(x_i)-v_i|^2 + ||grad u||_L2^2.
struct EnergyDissipation {
    double energy = 0.0;
    double dissipation = 0.0;
    double fluid_energy = 0.0;
    double kinetic_energy = 0.0;
};

EnergyDissipation energy_and_dissipation(const ParticleEnsemble& e, const Domain& d,
                                         const MacField& u);

// W1(f, rho_f x delta_{v=0}) = M1 f, exact by Monge-Kantorovich duality.
double w1_monokinetic(const ParticleEnsemble& e);

struct WeightedPoint {
    Vec x;
    double w;
};

struct TransportResult {
    double cost = 0.0;
    double dual_gap = 0.0;        // primal - dual certificate value
    double max_dual_violation = 0.0;  // of the 1-Lipschitz constraints on arcs
};

// Exact 1-Wasserstein distance between small weighted point clouds by
// successive-shortest-path min-cost flow; the node potentials provide the
// Kantorovich dual certificate. Throws ValidationError on mass mismatch.
TransportResult w1_empirical_full(const std::vector<WeightedPoint>& mu,
                                  const std::vector<WeightedPoint>& nu,
                                  double mass_tol = 1e-9);
double w1_empirical(const std::vector<WeightedPoint>& mu,
                    const std::vector<WeightedPoint>& nu, double mass_tol = 1e-9);

// W1 between two cell-centered densities (as measures on cell centers);
// coarsens by factors of 2 until at most max_points support points remain.
double w1_grid(const ScalarField& a, const ScalarField& b, int max_points = 4096);

// H^-1 distance: ||grad phi||_L2 with -Lap phi = rho1-rho2, phi=0 on the wall.
double hminus1_distance(const PoissonSolver& ps, const ScalarField& rho1,
                        const ScalarField& rho2);

struct DecayFit {
    double lambda = 0.0;  // fitted rate, E ~ C exp(-lambda t)
    double prefactor = 0.0;
    double r_squared = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;
};

// Least squares on log E over [window_lo, window_hi]; window defaults to the
// last half of the series. Throws ValidationError on nonpositive samples in
// the window or fewer than 10 points.
DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& e,
                   std::optional<double> window_lo = std::nullopt,
                   std::optional<double> window_hi = std::nullopt);

struct XinftyResult {
    Vec x_infinity;
    bool survives = false;  // no exit before the truncation horizon
    double tail_bound = 0.0;
};

struct TailModel {
    double amplitude = 0.0;  // ||u(t)||_inf ~ amplitude * exp(-rate (t - t0))
    double rate = 0.0;
    double t0 = 0.0;

    double integral_from(double t) const;  // extrapolated int_t^inf ||u||_inf
};

// Fit the sup-norm decay of the stored series (last half window).
TailModel fit_tail(const FlowSnapshotSeries& s);

// X_inf(z) = x + v + int_0^inf Pu(tau, X_tau) dtau, truncated at the series
// end; the discrete identity X(T)+V(T) = x+v+int_0^T Pu makes the truncation
// error exactly the field tail, bounded by the fitted model. Throws
// NumericError when the tail bound exceeds tail_tol.
XinftyResult compute_xinfty(const FlowSnapshotSeries& s, const PhaseState& z,
                            double tail_tol, const TailModel& tail);

struct ProfileEstimate {
    ScalarField rho;
    double mass = 0.0;
    enum class Construction { pushforward, change_of_variables, long_time } tag;
    double error_estimate = 0.0;  // MC or quadrature scale, reported
};

// Monte-Carlo pushforward: sample f0, keep survivors, deposit at X_inf.
ProfileEstimate profile_pushforward(const InitialDataSpec& f0, const Domain& d,
                                    const FlowSnapshotSeries& s, const GridSpec& grid,
                                    double tail_tol, std::int64_t samples,
                                    std::uint64_t seed);

struct ChangeOfVariablesOpts {
    int v_nodes_per_axis = 6;  // tensor midpoint rule over the v-law support box
    double invert_tol = 1e-10;
    int invert_max_iter = 60;
    double fd_step = 1e-6;  // for det D_x X_inf by finite differences
};

// Quadrature of rho_inf(x) = int 1_{U_inf} f0(Xinv_{inf,v}(x), v)
// |det D_x Xinv_{inf,v}(x)| dv; inversion by the fixed-point perturbation of
// identity (contraction under the 1/9 gradient budget bound).
ProfileEstimate profile_change_of_variables(const InitialDataSpec& f0, const Domain& d,
                                            const FlowSnapshotSeries& s,
                                            const GridSpec& grid, double tail_tol,
                                            const ChangeOfVariablesOpts& opts = {});

struct IndicatorReport {
    std::int64_t samples = 0;
    std::int64_t monotone = 0;    // samples whose indicator never increases
    std::int64_t stabilized = 0;  // indicator equal at the last two horizons
    std::vector<std::vector<int>> table;  // per sample, per horizon
};

// Checks 1_{tau+ > T} against a horizon list: monotone non-increasing in T
// and stabilizing (Lebesgue limit of the survival indicator).
IndicatorReport indicator_limit_check(const FlowSnapshotSeries& s,
                                      const std::vector<PhaseState>& zs,
                                      const std::vector<double>& horizons);

}  // namespace vnslab
