#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "vnslab/asymptotics.hpp"
#include "vnslab/kinetic.hpp"

namespace vnslab {

// One row of timeseries.csv. Column order is normative.
struct DiagnosticsRecord {
    double t = 0.0;
    double energy = 0.0;
    double dissipation = 0.0;
    double mass_alive = 0.0;
    double mass_absorbed = 0.0;
    double m1 = 0.0;
    double m2 = 0.0;
    double m6 = 0.0;
    double nq = 0.0;
    double sup_rho = 0.0;
    double sup_j = 0.0;
    double u_l2 = 0.0;
    double grad_u_l2 = 0.0;
    double u_linf = 0.0;
    double grad_u_linf = 0.0;
    double budget_grad_u = 0.0;   // int_0^t ||grad u||_Linf, trapezoid
    double cum_force_sq = 0.0;    // int_0^t ||F||_L2^2
    double energy_residual = 0.0; // E(t) + int_0^t D - E(0)

    static const std::vector<std::string>& column_names();
};

struct MonitorConstants {
    double c1 = 1.0;
    double c2 = 1.0;
    double delta = 0.1;  // satisfies delta e^delta <= 1/9
    double q = 5.0;      // pointwise decay order for N_q
};

// Append-only per-step history with trapezoid accumulators for every
// monitored time integral.
class DiagnosticsHistory {
  public:
    explicit DiagnosticsHistory(MonitorConstants mc = {}) : mc_(mc) {}

    // Builds and appends a fully populated record; force_l2_sq is
    // ||F||_L2^2 of the force used for the step into this state.
    const DiagnosticsRecord& record_step(const FluidSolver& solver,
                                         const FluidState& fluid,
                                         const ParticleEnsemble& ensemble,
                                         const KineticMoments& moments,
                                         double force_l2_sq);

    const std::vector<DiagnosticsRecord>& rows() const { return rows_; }
    bool empty() const { return rows_.empty(); }
    const DiagnosticsRecord& back() const { return rows_.back(); }
    const MonitorConstants& constants() const { return mc_; }

    double initial_energy() const { return e0_; }
    double grad_u0_sq() const { return grad_u0_sq_; }
    // int_a^b ||u||_Linf by trapezoid on the recorded grid.
    double integral_u_linf(double a, double b) const;
    double integral_grad_u_linf(double a, double b) const;
    double integral_dissipation(double a, double b) const;
    double integral_sqrt_energy(double a, double b) const;

    std::vector<double> times() const;
    std::vector<double> energies() const;
    std::vector<double> column(const std::string& name) const;

    void write_csv(std::ostream& os) const;

  private:
    MonitorConstants mc_;
    std::vector<DiagnosticsRecord> rows_;
    double e0_ = 0.0;
    double grad_u0_sq_ = 0.0;
    double cum_diss_ = 0.0;
    double cum_grad_linf_ = 0.0;
    double cum_force_sq_ = 0.0;
    std::vector<double> u_linf_series_;
};

struct SmallnessReport {
    double e0 = 0.0;
    double u0_h1 = 0.0;  // ||u0||_L2 + ||grad u0||_L2 proxy for the H1 norm
    double nq_f0 = 0.0;
    double m6_f0 = 0.0;
    double c1 = 1.0, c2 = 1.0, delta = 0.1;
    double strong_existence_margin = 0.0;  // 1/sqrt(8 C1 C2) - [||grad u0||^2 + C1 int ||F||^2]
    double budget_margin_from0 = 0.0;      // delta - int_0^t ||grad u||_inf
    double budget_margin_from1 = 0.0;      // delta - int_1^t ||grad u||_inf
    double t_star = 0.0;                   // first violation time, inf if none
    bool t_star_finite = false;
    double brinkman_lhs = 0.0;   // int ||F||^2
    double brinkman_rhs = 0.0;   // sup rho * E(0)
    double brinkman_factor = 0.0;
    // max over steps of N_q(f(t)) / [e^{d t} (1 + (int_0^t ||u||_inf)^q) N_q(f0)];
    // the propagation bound holds up to a constant, so this is reported only.
    double nq_ratio_max = 0.0;
};

SmallnessReport smallness_report(const DiagnosticsHistory& h, int dim = 2);

struct MomentAuditRow {
    double t = 0.0;
    double lhs = 0.0;    // M_ell
    double rhs = 0.0;    // (sup g + 1) * C_{k,ell,d} * M_k^{(ell+d)/(k+d)}
    double ratio = 0.0;
    double sup_g = 0.0;  // velocity-marginal density sup estimate
};

// Optimal radius-splitting constant for
//   m_ell <= ||g||_inf sigma_d R^{ell+d}/(ell+d) + R^{ell-k} m_k:
// C = [ (b/a)^{a/(a+b)} + (a/b)^{b/(a+b)} ] (sigma_d/(ell+d))^{b/(a+b)}
// with a = ell+d, b = k-ell.
double moment_interpolation_constant(int dim, double k, double ell);

// Audits M_ell <= (sup g + 1) C M_k^{(ell+d)/(k+d)} on an ensemble; g is the
// velocity marginal, its sup estimated by a binned kernel density.
MomentAuditRow moment_interpolation_audit(const ParticleEnsemble& e, double t,
                                          double k, double ell);

}  // namespace vnslab
