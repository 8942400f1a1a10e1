#pragma once

#include <optional>
#include <vector>

#include "vnslab/grid.hpp"

namespace vnslab {

struct PhaseState {
    Vec x;
    Vec v;
};

// 2d x 2d phase-space Jacobian stored as a dense 6x6 with the unused block
// rows/cols equal to identity, so determinants in d=2 come out right.
struct PhaseJacobian {
    double m[6][6];
    static PhaseJacobian identity();
    double determinant(int dim) const;
};

struct VariationalState {
    PhaseState z;
    PhaseJacobian jac;
};

struct ExitEvent {
    double tau;  // exit time
    PhaseState state;
    PhaseBoundaryClass boundary_class;
};

// Time-indexed stored velocity fields enabling exact replay of the
// characteristics. Interpolation in time is piecewise constant on
// [t_k, t_{k+1}), matching the solver's frozen-field convention: with
// substeps=1 and snapshot times equal to the solver steps, forward flow
// reproduces particle paths bitwise.
class FlowSnapshotSeries {
  public:
    FlowSnapshotSeries(const Domain& d, int substeps = 1);

    void push_back(double t, const MacField& u);
    void push_back(double t, MacField&& u);

    // When the snapshots come from a uniform-step solver run, the recorded
    // step size makes full-substep replay reproduce the solver arithmetic
    // bitwise (stored times only accumulate rounding).
    void set_uniform_dt(double dt) { uniform_dt_ = dt; }
    double uniform_dt() const { return uniform_dt_; }

    // Synthetic series: one analytic field sampled onto a grid, active on
    // [t0, t1] with span/steps snapshots (the field is time-independent).
    static FlowSnapshotSeries constant_field(const Domain& d, const MacField& u,
                                             double t0, double t1, int substeps = 1);

    const Domain& domain() const { return domain_; }
    int substeps() const { return substeps_; }
    std::size_t size() const { return times_.size(); }
    double time(std::size_t k) const { return times_[k]; }
    const MacField& field(std::size_t k) const { return fields_[k]; }
    double t_front() const { return times_.front(); }
    double t_back() const { return times_.back(); }
    bool covers(double a, double b) const;

    // Duration of one elementary substep of interval k (the recorded solver
    // dt when set and substeps == 1, else the interval length / substeps).
    double substep_duration(std::size_t k) const {
        if (uniform_dt_ > 0.0 && substeps_ == 1) return uniform_dt_;
        return (times_[k + 1] - times_[k]) / substeps_;
    }

    // sup norms per snapshot (cached): used for budgets and tail bounds.
    double u_linf(std::size_t k) const;
    double grad_u_linf(std::size_t k) const;
    // Trapezoid of the snapshot sup-norm series over [a,b] within coverage.
    double integral_u_linf(double a, double b) const;
    double integral_grad_u_linf(double a, double b) const;

  private:
    Domain domain_;
    int substeps_ = 1;
    double uniform_dt_ = 0.0;  // 0 = derive interval lengths from the times
    std::vector<double> times_;
    std::vector<MacField> fields_;
    mutable std::vector<double> u_linf_cache_;
    mutable std::vector<double> grad_linf_cache_;
    void ensure_norms() const;
};

// Flow of the drag ODE Xdot = V, Vdot = (Pu) - V through (t, z), forward or
// backward. The trajectory through any phase point is the unique trajectory
// of the fixed elementary-substep grid passing through it, so composition
// and inversion hold to fixed-point tolerance.
PhaseState flow(const FlowSnapshotSeries& s, double t_from, double t_to,
                const PhaseState& z);

// Flow with the variational (linearized) dynamics integrated alongside; the
// Jacobian factor per substep is the exact differential of the substep map.
VariationalState flow_variational(const FlowSnapshotSeries& s, double t_from,
                                  double t_to, const PhaseState& z);

PhaseJacobian phase_jacobian(const FlowSnapshotSeries& s, double t_from,
                             double t_to, const PhaseState& z);

// Backward flow from (t, z) to time 0 that also reports whether the spatial
// path stayed inside Omega on [0, t] (the representation formula's survival
// set O^t); sampling granularity matches the absorption scan.
PhaseState flow_backward_checked(const FlowSnapshotSeries& s, double t, const PhaseState& z,
                                 bool* stayed_inside);

// First boundary-crossing time of the forward trajectory from (t0, z interior),
// located by sign change of the boundary distance plus bisection to 1e-10.
// nullopt = trajectory stays inside through the horizon.
std::optional<ExitEvent> exit_time_forward(const FlowSnapshotSeries& s, double t0,
                                           const PhaseState& z, double horizon);

struct StraighteningResult {
    Vec gamma;          // Gamma_{t,x}(v) = V(0; t, x, v)
    double det_dv;      // det D_v Gamma
    double budget_used; // int_0^t ||grad u||_Linf
};

// The straightening map v -> V(0;t,x,v) and its velocity Jacobian. Refuses
// (NumericError) when the gradient budget int_0^t ||grad u||_inf >= delta.
StraighteningResult straightening_map(const FlowSnapshotSeries& s, double t,
                                      const Vec& x, const Vec& v, double delta);

}  // namespace vnslab
