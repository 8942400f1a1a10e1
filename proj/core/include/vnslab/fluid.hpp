#pragma once

#include <memory>

#include "vnslab/poisson.hpp"

namespace vnslab {

struct FluidParams {
    int resolution[3] = {64, 64, 1};
    double dt = 1e-3;
    double div_tol = 1e-8;
    SolverOpts solver;

    void validate(int dim) const;  // dt > 0, resolution >= 4 per used axis
};

// Incompressible velocity + pressure on the MAC grid, homogeneous Dirichlet
// boundary, unit viscosity. Invariants after every step: discrete divergence
// <= div_tol in every cell and exact zeros on the boundary normal faces.
struct FluidState {
    MacField u;
    ScalarField p;  // defined up to a constant; mean pinned to zero
    double t = 0.0;

    explicit FluidState(const GridSpec& g) : u(g), p(g) {}
};

// External source on the staggered grid (the Brinkman force).
using ForceField = MacField;

struct FluidNorms {
    double u_l2 = 0.0;
    double grad_u_l2 = 0.0;
    double u_linf = 0.0;
    double grad_u_linf = 0.0;  // max over cells of the Frobenius norm of grad u
};

class FluidSolver {
  public:
    FluidSolver(const Domain& d, const FluidParams& p);

    // One projection step: semi-Lagrangian advection, add force, implicit
    // diffusion, Leray projection. Warns (returns true in cfl_violated) when
    // max|u| dt exceeds the cell size.
    void step(FluidState& s, const ForceField& force);

    // Project a staggered field onto the discretely divergence-free subspace.
    void leray_project(MacField& u) const;

    // -Lap phi = rhs with phi = 0 on the wall.
    ScalarField poisson_solve_dirichlet(const ScalarField& rhs) const;

    FluidNorms norms(const FluidState& s) const;

    double max_divergence(const MacField& u) const;
    bool last_step_cfl_violated() const { return cfl_violated_; }

    const GridSpec& grid() const { return grid_; }
    const Domain& domain() const { return domain_; }
    const FluidParams& params() const { return params_; }
    const PoissonSolver& poisson() const { return poisson_; }

    // Builder for initial data: interpolates an analytic field onto the grid,
    // zeroes the boundary trace and projects, per the admissibility rules.
    FluidState make_initial(const std::function<Vec(const Vec&)>& u0) const;
    FluidState make_rest() const { return FluidState(grid_); }

  private:
    Domain domain_;
    FluidParams params_;
    GridSpec grid_;
    PoissonSolver poisson_;
    bool cfl_violated_ = false;

    void advect(MacField& u) const;
};

FluidNorms fluid_norms(const Domain& d, const MacField& u);

}  // namespace vnslab
