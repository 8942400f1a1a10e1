#include "vnslab/fluid.hpp"

#include <algorithm>
#include <cmath>

#include "vnslab/errors.hpp"

namespace vnslab {

void FluidParams::validate(int dim) const {
    if (!(dt > 0.0)) throw ValidationError("fluid: dt must be positive");
    for (int a = 0; a < dim; ++a) {
        if (resolution[a] < 4) throw ValidationError("fluid: resolution must be >= 4 per axis");
    }
    if (!(div_tol > 0.0)) throw ValidationError("fluid: div_tol must be positive");
}

FluidSolver::FluidSolver(const Domain& d, const FluidParams& p)
    : domain_(d), params_(p), grid_(GridSpec::make(d, p.resolution)), poisson_(grid_, p.solver) {
    params_.validate(d.dim);
}

namespace {

// Sample the full velocity at p for advection backtraces: zero outside the
// closed box (no-slip wall value).
Vec sample_velocity(const Domain& d, const MacField& u, const Vec& p) {
    for (int a = 0; a < d.dim; ++a) {
        if (p[a] < d.lo[a] || p[a] > d.hi[a]) return Vec();
    }
    return interp_mac(u, p);
}

}  // namespace

void FluidSolver::advect(MacField& u) const {
    const double dt = params_.dt;
    MacField out(grid_);
    for (int a = 0; a < grid_.dim; ++a) {
        int na = u.size(a, 0), nb = u.size(a, 1), nc = u.size(a, 2);
        for (int i = 0; i < na; ++i) {
            for (int j = 0; j < nb; ++j) {
                for (int k = 0; k < nc; ++k) {
                    int idx[3] = {i, j, k};
                    if (idx[a] == 0 || idx[a] == grid_.n[a]) continue;  // wall plane
                    Vec p = u.pos(a, i, j, k);
                    // RK2 backtrace along the current field.
                    Vec v1 = sample_velocity(domain_, u, p);
                    Vec pm = p - 0.5 * dt * v1;
                    Vec v2 = sample_velocity(domain_, u, pm);
                    Vec pb = p - dt * v2;
                    bool outside = false;
                    for (int ax = 0; ax < grid_.dim; ++ax) {
                        if (pb[ax] < domain_.lo[ax] || pb[ax] > domain_.hi[ax]) outside = true;
                    }
                    out.at(a, i, j, k) = outside ? 0.0 : interp_component(u, a, pb);
                }
            }
        }
    }
    u = std::move(out);
}

void FluidSolver::step(FluidState& s, const ForceField& force) {
    cfl_violated_ = s.u.max_abs() * params_.dt > grid_.min_h();

    advect(s.u);

    // Implicit diffusion, unit viscosity.
    for (int a = 0; a < grid_.dim; ++a) {
        s.u.comp[a] = poisson_.solve_helmholtz_component(s.u, a, s.u.comp[a], params_.dt);
    }

    // External source.
    for (int a = 0; a < grid_.dim; ++a) {
        for (std::size_t i = 0; i < s.u.comp[a].size(); ++i) {
            s.u.comp[a][i] += params_.dt * force.comp[a][i];
        }
    }
    s.u.zero_boundary_normals();

    // Projection; the potential, scaled by 1/dt, is the pressure (mean
    // pinned to zero by the Neumann solve).
    {
        ScalarField div(grid_);
        divergence(s.u, div);
        for (double& v : div.v) v = -v;
        ScalarField phi = poisson_.solve_neumann(div);
        subtract_gradient(s.u, phi, 1.0);
        s.p = phi;
        for (double& v : s.p.v) v /= params_.dt;
    }
    ScalarField div(grid_);
    divergence(s.u, div);
    double dmax = 0.0;
    for (double v : div.v) dmax = std::max(dmax, std::abs(v));
    if (dmax > params_.div_tol) {
        throw NumericError("fluid step left divergence " + std::to_string(dmax));
    }
    s.t += params_.dt;
}

void FluidSolver::leray_project(MacField& u) const {
    u.zero_boundary_normals();
    ScalarField div(grid_);
    divergence(u, div);
    for (double& v : div.v) v = -v;
    ScalarField phi = poisson_.solve_neumann(div);
    subtract_gradient(u, phi, 1.0);
}

ScalarField FluidSolver::poisson_solve_dirichlet(const ScalarField& rhs) const {
    return poisson_.solve_dirichlet(rhs);
}

double FluidSolver::max_divergence(const MacField& u) const {
    ScalarField div(grid_);
    divergence(u, div);
    double dmax = 0.0;
    for (double v : div.v) dmax = std::max(dmax, std::abs(v));
    return dmax;
}

FluidState FluidSolver::make_initial(const std::function<Vec(const Vec&)>& u0) const {
    FluidState s(grid_);
    for (int a = 0; a < grid_.dim; ++a) {
        int na = s.u.size(a, 0), nb = s.u.size(a, 1), nc = s.u.size(a, 2);
        for (int i = 0; i < na; ++i) {
            for (int j = 0; j < nb; ++j) {
                for (int k = 0; k < nc; ++k) {
                    s.u.at(a, i, j, k) = u0(s.u.pos(a, i, j, k))[a];
                }
            }
        }
    }
    // Admissibility: zero trace and discrete divergence-free.
    s.u.zero_boundary_normals();
    leray_project(s.u);
    return s;
}

FluidNorms FluidSolver::norms(const FluidState& s) const { return fluid_norms(domain_, s.u); }

FluidNorms fluid_norms(const Domain& d, const MacField& u) {
    (void)d;
    const GridSpec& g = u.g;
    FluidNorms out;
    double vol = g.cell_volume();

    double l2 = 0.0;
    for (int a = 0; a < g.dim; ++a) {
        for (double x : u.comp[a]) l2 += x * x;
    }
    out.u_l2 = std::sqrt(l2 * vol);
    out.grad_u_l2 = std::sqrt(std::max(0.0, dirichlet_energy(u)));

    // Cell-centered |u| and Frobenius |grad u|; gradients by centered
    // differences of face averages, one-sided at the boundary cells.
    auto face_avg = [&](int a, int i, int j, int k) {
        int ip[3] = {i, j, k};
        ip[a] += 1;
        return 0.5 * (u.at(a, i, j, k) + u.at(a, ip[0], ip[1], ip[2]));
    };
    for (int i = 0; i < g.n[0]; ++i) {
        for (int j = 0; j < g.n[1]; ++j) {
            for (int k = 0; k < g.n[2]; ++k) {
                double um2 = 0.0;
                double fro2 = 0.0;
                int idx[3] = {i, j, k};
                for (int a = 0; a < g.dim; ++a) {
                    double ua = face_avg(a, i, j, k);
                    um2 += ua * ua;
                    for (int b = 0; b < g.dim; ++b) {
                        double dab;
                        if (b == a) {
                            int l[3] = {i, j, k};
                            l[a] += 1;
                            dab = (u.at(a, l[0], l[1], l[2]) - u.at(a, i, j, k)) / g.h[a];
                        } else {
                            int lo_i[3] = {i, j, k}, hi_i[3] = {i, j, k};
                            double span;
                            if (idx[b] == 0) {
                                hi_i[b] += 1;
                                span = g.h[b];
                            } else if (idx[b] == g.n[b] - 1) {
                                lo_i[b] -= 1;
                                span = g.h[b];
                            } else {
                                lo_i[b] -= 1;
                                hi_i[b] += 1;
                                span = 2.0 * g.h[b];
                            }
                            dab = (face_avg(a, hi_i[0], hi_i[1], hi_i[2]) -
                                   face_avg(a, lo_i[0], lo_i[1], lo_i[2])) /
                                  span;
                        }
                        fro2 += dab * dab;
                    }
                }
                out.u_linf = std::max(out.u_linf, std::sqrt(um2));
                out.grad_u_linf = std::max(out.grad_u_linf, std::sqrt(fro2));
            }
        }
    }
    return out;
}

}  // namespace vnslab
