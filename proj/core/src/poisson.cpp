#include "vnslab/poisson.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>

#include "vnslab/errors.hpp"

namespace vnslab {

int conjugate_gradient(const std::function<void(const std::vector<double>&,
                                                std::vector<double>&)>& apply,
                       const std::vector<double>& rhs, std::vector<double>& x,
                       double tol, int max_iter, const std::string& what) {
    const std::size_t n = rhs.size();
    x.assign(n, 0.0);
    std::vector<double> r = rhs, p = rhs, ap(n);
    double rr = 0.0, bnorm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        rr += r[i] * r[i];
        bnorm += rhs[i] * rhs[i];
    }
    bnorm = std::sqrt(bnorm);
    if (bnorm == 0.0) return 0;
    double target = tol * bnorm;
    for (int it = 1; it <= max_iter; ++it) {
        apply(p, ap);
        double pap = 0.0;
        for (std::size_t i = 0; i < n; ++i) pap += p[i] * ap[i];
        if (pap <= 0.0) throw NumericError(what + ": CG lost positive definiteness");
        double alpha = rr / pap;
        double rr_new = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            rr_new += r[i] * r[i];
        }
        if (std::sqrt(rr_new) <= target) return it;
        double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    }
    throw NumericError(what + ": CG did not reach tolerance " + std::to_string(tol) +
                       " within " + std::to_string(max_iter) + " iterations");
}

namespace {

struct R2RPlan {
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;
    std::vector<double> buf;
    double scale = 1.0;  // roundtrip normalization
    int sz[3] = {1, 1, 1};

    ~R2RPlan() {
        if (fwd) fftw_destroy_plan(fwd);
        if (inv) fftw_destroy_plan(inv);
    }

    void build(int dim, const int sizes[3], const fftw_r2r_kind kinds_fwd[3],
               const fftw_r2r_kind kinds_inv[3], const double logical[3]) {
        std::int64_t total = 1;
        for (int a = 0; a < 3; ++a) sz[a] = sizes[a];
        for (int a = 0; a < dim; ++a) total *= sizes[a];
        buf.assign(total, 0.0);
        scale = 1.0;
        for (int a = 0; a < dim; ++a) scale *= 1.0 / (2.0 * logical[a]);
        int ns[3];
        fftw_r2r_kind kf[3], ki[3];
        for (int a = 0; a < dim; ++a) {
            ns[a] = sizes[a];
            kf[a] = kinds_fwd[a];
            ki[a] = kinds_inv[a];
        }
        fwd = fftw_plan_r2r(dim, ns, buf.data(), buf.data(), kf, FFTW_ESTIMATE);
        inv = fftw_plan_r2r(dim, ns, buf.data(), buf.data(), ki, FFTW_ESTIMATE);
        if (!fwd || !inv) throw NumericError("fftw plan creation failed");
    }
};

// 1D operator eigenvalue of -d2/dx2 for mode m on an axis of n samples.
inline double eig_dst2(int m, int n, double h) {
    return (2.0 - 2.0 * std::cos(M_PI * (m + 1) / n)) / (h * h);
}
inline double eig_dct2(int m, int n, double h) {
    return (2.0 - 2.0 * std::cos(M_PI * m / n)) / (h * h);
}
inline double eig_dst1(int m, int n_cells, double h) {
    // interior nodes 1..n-1, mode index m = 0..n-2
    return (2.0 - 2.0 * std::cos(M_PI * (m + 1) / n_cells)) / (h * h);
}

}  // namespace

struct PoissonSolver::Plans {
    R2RPlan dirichlet;
    R2RPlan neumann;
    R2RPlan helm[3];
    bool helm_built[3] = {false, false, false};
    bool dirichlet_built = false;
    bool neumann_built = false;
};

PoissonSolver::PoissonSolver(const GridSpec& g, SolverOpts opts)
    : g_(g), opts_(opts), plans_(new Plans) {}

PoissonSolver::~PoissonSolver() = default;

namespace {

double residual_norm_cell(const GridSpec& g, const ScalarField& phi,
                          const ScalarField& rhs, bool dirichlet) {
    ScalarField lap(g);
    if (dirichlet) {
        laplacian_dirichlet(phi, lap);
    } else {
        laplacian_neumann(phi, lap);
    }
    double r2 = 0.0, b2 = 0.0;
    for (std::size_t i = 0; i < rhs.v.size(); ++i) {
        double r = -lap.v[i] - rhs.v[i];
        r2 += r * r;
        b2 += rhs.v[i] * rhs.v[i];
    }
    return b2 > 0.0 ? std::sqrt(r2 / b2) : std::sqrt(r2);
}

}  // namespace

ScalarField PoissonSolver::solve_dirichlet(const ScalarField& rhs) const {
    if (!rhs.g.same_as(g_)) throw ValidationError("poisson: grid mismatch");
    ScalarField phi(g_);
    if (opts_.engine == PoissonEngine::cg) {
        std::vector<double> x;
        auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
            ScalarField tmp(g_);
            tmp.v = in;
            ScalarField lap(g_);
            laplacian_dirichlet(tmp, lap);
            out.resize(in.size());
            for (std::size_t i = 0; i < in.size(); ++i) out[i] = -lap.v[i];
        };
        conjugate_gradient(apply, rhs.v, x, opts_.tol, opts_.max_iter, "poisson dirichlet");
        phi.v = x;
        return phi;
    }
    auto& plan = plans_->dirichlet;
    if (!plans_->dirichlet_built) {
        fftw_r2r_kind kf[3] = {FFTW_RODFT10, FFTW_RODFT10, FFTW_RODFT10};
        fftw_r2r_kind ki[3] = {FFTW_RODFT01, FFTW_RODFT01, FFTW_RODFT01};
        double logical[3] = {double(g_.n[0]), double(g_.n[1]), double(g_.n[2])};
        plan.build(g_.dim, g_.n, kf, ki, logical);
        plans_->dirichlet_built = true;
    }
    std::memcpy(plan.buf.data(), rhs.v.data(), rhs.v.size() * sizeof(double));
    fftw_execute(plan.fwd);
    for (int i = 0; i < g_.n[0]; ++i) {
        for (int j = 0; j < g_.n[1]; ++j) {
            for (int k = 0; k < g_.n[2]; ++k) {
                double lam = eig_dst2(i, g_.n[0], g_.h[0]);
                if (g_.dim > 1) lam += eig_dst2(j, g_.n[1], g_.h[1]);
                if (g_.dim > 2) lam += eig_dst2(k, g_.n[2], g_.h[2]);
                plan.buf[(std::int64_t(i) * g_.n[1] + j) * g_.n[2] + k] /= lam;
            }
        }
    }
    fftw_execute(plan.inv);
    for (std::size_t i = 0; i < phi.v.size(); ++i) phi.v[i] = plan.buf[i] * plan.scale;
    double res = residual_norm_cell(g_, phi, rhs, true);
    if (res > std::max(opts_.tol, 1e-10)) {
        throw NumericError("poisson dirichlet: fft residual " + std::to_string(res));
    }
    return phi;
}

ScalarField PoissonSolver::solve_neumann(const ScalarField& rhs_in) const {
    if (!rhs_in.g.same_as(g_)) throw ValidationError("poisson: grid mismatch");
    ScalarField rhs = rhs_in;
    double m = mean(rhs);
    for (double& v : rhs.v) v -= m;  // compatibility
    ScalarField phi(g_);
    if (opts_.engine == PoissonEngine::cg) {
        std::vector<double> x;
        auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
            ScalarField tmp(g_);
            tmp.v = in;
            ScalarField lap(g_);
            laplacian_neumann(tmp, lap);
            out.resize(in.size());
            for (std::size_t i = 0; i < in.size(); ++i) out[i] = -lap.v[i];
        };
        conjugate_gradient(apply, rhs.v, x, opts_.tol, opts_.max_iter, "poisson neumann");
        phi.v = x;
        double pm = mean(phi);
        for (double& v : phi.v) v -= pm;
        return phi;
    }
    auto& plan = plans_->neumann;
    if (!plans_->neumann_built) {
        fftw_r2r_kind kf[3] = {FFTW_REDFT10, FFTW_REDFT10, FFTW_REDFT10};
        fftw_r2r_kind ki[3] = {FFTW_REDFT01, FFTW_REDFT01, FFTW_REDFT01};
        double logical[3] = {double(g_.n[0]), double(g_.n[1]), double(g_.n[2])};
        plan.build(g_.dim, g_.n, kf, ki, logical);
        plans_->neumann_built = true;
    }
    std::memcpy(plan.buf.data(), rhs.v.data(), rhs.v.size() * sizeof(double));
    fftw_execute(plan.fwd);
    for (int i = 0; i < g_.n[0]; ++i) {
        for (int j = 0; j < g_.n[1]; ++j) {
            for (int k = 0; k < g_.n[2]; ++k) {
                double lam = eig_dct2(i, g_.n[0], g_.h[0]);
                if (g_.dim > 1) lam += eig_dct2(j, g_.n[1], g_.h[1]);
                if (g_.dim > 2) lam += eig_dct2(k, g_.n[2], g_.h[2]);
                std::int64_t lin = (std::int64_t(i) * g_.n[1] + j) * g_.n[2] + k;
                plan.buf[lin] = (lam == 0.0) ? 0.0 : plan.buf[lin] / lam;
            }
        }
    }
    fftw_execute(plan.inv);
    for (std::size_t i = 0; i < phi.v.size(); ++i) phi.v[i] = plan.buf[i] * plan.scale;
    double res = residual_norm_cell(g_, phi, rhs, false);
    if (res > std::max(opts_.tol, 1e-10)) {
        throw NumericError("poisson neumann: fft residual " + std::to_string(res));
    }
    return phi;
}

std::vector<double> PoissonSolver::solve_helmholtz_component(const MacField& layout, int a,
                                                             const std::vector<double>& rhs,
                                                             double c) const {
    if (!layout.g.same_as(g_)) throw ValidationError("helmholtz: grid mismatch");
    const int na = layout.size(a, 0), nb = layout.size(a, 1), nc = layout.size(a, 2);
    std::vector<double> out(rhs.size(), 0.0);

    if (opts_.engine == PoissonEngine::cg) {
        // Solve on the full component array; wall planes are pinned by working
        // with the operator that zeroes them.
        auto apply = [&](const std::vector<double>& in, std::vector<double>& o) {
            MacField tmp(g_);
            tmp.comp[a] = in;
            tmp.zero_boundary_normals();
            std::vector<double> lap;
            laplacian_component(tmp, a, lap);
            o.resize(in.size());
            for (std::size_t i = 0; i < in.size(); ++i) o[i] = tmp.comp[a][i] - c * lap[i];
        };
        std::vector<double> rhs_z = rhs;
        {
            MacField tmp(g_);
            tmp.comp[a] = rhs_z;
            tmp.zero_boundary_normals();
            rhs_z = tmp.comp[a];
        }
        conjugate_gradient(apply, rhs_z, out, opts_.tol, opts_.max_iter, "helmholtz");
        return out;
    }

    // Packed interior of the own axis (wall planes excluded).
    int sizes[3] = {na, nb, nc};
    int psizes[3] = {na, nb, nc};
    psizes[a] = g_.n[a] - 1;
    auto& plan = plans_->helm[a];
    if (!plans_->helm_built[a]) {
        fftw_r2r_kind kf[3], ki[3];
        double logical[3];
        for (int axis = 0; axis < 3; ++axis) {
            if (axis == a) {
                kf[axis] = FFTW_RODFT00;
                ki[axis] = FFTW_RODFT00;
                logical[axis] = double(g_.n[axis]);  // 2(m+1) = 2n
            } else {
                kf[axis] = FFTW_RODFT10;
                ki[axis] = FFTW_RODFT01;
                logical[axis] = double(psizes[axis]);
            }
        }
        plan.build(g_.dim, psizes, kf, ki, logical);
        plans_->helm_built[a] = true;
    }
    auto pidx = [&](int i, int j, int k) {
        return (std::int64_t(i) * psizes[1] + j) * psizes[2] + k;
    };
    // pack
    for (int i = 0; i < psizes[0]; ++i) {
        for (int j = 0; j < psizes[1]; ++j) {
            for (int k = 0; k < psizes[2]; ++k) {
                int src[3] = {i, j, k};
                src[a] += 1;
                plan.buf[pidx(i, j, k)] =
                    rhs[(std::int64_t(src[0]) * sizes[1] + src[1]) * sizes[2] + src[2]];
            }
        }
    }
    fftw_execute(plan.fwd);
    for (int i = 0; i < psizes[0]; ++i) {
        for (int j = 0; j < psizes[1]; ++j) {
            for (int k = 0; k < psizes[2]; ++k) {
                int m[3] = {i, j, k};
                double lam = 0.0;
                for (int axis = 0; axis < g_.dim; ++axis) {
                    lam += (axis == a) ? eig_dst1(m[axis], g_.n[axis], g_.h[axis])
                                       : eig_dst2(m[axis], psizes[axis], g_.h[axis]);
                }
                plan.buf[pidx(i, j, k)] /= (1.0 + c * lam);
            }
        }
    }
    fftw_execute(plan.inv);
    for (int i = 0; i < psizes[0]; ++i) {
        for (int j = 0; j < psizes[1]; ++j) {
            for (int k = 0; k < psizes[2]; ++k) {
                int dst[3] = {i, j, k};
                dst[a] += 1;
                out[(std::int64_t(dst[0]) * sizes[1] + dst[1]) * sizes[2] + dst[2]] =
                    plan.buf[pidx(i, j, k)] * plan.scale;
            }
        }
    }
    // residual check against the matrix-free operator
    {
        MacField tmp(g_);
        tmp.comp[a] = out;
        std::vector<double> lap;
        laplacian_component(tmp, a, lap);
        double r2 = 0.0, b2 = 0.0;
        for (int i = 0; i < psizes[0]; ++i) {
            for (int j = 0; j < psizes[1]; ++j) {
                for (int k = 0; k < psizes[2]; ++k) {
                    int src[3] = {i, j, k};
                    src[a] += 1;
                    std::int64_t lin =
                        (std::int64_t(src[0]) * sizes[1] + src[1]) * sizes[2] + src[2];
                    double r = out[lin] - c * lap[lin] - rhs[lin];
                    r2 += r * r;
                    b2 += rhs[lin] * rhs[lin];
                }
            }
        }
        double res = b2 > 0.0 ? std::sqrt(r2 / b2) : std::sqrt(r2);
        if (res > std::max(opts_.tol, 1e-10)) {
            throw NumericError("helmholtz: fft residual " + std::to_string(res));
        }
    }
    return out;
}

}  // namespace vnslab
