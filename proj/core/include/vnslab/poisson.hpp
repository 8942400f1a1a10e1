#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "vnslab/grid.hpp"

namespace vnslab {

enum class PoissonEngine { fft, cg };

struct SolverOpts {
    PoissonEngine engine = PoissonEngine::fft;
    double tol = 1e-10;  // relative residual
    int max_iter = 20000;
};

// Fast direct solves for the constant-coefficient operators on a box via
// FFTW real-to-real transforms (DST/DCT); a plain conjugate-gradient path
// backs the same contracts and is used for cross-checks. Every solve
// verifies its residual against opts.tol and throws NumericError otherwise.
class PoissonSolver {
  public:
    explicit PoissonSolver(const GridSpec& g, SolverOpts opts = {});
    ~PoissonSolver();
    PoissonSolver(const PoissonSolver&) = delete;
    PoissonSolver& operator=(const PoissonSolver&) = delete;

    // -Lap phi = rhs, phi = 0 on the wall (cell-centered).
    ScalarField solve_dirichlet(const ScalarField& rhs) const;

    // -Lap phi = rhs, dphi/dn = 0 on the wall, mean(phi) = 0. The rhs is
    // projected onto mean zero first (compatibility).
    ScalarField solve_neumann(const ScalarField& rhs) const;

    // (I - c Lap) u_a = rhs on the component-a staggered grid with the
    // velocity boundary conventions; wall planes of the result are zero.
    std::vector<double> solve_helmholtz_component(const MacField& layout, int a,
                                                  const std::vector<double>& rhs,
                                                  double c) const;

    const GridSpec& grid() const { return g_; }
    const SolverOpts& opts() const { return opts_; }

  private:
    GridSpec g_;
    SolverOpts opts_;
    struct Plans;
    std::unique_ptr<Plans> plans_;
};

// Conjugate gradient on a matrix-free SPD operator; returns iterations used.
// Throws NumericError when the relative residual target is not met.
int conjugate_gradient(const std::function<void(const std::vector<double>&,
                                                std::vector<double>&)>& apply,
                       const std::vector<double>& rhs, std::vector<double>& x,
                       double tol, int max_iter, const std::string& what);

}  // namespace vnslab
