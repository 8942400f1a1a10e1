#include "vnslab/diagnostics.hpp"

#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <unordered_map>

#include "vnslab/errors.hpp"

namespace vnslab {

const std::vector<std::string>& DiagnosticsRecord::column_names() {
    static const std::vector<std::string> names = {
        "t",        "E",          "D",           "mass_alive", "mass_absorbed",
        "M1",       "M2",         "M6",          "Nq",         "sup_rho",
        "sup_j",    "u_L2",       "grad_u_L2",   "u_Linf",     "grad_u_Linf",
        "budget_grad_u", "cum_force_sq", "energy_residual"};
    return names;
}

const DiagnosticsRecord& DiagnosticsHistory::record_step(const FluidSolver& solver,
                                                         const FluidState& fluid,
                                                         const ParticleEnsemble& ensemble,
                                                         const KineticMoments& moments,
                                                         double force_l2_sq) {
    if (!ensemble.quanta_conserved()) {
        throw NumericError("diagnostics: mass quanta not conserved");
    }
    EnergyDissipation ed = energy_and_dissipation(ensemble, solver.domain(), fluid.u);
    FluidNorms fn = solver.norms(fluid);

    DiagnosticsRecord r;
    r.t = fluid.t;
    r.energy = ed.energy;
    r.dissipation = ed.dissipation;
    r.mass_alive = ensemble.mass_alive();
    r.mass_absorbed = ensemble.mass_absorbed();
    r.m1 = moments.m1;
    r.m2 = moments.m2;
    r.m6 = moments.m6;
    r.nq = moments.nq;
    r.sup_rho = moments.sup_rho;
    r.sup_j = moments.sup_j;
    r.u_l2 = fn.u_l2;
    r.grad_u_l2 = fn.grad_u_l2;
    r.u_linf = fn.u_linf;
    r.grad_u_linf = fn.grad_u_linf;

    if (rows_.empty()) {
        e0_ = ed.energy;
        grad_u0_sq_ = fn.grad_u_l2 * fn.grad_u_l2;
        cum_diss_ = 0.0;
        cum_grad_linf_ = 0.0;
        cum_force_sq_ = 0.0;
    } else {
        const DiagnosticsRecord& p = rows_.back();
        double dt = r.t - p.t;
        cum_diss_ += 0.5 * (p.dissipation + r.dissipation) * dt;
        cum_grad_linf_ += 0.5 * (p.grad_u_linf + r.grad_u_linf) * dt;
        cum_force_sq_ += force_l2_sq * dt;  // force is per-step (left endpoint)
    }
    r.budget_grad_u = cum_grad_linf_;
    r.cum_force_sq = cum_force_sq_;
    r.energy_residual = r.energy + cum_diss_ - e0_;
    u_linf_series_.push_back(fn.u_linf);
    rows_.push_back(r);
    return rows_.back();
}

namespace {

double trapezoid_window(const std::vector<DiagnosticsRecord>& rows,
                        const std::function<double(const DiagnosticsRecord&)>& f, double a,
                        double b) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        double t0 = rows[i].t, t1 = rows[i + 1].t;
        double lo = std::max(t0, a), hi = std::min(t1, b);
        if (hi <= lo) continue;
        double span = t1 - t0;
        auto lerp = [&](double tau) {
            double w = span > 0.0 ? (tau - t0) / span : 0.0;
            return (1.0 - w) * f(rows[i]) + w * f(rows[i + 1]);
        };
        acc += 0.5 * (lerp(lo) + lerp(hi)) * (hi - lo);
    }
    return acc;
}

}  // namespace

double DiagnosticsHistory::integral_u_linf(double a, double b) const {
    return trapezoid_window(rows_, [](const DiagnosticsRecord& r) { return r.u_linf; }, a, b);
}

double DiagnosticsHistory::integral_grad_u_linf(double a, double b) const {
    return trapezoid_window(rows_, [](const DiagnosticsRecord& r) { return r.grad_u_linf; }, a,
                            b);
}

double DiagnosticsHistory::integral_dissipation(double a, double b) const {
    return trapezoid_window(rows_, [](const DiagnosticsRecord& r) { return r.dissipation; }, a,
                            b);
}

double DiagnosticsHistory::integral_sqrt_energy(double a, double b) const {
    return trapezoid_window(
        rows_, [](const DiagnosticsRecord& r) { return std::sqrt(std::max(0.0, r.energy)); }, a,
        b);
}

std::vector<double> DiagnosticsHistory::times() const {
    std::vector<double> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) out.push_back(r.t);
    return out;
}

std::vector<double> DiagnosticsHistory::energies() const {
    std::vector<double> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) out.push_back(r.energy);
    return out;
}

std::vector<double> DiagnosticsHistory::column(const std::string& name) const {
    std::vector<double> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) {
        double v = 0.0;
        if (name == "t") v = r.t;
        else if (name == "E") v = r.energy;
        else if (name == "D") v = r.dissipation;
        else if (name == "mass_alive") v = r.mass_alive;
        else if (name == "mass_absorbed") v = r.mass_absorbed;
        else if (name == "M1") v = r.m1;
        else if (name == "M2") v = r.m2;
        else if (name == "M6") v = r.m6;
        else if (name == "Nq") v = r.nq;
        else if (name == "sup_rho") v = r.sup_rho;
        else if (name == "sup_j") v = r.sup_j;
        else if (name == "u_L2") v = r.u_l2;
        else if (name == "grad_u_L2") v = r.grad_u_l2;
        else if (name == "u_Linf") v = r.u_linf;
        else if (name == "grad_u_Linf") v = r.grad_u_linf;
        else if (name == "budget_grad_u") v = r.budget_grad_u;
        else if (name == "cum_force_sq") v = r.cum_force_sq;
        else if (name == "energy_residual") v = r.energy_residual;
        else throw ValidationError("diagnostics: unknown column " + name);
        out.push_back(v);
    }
    return out;
}

void DiagnosticsHistory::write_csv(std::ostream& os) const {
    const auto& names = DiagnosticsRecord::column_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
        os << names[i] << (i + 1 < names.size() ? "," : "\n");
    }
    os << std::setprecision(17);
    for (const auto& r : rows_) {
        os << r.t << ',' << r.energy << ',' << r.dissipation << ',' << r.mass_alive << ','
           << r.mass_absorbed << ',' << r.m1 << ',' << r.m2 << ',' << r.m6 << ',' << r.nq << ','
           << r.sup_rho << ',' << r.sup_j << ',' << r.u_l2 << ',' << r.grad_u_l2 << ','
           << r.u_linf << ',' << r.grad_u_linf << ',' << r.budget_grad_u << ','
           << r.cum_force_sq << ',' << r.energy_residual << '\n';
    }
}

SmallnessReport smallness_report(const DiagnosticsHistory& h, int dim) {
    if (h.empty()) throw ValidationError("smallness_report: empty history");
    const auto& rows = h.rows();
    const auto& mc = h.constants();
    SmallnessReport rep;
    rep.c1 = mc.c1;
    rep.c2 = mc.c2;
    rep.delta = mc.delta;
    rep.e0 = h.initial_energy();
    rep.u0_h1 = rows.front().u_l2 + rows.front().grad_u_l2;
    rep.nq_f0 = rows.front().nq;
    rep.m6_f0 = rows.front().m6;

    double threshold = 1.0 / std::sqrt(8.0 * mc.c1 * mc.c2);
    double worst_margin = std::numeric_limits<double>::infinity();
    double t_star = std::numeric_limits<double>::infinity();
    bool found = false;
    double t0 = rows.front().t;
    for (const auto& r : rows) {
        double lhs = h.grad_u0_sq() + mc.c1 * r.cum_force_sq;
        double margin = threshold - lhs;
        // delta budget anchored at t=1 (and at t=0 before time 1 exists)
        double budget1 = h.integral_grad_u_linf(std::min(1.0, r.t), r.t);
        bool violated = margin < 0.0 || budget1 >= mc.delta;
        worst_margin = std::min(worst_margin, margin);
        if (violated && !found) {
            t_star = r.t;
            found = true;
        }
    }
    rep.strong_existence_margin = worst_margin;
    double t_end = rows.back().t;
    rep.budget_margin_from0 = mc.delta - h.integral_grad_u_linf(t0, t_end);
    rep.budget_margin_from1 = mc.delta - h.integral_grad_u_linf(std::min(1.0, t_end), t_end);
    rep.t_star = t_star;
    rep.t_star_finite = found;

    rep.brinkman_lhs = rows.back().cum_force_sq;
    double sup_rho = 0.0;
    for (const auto& r : rows) sup_rho = std::max(sup_rho, r.sup_rho);
    rep.brinkman_rhs = sup_rho * h.initial_energy();
    rep.brinkman_factor = rep.brinkman_rhs > 0.0 ? rep.brinkman_lhs / rep.brinkman_rhs : 0.0;

    double nq0 = rows.front().nq;
    if (nq0 > 0.0) {
        for (const auto& r : rows) {
            double budget_u = h.integral_u_linf(t0, r.t);
            double denom = std::exp(dim * r.t) *
                           (1.0 + std::pow(budget_u, mc.q)) * nq0;
            if (denom > 0.0) rep.nq_ratio_max = std::max(rep.nq_ratio_max, r.nq / denom);
        }
    }
    return rep;
}

double moment_interpolation_constant(int dim, double k, double ell) {
    if (!(k > ell)) throw ValidationError("moment audit: need ell < k");
    double sigma_d = dim == 2 ? 2.0 * M_PI : 4.0 * M_PI;
    double a = ell + dim;
    double b = k - ell;
    double shape = std::pow(b / a, a / (a + b)) + std::pow(a / b, b / (a + b));
    return shape * std::pow(sigma_d / a, b / (a + b));
}

MomentAuditRow moment_interpolation_audit(const ParticleEnsemble& e, double t, double k,
                                          double ell) {
    if (!(ell >= 0.0 && ell < k)) throw ValidationError("moment audit: need 0 <= ell < k");
    MomentAuditRow row;
    row.t = t;
    const int dim = e.dim;
    auto fast_pow = [](double x, double p) {
        if (p == 0.0) return 1.0;
        if (p == 1.0) return x;
        if (p == 2.0) return x * x;
        if (p == 6.0) {
            double c = x * x * x;
            return c * c;
        }
        return std::pow(x, p);
    };
    double m_ell = 0.0, m_k = 0.0;
    std::int64_t alive = 0;
    for (std::int64_t i = 0; i < e.size(); ++i) {
        if (e.status[i] != ParticleStatus::alive) continue;
        double vn = norm(e.v[i]);
        m_ell += e.w[i] * fast_pow(vn, ell);
        m_k += e.w[i] * fast_pow(vn, k);
        alive += 1;
    }
    row.lhs = m_ell;
    if (alive == 0) return row;

    // sup of the velocity marginal g(v) = int f dx by a top-hat kernel with
    // per-axis Silverman-style bandwidths.
    double mean[3] = {0}, var[3] = {0};
    for (std::int64_t i = 0; i < e.size(); ++i) {
        if (e.status[i] != ParticleStatus::alive) continue;
        for (int a = 0; a < dim; ++a) mean[a] += e.v[i][a];
    }
    for (int a = 0; a < dim; ++a) mean[a] /= alive;
    for (std::int64_t i = 0; i < e.size(); ++i) {
        if (e.status[i] != ParticleStatus::alive) continue;
        for (int a = 0; a < dim; ++a) {
            double dv = e.v[i][a] - mean[a];
            var[a] += dv * dv;
        }
    }
    double bw[3];
    double nfac = std::pow(static_cast<double>(alive), -1.0 / (dim + 4));
    for (int a = 0; a < dim; ++a) {
        bw[a] = std::max(1.06 * std::sqrt(var[a] / alive) * nfac,
                         1e-9 * (1.0 + std::abs(mean[a])));
    }
    double bin_vol = 1.0;
    for (int a = 0; a < dim; ++a) bin_vol *= bw[a];
    std::unordered_map<std::uint64_t, double> bins;
    for (std::int64_t i = 0; i < e.size(); ++i) {
        if (e.status[i] != ParticleStatus::alive) continue;
        std::uint64_t key = 1469598103934665603ull;
        for (int a = 0; a < dim; ++a) {
            auto cell = static_cast<std::int64_t>(std::floor(e.v[i][a] / bw[a]));
            key ^= static_cast<std::uint64_t>(cell) + 0x9e3779b97f4a7c15ull + (key << 6) +
                   (key >> 2);
        }
        bins[key] += e.w[i];
    }
    double sup_g = 0.0;
    for (const auto& [key, mass] : bins) sup_g = std::max(sup_g, mass / bin_vol);
    row.sup_g = sup_g;

    double c = moment_interpolation_constant(dim, k, ell);
    double expo = (ell + dim) / (k + dim);
    row.rhs = (sup_g + 1.0) * c * std::pow(m_k, expo);
    row.ratio = row.rhs > 0.0 ? row.lhs / row.rhs : 0.0;
    return row;
}

}  // namespace vnslab
