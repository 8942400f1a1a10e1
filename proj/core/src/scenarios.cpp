#include "vnslab/scenarios.hpp"

#include <cmath>

#include "vnslab/errors.hpp"

#include "json.hpp"

namespace vnslab {

const char* to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::confinement: return "confinement";
        case ScenarioKind::escape: return "escape";
        case ScenarioKind::mixed: return "mixed";
    }
    return "?";
}

namespace {

double circumradius_about(const Domain& d, const Vec& a) {
    double r2 = 0.0;
    for (int ax = 0; ax < d.dim; ++ax) {
        double m = std::max(std::abs(d.hi[ax] - a[ax]), std::abs(d.lo[ax] - a[ax]));
        r2 += m * m;
    }
    return std::sqrt(r2);
}

double ball_gap(const Domain& d, const Vec& a, double eps) {
    double gap = distance_to_boundary(d, a) - eps;
    if (!(gap > 0.0)) {
        throw ValidationError("scenario: ball B(a,eps) must sit strictly inside the domain");
    }
    return gap;
}

InitialDataSpec one_stratum(const Vec& a, double eps, VelocityLaw vlaw, std::int64_t count,
                            std::uint64_t seed) {
    InitialDataSpec spec;
    Stratum st;
    st.x_law.kind = SpatialLaw::Kind::ball;
    st.x_law.center = a;
    st.x_law.radius = eps;
    st.v_law = vlaw;
    st.mass = 1.0;
    spec.strata.push_back(st);
    spec.count = count;
    spec.seed = seed;
    return spec;
}

}  // namespace

ScenarioBuild build_confinement(const Domain& d, const Vec& a, double eps, double r,
                                std::int64_t count, std::uint64_t seed) {
    ScenarioBuild b;
    b.config.kind = ScenarioKind::confinement;
    b.config.center = a;
    b.config.eps = eps;
    b.config.r = r;
    b.config.gap = ball_gap(d, a, eps);
    if (!(2.0 * r < b.config.gap)) {
        throw ValidationError("confinement: geometric condition 2R < d(B(a,eps), boundary) "
                              "violated");
    }
    b.config.delta_conf = 0.5 * (b.config.gap / 2.0 - r);
    b.config.confinement_radius = eps + r + 2.0 * b.config.delta_conf;
    b.config.big_l = 2.0 * circumradius_about(d, a);
    b.config.budget_limit = b.config.delta_conf;
    VelocityLaw vlaw;
    vlaw.kind = VelocityLaw::Kind::ball;
    vlaw.r_hi = r;
    b.init = one_stratum(a, eps, vlaw, count, seed);
    return b;
}

ScenarioBuild build_escape(const Domain& d, const Vec& a, double eps, double horizon_T,
                           std::int64_t count, std::uint64_t seed) {
    if (!(horizon_T > 0.0)) throw ValidationError("escape: horizon T must be positive");
    ScenarioBuild b;
    b.config.kind = ScenarioKind::escape;
    b.config.center = a;
    b.config.eps = eps;
    b.config.horizon_T = horizon_T;
    b.config.gap = ball_gap(d, a, eps);
    double big_l = 2.0 * circumradius_about(d, a);
    if (!(big_l > eps)) throw ValidationError("escape: L <= eps");
    double threshold = (2.0 * big_l + eps) / (-std::expm1(-horizon_T));
    b.config.big_l = big_l;
    b.config.r2 = 1.05 * threshold;
    b.config.r = b.config.r2;
    b.config.budget_limit = big_l / 8.0;
    VelocityLaw vlaw;
    vlaw.kind = VelocityLaw::Kind::annulus;
    vlaw.r_lo = b.config.r2;
    vlaw.r_hi = 2.0 * b.config.r2;  // bounded above to keep M6 finite
    b.init = one_stratum(a, eps, vlaw, count, seed);
    return b;
}

ScenarioBuild build_mixed(const Domain& d, const Vec& a, double eps, double alpha,
                          double horizon_T, std::int64_t count, std::uint64_t seed, double r1) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("mixed: alpha must be in [0,1]");
    if (alpha == 1.0) {
        double gap = ball_gap(d, a, eps);
        double r = r1 > 0.0 ? r1 : gap / 4.0;
        ScenarioBuild b = build_confinement(d, a, eps, r, count, seed);
        b.config.kind = ScenarioKind::mixed;
        b.config.alpha = 1.0;
        b.config.horizon_T = horizon_T;
        return b;
    }
    if (alpha == 0.0) {
        ScenarioBuild b = build_escape(d, a, eps, horizon_T, count, seed);
        b.config.kind = ScenarioKind::mixed;
        b.config.alpha = 0.0;
        return b;
    }
    ScenarioBuild conf = build_confinement(d, a, eps, r1 > 0.0 ? r1 : ball_gap(d, a, eps) / 4.0,
                                           count, seed);
    ScenarioBuild esc = build_escape(d, a, eps, horizon_T, count, seed);
    if (!(conf.config.r < esc.config.r2)) {
        throw ValidationError("mixed: no feasible (R1, R2) pair: R1 >= R2");
    }
    ScenarioBuild b;
    b.config = esc.config;
    b.config.kind = ScenarioKind::mixed;
    b.config.alpha = alpha;
    b.config.r1 = conf.config.r;
    b.config.delta_conf = conf.config.delta_conf;
    b.config.confinement_radius = conf.config.confinement_radius;
    b.config.r = conf.config.r;

    InitialDataSpec spec;
    Stratum interior = conf.init.strata.front();
    interior.mass = alpha;
    Stratum exterior = esc.init.strata.front();
    exterior.mass = 1.0 - alpha;
    spec.strata = {interior, exterior};
    spec.count = count;
    spec.seed = seed;
    b.init = spec;
    return b;
}

std::string ScenarioReport::to_json() const {
    nlohmann::json j;
    j["kind"] = to_string(config.kind);
    j["params"] = {{"a", {config.center[0], config.center[1], config.center[2]}},
                   {"eps", config.eps},
                   {"R", config.r},
                   {"R1", config.r1},
                   {"R2", config.r2},
                   {"alpha", config.alpha},
                   {"T", config.horizon_T}};
    j["derived"] = {{"gap", config.gap},
                    {"delta", config.delta_conf},
                    {"confinement_radius", config.confinement_radius},
                    {"L", config.big_l},
                    {"budget_limit", config.budget_limit}};
    j["predictions"] = {{"max_radius", predicted_max_radius},
                        {"final_mass", predicted_final_mass},
                        {"escape_deadline", escape_deadline}};
    j["measured"] = {{"max_radius", measured_max_radius},
                     {"absorbed_mass", absorbed_mass},
                     {"final_mass", final_mass},
                     {"first_empty_time", first_empty_time},
                     {"budget_u_l1linf", budget_u_l1linf},
                     {"budget_ok", budget_ok},
                     {"decay_lambda", decay_lambda},
                     {"decay_r2", decay_r2},
                     {"grazing_exits", grazing_exits}};
    j["pass"] = pass;
    j["detail"] = detail;
    return j.dump(2);
}

}  // namespace vnslab
