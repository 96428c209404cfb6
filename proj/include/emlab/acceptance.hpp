#pragma once

// The acceptance suite: thirteen numbered checks, each producing one
// PASS/FAIL line with the measured quantities.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "emlab/harness.hpp"
#include "emlab/kernels.hpp"
#include "emlab/landscape.hpp"
#include "emlab/population_em.hpp"
#include "emlab/sample_em.hpp"

namespace emlab {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
    double budget_seconds = 0.0;
};

struct AcceptanceOptions {
    std::uint64_t seed = 20160509;  // same default as the verify command
    int threads = 1;
    QuadratureSpec quad;
    // Deflated constant for the concentration negative control.
    double negative_control_constant = 0.05;
};

// A random population configuration in the ranges the suite sweeps.
struct RandomConfig {
    MixtureModel model;
    ABState init;
};

inline Vec random_direction(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> n01;
    Vec v(d);
    do {
        for (int i = 0; i < d; ++i) v[i] = n01(rng);
    } while (v.norm() < 1e-3);
    return v / v.norm();
}

inline RandomConfig random_config(std::mt19937_64& rng, const std::vector<int>& dims = {1, 2, 3, 8}) {
    std::uniform_int_distribution<std::size_t> pick(0, dims.size() - 1);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const int d = dims[pick(rng)];
    RandomConfig c;
    c.model = MixtureModel(random_direction(d, rng) * (0.25 + 1.75 * u01(rng)));
    c.init.a = random_direction(d, rng) * (1.5 * u01(rng));
    do {
        c.init.b = random_direction(d, rng) * (0.1 + 2.9 * u01(rng));
    } while (c.init.b.dot(c.model.theta_star) == 0.0);
    return c;
}

namespace detail {

struct Sink {
    std::ostringstream os;
    template <class... A>
    void add(const char* fmt, A... args) {
        char buf[512];
        std::snprintf(buf, sizeof buf, fmt, args...);
        if (os.tellp() > 0) os << "; ";
        os << buf;
    }
};

inline std::vector<double> unit_grid(int n, double hi) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = hi * i / (n - 1);
    return g;
}

// 1. Kernel identities and inequalities on the 20³ grid.
inline CriterionResult crit_kernels(const AcceptanceOptions& o) {
    CriterionResult r{1, "kernel identities and inequalities, 20^3 grid", false, "", 0, 60};
    const auto g = unit_grid(20, 3.0);
    const double tol = 1e-9;
    double e_qf = 0, e_srr = 0, e_pk = 0, worst_ps = 1e300, worst_s = 1e300, worst_b3 = 1e300, worst_b2 = 1e300;
    int fails = 0;
    for (double xb : g)
        for (double xt : g) {
            const double f = eval_F(xb, xt, o.quad);
            const auto m0 = kernel_moments(0.0, xb, xt, o.quad);
            e_qf = std::max(e_qf, std::abs(m0.Gamma - f / 2));
            for (double xa : g) {
                const auto m = kernel_moments(xa, xb, xt, o.quad);
                const double srr = xt * m.S + eval_R(xb, xa - xt, o.quad) + eval_R(xb, xa + xt, o.quad);
                e_srr = std::max(e_srr, std::abs(m.Gamma - srr));
                const double kk = eval_K(xt + xa, xb, o.quad) - eval_K(xt - xa, xb, o.quad);
                e_pk = std::max(e_pk, std::abs(1 - 2 * m.P - kk));
                if (xb > 0) {
                    worst_ps = std::min(worst_ps, m.P - m.S);
                    worst_s = std::min(worst_s, m.S);
                }
                const double lb = xa >= xt ? 0.5 * (1 - std_normal_cdf(xa - xt)) + 0.5 * (1 - std_normal_cdf(xa + xt))
                                           : 0.25;
                worst_b3 = std::min(worst_b3, m.P - lb);
                if (xa >= xt) worst_b2 = std::min(worst_b2, (xa + kSqrt2OverPi) / 2 - m.Gamma / (2 * m.P));
            }
        }
    double worst_mills = 1e300, worst_j = 1e300, worst_l = 1e300;
    for (double x : g) {
        if (x <= 0) continue;
        const auto ab = eval_aux_bounds(x);
        worst_mills = std::min(worst_mills, ab.mills_gap);
        worst_j = std::min(worst_j, ab.J);
        worst_l = std::min(worst_l, 0.5 - ab.l * (0.5 - std_normal_cdf(-x)) / x);
    }
    fails += e_qf > tol;
    fails += e_srr > tol;
    fails += e_pk > tol;
    fails += !(worst_ps > 0);
    fails += worst_s < -tol;
    fails += worst_b3 < -tol;
    fails += worst_b2 < -tol;
    fails += !(worst_mills > 0) + !(worst_j > 0) + !(worst_l > 0);
    Sink s;
    s.add("|G0-F/2|=%.1e |G-SRR|=%.1e |1-2P-dK|=%.1e", e_qf, e_srr, e_pk);
    s.add("min(P-S)=%.2e min S=%.1e B3 slack=%.2e B2 slack=%.2e", worst_ps, worst_s, worst_b3, worst_b2);
    s.add("min mills_gap=%.2e min J=%.2e", worst_mills, worst_j);
    r.pass = fails == 0;
    r.detail = s.os.str();
    return r;
}

// 2. Self-consistency of the truth.
inline CriterionResult crit_self_consistency(const AcceptanceOptions& o) {
    CriterionResult r{2, "self-consistency at (0, theta*), 20 configs d<=8", false, "", 0, 5};
    auto rng = make_rng(o.seed, 2);
    std::uniform_int_distribution<int> dd(1, 8);
    std::uniform_real_distribution<double> nn(0.25, 2.0);
    double worst = 0;
    for (int k = 0; k < 20; ++k) {
        const int d = dd(rng);
        const MixtureModel m(random_direction(d, rng) * nn(rng));
        const ABState truth{Vec::Zero(d), m.theta_star};
        worst = std::max(worst, distance(model2_step(truth, m, o.quad).next, truth));
    }
    r.pass = worst <= 1e-10;
    Sink s;
    s.add("max move=%.2e (tol 1e-10)", worst);
    r.detail = s.os.str();
    return r;
}

// 3. Model-1 contraction towards s·θ*.
inline CriterionResult crit_theorem1(const AcceptanceOptions& o, double floor = 1e-11) {
    CriterionResult r{3, "Model-1 contraction, 50 configs", false, "", 0, 120};
    auto rng = make_rng(o.seed, 3);
    double worst_ratio = 0, worst_final = 0;
    int max_len = 0, bad = 0;
    for (int k = 0; k < 50; ++k) {
        const auto c = random_config(rng);
        const auto tr = run_model1(c.init.b, c.model, StopRule{10000, 1e-10}, o.quad);
        const int s = sign_of(c.init.b.dot(c.model.theta_star));
        for (std::size_t t = 1; t < tr.steps.size(); ++t)
            if (tr.steps[t - 1].dist_b > floor) worst_ratio = std::max(worst_ratio, tr.steps[t].ratio_b);
        const double fin = (tr.final_state.b - s * c.model.theta_star).norm();
        worst_final = std::max(worst_final, fin);
        bad += !tr.converged;
        max_len = std::max<int>(max_len, tr.steps.size());
    }
    r.pass = worst_ratio < 1.0 && worst_final <= 1e-8 && bad == 0;
    Sink s;
    s.add("max ratio=%.6f max final err=%.2e longest run=%d iters unconverged=%d", worst_ratio, worst_final,
          max_len, bad);
    r.detail = s.os.str();
    return r;
}

// 4. Hyperplane initialization collapses to 0.
inline CriterionResult crit_hyperplane(const AcceptanceOptions& o) {
    CriterionResult r{4, "hyperplane init collapses to 0 within 1e4 iterations", false, "", 0, 60};
    struct Case {
        int d;
        double tn;
        double b0;
        double a0;
        bool model2;
    };
    const std::vector<Case> cases{{2, 0.25, 1.0, 0, false}, {2, 1.0, 0.5, 0, false}, {3, 0.5, 2.0, 0, false},
                                  {2, 1.0, 1.0, 0.3, true}, {3, 0.75, 0.8, 0.0, true}};
    bool dots_zero = true, monotone = true;
    double worst_norm = 0;
    for (const auto& c : cases) {
        Vec th = Vec::Zero(c.d);
        th[0] = c.tn;
        const MixtureModel m(th);
        Vec b = Vec::Zero(c.d), a = Vec::Zero(c.d);
        b[1] = c.b0;
        if (c.d > 2) b[2] = -0.5 * c.b0;
        a[1] = c.a0;
        const StopRule stop{10000, 1e-300};
        const auto tr = c.model2 ? run({a, b}, m, stop, o.quad) : run_model1(b, m, stop, o.quad);
        for (std::size_t t = 0; t < tr.steps.size(); ++t) {
            dots_zero = dots_zero && tr.steps[t].state.b.dot(th) == 0.0;
            if (t >= 2)
                monotone = monotone && tr.steps[t].state.b.norm() <= tr.steps[t - 1].state.b.norm() + 1e-15;
        }
        dots_zero = dots_zero && tr.final_state.b.dot(th) == 0.0;
        worst_norm = std::max(worst_norm, std::sqrt(tr.final_state.a.squaredNorm() + tr.final_state.b.squaredNorm()));
    }
    r.pass = dots_zero && monotone && worst_norm <= 1e-4;
    Sink s;
    s.add("<b,theta*> exactly 0: %s; |b| non-increasing after t=1: %s; max final |(a,b)|=%.3e (target 1e-4)",
          dots_zero ? "yes" : "no", monotone ? "yes" : "no", worst_norm);
    r.detail = s.os.str();
    return r;
}

struct Model2Sweep {
    std::vector<RandomConfig> configs;
    std::vector<Trajectory> runs;
};

inline Model2Sweep model2_sweep(const AcceptanceOptions& o) {
    auto rng = make_rng(o.seed, 5);
    Model2Sweep sw;
    for (int k = 0; k < 50; ++k) sw.configs.push_back(random_config(rng));
    sw.runs = parallel_map(50, o.threads, [&](int k) {
        return run(sw.configs[k].init, sw.configs[k].model, StopRule{}, o.quad);
    });
    return sw;
}

// 5. Angle decay and the a-recursion.
inline CriterionResult crit_theorem3(const Model2Sweep& sw) {
    CriterionResult r{5, "sin(beta) decay and a-recursion, 50 Model-2 configs", false, "", 0, 120};
    const double ka = 0.5 + 1.0 / std::numbers::pi + 0.05;
    int mono_viol = 0, arec_viol = 0, kappa_bad = 0;
    double worst_kappa = 0, worst_slack = 1e300;
    for (std::size_t k = 0; k < sw.runs.size(); ++k) {
        const auto& st = sw.runs[k].steps;
        const double tn2 = sw.configs[k].model.theta_star.squaredNorm();
        for (std::size_t t = 0; t + 1 < st.size(); ++t) {
            const double s0 = std::isfinite(st[t].sin_beta) ? st[t].sin_beta : 0.0;
            const double s1 = std::isfinite(st[t + 1].sin_beta) ? st[t + 1].sin_beta : 0.0;
            mono_viol += s1 > s0 + 1e-12;
            const double lhs = st[t + 1].norm_a * st[t + 1].norm_a;
            const double rhs = ka * ka * st[t].norm_a * st[t].norm_a + tn2 * s0 * s0 / 4.0;
            worst_slack = std::min(worst_slack, rhs - lhs);
            arec_viol += lhs > rhs + 1e-12;
        }
        if (st.size() >= 5 && std::isfinite(st[0].sin_beta) && st[0].sin_beta > 1e-11) {
            const auto est = contraction_estimate(sw.runs[k]);
            if (!(est.kappa_sin < 1.0)) ++kappa_bad;
            else worst_kappa = std::max(worst_kappa, est.kappa_sin);
        }
    }
    r.pass = mono_viol == 0 && arec_viol == 0 && kappa_bad == 0;
    Sink s;
    s.add("sin monotone violations=%d; max fitted kappa_sin=%.4f (invalid %d); a-recursion violations=%d, min slack=%.2e",
          mono_viol, worst_kappa, kappa_bad, arec_viol, worst_slack);
    r.detail = s.os.str();
    return r;
}

// 6. b-recursion after a detected T0.
inline CriterionResult crit_theorem4(const Model2Sweep& sw) {
    CriterionResult r{6, "b-recursion holds after fitted T0, 50 Model-2 configs", false, "", 0, 120};
    int bad = 0, maxT0 = 0;
    double worst_kb = 0, worst_cb = 0;
    for (const auto& tr : sw.runs) {
        if (tr.steps.size() < 5) {
            ++bad;
            continue;
        }
        const auto est = contraction_estimate(tr);
        if (!(est.kappa_b < 1.0) || est.T0 < 0) ++bad;
        worst_kb = std::max(worst_kb, est.kappa_b);
        worst_cb = std::max(worst_cb, est.c_b);
        maxT0 = std::max(maxT0, est.T0);
    }
    r.pass = bad == 0;
    Sink s;
    s.add("max kappa_b=%.4f max c_b=%.3e max T0=%d failures=%d", worst_kb, worst_cb, maxT0, bad);
    r.detail = s.os.str();
    return r;
}

// 7. A-priori compactness along every Model-2 trajectory.
inline CriterionResult crit_compactness(const Model2Sweep& sw) {
    CriterionResult r{7, "a-priori bounds on |a^t|, |b^t|", false, "", 0, 120};
    int viol = 0;
    double worst_a = 0, worst_b = 0;
    for (std::size_t k = 0; k < sw.runs.size(); ++k) {
        const auto bnd = a_priori_bounds(sw.configs[k].init, sw.configs[k].model);
        for (const auto& st : sw.runs[k].steps) {
            viol += st.norm_a > bnd.c_U1 || st.state.b.norm() > bnd.c_U3;
            worst_a = std::max(worst_a, st.norm_a / bnd.c_U1);
            worst_b = std::max(worst_b, st.state.b.norm() / bnd.c_U3);
        }
    }
    r.pass = viol == 0;
    Sink s;
    s.add("violations=%d max |a|/c_U1=%.3f max |b|/c_U3=%.3e", viol, worst_a, worst_b);
    r.detail = s.os.str();
    return r;
}

inline double relative_gap(const ABState& x, const ABState& ref) {
    const double scale = std::sqrt(ref.a.squaredNorm() + ref.b.squaredNorm());
    return distance(x, ref) / scale;
}

// 8. One population step against an n = 10⁷ sample step.
inline CriterionResult crit_mc_oracle(const AcceptanceOptions& o) {
    CriterionResult r{8, "population vs n=1e7 sample step, 10 states d=2", false, "", 0, 120};
    auto rng = make_rng(o.seed, 8);
    const auto states = [&] {
        std::vector<RandomConfig> v;
        for (int k = 0; k < 10; ++k) v.push_back(random_config(rng, {2}));
        return v;
    }();
    const auto gaps = parallel_map(10, o.threads, [&](int k) {
        const auto& c = states[k];
        const auto pop = model2_step(c.init, c.model, o.quad).next;
        const auto ds = sample_mixture(c.model, 10'000'000, derive_seed(o.seed, 800 + k));
        const auto smp = model2_step_ab(c.init, ds);
        return std::pair{relative_gap(smp, pop), distance(smp, pop)};
    });
    double worst = 0, worst_abs = 0, median_rel = 0;
    std::vector<double> rel;
    for (const auto& [g, a] : gaps) {
        worst = std::max(worst, g);
        worst_abs = std::max(worst_abs, a);
        rel.push_back(g);
    }
    median_rel = median(rel);
    r.pass = worst <= 5e-4;
    Sink s;
    s.add("max relative gap=%.2e (3 significant digits: <= 5e-4), median %.2e, max absolute gap=%.2e", worst,
          median_rel, worst_abs);
    r.detail = s.os.str();
    return r;
}

// 9. Sample EM tracks population EM as n grows.
inline ConsistencyConfig acceptance_consistency_config(const AcceptanceOptions& o) {
    ConsistencyConfig cfg;
    Vec th(2);
    th << 0.6, 0.8;
    cfg.model = MixtureModel(th);
    Vec a0(2), b0(2);
    a0 << 0.2, -0.1;
    b0 << 0.9, 0.3;
    cfg.init = {a0, b0};
    cfg.trials = 20;
    cfg.T = 50;
    cfg.seed = derive_seed(o.seed, 9);
    cfg.threads = o.threads;
    cfg.quad = o.quad;
    return cfg;
}

inline CriterionResult crit_consistency(const AcceptanceOptions& o) {
    CriterionResult r{9, "coupled sample/population runs along n ladder", false, "", 0, 600};
    const auto res = run_consistency(acceptance_consistency_config(o));
    bool dec = true;
    for (std::size_t i = 1; i < res.sup_discrepancy.size(); ++i)
        dec = dec && res.sup_discrepancy[i] < res.sup_discrepancy[i - 1];
    r.pass = dec && res.slope >= -0.65 && res.slope <= -0.35;
    Sink s;
    s.add("median sup discrepancy %.3e > %.3e > %.3e > %.3e (%s)", res.sup_discrepancy[0], res.sup_discrepancy[1],
          res.sup_discrepancy[2], res.sup_discrepancy[3], dec ? "decreasing" : "NOT decreasing");
    s.add("final-error slope=%.3f (target [-0.65,-0.35])", res.slope);
    r.detail = s.os.str();
    return r;
}

// 10. Stationary points of G.
inline CriterionResult crit_landscape(const AcceptanceOptions& o) {
    CriterionResult r{10, "stationary points of G and their type", false, "", 0, 120};
    int bad = 0;
    double worst_grad = 0;
    Sink s;
    auto expect = [&](const char* label, const ABState& p, const MixtureModel& m, LandscapeModel kind,
                      Stationary want) {
        const auto rep = classify_stationary(p, m, kind, {}, o.quad);
        worst_grad = std::max(worst_grad, rep.grad_norm);
        const bool ok = rep.grad_norm <= 1e-6 && rep.classification == want;
        bad += !ok;
        s.add("%s=%s", label, to_string(rep.classification));
    };
    const MixtureModel m1(Vec::Constant(1, 1.0));
    Vec th2(2);
    th2 << 0.6, 0.8;
    const MixtureModel m2(th2);
    expect("M1 d=1 0", ABState::zeros(1), m1, LandscapeModel::Model1, Stationary::Min);
    expect("M1 d=1 +theta", {Vec::Zero(1), m1.theta_star}, m1, LandscapeModel::Model1, Stationary::Max);
    expect("M1 d=1 -theta", {Vec::Zero(1), -m1.theta_star}, m1, LandscapeModel::Model1, Stationary::Max);
    expect("M1 d=2 0", ABState::zeros(2), m2, LandscapeModel::Model1, Stationary::Saddle);
    expect("M1 d=2 +theta", {Vec::Zero(2), th2}, m2, LandscapeModel::Model1, Stationary::Max);
    expect("M1 d=2 -theta", {Vec::Zero(2), -th2}, m2, LandscapeModel::Model1, Stationary::Max);
    expect("M2 d=2 (0,+theta)", {Vec::Zero(2), th2}, m2, LandscapeModel::Model2, Stationary::Max);
    expect("M2 d=2 (0,-theta)", {Vec::Zero(2), -th2}, m2, LandscapeModel::Model2, Stationary::Max);
    expect("M2 d=2 midpoint", ABState::zeros(2), m2, LandscapeModel::Model2, Stationary::Saddle);
    expect("M2 d=1 midpoint", ABState::zeros(1), m1, LandscapeModel::Model2, Stationary::Saddle);
    s.add("max grad norm=%.1e", worst_grad);
    r.pass = bad == 0;
    r.detail = s.os.str();
    return r;
}

// 11. μ-form and (a, b)-form sample updates agree.
inline CriterionResult crit_forms(const AcceptanceOptions& o) {
    CriterionResult r{11, "mu-form vs (a,b)-form sample updates, 100 datasets", false, "", 0, 10};
    auto rng = make_rng(o.seed, 11);
    std::uniform_int_distribution<int> nd(1, 5), nn(5, 200);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    double worst = 0;
    for (int k = 0; k < 100; ++k) {
        const int d = nd(rng);
        Vec th(d), a(d), b(d);
        for (int i = 0; i < d; ++i) {
            th[i] = u(rng);
            a[i] = 0.5 * u(rng);
            b[i] = u(rng);
        }
        const MixtureModel m(th);
        const auto ds = sample_mixture(m, nn(rng), derive_seed(o.seed, 1100 + k));
        const ABState st{a, b};
        const auto via_ab = model2_step_ab(st, ds);
        const auto via_mu = to_ab(model2_step_mu(from_ab(st, m), ds), m);
        worst = std::max({worst, (via_ab.a - via_mu.a).cwiseAbs().maxCoeff(),
                          (via_ab.b - via_mu.b).cwiseAbs().maxCoeff()});
    }
    r.pass = worst <= 1e-12;
    Sink s;
    s.add("max abs diff=%.2e (tol 1e-12)", worst);
    r.detail = s.os.str();
    return r;
}

// 12. Concentration of the sample mean, with a deflated negative control.
inline CriterionResult crit_concentration(const AcceptanceOptions& o) {
    CriterionResult r{12, "sample-mean concentration bound, 500 trials", false, "", 0, 60};
    Vec th(2);
    th << 1.0, 0.0;
    const MixtureModel m(th);
    const double rate = concentration_check(m, 10000, 0.05, 500, derive_seed(o.seed, 12), 4.0, o.threads);
    const double ctrl = concentration_check(m, 10000, 0.05, 500, derive_seed(o.seed, 1200),
                                            o.negative_control_constant, o.threads);
    r.pass = rate <= 0.05 && ctrl >= 0.9;
    Sink s;
    s.add("violation rate=%.3f (<= 0.05); control constant %.2f violation rate=%.3f (>= 0.9)", rate,
          o.negative_control_constant, ctrl);
    r.detail = s.os.str();
    return r;
}

// 13. Rotating the inputs rotates the trajectory.
inline CriterionResult crit_equivariance(const AcceptanceOptions& o) {
    CriterionResult r{13, "orthogonal equivariance of population trajectories, 10 rotations", false, "", 0, 30};
    auto rng = make_rng(o.seed, 13);
    const int T = 60;
    double worst = 0;
    for (int k = 0; k < 10; ++k) {
        const auto c = random_config(rng, {2, 3, 8});
        const Mat A = random_orthogonal(c.model.dim, rng);
        const MixtureModel rm(A * c.model.theta_star);
        const auto base = population_fixed(c.init, c.model, T, o.quad);
        const auto rot = population_fixed(rotate(A, c.init), rm, T, o.quad);
        for (int t = 0; t <= T; ++t)
            worst = std::max(worst, distance(rotate(A, base.steps[t].state), rot.steps[t].state));
    }
    r.pass = worst <= 1e-10;
    Sink s;
    s.add("max |A x_t - x'_t| over %d steps=%.2e (tol 1e-10)", T, worst);
    r.detail = s.os.str();
    return r;
}

}  // namespace detail

inline std::string format_result(const CriterionResult& r) {
    char head[160];
    std::snprintf(head, sizeof head, "%s [%2d] %s (%.1fs, budget %.0fs): ", r.pass ? "PASS" : "FAIL", r.id,
                  r.name.c_str(), r.seconds, r.budget_seconds);
    return head + r.detail;
}

// Runs every criterion in order; `on_result` sees each line as it completes.
inline std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& o,
                                                   const std::function<void(const CriterionResult&)>& on_result = {}) {
    using clock = std::chrono::steady_clock;
    std::vector<CriterionResult> out;
    auto finish = [&](CriterionResult r, clock::time_point t0) {
        r.seconds = std::chrono::duration<double>(clock::now() - t0).count();
        if (r.seconds > r.budget_seconds) {
            r.pass = false;
            r.detail += "; over time budget";
        }
        if (on_result) on_result(r);
        out.push_back(std::move(r));
    };
    auto timed = [&](auto&& fn) {
        const auto t0 = clock::now();
        finish(fn(), t0);
    };
    timed([&] { return detail::crit_kernels(o); });
    timed([&] { return detail::crit_self_consistency(o); });
    timed([&] { return detail::crit_theorem1(o); });
    timed([&] { return detail::crit_hyperplane(o); });
    {
        // 5-7 share one sweep; its cost is charged to 5.
        const auto t0 = clock::now();
        const auto sw = detail::model2_sweep(o);
        finish(detail::crit_theorem3(sw), t0);
        const auto t6 = clock::now();
        finish(detail::crit_theorem4(sw), t6);
        const auto t7 = clock::now();
        finish(detail::crit_compactness(sw), t7);
    }
    timed([&] { return detail::crit_mc_oracle(o); });
    timed([&] { return detail::crit_consistency(o); });
    timed([&] { return detail::crit_landscape(o); });
    timed([&] { return detail::crit_forms(o); });
    timed([&] { return detail::crit_concentration(o); });
    timed([&] { return detail::crit_equivariance(o); });
    return out;
}

}  // namespace emlab
