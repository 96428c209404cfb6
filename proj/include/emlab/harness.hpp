#pragma once

// Coupled sample/population experiments, contraction-constant fits, the
// error-accumulation recursion, and the concentration spot check.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "emlab/errors.hpp"
#include "emlab/geometry.hpp"
#include "emlab/population_em.hpp"
#include "emlab/rng.hpp"
#include "emlab/sample_em.hpp"

namespace emlab {

// --threads, then EMLAB_THREADS, then the hardware.
inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("EMLAB_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// fn(i) for i in [0, count); results land at their index, so the outcome does
// not depend on scheduling. The first exception (by index) is rethrown.
template <class Fn>
auto parallel_map(int count, int threads, Fn&& fn) {
    using R = decltype(fn(0));
    std::vector<R> out(count);
    std::vector<std::exception_ptr> errs(count);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < count; i = next++) {
            try {
                out[i] = fn(i);
            } catch (...) {
                errs[i] = std::current_exception();
            }
        }
    };
    const int nt = std::clamp(threads, 1, std::max(1, count));
    if (nt == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < nt; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    return out;
}

inline double median(std::vector<double> v) {
    if (v.empty()) throw InsufficientData("median of empty set");
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------- coupling

struct CoupledRun {
    Trajectory sample;
    Trajectory population;
    double sup_discrepancy = 0.0;    // max over t ≤ T
    double tail_discrepancy = 0.0;   // max over t in [T/2, T]
    double final_error = 0.0;        // ‖b̂^T - s·θ*‖
};

namespace detail {
// Exactly T steps, no early stop; T + 1 records.
template <class Step>
Trajectory run_fixed(const ABState& init, const MixtureModel& model, int T, Step&& step) {
    Trajectory traj;
    const int sign = sign_of(init.b.dot(model.theta_star));
    ABState s = init;
    for (int t = 0; t <= T; ++t) {
        auto [next, p] = step(s);
        traj.steps.push_back(make_record(t, s, p, model, sign, traj.steps.empty() ? nullptr : &traj.steps.back()));
        if (t < T) s = std::move(next);
    }
    traj.final_state = s;
    return traj;
}

inline Trajectory population_fixed(const ABState& init, const MixtureModel& model, int T,
                                   const QuadratureSpec& spec) {
    return run_fixed(init, model, T, [&](const ABState& s) {
        auto r = model2_step(s, model, spec);
        return std::pair{std::move(r.next), r.p};
    });
}

inline CoupledRun couple(Trajectory pop, const ABState& init, const Dataset& ds, int T) {
    CoupledRun out;
    out.sample = run_fixed(init, ds.model, T, [&](const ABState& s) {
        auto r = model2_step_ab_detail(s, ds);
        return std::pair{std::move(r.next), r.p};
    });
    out.population = std::move(pop);
    for (int t = 0; t <= T; ++t) {
        const double dist = distance(out.sample.steps[t].state, out.population.steps[t].state);
        out.sup_discrepancy = std::max(out.sup_discrepancy, dist);
        if (2 * t >= T) out.tail_discrepancy = std::max(out.tail_discrepancy, dist);
    }
    out.final_error = out.sample.steps.back().dist_b;
    return out;
}
}  // namespace detail

// Sample and population EM from the same initialization for T steps.
inline CoupledRun coupled_run(const ABState& init, const MixtureModel& model, Eigen::Index n, int T,
                              std::uint64_t seed, const QuadratureSpec& spec = {}) {
    model.validate();
    check_state(init, model);
    if (T < 1) throw DomainError("coupled_run: T must be >= 1");
    const auto ds = sample_mixture(model, n, seed);
    return detail::couple(detail::population_fixed(init, model, T, spec), init, ds, T);
}

struct ConsistencyConfig {
    MixtureModel model;
    ABState init;
    std::vector<Eigen::Index> n_ladder{1000, 10000, 100000, 1000000};
    int trials = 20;
    int T = 50;
    std::uint64_t seed = 1;
    int threads = 0;
    QuadratureSpec quad;
};

struct TrialRecord {
    Eigen::Index n = 0;
    int trial = 0;
    std::uint64_t seed = 0;
    double sup_discrepancy = 0.0;
    double tail_discrepancy = 0.0;
    double final_error = 0.0;
};

struct ConsistencyResult {
    std::vector<Eigen::Index> n_ladder;
    std::vector<double> sup_discrepancy;   // medians over trials
    std::vector<double> tail_discrepancy;
    std::vector<double> final_error;
    double slope = 0.0;
    int trials = 0;
    std::vector<std::uint64_t> seeds;      // per-trial base seeds
    std::vector<TrialRecord> per_trial;
};

// Least-squares slope of log(error) against log(n).
inline double rate_fit(const std::vector<double>& n, const std::vector<double>& err) {
    if (n.size() != err.size()) throw DimensionMismatch("rate_fit: size mismatch");
    if (n.size() < 4) throw InsufficientData("rate_fit needs at least 4 ladder points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = double(n.size());
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (!(n[i] > 0.0) || !(err[i] > 0.0)) throw DomainError("rate_fit: values must be positive");
        const double x = std::log(n[i]), y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double den = m * sxx - sx * sx;
    if (!(den > 0.0)) throw InsufficientData("rate_fit: ladder has no spread");
    return (m * sxy - sx * sy) / den;
}

inline double rate_fit(const ConsistencyResult& r) {
    std::vector<double> n(r.n_ladder.begin(), r.n_ladder.end());
    return rate_fit(n, r.final_error);
}

inline ConsistencyResult run_consistency(const ConsistencyConfig& cfg) {
    cfg.model.validate();
    check_state(cfg.init, cfg.model);
    if (cfg.trials < 1) throw DomainError("consistency: trials must be >= 1");
    for (std::size_t i = 1; i < cfg.n_ladder.size(); ++i)
        if (cfg.n_ladder[i] <= cfg.n_ladder[i - 1])
            throw DomainError("consistency: n_ladder must be strictly increasing");

    ConsistencyResult res;
    res.n_ladder = cfg.n_ladder;
    res.trials = cfg.trials;
    for (int k = 0; k < cfg.trials; ++k) res.seeds.push_back(derive_seed(cfg.seed, k));

    // Same init for every trial, so the population side is shared.
    const Trajectory pop = detail::population_fixed(cfg.init, cfg.model, cfg.T, cfg.quad);
    const int L = static_cast<int>(cfg.n_ladder.size());
    auto jobs = parallel_map(L * cfg.trials, resolve_threads(cfg.threads), [&](int job) {
        const int li = job / cfg.trials;
        const int k = job % cfg.trials;
        const auto n = cfg.n_ladder[li];
        const std::uint64_t s = derive_seed(res.seeds[k], static_cast<std::uint64_t>(n));
        const auto ds = sample_mixture(cfg.model, n, s);
        const auto run = detail::couple(pop, cfg.init, ds, cfg.T);
        return TrialRecord{n, k, s, run.sup_discrepancy, run.tail_discrepancy, run.final_error};
    });
    for (int li = 0; li < L; ++li) {
        std::vector<double> sup, tail, fin;
        for (int k = 0; k < cfg.trials; ++k) {
            const auto& r = jobs[li * cfg.trials + k];
            sup.push_back(r.sup_discrepancy);
            tail.push_back(r.tail_discrepancy);
            fin.push_back(r.final_error);
        }
        res.sup_discrepancy.push_back(median(sup));
        res.tail_discrepancy.push_back(median(tail));
        res.final_error.push_back(median(fin));
    }
    res.per_trial = std::move(jobs);
    if (L >= 4) res.slope = rate_fit(res);
    else res.slope = std::numeric_limits<double>::quiet_NaN();
    return res;
}

// ------------------------------------------------------- contraction fits

struct ContractionEstimate {
    double kappa_a = kNaN;
    double kappa_b = kNaN;
    double kappa_sin = kNaN;  // geometric envelope: sin β^t ≤ κ^t sin β⁰
    double c_b = kNaN;
    int T0 = -1;              // -1: the b-recursion never settles
    bool valid = false;       // every κ defined and < 1, T0 found
};

struct ContractionOptions {
    double noise_floor = 1e-11;  // ratios with a denominator below this are skipped
};

namespace detail {
// Largest ratio over the tail that follows the last non-contracting step.
inline double tail_max_ratio(const std::vector<double>& err, double floor) {
    std::vector<double> r;
    for (std::size_t t = 1; t < err.size(); ++t)
        if (err[t - 1] > floor && std::isfinite(err[t])) r.push_back(err[t] / err[t - 1]);
    if (r.empty()) return kNaN;
    std::size_t start = r.size();
    while (start > 0 && r[start - 1] < 1.0) --start;
    if (start == r.size()) return r.back();
    return *std::max_element(r.begin() + start, r.end());
}
}  // namespace detail

inline ContractionEstimate contraction_estimate(const Trajectory& traj, const ContractionOptions& opt = {}) {
    const auto& st = traj.steps;
    if (st.size() < 5) throw InsufficientData("contraction_estimate needs at least 5 records");
    std::vector<double> ea, eb;
    for (const auto& r : st) {
        ea.push_back(r.norm_a);
        eb.push_back(r.dist_b);
    }
    ContractionEstimate out;
    out.kappa_a = detail::tail_max_ratio(ea, opt.noise_floor);
    out.kappa_b = detail::tail_max_ratio(eb, opt.noise_floor);

    const double s0 = st.front().sin_beta;
    if (std::isfinite(s0) && s0 > opt.noise_floor) {
        double k = 0.0;
        bool any = false;
        for (std::size_t t = 1; t < st.size(); ++t) {
            const double s = st[t].sin_beta;
            if (!std::isfinite(s) || s <= opt.noise_floor) break;
            k = std::max(k, std::pow(s / s0, 1.0 / double(t)));
            any = true;
        }
        if (any) out.kappa_sin = k;
    }

    // b-recursion ‖b^{t+1}-sθ*‖² ≤ κ_b²‖b^t-sθ*‖² + c_b‖a^t‖.
    if (std::isfinite(out.kappa_b)) {
        const double kb2 = out.kappa_b * out.kappa_b;
        double cb = 0.0;
        for (std::size_t t = 1; t + 1 < st.size(); ++t) {
            if (ea[t] <= opt.noise_floor) continue;
            const double excess = eb[t + 1] * eb[t + 1] - kb2 * eb[t] * eb[t];
            cb = std::max(cb, excess / ea[t]);
        }
        out.c_b = std::max(cb, std::numeric_limits<double>::min());
        int T0 = 0;
        for (std::size_t t = 0; t + 1 < st.size(); ++t) {
            const double lhs = eb[t + 1] * eb[t + 1];
            const double rhs = kb2 * eb[t] * eb[t] + out.c_b * ea[t];
            if (lhs > rhs * (1.0 + 1e-12) + 1e-300) T0 = static_cast<int>(t) + 1;
        }
        out.T0 = T0 + 1 < static_cast<int>(st.size()) ? T0 : -1;
    }

    auto ok = [](double k) { return std::isfinite(k) && k < 1.0; };
    out.valid = ok(out.kappa_a) && ok(out.kappa_b) && (ok(out.kappa_sin) || !std::isfinite(s0) || s0 == 0.0) &&
                out.T0 >= 0;
    return out;
}

// ----------------------------------------------------- error accumulation

enum class AccumulationBound {
    AsPublished,  // t·m^t in the cross term, m = max{√κ_a, κ_b}
    Corrected,    // t·m^{t-1}: what the geometric-sum argument actually gives
};

struct AccumulationOptions {
    double a0 = 1.0;       // ‖a⁰‖
    double b0 = 1.0;       // ‖b⁰ - θ*‖
    AccumulationBound form = AccumulationBound::Corrected;
};

struct AccumulationReport {
    bool holds = true;
    int first_violation = -1;
    double max_a = 0.0;  // steady-state proxies from the simulation
    double max_b = 0.0;
    double final_a = 0.0;
    double final_b = 0.0;
};

// Runs the worst case (every inequality tight) for T steps and compares each
// iterate with the closed-form envelopes.
inline AccumulationReport error_accumulation_run(double eps_a, double eps_b, double kappa_a, double kappa_b,
                                                 double c_b, int T, const AccumulationOptions& opt = {}) {
    if (!(kappa_a > 0.0 && kappa_a < 1.0 && kappa_b > 0.0 && kappa_b < 1.0))
        throw DomainError("error_accumulation: kappas must lie in (0, 1)");
    if (eps_a < 0.0 || eps_b < 0.0 || c_b < 0.0 || opt.a0 < 0.0 || opt.b0 < 0.0 || T < 0)
        throw DomainError("error_accumulation: inputs must be non-negative");
    AccumulationReport rep;
    const double m = std::max(std::sqrt(kappa_a), kappa_b);
    double a = opt.a0, b = opt.b0;
    for (int t = 0; t <= T; ++t) {
        const double bound_a = std::pow(kappa_a, t) * opt.a0 + eps_a / (1.0 - kappa_a);
        const double cross_pow = opt.form == AccumulationBound::AsPublished ? t : std::max(t - 1, 0);
        const double bound_b = std::pow(kappa_b, t) * opt.b0 +
                               t * std::sqrt(c_b * opt.a0) * std::pow(m, cross_pow) +
                               std::sqrt(c_b * eps_a / (1.0 - kappa_a)) / (1.0 - kappa_b) +
                               eps_b / (1.0 - kappa_b);
        const double slack = 1e-12 * (1.0 + std::max(bound_a, bound_b));
        if ((a > bound_a + slack || b > bound_b + slack) && rep.holds) {
            rep.holds = false;
            rep.first_violation = t;
        }
        rep.max_a = std::max(rep.max_a, a);
        rep.max_b = std::max(rep.max_b, b);
        rep.final_a = a;
        rep.final_b = b;
        const double a_next = kappa_a * a + eps_a;
        b = kappa_b * b + std::sqrt(c_b * a) + eps_b;
        a = a_next;
    }
    return rep;
}

inline bool error_accumulation_check(double eps_a, double eps_b, double kappa_a, double kappa_b, double c_b,
                                     int T, const AccumulationOptions& opt = {}) {
    return error_accumulation_run(eps_a, eps_b, kappa_a, kappa_b, c_b, T, opt).holds;
}

// --------------------------------------------------------- concentration

inline double concentration_bound(const MixtureModel& model, Eigen::Index n, double delta, double constant = 4.0) {
    return constant * (model.theta_star.norm() + 1.0) *
           std::sqrt((2.0 * model.dim + std::log(1.0 / delta)) / double(n));
}

// Fraction of trials where ‖ȳ‖ exceeds the bound.
inline double concentration_check(const MixtureModel& model, Eigen::Index n, double delta, int trials,
                                  std::uint64_t seed, double constant = 4.0, int threads = 1) {
    model.validate();
    if (trials < 100) throw InsufficientData("concentration_check needs at least 100 trials");
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("concentration_check: delta must lie in (0, 1)");
    const double bound = concentration_bound(model, n, delta, constant);
    const auto hits = parallel_map(trials, threads, [&](int k) {
        const auto ds = sample_mixture(model, n, derive_seed(seed, k));
        return sample_mean(ds).norm() > bound ? 1 : 0;
    });
    int v = 0;
    for (int h : hits) v += h;
    return double(v) / trials;
}

}  // namespace emlab
