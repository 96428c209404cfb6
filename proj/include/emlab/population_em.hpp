#pragma once

// Population EM for both models, computed exactly via planar reduction onto
// span(b, θ*), plus the trajectory runner shared with the sample-based code.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "emlab/errors.hpp"
#include "emlab/gauss_quad.hpp"
#include "emlab/geometry.hpp"
#include "emlab/kernels.hpp"

namespace emlab {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct StepRecord {
    int t = 0;
    ABState state;
    double p = 0.5;  // weight mass computed from this state
    double beta = kNaN;
    double sin_beta = kNaN;
    double norm_a = 0.0;
    double dist_b = 0.0;  // ‖b - s·θ*‖, s = sgn⟨b⁰, θ*⟩
    double ratio_a = kNaN;
    double ratio_b = kNaN;
    double ratio_sin = kNaN;
};
using PopStepRecord = StepRecord;

struct StopRule {
    int max_iters = 10000;
    double step_tol = 1e-10;

    void validate() const {
        if (max_iters < 1) throw DomainError("StopRule.max_iters must be >= 1");
        if (!(step_tol > 0.0)) throw DomainError("StopRule.step_tol must be > 0");
    }
};

struct Trajectory {
    std::vector<StepRecord> steps;
    ABState final_state;  // the iterate after the last recorded step
    bool converged = false;
};

inline int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

namespace detail {

inline double safe_ratio(double num, double den) { return den > 0.0 ? num / den : kNaN; }

inline StepRecord make_record(int t, const ABState& s, double p, const MixtureModel& model, int sign,
                              const StepRecord* prev) {
    StepRecord r;
    r.t = t;
    r.state = s;
    r.p = p;
    r.norm_a = s.a.norm();
    r.dist_b = (s.b - double(sign) * model.theta_star).norm();
    const double nb = s.b.norm();
    const double nt = model.theta_star.norm();
    if (nb > 0.0 && nt > 0.0) {
        const auto pc = planar_reduce(s, model);
        r.beta = angle_beta(pc);
        r.sin_beta = sin_beta(pc);
    }
    if (prev) {
        r.ratio_a = safe_ratio(r.norm_a, prev->norm_a);
        r.ratio_b = safe_ratio(r.dist_b, prev->dist_b);
        r.ratio_sin = safe_ratio(r.sin_beta, prev->sin_beta);
    }
    return r;
}

}  // namespace detail

// Iterates `step(state) -> pair<ABState, double p>` under a stop rule.
template <class Step>
Trajectory run_iteration(const ABState& init, const MixtureModel& model, const StopRule& stop,
                         Step&& step) {
    model.validate();
    check_state(init, model);
    stop.validate();
    const int sign = sign_of(init.b.dot(model.theta_star));
    Trajectory traj;
    traj.steps.reserve(std::min(stop.max_iters, 1024));
    ABState state = init;
    for (int t = 0; t < stop.max_iters; ++t) {
        auto [next, p] = step(state);
        traj.steps.push_back(detail::make_record(t, state, p, model, sign,
                                                 traj.steps.empty() ? nullptr : &traj.steps.back()));
        const bool done = distance(next, state) <= stop.step_tol;
        state = std::move(next);
        if (done) {
            traj.converged = true;
            break;
        }
    }
    traj.final_state = std::move(state);
    return traj;
}

// θ ↦ E tanh⟨Y, θ⟩ Y.
inline Vec model1_step(const Vec& theta, const MixtureModel& model, const QuadratureSpec& spec = {}) {
    model.validate();
    detail::check_dim(theta, model.dim, "theta");
    if (theta.norm() == 0.0) return Vec::Zero(model.dim);
    const auto pc = planar_reduce({Vec::Zero(model.dim), theta}, model);
    const double f = eval_F(pc.norm_b, pc.theta1, spec);
    Vec out = f * pc.e1;
    if (pc.theta2 > 0.0) out += 2.0 * pc.theta2 * kernel_moments(0.0, pc.norm_b, pc.theta1, spec).S * pc.e2;
    return out;
}

struct Model2Step {
    ABState next;
    double p = 0.5;
};

inline Model2Step model2_step(const ABState& s, const MixtureModel& model, const QuadratureSpec& spec = {}) {
    model.validate();
    check_state(s, model);
    if (s.b.norm() == 0.0) return {ABState::zeros(model.dim), 0.5};
    const auto pc = planar_reduce(s, model);
    const auto m = kernel_moments(pc.x_a, pc.norm_b, pc.theta1, spec);
    // The two lobes of w(y) at x_a = 0 sum to one exactly.
    const double p = pc.x_a == 0.0 ? 0.5 : m.P;
    if (!(p > 1e-15 && p < 1.0 - 1e-15))
        throw DegenerateState("model2_step: p = " + std::to_string(p) + " outside (1e-15, 1-1e-15)");
    Vec q = m.Gamma * pc.e1;
    if (pc.theta2 > 0.0) q += pc.theta2 * m.S * pc.e2;
    const double denom = 2.0 * p * (1.0 - p);
    return {{q * ((1.0 - 2.0 * p) / denom), q / denom}, p};
}

inline Trajectory run(const ABState& init, const MixtureModel& model, const StopRule& stop = {},
                      const QuadratureSpec& spec = {}) {
    return run_iteration(init, model, stop, [&](const ABState& s) {
        auto r = model2_step(s, model, spec);
        return std::pair{std::move(r.next), r.p};
    });
}

// Model 1 embedded as a ≡ 0, b = θ.
inline Trajectory run_model1(const Vec& theta0, const MixtureModel& model, const StopRule& stop = {},
                             const QuadratureSpec& spec = {}) {
    const ABState init{Vec::Zero(model.dim), theta0};
    return run_iteration(init, model, stop, [&](const ABState& s) {
        return std::pair{ABState{Vec::Zero(model.dim), model1_step(s.b, model, spec)}, 0.5};
    });
}

enum class Limit { PlusTheta, MinusTheta, Zero };

inline const char* to_string(Limit l) {
    switch (l) {
        case Limit::PlusTheta: return "PLUS_THETA";
        case Limit::MinusTheta: return "MINUS_THETA";
        case Limit::Zero: return "ZERO";
    }
    return "?";
}

// No thresholding: only an exactly zero ⟨b⁰, θ*⟩ predicts the degenerate limit.
inline Limit classify_limit(const ABState& init, const MixtureModel& model) {
    check_state(init, model);
    const int s = sign_of(init.b.dot(model.theta_star));
    return s > 0 ? Limit::PlusTheta : s < 0 ? Limit::MinusTheta : Limit::Zero;
}

struct APrioriBounds {
    double c_U1 = 0.0;
    double c_U2 = 0.0;
    double c_U3 = 0.0;
};

inline APrioriBounds a_priori_bounds(const ABState& init, const MixtureModel& model) {
    check_state(init, model);
    const double t2 = model.theta_star.squaredNorm();
    const double t = std::sqrt(t2);
    APrioriBounds out;
    out.c_U1 = std::sqrt(std::max({init.a.squaredNorm(), 2.0 / std::numbers::pi + t2 / 2.0,
                                   16.0 / 9.0 + 73.0 / 36.0 * t2}));
    out.c_U2 = 0.25 * std_normal_cdf(-(out.c_U1 + t));
    const double c2 = out.c_U2;
    out.c_U3 = std::sqrt(std::max(init.b.squaredNorm(),
                                  t2 + (1.0 + t2) / (4.0 * c2 * c2 * (1.0 - c2) * (1.0 - c2))));
    return out;
}

}  // namespace emlab
