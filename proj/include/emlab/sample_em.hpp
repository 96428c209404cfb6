#pragma once

// Finite-sample EM for both models on an immutable dataset.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "emlab/errors.hpp"
#include "emlab/geometry.hpp"
#include "emlab/population_em.hpp"
#include "emlab/rng.hpp"

namespace emlab {

struct Dataset {
    DataMatrix data;
    std::uint64_t seed = 0;
    MixtureModel model;

    Eigen::Index n() const { return data.rows(); }
    int dim() const { return static_cast<int>(data.cols()); }
};

// Row i is ζᵢθ* + ωᵢ with ζᵢ Rademacher and ωᵢ ~ N(0, I).
inline Dataset sample_mixture(const MixtureModel& model, Eigen::Index n, std::uint64_t seed) {
    model.validate();
    if (n < 1) throw DomainError("sample_mixture: n must be >= 1");
    auto rng = make_rng(seed, 0);
    std::normal_distribution<double> n01;
    std::bernoulli_distribution coin(0.5);
    Dataset ds{DataMatrix(n, model.dim), seed, model};
    for (Eigen::Index i = 0; i < n; ++i) {
        const double z = coin(rng) ? 1.0 : -1.0;
        for (int j = 0; j < model.dim; ++j) ds.data(i, j) = z * model.theta_star[j] + n01(rng);
    }
    return ds;
}

inline Vec sample_mean(const Dataset& ds) { return ds.data.colwise().mean().transpose(); }

namespace detail {

inline void check_data(const Dataset& ds, const Vec& v, const char* what) {
    if (ds.n() < 1) throw InsufficientData("dataset is empty");
    if (v.size() != ds.dim())
        throw DimensionMismatch(std::string(what) + " has size " + std::to_string(v.size()) +
                                ", data dim is " + std::to_string(ds.dim()));
}

// Weight masses and weighted sums for both components, t = tanh⟨yᵢ - c, u⟩.
struct WeightedSums {
    double mass_plus = 0.0;   // Σ ½(1 + t)
    double mass_minus = 0.0;  // Σ ½(1 - t)
    Vec sum_plus;             // Σ ½(1 + t) y
    Vec sum_minus;            // Σ ½(1 - t) y
    Vec sum_y;
};

inline WeightedSums weighted_sums(const Dataset& ds, const Vec& c, const Vec& u) {
    const int d = ds.dim();
    WeightedSums s{0.0, 0.0, Vec::Zero(d), Vec::Zero(d), Vec::Zero(d)};
    const double cu = c.dot(u);
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        const double* y = ds.data.row(i).data();
        double yu = 0.0;
        for (int j = 0; j < d; ++j) yu += y[j] * u[j];
        const double t = std::tanh(yu - cu);
        const double wp = 0.5 * (1.0 + t);
        const double wm = 0.5 * (1.0 - t);
        s.mass_plus += wp;
        s.mass_minus += wm;
        for (int j = 0; j < d; ++j) {
            s.sum_plus[j] += wp * y[j];
            s.sum_minus[j] += wm * y[j];
            s.sum_y[j] += y[j];
        }
    }
    return s;
}

}  // namespace detail

// θ̂ ↦ (1/n) Σ tanh⟨yᵢ, θ̂⟩ yᵢ, without recentering by ȳ.
inline Vec model1_step_sample(const Vec& theta, const Dataset& ds) {
    detail::check_data(ds, theta, "theta");
    const int d = ds.dim();
    Vec acc = Vec::Zero(d);
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        const double* y = ds.data.row(i).data();
        double yt = 0.0;
        for (int j = 0; j < d; ++j) yt += y[j] * theta[j];
        const double t = std::tanh(yt);
        for (int j = 0; j < d; ++j) acc[j] += t * y[j];
    }
    return acc / double(ds.n());
}

// Posterior-weighted means; v is the responsibility of the first component.
inline MeanPair model2_step_mu(const MeanPair& m, const Dataset& ds) {
    detail::check_data(ds, m.mu1, "means.mu1");
    detail::check_data(ds, m.mu2, "means.mu2");
    const Vec c = 0.5 * (m.mu1 + m.mu2);
    const Vec delta = 0.5 * (m.mu2 - m.mu1);
    const auto s = detail::weighted_sums(ds, c, delta);
    if (s.mass_minus < 1e-300 || s.mass_plus < 1e-300)
        throw DegenerateWeights("model2_step_mu: a posterior weight sum vanished");
    return {s.sum_minus / s.mass_minus, s.sum_plus / s.mass_plus};
}

struct SampleStep {
    ABState next;
    double p = 0.5;
};

inline SampleStep model2_step_ab_detail(const ABState& st, const Dataset& ds) {
    detail::check_data(ds, st.a, "state.a");
    detail::check_data(ds, st.b, "state.b");
    const auto s = detail::weighted_sums(ds, st.a, st.b);
    const double n = double(ds.n());
    const double p = s.mass_plus / n;
    if (!(p > 1e-15 && p < 1.0 - 1e-15))
        throw DegenerateWeights("model2_step_ab: p = " + std::to_string(p) + " outside (1e-15, 1-1e-15)");
    const Vec q = s.sum_plus / n;
    const Vec ybar = s.sum_y / n;
    const double denom = 2.0 * p * (1.0 - p);
    return {{q * ((1.0 - 2.0 * p) / denom) + ybar / (2.0 * (1.0 - p)),
             q / denom - ybar / (2.0 * (1.0 - p))},
            p};
}

inline ABState model2_step_ab(const ABState& st, const Dataset& ds) {
    return model2_step_ab_detail(st, ds).next;
}

enum class SampleForm { AB, Mu };

inline Trajectory run_sample(const ABState& init, const Dataset& ds, const StopRule& stop = {},
                             SampleForm form = SampleForm::AB) {
    detail::check_data(ds, init.a, "init.a");
    if (form == SampleForm::AB) {
        return run_iteration(init, ds.model, stop, [&](const ABState& s) {
            auto r = model2_step_ab_detail(s, ds);
            return std::pair{std::move(r.next), r.p};
        });
    }
    return run_iteration(init, ds.model, stop, [&](const ABState& s) {
        const auto m = model2_step_mu(from_ab(s, ds.model), ds);
        // p is not a by-product of the μ-form; report the weight mass separately.
        const auto w = detail::weighted_sums(ds, s.a, s.b);
        return std::pair{to_ab(m, ds.model), w.mass_plus / double(ds.n())};
    });
}

inline Trajectory run_sample_model1(const Vec& theta0, const Dataset& ds, const StopRule& stop = {}) {
    detail::check_data(ds, theta0, "theta0");
    const ABState init{Vec::Zero(ds.dim()), theta0};
    return run_iteration(init, ds.model, stop, [&](const ABState& s) {
        return std::pair{ABState{Vec::Zero(ds.dim()), model1_step_sample(s.b, ds)}, 0.5};
    });
}

// Average log-likelihood of Model 2 on the data.
inline double sample_loglik(const MeanPair& m, const Dataset& ds) {
    detail::check_data(ds, m.mu1, "means.mu1");
    detail::check_data(ds, m.mu2, "means.mu2");
    const int d = ds.dim();
    const double log_norm = -0.5 * d * std::log(2.0 * std::numbers::pi) - std::log(2.0);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        const auto y = ds.data.row(i).transpose();
        const double l1 = -0.5 * (y - m.mu1).squaredNorm();
        const double l2 = -0.5 * (y - m.mu2).squaredNorm();
        const double hi = std::max(l1, l2);
        acc += hi + std::log1p(std::exp(std::min(l1, l2) - hi));
    }
    return acc / double(ds.n()) + log_norm;
}

}  // namespace emlab
