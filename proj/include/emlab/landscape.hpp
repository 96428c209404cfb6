#pragma once

// Expected log-likelihood G under the true mixture, its gradient, and
// stationary-point classification.
//
// With c = (μ₁+μ₂)/2 and δ = (μ₂-μ₁)/2,
//   log f(y) = -(d/2)log 2π - ½‖y-c‖² - ½‖δ‖² + log cosh⟨y-c, δ⟩,
// so G needs one Gaussian moment in closed form and a single 1D mixture
// integral along δ/‖δ‖.

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "emlab/errors.hpp"
#include "emlab/gauss_quad.hpp"
#include "emlab/geometry.hpp"
#include "emlab/kernels.hpp"
#include "emlab/population_em.hpp"

namespace emlab {

enum class LandscapeModel { Model1, Model2 };

namespace detail {
inline double log_cosh(double z) {
    const double az = std::abs(z);
    return az + std::log1p(std::exp(-2.0 * az)) - std::numbers::ln2;
}

inline void check_means(const MeanPair& m, const MixtureModel& model) {
    model.validate();
    check_dim(m.mu1, model.dim, "means.mu1");
    check_dim(m.mu2, model.dim, "means.mu2");
}
}  // namespace detail

inline double expected_loglik(const MeanPair& m, const MixtureModel& model, const QuadratureSpec& spec = {}) {
    detail::check_means(m, model);
    const Vec c = 0.5 * (m.mu1 + m.mu2);
    const Vec delta = 0.5 * (m.mu2 - m.mu1);
    const double d = model.dim;
    double g = -0.5 * d * std::log(2.0 * std::numbers::pi) -
               0.5 * (d + model.theta_star.squaredNorm() + c.squaredNorm()) - 0.5 * delta.squaredNorm();
    const double nd = delta.norm();
    if (nd > 0.0) {
        const Vec e = delta / nd;
        const double xc = c.dot(e);
        g += integrate_against_mixture([&](double u) { return detail::log_cosh(nd * (u - xc)); },
                                       model.theta_star.dot(e), spec);
    }
    return g;
}

inline double expected_loglik_model1(const Vec& theta, const MixtureModel& model, const QuadratureSpec& spec = {}) {
    return expected_loglik({-theta, theta}, model, spec);
}

// (∂G/∂μ₁, ∂G/∂μ₂) = (-q - μ₁(1-p), q - μ₂p) with q, p the weighted moments at (c, δ).
inline MeanPair grad_G(const MeanPair& m, const MixtureModel& model, const QuadratureSpec& spec = {}) {
    detail::check_means(m, model);
    const ABState s{0.5 * (m.mu1 + m.mu2), 0.5 * (m.mu2 - m.mu1)};
    double p = 0.5;
    Vec q = Vec::Zero(model.dim);
    if (s.b.norm() > 0.0) {
        const auto pc = planar_reduce(s, model);
        const auto k = kernel_moments(pc.x_a, pc.norm_b, pc.theta1, spec);
        p = pc.x_a == 0.0 ? 0.5 : k.P;
        q = k.Gamma * pc.e1;
        if (pc.theta2 > 0.0) q += pc.theta2 * k.S * pc.e2;
    }
    return {-q - m.mu1 * (1.0 - p), q - m.mu2 * p};
}

inline double grad_norm(const MeanPair& g) { return std::sqrt(g.mu1.squaredNorm() + g.mu2.squaredNorm()); }

// Gradient in the coordinates the classifier works in: (a, b) stacked for
// Model 2, θ = b for Model 1 (a is ignored there).
inline Vec landscape_gradient(const ABState& x, const MixtureModel& model, LandscapeModel kind,
                              const QuadratureSpec& spec = {}) {
    check_state(x, model);
    const int d = model.dim;
    if (kind == LandscapeModel::Model1) {
        const auto g = grad_G({-x.b, x.b}, model, spec);
        return g.mu2 - g.mu1;
    }
    const auto g = grad_G(from_ab(x, model), model, spec);
    Vec out(2 * d);
    out << g.mu1 + g.mu2, g.mu2 - g.mu1;
    return out;
}

inline double landscape_value(const ABState& x, const MixtureModel& model, LandscapeModel kind,
                              const QuadratureSpec& spec = {}) {
    if (kind == LandscapeModel::Model1) return expected_loglik_model1(x.b, model, spec);
    return expected_loglik(from_ab(x, model), model, spec);
}

enum class Stationary { Max, Min, Saddle, Unresolved };

inline const char* to_string(Stationary s) {
    switch (s) {
        case Stationary::Max: return "MAX";
        case Stationary::Min: return "MIN";
        case Stationary::Saddle: return "SADDLE";
        case Stationary::Unresolved: return "UNRESOLVED";
    }
    return "?";
}

struct StationaryReport {
    ABState point;
    double grad_norm = 0.0;
    std::vector<double> hessian_eigs;
    double hessian_asymmetry = 0.0;  // max |H - Hᵀ| before symmetrizing
    Stationary classification = Stationary::Unresolved;
    bool higher_order = false;  // decided by probing a null direction
};

struct ClassifyOptions {
    double grad_tol = 1e-6;
    double eig_tol = 1e-6;
    double hessian_step = 1e-4;
    double probe_step = 0.1;  // null-direction probe length
};

namespace detail {
inline ABState unpack(const Vec& z, int d, LandscapeModel kind) {
    if (kind == LandscapeModel::Model1) return {Vec::Zero(d), z};
    return {z.head(d), z.tail(d)};
}
inline Vec pack(const ABState& x, LandscapeModel kind) {
    if (kind == LandscapeModel::Model1) return x.b;
    Vec z(x.a.size() * 2);
    z << x.a, x.b;
    return z;
}
}  // namespace detail

// Sign pattern of the finite-difference Hessian. A semidefinite Hessian with
// null directions is resolved by probing G along each null eigenvector: a
// drop (rise) along a null direction of a PSD (NSD) Hessian means a saddle.
inline StationaryReport classify_stationary(const ABState& point, const MixtureModel& model,
                                            LandscapeModel kind = LandscapeModel::Model2,
                                            const ClassifyOptions& opt = {}, const QuadratureSpec& spec = {}) {
    check_state(point, model);
    const int d = model.dim;
    StationaryReport rep;
    rep.point = point;
    if (kind == LandscapeModel::Model1) rep.point.a.setZero();
    const Vec z0 = detail::pack(rep.point, kind);
    rep.grad_norm = kind == LandscapeModel::Model1 ? landscape_gradient(rep.point, model, kind, spec).norm()
                                                   : grad_norm(grad_G(from_ab(rep.point, model), model, spec));
    if (rep.grad_norm > opt.grad_tol) return rep;

    const auto k = z0.size();
    Mat H(k, k);
    const double h = opt.hessian_step;
    for (Eigen::Index j = 0; j < k; ++j) {
        Vec zp = z0, zm = z0;
        zp[j] += h;
        zm[j] -= h;
        H.col(j) = (landscape_gradient(detail::unpack(zp, d, kind), model, kind, spec) -
                    landscape_gradient(detail::unpack(zm, d, kind), model, kind, spec)) /
                   (2.0 * h);
    }
    rep.hessian_asymmetry = (H - H.transpose()).cwiseAbs().maxCoeff();
    const Mat Hs = 0.5 * (H + H.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(Hs);
    const Vec ev = es.eigenvalues();
    rep.hessian_eigs.assign(ev.data(), ev.data() + ev.size());

    int pos = 0, neg = 0;
    for (double e : rep.hessian_eigs) {
        pos += e > opt.eig_tol;
        neg += e < -opt.eig_tol;
    }
    if (pos > 0 && neg > 0) rep.classification = Stationary::Saddle;
    else if (neg == k) rep.classification = Stationary::Max;
    else if (pos == k) rep.classification = Stationary::Min;
    else if (pos + neg > 0) {
        const double g_center = landscape_value(rep.point, model, kind, spec);
        for (Eigen::Index i = 0; i < k; ++i) {
            if (std::abs(ev[i]) > opt.eig_tol) continue;
            const Vec v = es.eigenvectors().col(i);
            for (double sgn : {1.0, -1.0}) {
                const double dg =
                    landscape_value(detail::unpack(z0 + sgn * opt.probe_step * v, d, kind), model, kind, spec) -
                    g_center;
                if ((pos > 0 && dg < -opt.eig_tol) || (neg > 0 && dg > opt.eig_tol)) {
                    rep.classification = Stationary::Saddle;
                    rep.higher_order = true;
                }
            }
        }
    }
    return rep;
}

inline bool fixed_stationary_correspondence(const ABState& point, const MixtureModel& model,
                                            const QuadratureSpec& spec = {}) {
    const auto step = model2_step(point, model, spec);
    const bool fixed = distance(step.next, point) <= 1e-8;
    const bool stationary = grad_norm(grad_G(from_ab(point, model), model, spec)) <= 1e-6;
    return fixed == stationary;
}

}  // namespace emlab
