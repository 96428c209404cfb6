#pragma once

// One-dimensional Gaussian-weighted integrals through which the population
// EM update factors after planar reduction.
//
//   w(u, b)          = ½(1 + tanh(u·b))              posterior weight, 1D
//   P(x_a, x_b, x_θ) = ∫ w(y - x_a, x_b) p(y; x_θ) dy
//   Γ(x_a, x_b, x_θ) = ∫ w(y - x_a, x_b) y p(y; x_θ) dy
//   S(x_a, x_b, x_θ) = ∫ w(y - x_a, x_b) Δ(y; x_θ) dy
//   R(x_b, x)        = ½ ∫ w(y - x, x_b) y φ(y) dy
//   F(x_b, x_θ)      = ∫ tanh((y + x_θ) x_b) (y + x_θ) φ(y) dy
//   K(x, x_b)        = ½ ∫ tanh(y x_b) φ(y - x) dy
//
// p is the centered mixture density and Δ its lobe half-difference (see
// gauss_quad.hpp). The public eval_* functions take the canonical
// non-negative arguments; `kernel_moments` accepts any signs and is what the
// population update calls.

#include <array>
#include <cmath>

#include "emlab/errors.hpp"
#include "emlab/gauss_quad.hpp"

namespace emlab {

inline double posterior_weight(double u, double b) { return 0.5 * (1.0 + std::tanh(u * b)); }

struct KernelArgs {
    double x_a = 0.0;
    double x_b = 0.0;
    double x_theta = 0.0;

    void validate() const {
        auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
        if (!ok(x_a) || !ok(x_b) || !ok(x_theta))
            throw DomainError("KernelArgs fields must be finite and non-negative");
    }
};

// P, Γ and S share one integrand and are evaluated in a single pass.
struct KernelMoments {
    double P = 0.5;
    double Gamma = 0.0;
    double S = 0.0;
};

inline KernelMoments kernel_moments(double x_a, double x_b, double x_theta,
                                    const QuadratureSpec& spec = {}) {
    if (x_b == 0.0) return {};
    const auto lobes = integrate_lobes(
        [&](double y) {
            const double w = posterior_weight(y - x_a, x_b);
            return std::array<double, 2>{w, w * y};
        },
        x_theta, spec);
    return {0.5 * (lobes.plus[0] + lobes.minus[0]), 0.5 * (lobes.plus[1] + lobes.minus[1]),
            0.5 * (lobes.plus[0] - lobes.minus[0])};
}

inline double eval_P(const KernelArgs& args, const QuadratureSpec& spec = {}) {
    args.validate();
    return kernel_moments(args.x_a, args.x_b, args.x_theta, spec).P;
}

inline double eval_Gamma(const KernelArgs& args, const QuadratureSpec& spec = {}) {
    args.validate();
    return kernel_moments(args.x_a, args.x_b, args.x_theta, spec).Gamma;
}

inline double eval_S(const KernelArgs& args, const QuadratureSpec& spec = {}) {
    args.validate();
    return kernel_moments(args.x_a, args.x_b, args.x_theta, spec).S;
}

// Even in x.
inline double eval_R(double x_b, double x, const QuadratureSpec& spec = {}) {
    if (!(x_b >= 0.0) || !std::isfinite(x_b) || !std::isfinite(x))
        throw DomainError("eval_R: x_b must be finite and >= 0, x finite");
    if (x_b == 0.0) return 0.0;
    return integrate_against_normal(
        [&](double y) { return 0.5 * posterior_weight(y - x, x_b) * y; }, 0.0, spec);
}

// Model-1 population map along the b direction: F(b, θ) with F(θ, θ) = θ.
inline double eval_F(double x_b, double x_theta, const QuadratureSpec& spec = {}) {
    if (!(x_b >= 0.0) || !std::isfinite(x_b) || !std::isfinite(x_theta))
        throw DomainError("eval_F: x_b must be finite and >= 0, x_theta finite");
    if (x_b == 0.0) return 0.0;
    return integrate_against_normal(
        [&](double u) { return std::tanh(u * x_b) * u; }, x_theta, spec);
}

inline double eval_K(double x, double x_b, const QuadratureSpec& spec = {}) {
    if (!(x_b >= 0.0) || !std::isfinite(x_b) || !std::isfinite(x))
        throw DomainError("eval_K: x_b must be finite and >= 0, x finite");
    if (x_b == 0.0) return 0.0;
    return integrate_against_normal([&](double y) { return 0.5 * std::tanh(y * x_b); }, x, spec);
}

// Closed-form helpers used by the kernel inequalities.
struct AuxBounds {
    double l = 0.0;          // x(1 - 2Φ(-x)) + 2φ(x), upper bound on F(·, x)
    double W = 0.0;          // φ(x) - x(1 - Φ(x))
    double J = 0.0;          // ½(x - l(x)(1 - 2Φ(-x))), positive
    double mills_gap = 0.0;  // (x + √(2/π))(1 - Φ(x)) - φ(x), positive
};

inline AuxBounds eval_aux_bounds(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("eval_aux_bounds: x must be > 0");
    const double tail = std_normal_cdf(-x);  // 1 - Φ(x) without cancellation
    const double pdf = std_normal_pdf(x);
    AuxBounds out;
    out.l = x * (1.0 - 2.0 * tail) + 2.0 * pdf;
    out.W = pdf - x * tail;
    out.J = 0.5 * (x - out.l * (1.0 - 2.0 * tail));
    out.mills_gap = (x + kSqrt2OverPi) * tail - pdf;
    return out;
}

}  // namespace emlab
