#pragma once

// Scalar Gaussian primitives and the Gauss-Hermite engine that evaluates every
// one-dimensional expectation in the library.
//
// Integrals of the form  ∫ f(y) φ(y - c) dy  are computed with the change of
// variable y = c + √2·u and an N-point Gauss-Hermite rule. Mixture integrals
// split into one such sum per lobe (c = +x_theta and c = -x_theta). Every
// result is self-validated by comparing N against 2N nodes; N doubles until
// the two agree within `abs_tol` or the node budget is exhausted.
//
// Steep integrands (tanh(x_b·y) with large x_b has poles close to the real
// axis) defeat Gauss-Hermite. Those fall back to composite 16-point
// Gauss-Legendre on [c - R, c + R], R = truncation_radius, again doubling the
// panel count until two levels agree.

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "emlab/errors.hpp"

namespace emlab {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;  // 1/√(2π)
inline constexpr double kSqrt2OverPi = 0.79788456080286535588; // √(2/π)

inline double std_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

// Φ via the C library's complementary error function; accurate to a few ulp
// across the whole real line, including the far left tail.
inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0); }

// Density of 0.5 N(-x_theta, 1) + 0.5 N(x_theta, 1).
inline double mixture_pdf_1d(double y, double x_theta) {
    return 0.5 * (std_normal_pdf(y - x_theta) + std_normal_pdf(y + x_theta));
}

// Half-difference of the two lobes; odd in y.
inline double mixture_pdf_diff(double y, double x_theta) {
    return 0.5 * (std_normal_pdf(y - x_theta) - std_normal_pdf(y + x_theta));
}

struct QuadratureSpec {
    int nodes_per_lobe = 128;
    double abs_tol = 1e-12;
    double truncation_radius = 12.0;
    // Gauss-Hermite doubling stops here and the panel fallback takes over.
    int max_nodes_per_lobe = 4096;
    int max_panels = 1 << 16;

    void validate() const {
        if (nodes_per_lobe < 16) throw DomainError("QuadratureSpec.nodes_per_lobe must be >= 16");
        if (!(abs_tol > 0.0)) throw DomainError("QuadratureSpec.abs_tol must be > 0");
        if (!(truncation_radius > 0.0))
            throw DomainError("QuadratureSpec.truncation_radius must be > 0");
        if (max_nodes_per_lobe < 2 * nodes_per_lobe)
            throw DomainError("QuadratureSpec.max_nodes_per_lobe must be >= 2*nodes_per_lobe");
        if (max_panels < 64) throw DomainError("QuadratureSpec.max_panels must be >= 64");
    }

    friend bool operator==(const QuadratureSpec&, const QuadratureSpec&) = default;
};

// Nodes and weights for E f(Z), Z ~ N(0,1):  E f(Z) ≈ Σ weights[i]·f(nodes[i]).
// Nodes whose weight underflows to zero are dropped.
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {

// Orthonormal Hermite polynomials (weight e^{-x²}) evaluated with running
// rescaling so that |x| up to ~√(2N) never overflows. Returns the values of
// h_{n-1}, h_n and log Σ_{k<n} h_k² in a common scale.
struct HermiteEval {
    double h_prev = 0.0;
    double h_cur = 0.0;
    double log_sum_sq = 0.0;
};

inline HermiteEval hermite_orthonormal(int n, double x) {
    constexpr double kBig = 1e150;
    constexpr double kSmall = 1e-150;
    double log_scale = 0.0;
    double prev = 0.0;
    double cur = std::pow(std::numbers::pi, -0.25);
    double sum_sq = 0.0;
    for (int k = 0; k < n; ++k) {
        sum_sq += cur * cur;
        const double next = x * std::sqrt(2.0 / (k + 1)) * cur - std::sqrt(double(k) / (k + 1)) * prev;
        prev = cur;
        cur = next;
        if (std::abs(cur) > kBig) {
            prev *= kSmall;
            cur *= kSmall;
            sum_sq *= kSmall * kSmall;
            log_scale -= std::log(kSmall);
        }
    }
    return {prev, cur, std::log(sum_sq) + 2.0 * log_scale};
}

inline GaussHermiteRule build_gauss_hermite(int n) {
    // Golub-Welsch: the nodes are the eigenvalues of the Jacobi matrix.
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sub(n - 1);
    for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(k / 2.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    std::vector<double> x(solver.eigenvalues().data(), solver.eigenvalues().data() + n);

    // Newton polish on h_n, then exact antisymmetry.
    for (auto& xi : x) {
        for (int it = 0; it < 3; ++it) {
            const auto h = hermite_orthonormal(n, xi);
            if (h.h_prev == 0.0) break;
            xi -= h.h_cur / (std::sqrt(2.0 * n) * h.h_prev);
        }
    }
    for (int i = 0; i < n / 2; ++i) {
        const double m = 0.5 * (x[n - 1 - i] - x[i]);
        x[i] = -m;
        x[n - 1 - i] = m;
    }
    if (n % 2 == 1) x[n / 2] = 0.0;

    GaussHermiteRule rule;
    const double log_sqrt_pi = 0.5 * std::log(std::numbers::pi);
    for (int i = 0; i < n; ++i) {
        const auto h = hermite_orthonormal(n, x[i]);
        const double w = std::exp(-h.log_sum_sq - log_sqrt_pi);
        if (w == 0.0) continue;
        rule.nodes.push_back(std::numbers::sqrt2 * x[i]);
        rule.weights.push_back(w);
    }
    return rule;
}

// Uniform arithmetic over the two result shapes integrands may return.
template <class T>
struct IsStdArray : std::false_type {};
template <std::size_t K>
struct IsStdArray<std::array<double, K>> : std::true_type {};

template <class T>
concept QuadValue = std::is_same_v<T, double> || IsStdArray<T>::value;

template <QuadValue T>
T zero_value() {
    if constexpr (std::is_same_v<T, double>) {
        return 0.0;
    } else {
        T v{};
        v.fill(0.0);
        return v;
    }
}

template <QuadValue T>
void add_scaled(T& acc, double w, const T& v) {
    if constexpr (std::is_same_v<T, double>) {
        acc += w * v;
    } else {
        for (std::size_t i = 0; i < v.size(); ++i) acc[i] += w * v[i];
    }
}

template <QuadValue T>
double max_abs_diff(const T& a, const T& b) {
    if constexpr (std::is_same_v<T, double>) {
        return std::abs(a - b);
    } else {
        double m = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
        return m;
    }
}

}  // namespace detail

// Rules are built once per node count and shared; safe to call concurrently.
inline const GaussHermiteRule& gauss_hermite_rule(int n) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<const GaussHermiteRule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<const GaussHermiteRule>(detail::build_gauss_hermite(n));
    return *slot;
}

// E f(c + Z), Z ~ N(0,1), with a fixed rule.
template <class F>
auto gauss_expect(F&& f, double center, const GaussHermiteRule& rule) {
    using T = std::decay_t<decltype(f(0.0))>;
    T acc = detail::zero_value<T>();
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        detail::add_scaled(acc, rule.weights[i], f(center + rule.nodes[i]));
    return acc;
}

// 16-point Gauss-Legendre on [-1, 1].
struct GaussLegendre16 {
    std::array<double, 16> nodes{};
    std::array<double, 16> weights{};

    GaussLegendre16() {
        constexpr int n = 16;
        for (int i = 0; i < n; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double dp = 1.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-17) break;
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }
};

inline const GaussLegendre16& gauss_legendre16() {
    static const GaussLegendre16 rule;
    return rule;
}

// ∫ f(y) φ(y - c) dy over [c - radius, c + radius] with `panels` equal panels.
template <class F>
auto panel_expect(F&& f, double center, double radius, int panels) {
    using T = std::decay_t<decltype(f(0.0))>;
    const auto& gl = gauss_legendre16();
    const double h = 2.0 * radius / panels;
    T acc = detail::zero_value<T>();
    for (int k = 0; k < panels; ++k) {
        const double mid = -radius + (k + 0.5) * h;
        for (int i = 0; i < 16; ++i) {
            const double u = mid + 0.5 * h * gl.nodes[i];
            detail::add_scaled(acc, 0.5 * h * gl.weights[i] * std_normal_pdf(u), f(center + u));
        }
    }
    return acc;
}

template <class T>
struct LobePair {
    T plus;   // ∫ f(y) φ(y - x_theta) dy
    T minus;  // ∫ f(y) φ(y + x_theta) dy
};

namespace detail {

// eval(n) returns a LobePair at resolution n; n doubles from n0 to n_max.
// Returns false (leaving `gap` set) if no two consecutive levels agree.
template <class Eval, class Out>
bool converge_doubling(Eval&& eval, int n0, int n_max, double tol, Out& out, double& gap) {
    int n = n0;
    auto coarse = eval(n);
    while (2 * n <= n_max) {
        auto fine = eval(2 * n);
        gap = std::max(max_abs_diff(coarse.plus, fine.plus), max_abs_diff(coarse.minus, fine.minus));
        if (gap <= tol) {
            out = std::move(fine);
            return true;
        }
        coarse = std::move(fine);
        n *= 2;
    }
    return false;
}

template <class T, class F>
LobePair<T> certified_lobes(F&& f, double c_plus, double c_minus, const QuadratureSpec& spec,
                            const char* what) {
    spec.validate();
    LobePair<T> out{zero_value<T>(), zero_value<T>()};
    double gap = 0.0;
    auto hermite = [&](int n) {
        const auto& rule = gauss_hermite_rule(n);
        T plus = gauss_expect(f, c_plus, rule);
        return LobePair<T>{plus, c_minus == c_plus ? plus : gauss_expect(f, c_minus, rule)};
    };
    if (converge_doubling(hermite, spec.nodes_per_lobe, spec.max_nodes_per_lobe, spec.abs_tol, out, gap))
        return out;
    const double r = spec.truncation_radius;
    auto panels = [&](int m) {
        T plus = panel_expect(f, c_plus, r, m);
        return LobePair<T>{plus, c_minus == c_plus ? plus : panel_expect(f, c_minus, r, m)};
    };
    if (converge_doubling(panels, 64, spec.max_panels, spec.abs_tol, out, gap)) return out;
    throw NonConvergence(std::string(what) + ": refinement gap " + std::to_string(gap) +
                         " still exceeds abs_tol at " + std::to_string(spec.max_panels) + " panels");
}

}  // namespace detail

// Both lobe integrals of f, certified to abs_tol.
template <class F>
auto integrate_lobes(F&& f, double x_theta, const QuadratureSpec& spec = {}) {
    using T = std::decay_t<decltype(f(0.0))>;
    return detail::certified_lobes<T>(f, x_theta, -x_theta, spec, "integrate_lobes");
}

// ∫ f(y) p(y; x_theta) dy for the centered two-lobe mixture density p.
template <class F>
auto integrate_against_mixture(F&& f, double x_theta, const QuadratureSpec& spec = {}) {
    using T = std::decay_t<decltype(f(0.0))>;
    const auto lobes = integrate_lobes(std::forward<F>(f), x_theta, spec);
    T out = detail::zero_value<T>();
    detail::add_scaled(out, 0.5, lobes.plus);
    detail::add_scaled(out, 0.5, lobes.minus);
    return out;
}

// ∫ f(y) φ(y - center) dy, certified to abs_tol.
template <class F>
auto integrate_against_normal(F&& f, double center, const QuadratureSpec& spec = {}) {
    using T = std::decay_t<decltype(f(0.0))>;
    return detail::certified_lobes<T>(f, center, center, spec, "integrate_against_normal").plus;
}

}  // namespace emlab
