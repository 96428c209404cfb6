#pragma once

// (a, b) re-parameterization, the in-plane basis spanned by b and θ*, and
// whitening. Data matrices are row-major, one draw per row.

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "emlab/errors.hpp"

namespace emlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using DataMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Component means are ±theta_star, covariance identity.
struct MixtureModel {
    int dim = 1;
    Vec theta_star = Vec::Zero(1);

    MixtureModel() = default;
    explicit MixtureModel(Vec theta) : dim(static_cast<int>(theta.size())), theta_star(std::move(theta)) {
        validate();
    }

    void validate() const {
        if (dim < 1) throw DomainError("MixtureModel.dim must be >= 1");
        if (theta_star.size() != dim)
            throw DimensionMismatch("MixtureModel.theta_star has size " +
                                    std::to_string(theta_star.size()) + ", dim is " +
                                    std::to_string(dim));
        if (!theta_star.allFinite()) throw DomainError("MixtureModel.theta_star must be finite");
    }
};

struct MeanPair {
    Vec mu1;
    Vec mu2;
};

struct ABState {
    Vec a;
    Vec b;

    static ABState zeros(int d) { return {Vec::Zero(d), Vec::Zero(d)}; }
};

inline double distance(const ABState& x, const ABState& y) {
    return std::sqrt((x.a - y.a).squaredNorm() + (x.b - y.b).squaredNorm());
}

namespace detail {
inline void check_dim(const Vec& v, int d, const char* what) {
    if (v.size() != d)
        throw DimensionMismatch(std::string(what) + " has size " + std::to_string(v.size()) +
                                ", model dim is " + std::to_string(d));
}
}  // namespace detail

inline void check_state(const ABState& s, const MixtureModel& model) {
    detail::check_dim(s.a, model.dim, "state.a");
    detail::check_dim(s.b, model.dim, "state.b");
}

// The model midpoint is 0 in the centered convention, so a is the midpoint itself.
inline ABState to_ab(const MeanPair& m, const MixtureModel& model) {
    detail::check_dim(m.mu1, model.dim, "means.mu1");
    detail::check_dim(m.mu2, model.dim, "means.mu2");
    return {0.5 * (m.mu1 + m.mu2), 0.5 * (m.mu2 - m.mu1)};
}

inline MeanPair from_ab(const ABState& s, const MixtureModel& model) {
    check_state(s, model);
    return {s.a - s.b, s.a + s.b};
}

struct PlanarCoords {
    double x_a = 0.0;
    double norm_b = 0.0;
    double theta1 = 0.0;
    double theta2 = 0.0;
    Vec e1;
    Vec e2;  // zero vector when dim == 1
};

namespace detail {

// Unit vector orthogonal to u: the first coordinate axis not parallel to u,
// orthogonalized against it. Zero in one dimension.
inline Vec orthogonal_unit(const Vec& u) {
    const auto d = u.size();
    Vec out = Vec::Zero(d);
    if (d < 2) return out;
    for (Eigen::Index k = 0; k < d; ++k) {
        if (std::abs(u[k]) > 1.0 - 1e-8) continue;
        Vec v = Vec::Unit(d, k);
        v -= v.dot(u) * u;
        v -= v.dot(u) * u;
        return v / v.norm();
    }
    return out;  // unreachable for a unit u with d >= 2
}

}  // namespace detail

inline PlanarCoords planar_reduce(const ABState& s, const MixtureModel& model) {
    check_state(s, model);
    PlanarCoords pc;
    pc.norm_b = s.b.norm();
    if (!(pc.norm_b > 0.0)) throw DegenerateState("planar_reduce: b is zero");
    pc.e1 = s.b / pc.norm_b;
    pc.x_a = s.a.dot(pc.e1);
    pc.theta1 = model.theta_star.dot(pc.e1);

    // Gram-Schmidt twice for stability.
    Vec r = model.theta_star - pc.theta1 * pc.e1;
    r -= r.dot(pc.e1) * pc.e1;
    const double rn = r.norm();
    const double tn = model.theta_star.norm();
    if (rn < 1e-12 * tn || tn == 0.0) {
        pc.theta2 = 0.0;
        pc.e2 = detail::orthogonal_unit(pc.e1);
    } else {
        pc.theta2 = rn;
        pc.e2 = r / rn;
    }
    return pc;
}

// Angle between b and θ*, in [0, π].
inline double angle_beta(const PlanarCoords& pc) {
    if (!(pc.norm_b > 0.0)) throw DegenerateState("angle_beta: b is zero");
    if (pc.theta1 == 0.0 && pc.theta2 == 0.0) throw DegenerateState("angle_beta: theta_star is zero");
    return std::atan2(pc.theta2, pc.theta1);
}

inline double sin_beta(const PlanarCoords& pc) {
    const double tn = std::hypot(pc.theta1, pc.theta2);
    if (!(pc.norm_b > 0.0) || tn == 0.0) throw DegenerateState("sin_beta: undefined");
    return pc.theta2 / tn;
}

// Symmetric Σ^{-1/2}.
inline Mat inverse_sqrt(const Mat& sigma) {
    if (sigma.rows() != sigma.cols()) throw DimensionMismatch("inverse_sqrt: sigma must be square");
    if (!sigma.allFinite() || (sigma - sigma.transpose()).cwiseAbs().maxCoeff() >
                                  1e-12 * (1.0 + sigma.cwiseAbs().maxCoeff()))
        throw NotPositiveDefinite("sigma must be finite and symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(sigma);
    if (es.info() != Eigen::Success || !(es.eigenvalues().minCoeff() > 0.0))
        throw NotPositiveDefinite("sigma is not positive definite");
    return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
           es.eigenvectors().transpose();
}

// Multiply rows by Σ^{-1/2}.
inline DataMatrix whiten(const DataMatrix& data, const Mat& sigma) {
    if (sigma.rows() != sigma.cols() || sigma.rows() != data.cols())
        throw DimensionMismatch("whiten: sigma must be d x d with d = data.cols()");
    return data * inverse_sqrt(sigma);
}

// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with sign fix).
inline Mat random_orthogonal(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> n01;
    Mat g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = n01(rng);
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ();
    const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j)
        if (r(j, j) < 0.0) q.col(j) *= -1.0;
    return q;
}

inline ABState rotate(const Mat& A, const ABState& s) { return {A * s.a, A * s.b}; }

}  // namespace emlab
