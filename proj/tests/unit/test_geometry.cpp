#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "emlab/geometry.hpp"
#include "emlab/rng.hpp"

using namespace emlab;

namespace {
Vec v2(double x, double y) { return (Vec(2) << x, y).finished(); }
Vec v3(double x, double y, double z) { return (Vec(3) << x, y, z).finished(); }
Vec randn(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    Vec v(d);
    for (int i = 0; i < d; ++i) v[i] = n(rng);
    return v;
}
}  // namespace

TEST(AB, TruthAndKnownPairs) {
    const MixtureModel m(v2(0.6, 0.8));
    const auto s = to_ab({-m.theta_star, m.theta_star}, m);
    EXPECT_EQ(s.a.norm(), 0.0);
    EXPECT_EQ((s.b - m.theta_star).norm(), 0.0);
    const auto t = to_ab({Vec::Zero(2), 2 * m.theta_star}, m);
    EXPECT_NEAR((t.a - m.theta_star).norm(), 0.0, 1e-16);
    EXPECT_NEAR((t.b - m.theta_star).norm(), 0.0, 1e-16);
}

TEST(AB, RoundTrip) {
    std::mt19937_64 rng(5);
    for (int d : {1, 2, 5}) {
        const MixtureModel m(randn(d, rng));
        const MeanPair p{randn(d, rng), randn(d, rng)};
        const auto back = from_ab(to_ab(p, m), m);
        EXPECT_LE((back.mu1 - p.mu1).norm(), 1e-15 * (1 + p.mu1.norm() + p.mu2.norm()));
        EXPECT_LE((back.mu2 - p.mu2).norm(), 1e-15 * (1 + p.mu1.norm() + p.mu2.norm()));
    }
}

TEST(AB, DimensionMismatch) {
    const MixtureModel m(v2(1, 0));
    EXPECT_THROW(to_ab({Vec::Zero(3), Vec::Zero(2)}, m), DimensionMismatch);
    EXPECT_THROW(from_ab({Vec::Zero(2), Vec::Zero(1)}, m), DimensionMismatch);
}

TEST(MixtureModelType, Validation) {
    MixtureModel m;
    m.dim = 2;
    EXPECT_THROW(m.validate(), DimensionMismatch);
    EXPECT_THROW(MixtureModel(v2(1, INFINITY)), DomainError);
}

TEST(Planar, CollinearAndOrthogonal) {
    const MixtureModel m(v3(1, 2, 2));
    auto pc = planar_reduce({Vec::Zero(3), -0.5 * m.theta_star}, m);
    EXPECT_EQ(pc.theta2, 0.0);
    EXPECT_NEAR(pc.theta1, -3.0, 1e-15);
    EXPECT_NEAR(pc.e1.dot(pc.e2), 0.0, 1e-15);
    EXPECT_NEAR(pc.e2.norm(), 1.0, 1e-15);

    const MixtureModel m2(v3(1, 0, 0));
    pc = planar_reduce({Vec::Zero(3), v3(0, 2, 0)}, m2);
    EXPECT_EQ(pc.theta1, 0.0);
    EXPECT_NEAR(pc.theta2, 1.0, 1e-15);
    EXPECT_NEAR(angle_beta(pc), std::numbers::pi / 2, 1e-15);
}

// b = 1.4·(1,1,0)/√2, θ* = e_1: e1 = (1,1,0)/√2, θ1 = 1/√2, residual (½,-½,0).
TEST(Planar, HandGramSchmidt) {
    const MixtureModel m(v3(1, 0, 0));
    const double r = 1.0 / std::sqrt(2.0);
    const ABState s{v3(0.3, -0.1, 0.5), 1.4 * v3(r, r, 0)};
    const auto pc = planar_reduce(s, m);
    EXPECT_NEAR(pc.norm_b, 1.4, 1e-15);
    EXPECT_NEAR(pc.theta1, r, 1e-15);
    EXPECT_NEAR(pc.theta2, r, 1e-15);
    EXPECT_NEAR((pc.e2 - v3(r, -r, 0)).norm(), 0.0, 1e-15);
    EXPECT_NEAR(pc.x_a, (0.3 - 0.1) * r, 1e-15);
    EXPECT_NEAR(angle_beta(pc), std::numbers::pi / 4, 1e-15);
    EXPECT_NEAR(sin_beta(pc), r, 1e-15);
}

TEST(Planar, ReconstructsThetaAndBasisIsOrthonormal) {
    std::mt19937_64 rng(9);
    for (int k = 0; k < 50; ++k) {
        const int d = 1 + k % 6;
        const MixtureModel m(randn(d, rng));
        const ABState s{randn(d, rng), randn(d, rng)};
        const auto pc = planar_reduce(s, m);
        EXPECT_GE(pc.theta2, 0.0);
        EXPECT_NEAR(pc.e1.norm(), 1.0, 1e-12);
        if (d > 1) {
            EXPECT_NEAR(pc.e2.norm(), 1.0, 1e-12);
            EXPECT_NEAR(pc.e1.dot(pc.e2), 0.0, 1e-12);
        } else {
            EXPECT_EQ(pc.e2.norm(), 0.0);
        }
        EXPECT_LE((pc.theta1 * pc.e1 + pc.theta2 * pc.e2 - m.theta_star).norm(), 1e-12 * (1 + m.theta_star.norm()));
    }
}

TEST(Planar, DegenerateB) {
    const MixtureModel m(v2(1, 0));
    EXPECT_THROW(planar_reduce({Vec::Zero(2), Vec::Zero(2)}, m), DegenerateState);
}

TEST(Planar, AngleCases) {
    const MixtureModel m(v2(0.3, 0.4));
    EXPECT_NEAR(angle_beta(planar_reduce({Vec::Zero(2), 2 * m.theta_star}, m)), 0.0, 1e-15);
    EXPECT_NEAR(angle_beta(planar_reduce({Vec::Zero(2), -m.theta_star}, m)), std::numbers::pi, 1e-15);
    const MixtureModel z(v2(0, 0));
    EXPECT_THROW(angle_beta(planar_reduce({Vec::Zero(2), v2(1, 0)}, z)), DegenerateState);
}

TEST(Planar, OrthogonalEquivariance) {
    std::mt19937_64 rng(21);
    for (int k = 0; k < 20; ++k) {
        const int d = 2 + k % 5;
        const MixtureModel m(randn(d, rng));
        const ABState s{randn(d, rng), randn(d, rng)};
        const Mat A = random_orthogonal(d, rng);
        EXPECT_LE((A.transpose() * A - Mat::Identity(d, d)).cwiseAbs().maxCoeff(), 1e-13);
        const auto p0 = planar_reduce(s, m);
        const auto p1 = planar_reduce(rotate(A, s), MixtureModel(A * m.theta_star));
        EXPECT_NEAR(p0.x_a, p1.x_a, 1e-12);
        EXPECT_NEAR(p0.norm_b, p1.norm_b, 1e-12);
        EXPECT_NEAR(p0.theta1, p1.theta1, 1e-12);
        EXPECT_NEAR(p0.theta2, p1.theta2, 1e-12);
    }
}

TEST(Planar, SignFlips) {
    const MixtureModel m(v2(0.5, 1.0));
    const ABState s{v2(0.2, 0.7), v2(1.0, 0.3)};
    const auto p = planar_reduce(s, m);
    const auto pa = planar_reduce({-s.a, s.b}, m);
    const auto pb = planar_reduce({s.a, -s.b}, m);
    EXPECT_EQ(pa.x_a, -p.x_a);
    EXPECT_EQ(pb.x_a, -p.x_a);
    EXPECT_EQ(pb.theta1, -p.theta1);
    EXPECT_NEAR(pb.theta2, p.theta2, 1e-15);
}

TEST(Whiten, Examples) {
    DataMatrix x(2, 2);
    x << 2, 3, -1, 0.5;
    EXPECT_EQ(whiten(x, Mat::Identity(2, 2)), x);
    EXPECT_NEAR((whiten(x, 4 * Mat::Identity(2, 2)) - 0.5 * x).cwiseAbs().maxCoeff(), 0.0, 1e-15);
    Mat s = Mat::Zero(2, 2);
    s(0, 0) = 4;
    s(1, 1) = 1;
    DataMatrix r(1, 2);
    r << 2, 3;
    const DataMatrix w = whiten(r, s);
    EXPECT_NEAR(w(0, 0), 1.0, 1e-15);
    EXPECT_NEAR(w(0, 1), 3.0, 1e-15);
}

TEST(Whiten, Errors) {
    DataMatrix x = DataMatrix::Ones(3, 2);
    Mat s(2, 2);
    s << 1, 2, 2, 1;  // eigenvalues 3, -1
    EXPECT_THROW(whiten(x, s), NotPositiveDefinite);
    s << 1, 0.5, 0.2, 1;
    EXPECT_THROW(whiten(x, s), NotPositiveDefinite);
    EXPECT_THROW(whiten(x, Mat::Identity(3, 3)), DimensionMismatch);
}

TEST(Whiten, LargeSampleCovarianceNearIdentity) {
    Mat sigma(3, 3);
    sigma << 2.0, 0.6, -0.3, 0.6, 1.0, 0.2, -0.3, 0.2, 0.5;
    const Mat L = Eigen::LLT<Mat>(sigma).matrixL();
    auto rng = make_rng(4, 0);
    const int n = 200000;
    DataMatrix x(n, 3);
    for (int i = 0; i < n; ++i) x.row(i) = (L * [&] {
                                               std::normal_distribution<double> z;
                                               Vec v(3);
                                               for (int j = 0; j < 3; ++j) v[j] = z(rng);
                                               return v;
                                           }()).transpose();
    const DataMatrix w = whiten(x, sigma);
    const Mat cov = (w.transpose() * w) / double(n);
    EXPECT_LE((cov - Mat::Identity(3, 3)).cwiseAbs().maxCoeff(), 0.02);
}

TEST(Rng, StreamsAreDistinctAndReproducible) {
    EXPECT_EQ(derive_seed(1, 2), derive_seed(1, 2));
    EXPECT_NE(derive_seed(1, 2), derive_seed(1, 3));
    EXPECT_NE(derive_seed(1, 2), derive_seed(2, 2));
    auto a = make_rng(7, 0), b = make_rng(7, 0);
    for (int i = 0; i < 10; ++i) EXPECT_EQ(a(), b());
}
