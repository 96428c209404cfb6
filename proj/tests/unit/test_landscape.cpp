#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "emlab/landscape.hpp"
#include "emlab/rng.hpp"
#include "oracles.hpp"

using namespace emlab;

namespace {
Vec v1(double x) { return (Vec(1) << x).finished(); }
Vec v2(double x, double y) { return (Vec(2) << x, y).finished(); }

// Direct 1D oracle: E log(½φ(Y-μ₁) + ½φ(Y-μ₂)) for d = 1.
double G1d(double m1, double m2, double theta) {
    const double ln = std::log(std::sqrt(2 * std::numbers::pi));
    return oracle::mixture_expect(
        [&](double y) {
            const double l1 = -0.5 * (y - m1) * (y - m1), l2 = -0.5 * (y - m2) * (y - m2);
            const double hi = std::max(l1, l2);
            return hi + std::log(0.5 + 0.5 * std::exp(std::min(l1, l2) - hi)) - ln;
        },
        theta);
}
}  // namespace

TEST(ExpectedLoglik, FrozenValues) {
    const MixtureModel m(v1(1.0));
    EXPECT_NEAR(expected_loglik({v1(-0.5), v1(1.2)}, m), -1.8023677271150455772, 1e-10);
    EXPECT_NEAR(expected_loglik({v1(-1.0), v1(1.0)}, m), -1.7557693535515044, 1e-10);
    // θ* = 0 and μ₁ = μ₂ = 0: minus the entropy of N(0, 1).
    EXPECT_NEAR(expected_loglik({v1(0), v1(0)}, MixtureModel(v1(0.0))), -0.5 * std::log(2 * std::numbers::pi * std::numbers::e),
                1e-12);
    EXPECT_NEAR(-0.5 * std::log(2 * std::numbers::pi * std::numbers::e), -1.4189385332046727, 1e-15);
}

TEST(ExpectedLoglik, AgreesWithSimpson) {
    for (auto [a, b, t] : {std::tuple{-0.5, 1.2, 1.0}, {0.3, 0.3, 0.7}, {2.0, -1.0, 1.5}, {-3.0, 0.1, 0.2}})
        EXPECT_NEAR(expected_loglik({v1(a), v1(b)}, MixtureModel(v1(t))), G1d(a, b, t), 1e-9) << a << ' ' << b;
}

TEST(ExpectedLoglik, TruthBeatsPerturbations) {
    auto rng = make_rng(3, 1);
    std::normal_distribution<double> z;
    const MixtureModel m(v2(0.6, 0.8));
    const double truth = expected_loglik({-m.theta_star, m.theta_star}, m);
    for (int k = 0; k < 100; ++k) {
        const MeanPair p{-m.theta_star + 0.3 * v2(z(rng), z(rng)), m.theta_star + 0.3 * v2(z(rng), z(rng))};
        EXPECT_LT(expected_loglik(p, m), truth);
    }
}

TEST(ExpectedLoglik, DominanceOverRandomPoints) {
    auto rng = make_rng(4, 1);
    std::uniform_real_distribution<double> u(-3, 3);
    const MixtureModel m(v2(1.0, -0.5));
    const double truth = expected_loglik({-m.theta_star, m.theta_star}, m);
    for (int k = 0; k < 1000; ++k)
        ASSERT_LE(expected_loglik({v2(u(rng), u(rng)), v2(u(rng), u(rng))}, m), truth + 1e-12);
}

TEST(GradG, ZeroAtTruthAndMidpoint) {
    const MixtureModel m(v2(0.6, 0.8));
    EXPECT_LE(grad_norm(grad_G({-m.theta_star, m.theta_star}, m)), 1e-8);
    EXPECT_LE(grad_norm(grad_G({m.theta_star, -m.theta_star}, m)), 1e-8);
    EXPECT_LE(grad_norm(grad_G({Vec::Zero(2), Vec::Zero(2)}, m)), 1e-8);
}

TEST(GradG, MatchesFiniteDifferences) {
    auto rng = make_rng(5, 1);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    const MixtureModel m(v2(0.9, -0.3));
    const double h = 1e-5;
    for (int k = 0; k < 20; ++k) {
        MeanPair p{v2(u(rng), u(rng)), v2(u(rng), u(rng))};
        const auto g = grad_G(p, m);
        for (int j = 0; j < 4; ++j) {
            MeanPair pp = p, pm = p;
            (j < 2 ? pp.mu1 : pp.mu2)[j % 2] += h;
            (j < 2 ? pm.mu1 : pm.mu2)[j % 2] -= h;
            const double fd = (expected_loglik(pp, m) - expected_loglik(pm, m)) / (2 * h);
            EXPECT_NEAR((j < 2 ? g.mu1 : g.mu2)[j % 2], fd, 1e-5);
        }
    }
}

TEST(Classify, Model1Origin) {
    const auto r1 = classify_stationary({v1(0), v1(0)}, MixtureModel(v1(1.0)), LandscapeModel::Model1);
    EXPECT_EQ(r1.classification, Stationary::Min);
    EXPECT_FALSE(r1.higher_order);
    // d = 2: the Hessian is θ*θ*ᵀ, so the orthogonal direction needs the probe.
    const auto r2 = classify_stationary({Vec::Zero(2), Vec::Zero(2)}, MixtureModel(v2(0.6, 0.8)), LandscapeModel::Model1);
    EXPECT_EQ(r2.classification, Stationary::Saddle);
    EXPECT_TRUE(r2.higher_order);
}

TEST(Classify, TruthIsMaxMidpointIsSaddle) {
    const MixtureModel m(v2(0.6, 0.8));
    for (double s : {1.0, -1.0}) {
        const auto r = classify_stationary({Vec::Zero(2), s * m.theta_star}, m);
        EXPECT_EQ(r.classification, Stationary::Max) << s;
        EXPECT_LE(r.hessian_asymmetry, 1e-4);
    }
    const auto mid = classify_stationary({Vec::Zero(2), Vec::Zero(2)}, m);
    EXPECT_EQ(mid.classification, Stationary::Saddle);
    EXPECT_LE(mid.hessian_asymmetry, 1e-4);
    EXPECT_EQ(std::string(to_string(mid.classification)), "SADDLE");
}

TEST(Classify, NonStationaryIsUnresolved) {
    const MixtureModel m(v2(0.6, 0.8));
    const auto r = classify_stationary({v2(0.3, 0.1), v2(0.2, 0.9)}, m);
    EXPECT_EQ(r.classification, Stationary::Unresolved);
    EXPECT_GT(r.grad_norm, 1e-6);
    EXPECT_TRUE(r.hessian_eigs.empty());
}

TEST(Correspondence, FixedPointsAreStationary) {
    const MixtureModel m(v2(0.6, 0.8));
    EXPECT_TRUE(fixed_stationary_correspondence({Vec::Zero(2), m.theta_star}, m));
    EXPECT_TRUE(fixed_stationary_correspondence({Vec::Zero(2), -m.theta_star}, m));
    EXPECT_TRUE(fixed_stationary_correspondence({v2(0.2, 0.0), v2(0.5, 0.1)}, m));
}

// Along the segment from the midpoint to the truth, only the endpoints are stationary.
TEST(Landscape, SweepBetweenMidpointAndTruth) {
    const MixtureModel m(v2(0.6, 0.8));
    for (int k = 1; k < 100; ++k) {
        const double s = k / 100.0;
        const ABState x{Vec::Zero(2), s * m.theta_star};
        EXPECT_GT(landscape_gradient(x, m, LandscapeModel::Model2).norm(), 1e-8) << s;
        EXPECT_LT(landscape_value(x, m, LandscapeModel::Model2),
                  landscape_value({Vec::Zero(2), m.theta_star}, m, LandscapeModel::Model2));
    }
}

TEST(Landscape, Model1ValueMatchesModel2) {
    const MixtureModel m(v2(0.6, 0.8));
    const ABState x{v2(0.4, 0.4), v2(-0.3, 0.5)};
    EXPECT_EQ(landscape_value(x, m, LandscapeModel::Model1), expected_loglik({-x.b, x.b}, m));
}

TEST(Landscape, DimensionChecks) {
    EXPECT_THROW(expected_loglik({v1(0), v2(0, 0)}, MixtureModel(v2(1, 0))), DimensionMismatch);
    EXPECT_THROW(classify_stationary({v1(0), v1(0)}, MixtureModel(v2(1, 0))), DimensionMismatch);
}
