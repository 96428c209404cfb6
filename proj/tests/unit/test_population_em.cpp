#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "emlab/acceptance.hpp"
#include "emlab/population_em.hpp"
#include "emlab/rng.hpp"
#include "emlab/sample_em.hpp"
#include "oracles.hpp"

using namespace emlab;

namespace {
Vec v1(double x) { return (Vec(1) << x).finished(); }
Vec v2(double x, double y) { return (Vec(2) << x, y).finished(); }

// 50 random configurations shared by the property tests.
std::vector<RandomConfig> configs() {
    auto rng = make_rng(77, 0);
    std::vector<RandomConfig> out;
    for (int k = 0; k < 50; ++k) out.push_back(random_config(rng));
    return out;
}
const StopRule kStop{3000, 1e-12};
}  // namespace

TEST(Model1Step, FixedPointsAndZero) {
    const MixtureModel m(v2(0.6, -0.8));
    EXPECT_LE((model1_step(m.theta_star, m) - m.theta_star).norm(), 1e-10);
    EXPECT_LE((model1_step(-m.theta_star, m) + m.theta_star).norm(), 1e-10);
    EXPECT_EQ(model1_step(Vec::Zero(2), m).norm(), 0.0);
}

TEST(Model1Step, OneDimensionalAgainstTwoOracles) {
    const MixtureModel m(v1(1.0));
    const double pop = model1_step(v1(0.5), m)[0];
    EXPECT_NEAR(pop, 0.74935610061709768, 1e-12);
    EXPECT_NEAR(pop, oracle::mixture_expect([](double y) { return std::tanh(0.5 * y) * y; }, 1.0), 1e-10);
    const auto ds = sample_mixture(m, 10'000'000, 2024);
    const double mc = model1_step_sample(v1(0.5), ds)[0];
    EXPECT_LE(std::abs(mc - pop) / std::abs(pop), 5e-4) << "mc=" << mc;
}

TEST(Model1Step, TwoDimensionalReference) {
    const MixtureModel m(v2(0.6, 0.8));
    const Vec out = model1_step(v2(1.0, -0.5), m);
    EXPECT_NEAR(out[0], 0.62671925411351037069, 1e-12);
    EXPECT_NEAR(out[1], -0.18949283104584717919, 1e-12);
}

TEST(Model2Step, Examples) {
    const MixtureModel m(v2(0.3, 1.1));
    const auto fixed = model2_step({Vec::Zero(2), m.theta_star}, m);
    EXPECT_LE(distance(fixed.next, {Vec::Zero(2), m.theta_star}), 1e-10);
    EXPECT_EQ(fixed.p, 0.5);

    const auto z = model2_step({v2(0.4, -2.0), Vec::Zero(2)}, m);
    EXPECT_EQ(z.next.a.norm(), 0.0);
    EXPECT_EQ(z.next.b.norm(), 0.0);
    EXPECT_EQ(z.p, 0.5);

    const Vec b = v2(-0.7, 0.4);
    const auto s = model2_step({Vec::Zero(2), b}, m);
    EXPECT_EQ(s.next.a.norm(), 0.0);
    EXPECT_LE((s.next.b - model1_step(b, m)).norm(), 1e-14);
}

// mu-form reference by 40-digit quadrature: θ* = 1, a = 0.3, b = 0.8.
TEST(Model2Step, OneDimensionalReference) {
    const MixtureModel m(v1(1.0));
    const auto s = model2_step({v1(0.3), v1(0.8)}, m);
    EXPECT_NEAR(s.next.a[0], 0.11936601571935836491, 1e-12);
    EXPECT_NEAR(s.next.b[0], 0.93435285933140444736, 1e-12);
    EXPECT_NEAR(s.p, 0.43612369538593096869, 1e-12);
}

// p and q are plain expectations, so a Monte Carlo estimate must land within
// a few standard errors of them.
TEST(Model2Step, MonteCarloMomentsWithinStandardError) {
    const MixtureModel m(v2(0.6, 0.8));
    const auto ds = sample_mixture(m, 2'000'000, 99);
    auto rng = make_rng(5, 1);
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    for (int k = 0; k < 3; ++k) {
        const ABState s{v2(0.5 * u(rng), 0.5 * u(rng)), v2(u(rng), u(rng))};
        const auto pop = model2_step(s, m);
        // recover q from the population output: q = b⁺·2p(1-p)
        const Vec q = pop.next.b * (2 * pop.p * (1 - pop.p));
        double sw = 0, sw2 = 0;
        Vec sq = Vec::Zero(2), sq2 = Vec::Zero(2);
        for (Eigen::Index i = 0; i < ds.n(); ++i) {
            const Vec y = ds.data.row(i).transpose();
            const double w = posterior_weight((y - s.a).dot(s.b), 1.0);
            sw += w;
            sw2 += w * w;
            sq += w * y;
            sq2 += (w * y).cwiseProduct(w * y);
        }
        const double n = double(ds.n());
        const double pm = sw / n, pse = std::sqrt((sw2 / n - pm * pm) / n);
        EXPECT_LE(std::abs(pm - pop.p), 5 * pse);
        for (int j = 0; j < 2; ++j) {
            const double qm = sq[j] / n, qse = std::sqrt((sq2[j] / n - qm * qm) / n);
            EXPECT_LE(std::abs(qm - q[j]), 5 * qse) << k << ' ' << j;
        }
    }
}

TEST(Run, FixedPointTakesOneIteration) {
    const MixtureModel m(v2(1.0, 0.5));
    const auto tr = run({Vec::Zero(2), m.theta_star}, m);
    EXPECT_EQ(tr.steps.size(), 1u);
    EXPECT_TRUE(tr.converged);
}

TEST(Run, GoodInitConvergesToTruth) {
    const MixtureModel m(v2(0.6, 0.8));
    const auto tr = run({Vec::Zero(2), v2(0.1, 0.05)}, m);
    EXPECT_TRUE(tr.converged);
    EXPECT_LE(distance(tr.final_state, {Vec::Zero(2), m.theta_star}), 1e-8);
    const auto neg = run({v2(0.3, 0.1), v2(-1.0, 0.2)}, m);
    EXPECT_LE(distance(neg.final_state, {Vec::Zero(2), -m.theta_star}), 1e-8);
}

TEST(Run, HyperplaneInitHeadsToZero) {
    const MixtureModel m(v2(0.0, 0.9));
    const auto tr = run({v2(0.2, 0.0), v2(1.5, 0.0)}, m, {2000, 1e-12});
    for (const auto& r : tr.steps) EXPECT_EQ(r.state.b.dot(m.theta_star), 0.0);
    for (std::size_t t = 2; t < tr.steps.size(); ++t)
        EXPECT_LE(tr.steps[t].state.b.norm(), tr.steps[t - 1].state.b.norm() + 1e-15);
    EXPECT_LT(tr.steps.back().state.b.norm(), 0.05);
}

TEST(Run, Model1HyperplaneNormNonIncreasing) {
    const MixtureModel m(v2(0.8, 0.0));
    const auto tr = run_model1(v2(0.0, 2.0), m, {2000, 1e-14});
    for (const auto& r : tr.steps) EXPECT_EQ(r.state.b.dot(m.theta_star), 0.0);
    for (std::size_t t = 2; t < tr.steps.size(); ++t)
        EXPECT_LE(tr.steps[t].state.b.norm(), tr.steps[t - 1].state.b.norm());
}

TEST(Run, StopRuleValidation) {
    const MixtureModel m(v1(1.0));
    EXPECT_THROW(run({v1(0), v1(1)}, m, {0, 1e-10}), DomainError);
    EXPECT_THROW(run({v1(0), v1(1)}, m, {10, 0.0}), DomainError);
    EXPECT_THROW(run({v2(0, 0), v1(1)}, m), DimensionMismatch);
}

TEST(ClassifyLimit, SignRule) {
    const MixtureModel m(v2(0.6, 0.8));
    EXPECT_EQ(classify_limit({Vec::Zero(2), 0.1 * m.theta_star}, m), Limit::PlusTheta);
    EXPECT_EQ(classify_limit({Vec::Zero(2), -0.1 * m.theta_star}, m), Limit::MinusTheta);
    EXPECT_EQ(classify_limit({Vec::Zero(2), v2(0.8, -0.6)}, m), Limit::Zero);
    EXPECT_STREQ(to_string(Limit::Zero), "ZERO");
}

TEST(APriori, Formulas) {
    const MixtureModel m(v2(0.6, 0.8));
    auto b = a_priori_bounds({Vec::Zero(2), v2(1, 0)}, m);
    EXPECT_NEAR(b.c_U1 * b.c_U1, 16.0 / 9 + 73.0 / 36, 1e-14);
    EXPECT_NEAR(b.c_U1, 1.9507833184532708515, 1e-14);
    EXPECT_NEAR(b.c_U2 / 0.00039621149324140307095, 1.0, 1e-12);
    EXPECT_NEAR(b.c_U3 / 1785.3777063389663129, 1.0, 1e-11);
    b = a_priori_bounds({v2(6, 8), v2(1, 0)}, m);
    EXPECT_EQ(b.c_U1, 10.0);
}

// ---------------------------------------------------------- properties

TEST(Properties, Model1ContractionRatios) {
    for (const auto& c : configs()) {
        const auto tr = run_model1(c.init.b, c.model, kStop);
        for (std::size_t t = 1; t < tr.steps.size(); ++t) {
            if (tr.steps[t - 1].dist_b < 1e-11) break;
            ASSERT_LT(tr.steps[t].ratio_b, 1.0) << "t=" << t;
        }
    }
}

TEST(Properties, Model2TrajectoryInvariants) {
    const double kappa_a = 0.5 + 1.0 / std::numbers::pi + 0.05;
    for (const auto& c : configs()) {
        const auto& m = c.model;
        const auto tr = run(c.init, m, kStop);
        const auto bounds = a_priori_bounds(c.init, m);
        const int sb = sign_of(c.init.b.dot(m.theta_star));
        const int sab = sign_of(c.init.a.dot(c.init.b));
        // basis of span(b⁰, θ*)
        Mat span(m.dim, 2);
        span << c.init.b, m.theta_star;
        Eigen::HouseholderQR<Mat> qr(span);
        const Mat Q = Mat(qr.householderQ()).leftCols(std::min(2, m.dim));
        const double t2 = m.theta_star.squaredNorm();
        for (std::size_t t = 0; t < tr.steps.size(); ++t) {
            const auto& r = tr.steps[t];
            ASSERT_EQ(sign_of(r.state.b.dot(m.theta_star)), sb);
            // Signs are only resolvable above the quadrature noise in p.
            const double ab = r.state.a.dot(r.state.b);
            if (std::abs(ab) > 1e-9) {
                ASSERT_EQ(sign_of(ab), sab);
                ASSERT_EQ(sign_of(0.5 - r.p), sign_of(ab)) << t;
            }
            if (ab == 0.0) ASSERT_EQ(r.p, 0.5);
            ASSERT_LE((r.state.b - Q * (Q.transpose() * r.state.b)).norm(), 1e-12);
            ASSERT_LE(r.norm_a, bounds.c_U1);
            ASSERT_LE(r.state.b.norm(), bounds.c_U3);
            if (t + 1 < tr.steps.size()) {
                const auto& nx = tr.steps[t + 1];
                ASSERT_LE(nx.sin_beta, r.sin_beta + 1e-12);
                if (tr.steps[0].beta < std::numbers::pi / 2) ASSERT_LE(nx.beta, r.beta + 1e-9);
                const double rhs = kappa_a * kappa_a * r.norm_a * r.norm_a + t2 * r.sin_beta * r.sin_beta / 4;
                ASSERT_LE(nx.norm_a * nx.norm_a, rhs + 1e-12);
            }
        }
    }
}

TEST(Properties, OrthogonalEquivariance) {
    auto rng = make_rng(13, 0);
    for (int k = 0; k < 10; ++k) {
        const auto c = random_config(rng, {2, 3, 8});
        const Mat A = random_orthogonal(c.model.dim, rng);
        const MixtureModel rm(A * c.model.theta_star);
        const StopRule fixed{40, 1e-300};
        const auto t0 = run(c.init, c.model, fixed);
        const auto t1 = run(rotate(A, c.init), rm, fixed);
        ASSERT_EQ(t0.steps.size(), t1.steps.size());
        for (std::size_t t = 0; t < t0.steps.size(); ++t)
            ASSERT_LE(distance(rotate(A, t0.steps[t].state), t1.steps[t].state), 1e-10);
    }
}

TEST(Properties, SymmetricInitsGiveMirroredTrajectories) {
    const MixtureModel m(v2(0.5, 1.0));
    const ABState s{v2(0.2, 0.4), v2(0.9, -0.2)};
    const StopRule fixed{30, 1e-300};
    const auto t0 = run(s, m, fixed);
    const auto t1 = run({-s.a, s.b}, m, fixed);
    const auto t2 = run({s.a, -s.b}, m, fixed);
    for (std::size_t t = 0; t < t0.steps.size(); ++t) {
        ASSERT_LE((t1.steps[t].state.a + t0.steps[t].state.a).norm(), 1e-12);
        ASSERT_LE((t1.steps[t].state.b - t0.steps[t].state.b).norm(), 1e-12);
        ASSERT_LE((t2.steps[t].state.a - t0.steps[t].state.a).norm(), 1e-12);
        ASSERT_LE((t2.steps[t].state.b + t0.steps[t].state.b).norm(), 1e-12);
    }
}
