#include "oracle.hpp"
#include "sscirc/heig.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace sscirc {
namespace {

/// Fast settings for the bulk property checks.
SolverConfig quick() {
    SolverConfig cfg;
    cfg.n_starts = 16;
    return cfg;
}

double power_sum(const Vec3& x, int m) {
    double s = 0;
    for (double v : x) s += std::pow(std::abs(v), m);
    return s;
}

TEST(LambdaMin, Examples) {
    const EigenResult id = lambda_min(make_tensor(6, 1, 0, 0));
    EXPECT_NEAR(id.lambda, 1, 1e-10);

    // T is psd and vanishes at (1,1,1).
    const EigenResult t = lambda_min(reference_t(6));
    EXPECT_NEAR(t.lambda, 0, 1e-9);
    const Vec3 ct = canonical_representative(t.x);
    EXPECT_NEAR(ct[0], ct[1], 1e-6);
    EXPECT_NEAR(ct[1], ct[2], 1e-6);

    // So is B.
    const EigenResult b = lambda_min(reference_b(6));
    EXPECT_NEAR(b.lambda, 0, 1e-9);

    EXPECT_THROW(lambda_min(make_tensor(5, 1, 0, 0)), InvalidArgument);
}

TEST(LambdaMin, ResultIsAnEigenpair) {
    const auto t = make_tensor(6, 3, 1, -0.5);
    const EigenResult e = lambda_min(t);
    EXPECT_NEAR(power_sum(e.x, 6), 1, 1e-10);
    EXPECT_NEAR(eval_form(t, e.x), e.lambda, 1e-9 * tensor_scale(t));
    const auto g = oracle::power(6, 3, 1, -0.5, e.x);
    for (std::size_t i = 0; i < 3; ++i)
        EXPECT_NEAR(static_cast<double>(g[i]), e.lambda * std::pow(e.x[i], 5), 1e-7 * tensor_scale(t));
    EXPECT_LE(e.residual, 1e-9 * tensor_scale(t));
}

TEST(LambdaMin, NoPointOnSphereBeatsIt) {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> coef(-3, 3);
    for (int k = 0; k < 10; ++k) {
        const auto t = make_tensor(6, coef(rng), coef(rng), coef(rng));
        const double lam = lambda_min(t, quick()).lambda;
        for (int s = 0; s < 500; ++s) {
            Vec3 x{nd(rng), nd(rng), nd(rng)};
            const double n = std::pow(power_sum(x, 6), 1.0 / 6);
            for (double& v : x) v /= n;
            EXPECT_GE(static_cast<double>(oracle::form(6, t.d(), t.u(), t.c(), x)), lam - 1e-9 * tensor_scale(t));
        }
    }
}

TEST(LambdaMin, ShiftCovariance) {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> coef(-3, 3), sh(-10, 10);
    for (int k = 0; k < 20; ++k) {
        const auto t = make_tensor(k % 2 ? 4 : 6, coef(rng), coef(rng), coef(rng));
        const double s = sh(rng);
        const double l0 = lambda_min(t, quick()).lambda;
        const double l1 = lambda_min(t.shifted(s), quick()).lambda;
        EXPECT_NEAR(l1, l0 + s, 1e-8 * std::max(tensor_scale(t), tensor_scale(t.shifted(s)))) << "case " << k;
    }
}

TEST(LambdaMin, PositiveScaling) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> coef(-3, 3), al(0.1, 20);
    for (int k = 0; k < 10; ++k) {
        const auto t = make_tensor(6, coef(rng), coef(rng), coef(rng));
        const double a = al(rng);
        EXPECT_NEAR(lambda_min(t.scaled(a), quick()).lambda, a * lambda_min(t, quick()).lambda,
                    1e-8 * a * tensor_scale(t));
    }
}

TEST(LambdaMin, MonotoneInDiagonal) {
    const auto t = make_tensor(8, 0, 1.5, -2);
    double prev = -INFINITY;
    for (double d = -50; d <= 400; d += 50) {
        const double l = lambda_min(t.shifted(d), quick()).lambda;
        EXPECT_GE(l, prev - 1e-9 * tensor_scale(t.shifted(d)));
        prev = l;
    }
}

TEST(LambdaMin, StructuredSearchIsNotBeaten) {
    std::mt19937_64 rng(24);
    std::uniform_real_distribution<double> coef(-3, 3);
    for (int k = 0; k < 20; ++k) {
        const auto t = make_tensor(4 + 2 * (k % 3), coef(rng), coef(rng), coef(rng));
        const EigenResult e = lambda_min(t, quick());
        EXPECT_FALSE(e.reduction_counterexample) << "m=" << t.m() << " d=" << t.d() << " u=" << t.u()
                                                 << " c=" << t.c();
    }
}

TEST(LambdaMin, DeterministicForFixedSeed) {
    const auto t = make_tensor(8, 5, -1, 0.75);
    EXPECT_EQ(lambda_min(t), lambda_min(t));
    EXPECT_EQ(lambda_min(t).seed, SolverConfig{}.seed);
}

TEST(LambdaMin, RejectsBadConfig) {
    SolverConfig cfg;
    cfg.n_starts = 0;
    EXPECT_THROW(lambda_min(make_tensor(6, 1, 0, 0), cfg), InvalidArgument);
}

TEST(CanonicalRepresentative, SortsAndFixesSign) {
    const Vec3 r = canonical_representative({-1, 2, 0.5});
    EXPECT_EQ(r, (Vec3{1, -0.5, -2}));
    EXPECT_EQ(canonical_representative({1, 1, -2}), canonical_representative({2, -1, -1}));
}

TEST(IsPsd, Examples) {
    EXPECT_TRUE(is_psd(make_tensor(6, 1, 0, 0)).psd);
    EXPECT_TRUE(is_psd(reference_t(6)).psd);
    EXPECT_FALSE(is_psd(make_tensor(6, 0, 1, 0)).psd);
    EXPECT_TRUE(is_psd(make_tensor(6, 242, -1, -1)).psd);
    EXPECT_FALSE(is_psd(make_tensor(6, 241, -1, -1)).psd);
}

TEST(PhiPsi, NonPositiveAcrossGrid) {
    for (int m : {6, 8}) {
        for (int k = 0; k < 20; ++k) {
            const double u = -60 + 6.0 * k;
            EXPECT_LE(phi(m, u, quick()), 1e-10 * tensor_scale(b_minus_u_t(m, u)));
            EXPECT_LE(psi(m, u, quick()), 1e-10 * tensor_scale(minus_u_t_minus_b(m, u)));
        }
    }
}

TEST(ReferenceTensors, VanishAtOnes) {
    for (int m : {4, 6, 8, 10}) {
        EXPECT_NEAR(eval_form(reference_b(m), Vec3{1, 1, 1}), 0, 1e-6);
        EXPECT_NEAR(eval_form(reference_t(m), Vec3{1, 1, 1}), 0, 1e-6);
    }
}

}  // namespace
}  // namespace sscirc
