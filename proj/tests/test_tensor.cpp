#include "oracle.hpp"
#include "sscirc/tensor.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace sscirc {
namespace {

double rel_err(long double a, long double b) {
    return static_cast<double>(std::abs(a - b) / std::max<long double>(1, std::max(std::abs(a), std::abs(b))));
}

TEST(Combinatorics, CountsMatchDefinitions) {
    EXPECT_EQ(two_index_count(6), 62);
    EXPECT_EQ(three_index_count(6), 180);
    EXPECT_EQ(binomial(20, 10), 184756);
    EXPECT_EQ(multinomial(2, 2, 2), 90);
    // 3^m tuples split into one, two and three distinct values.
    for (int m = 3; m <= 12; ++m)
        EXPECT_EQ(3 + 3 * two_index_count(m) + 3 * three_index_count(m), ipow(3, m));
}

TEST(Construct, ValidatesOrderAndEntries) {
    EXPECT_NO_THROW(make_tensor(3, 1, 2, 3));
    EXPECT_THROW(make_tensor(2, 1, 0, 0), InvalidArgument);
    EXPECT_THROW(make_tensor(6, std::nan(""), 0, 0), InvalidArgument);
    EXPECT_THROW(make_tensor(6, 0, INFINITY, 0), InvalidArgument);
    const auto t = make_tensor(6, 62, -1, 0);
    EXPECT_EQ(t.m(), 6);
    EXPECT_EQ(t.d(), 62);
    EXPECT_EQ(t.u(), -1);
    EXPECT_EQ(t.c(), 0);
    EXPECT_EQ(make_tensor(6, 0, 0, 0), CirculantTensor(6, 0, 0, 0));
    EXPECT_THROW(require_even_order(7), InvalidArgument);
    EXPECT_NO_THROW(require_even_order(4));
}

TEST(Entry, PicksClassBySetOfIndices) {
    const auto t = make_tensor(6, 5, 2, -1);
    const std::vector<int> a{1, 1, 1, 1, 1, 1}, b{1, 2, 1, 2, 2, 1}, c{1, 2, 3, 3, 2, 1};
    EXPECT_EQ(entry(t, a), 5);
    EXPECT_EQ(entry(t, b), 2);
    EXPECT_EQ(entry(t, c), -1);
    const std::vector<int> short_idx{1, 2}, bad{1, 2, 4, 1, 1, 1};
    EXPECT_THROW(entry(t, short_idx), InvalidArgument);
    EXPECT_THROW(entry(t, bad), InvalidArgument);
}

TEST(Entry, AgreesWithOracleOnEveryTuple) {
    const auto t = make_tensor(5, 3, -2, 7);
    oracle::for_each_tuple(5, [&](const std::vector<int>& idx) {
        std::vector<int> one_based;
        for (int i : idx) one_based.push_back(i + 1);
        EXPECT_EQ(entry(t, one_based), oracle::entry(3, -2, 7, idx));
    });
}

TEST(EvalForm, Examples) {
    EXPECT_DOUBLE_EQ(eval_form(make_tensor(6, 1, 0, 0), Vec3{1, 1, 1}), 3);
    EXPECT_DOUBLE_EQ(eval_form(make_tensor(6, 0, 1, 0), Vec3{1, 1, 1}), 186);
    EXPECT_NEAR(static_cast<double>(oracle::form(6, 0, 1, 0, {1, 1, 1})), 186, 1e-9);
    EXPECT_DOUBLE_EQ(eval_form(make_tensor(6, 62, -1, 0), Vec3{1, 1, -3}), 46592);
    EXPECT_NEAR(static_cast<double>(oracle::form(6, 62, -1, 0, {1, 1, -3})), 46592, 1e-6);
}

TEST(EvalForm, MatchesBruteForceOnRandomInputs) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> coef(-5, 5), coord(-2, 2);
    for (int m : {4, 6}) {
        for (int k = 0; k < 100; ++k) {
            const double d = coef(rng), u = coef(rng), c = coef(rng);
            const Vec3 x{coord(rng), coord(rng), coord(rng)};
            const long double ref = oracle::form(m, d, u, c, x);
            EXPECT_LE(rel_err(eval_form<long double>(make_tensor(m, d, u, c), {x[0], x[1], x[2]}), ref), 1e-10)
                << "m=" << m << " case " << k;
        }
    }
}

TEST(EvalForm, SymmetricUnderPermutations) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> coef(-5, 5), coord(-2, 2);
    for (int k = 0; k < 30; ++k) {
        const auto t = make_tensor(8, coef(rng), coef(rng), coef(rng));
        Vec3 x{coord(rng), coord(rng), coord(rng)};
        const double f0 = eval_form(t, x);
        std::sort(x.begin(), x.end());
        do {
            EXPECT_LE(rel_err(eval_form(t, x), f0), 1e-12);
        } while (std::next_permutation(x.begin(), x.end()));
    }
}

TEST(EvalForm, AffineInEachEntry) {
    const Vec3 x{0.7, -1.3, 0.4};
    for (int which = 0; which < 3; ++which) {
        auto at = [&](double s) {
            double p[3] = {1.5, -0.5, 2.0};
            p[which] = s;
            return eval_form(make_tensor(6, p[0], p[1], p[2]), x);
        };
        const double f0 = at(0), f1 = at(1), f3 = at(3);
        EXPECT_NEAR(f3, f0 + 3 * (f1 - f0), 1e-9 * std::max(1.0, std::abs(f3)));
    }
}

TEST(ApplyPower, Examples) {
    const Vec3 a = apply_power(make_tensor(6, 1, 0, 0), Vec3{2, 0, 0});
    EXPECT_DOUBLE_EQ(a[0], 32);
    EXPECT_DOUBLE_EQ(a[1], 0);
    EXPECT_DOUBLE_EQ(a[2], 0);
    const Vec3 b = apply_power(make_tensor(6, 0, 1, 0), Vec3{1, 1, 1});
    const auto bo = oracle::power(6, 0, 1, 0, {1, 1, 1});
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(b[i], 62, 1e-12);
        EXPECT_NEAR(static_cast<double>(bo[i]), 62, 1e-9);
    }
    // B vanishes to first order at (1,1,1), component by component.
    const Vec3 z = apply_power(make_tensor(6, 180, 0, -1), Vec3{1, 1, 1});
    const auto zo = oracle::power(6, 180, 0, -1, {1, 1, 1});
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(z[i], 0, 1e-12);
        EXPECT_NEAR(static_cast<double>(zo[i]), 0, 1e-9);
    }
}

TEST(ApplyPower, MatchesBruteForceAndEulerIdentity) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> coef(-5, 5), coord(-2, 2);
    for (int k = 0; k < 40; ++k) {
        const int m = k % 2 ? 4 : 6;
        const double d = coef(rng), u = coef(rng), c = coef(rng);
        const Vec3 x{coord(rng), coord(rng), coord(rng)};
        const auto t = make_tensor(m, d, u, c);
        const auto g = apply_power<long double>(t, {x[0], x[1], x[2]});
        const auto ref = oracle::power(m, d, u, c, x);
        for (std::size_t i = 0; i < 3; ++i) EXPECT_LE(rel_err(g[i], ref[i]), 1e-10);
        const long double euler = x[0] * g[0] + x[1] * g[1] + x[2] * g[2];
        EXPECT_LE(rel_err(euler, eval_form<long double>(t, {x[0], x[1], x[2]})), 1e-10);
    }
}

TEST(ApplyPower, GradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> coef(-3, 3), coord(-2, 2), mag(0.5, 2);
    const double h = 1e-5;
    for (int k = 0; k < 50; ++k) {
        const auto t = make_tensor(6, coef(rng), coef(rng), coef(rng));
        Vec3 x{coord(rng), coord(rng), coord(rng)};
        const double inf = std::max({std::abs(x[0]), std::abs(x[1]), std::abs(x[2])});
        const double target = mag(rng);
        for (double& v : x) v *= target / inf;
        const Vec3 g = apply_power(t, x);
        for (std::size_t i = 0; i < 3; ++i) {
            Vec3 xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            const double fd = (eval_form(t, xp) - eval_form(t, xm)) / (2 * h);
            const double an = 6 * g[i];
            EXPECT_LE(std::abs(fd - an), 1e-4 * std::max(1.0, std::abs(an))) << "case " << k << " i=" << i;
        }
    }
}

TEST(ToForm, CoefficientsMatchExpansion) {
    const auto t = make_tensor(6, 2.5, -1.25, 0.75);
    const TernaryForm f = to_form(t);
    EXPECT_DOUBLE_EQ(f.coeff({6, 0, 0}), 2.5);
    EXPECT_DOUBLE_EQ(f.coeff({4, 2, 0}), 15 * -1.25);
    EXPECT_DOUBLE_EQ(f.coeff({2, 2, 2}), 90 * 0.75);
    EXPECT_EQ(f.coeffs.size(), 28u);
    for (const Exponent& e : exponents_of_degree(6))
        EXPECT_NEAR(f.coeff(e), static_cast<double>(oracle::coefficient(6, 2.5, -1.25, 0.75, e)), 1e-9);
}

TEST(ToForm, EvaluatesLikeEvalForm) {
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> coef(-5, 5), coord(-4, 4);
    for (int k = 0; k < 50; ++k) {
        const auto t = make_tensor(8, coef(rng), coef(rng), coef(rng));
        const TernaryForm f = to_form(t);
        const Vec3T<long double> x{coord(rng), coord(rng), coord(rng)};
        const long double a = f.evaluate(x), b = eval_form<long double>(t, x);
        // Cancellation budget: the same sum over absolute values.
        const CirculantTensor abs_t(8, std::abs(t.d()), std::abs(t.u()), std::abs(t.c()));
        const long double mag = to_form(abs_t).evaluate<long double>({std::abs(x[0]), std::abs(x[1]), std::abs(x[2])});
        EXPECT_LE(static_cast<double>(std::abs(a - b) / mag), 1e-15);
    }
}

TEST(ExponentsOfDegree, GradedLexOrder) {
    const auto e = exponents_of_degree(2);
    const std::vector<Exponent> expect{{2, 0, 0}, {1, 1, 0}, {1, 0, 1}, {0, 2, 0}, {0, 1, 1}, {0, 0, 2}};
    EXPECT_EQ(e, expect);
}

TEST(DdBound, Examples) {
    EXPECT_DOUBLE_EQ(dd_bound(6, 1, 0), 62);
    EXPECT_DOUBLE_EQ(dd_bound(6, 0, 1), 180);
    EXPECT_DOUBLE_EQ(dd_bound(6, -1, -1), 242);
}

TEST(DdBound, EqualsOffDiagonalRowSum) {
    // Row 1 of the unfolded tensor: all tuples starting with index 1, minus the diagonal.
    const double u = -1.5, c = 2.25;
    for (int m : {4, 6}) {
        long double row = 0;
        oracle::for_each_tuple(m, [&](const std::vector<int>& idx) {
            if (idx[0] != 0) return;
            const bool diag = std::all_of(idx.begin(), idx.end(), [](int i) { return i == 0; });
            if (!diag) row += std::abs(oracle::entry(0, u, c, idx));
        });
        EXPECT_NEAR(dd_bound(m, u, c), static_cast<double>(row), 1e-9);
    }
}

}  // namespace
}  // namespace sscirc
