#include "sscirc/heig.hpp"
#include "sscirc/sos.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace sscirc {
namespace {

TEST(Basis, SizesAndOrder) {
    for (int k = 1; k <= 8; ++k) EXPECT_EQ(make_basis(k).size(), (k + 1) * (k + 2) / 2);
    EXPECT_EQ(make_basis(3).monos.front(), (Exponent{3, 0, 0}));
    EXPECT_EQ(make_basis(3).monos.back(), (Exponent{0, 0, 3}));
}

TEST(GramProblem, OneConstraintPerMonomial) {
    const SdpProblem p = build_gram_problem(to_form(make_tensor(6, 2, -1, 0.5)));
    EXPECT_EQ(p.dim, 10);
    ASSERT_EQ(p.constraints.size(), 28u);
    // x1^6 only arises from the pair (x1^3, x1^3).
    ASSERT_EQ(p.constraints[0].a.entries.size(), 1u);
    EXPECT_EQ(p.constraints[0].b, 2);
    // Every upper-triangle pair lands in exactly one constraint.
    std::size_t total = 0;
    for (const auto& c : p.constraints) total += c.a.entries.size();
    EXPECT_EQ(total, 55u);
}

TEST(GramProblem, DiagonalFormHasDiagonalCertificate) {
    const SdpProblem p = build_gram_problem(to_form(make_tensor(6, 1, 0, 0)));
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(10, 10);
    const MonomialBasis b = make_basis(3);
    for (int i = 0; i < 10; ++i) {
        const auto& e = b.monos[static_cast<std::size_t>(i)];
        if (e[0] == 3 || e[1] == 3 || e[2] == 3) g(i, i) = 1;
    }
    EXPECT_EQ(reconstruction_error(g, p), 0);
    EXPECT_TRUE(check_certificate(g, p, 1e-12).ok);
}

TEST(GramProblem, RejectsOddDegree) {
    EXPECT_THROW(build_gram_problem(to_form(make_tensor(5, 1, 0, 0))), InvalidArgument);
    EXPECT_THROW(is_sos(make_tensor(7, 1, 0, 0)), InvalidArgument);
}

TEST(ScaledGram, CirculantRightHandSides) {
    const SdpProblem p = build_gram_problem(to_form(make_tensor(8, 3, -2, 0.5)));
    const ScaledGram s = scale_gram_problem(p, 8);
    for (const auto& c : s.problem.constraints) EXPECT_TRUE(c.b == 3 || c.b == -2 || c.b == 0.5) << c.b;
    EXPECT_THROW(scale_gram_problem(p, 6), InvalidArgument);
}

TEST(IsSos, Examples) {
    const SosVerdict id = is_sos(make_tensor(6, 1, 0, 0));
    EXPECT_TRUE(id.sos);
    ASSERT_TRUE(id.certificate);
    EXPECT_GE(id.certificate->min_eig, -1e-7);
    EXPECT_LE(id.certificate->reconstruction_error, 1e-7);

    EXPECT_FALSE(is_sos(make_tensor(6, 0, 1, 0)).sos);
    EXPECT_TRUE(is_sos(reference_t(6)).sos);
    EXPECT_TRUE(is_sos(make_tensor(6, 242, -1, -1)).sos);
    EXPECT_FALSE(is_sos(make_tensor(6, 240, -1, -1)).sos);
}

TEST(IsSos, CertificateReconstructsTheForm) {
    const auto t = make_tensor(8, 800, 1, -0.5);
    const SosVerdict v = is_sos(t);
    ASSERT_TRUE(v.sos);
    const SdpProblem p = build_gram_problem(to_form(t));
    EXPECT_TRUE(check_certificate(v.certificate->G, p, 1e-7).ok);
}

TEST(IsSos, UpwardClosedInDiagonal) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> coef(-2, 2), step(0.1, 5);
    int checked = 0;
    for (int k = 0; k < 40 && checked < 20; ++k) {
        const double u = coef(rng), c = coef(rng);
        const double d = dd_bound(6, u, c) * 0.3 + coef(rng);
        if (!is_sos(make_tensor(6, d, u, c)).sos) continue;
        ++checked;
        EXPECT_TRUE(is_sos(make_tensor(6, d + step(rng), u, c)).sos) << d << " " << u << " " << c;
    }
    EXPECT_GE(checked, 10);
}

TEST(IsSos, ScaleInvariant) {
    for (double a : {0.01, 3.0, 250.0}) {
        EXPECT_TRUE(is_sos(make_tensor(6, 242, -1, -1).scaled(a)).sos);
        EXPECT_FALSE(is_sos(make_tensor(6, 0, 1, 0).scaled(a)).sos);
        EXPECT_TRUE(is_sos(make_tensor(8, 800, 1, -0.5).scaled(a)).sos);
    }
}

TEST(IsSos, ConvexCombinations) {
    const CirculantTensor a(6, 10, 1, 0), b(6, 250, -1, 0.25);
    ASSERT_TRUE(is_sos(a).sos);
    ASSERT_TRUE(is_sos(b).sos);
    for (double s : {0.25, 0.5, 0.75})
        EXPECT_TRUE(is_sos({6, s * a.d() + (1 - s) * b.d(), s * a.u() + (1 - s) * b.u(), s * a.c() + (1 - s) * b.c()})
                        .sos);
}

TEST(MValue, ClosedForms) {
    const MValueResult a = m_value_detailed(6, -1, -1);
    EXPECT_EQ(a.method, MMethod::closed_form);
    EXPECT_DOUBLE_EQ(a.value, 242);
    EXPECT_DOUBLE_EQ(m_value(6, 0, 0), 0);
    const MValueResult b = m_value_detailed(8, 2.5, 2.5);
    EXPECT_EQ(b.method, MMethod::closed_form);
    EXPECT_DOUBLE_EQ(b.value, 2.5);
}

TEST(MValue, DirectSdp) {
    EXPECT_NEAR(m_value(6, 1, 0), 1.7373484717, 1e-6);
    EXPECT_NEAR(m_value(6, 2, -1), 56, 1e-5);
    EXPECT_NEAR(m_value(8, 10, -1), 19.71293593, 1e-5);
}

TEST(MValue, BisectionAgreesWithDirect) {
    MValueOptions opt;
    opt.bisection = true;
    opt.tol_d = 1e-7;
    const MValueResult r = m_value_detailed(6, 1, 0, opt);
    EXPECT_EQ(r.method, MMethod::bisection);
    EXPECT_GT(r.solves, 10);
    EXPECT_NEAR(r.value, m_value(6, 1, 0), 1e-5);
}

TEST(MValue, BoundedByPsdThresholdAndDiagonalDominance) {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> coef(-3, 3);
    for (int k = 0; k < 8; ++k) {
        const double u = coef(rng), c = coef(rng);
        const double mv = m_value(6, u, c);
        const double n = -lambda_min(make_tensor(6, 0, u, c)).lambda;
        const double mag = std::max(1.0, std::abs(mv));
        EXPECT_GE(mv, n - 1e-5 * mag) << u << " " << c;
        EXPECT_LE(mv, dd_bound(6, u, c) + 1e-5 * mag);
    }
}

TEST(MValue, RejectsBadInput) {
    EXPECT_THROW(m_value(5, 1, 0), InvalidArgument);
    EXPECT_THROW(m_value(6, 1, 0, 0.0), InvalidArgument);
}

TEST(Certify, CriticalExamples) {
    const CertificateBundle a = certify_pns_free(6, 1, 1);
    EXPECT_TRUE(a.confirmed) << a.note;
    EXPECT_DOUBLE_EQ(a.critical_value, 1);
    ASSERT_TRUE(a.minimizer);
    // A permutation of +-(1,1,-2) up to scale.
    const Vec3 r = canonical_representative(a.minimizer->x);
    EXPECT_NEAR(r[0], r[1], 1e-5);
    EXPECT_NEAR(r[2], -2 * r[0], 1e-5);

    const CertificateBundle b = certify_pns_free(6, -1, -1);
    EXPECT_TRUE(b.confirmed) << b.note;
    EXPECT_DOUBLE_EQ(b.critical_value, 242);
    const Vec3 rb = canonical_representative(b.minimizer->x);
    EXPECT_NEAR(rb[0], rb[2], 1e-5);

    const CertificateBundle c = certify_pns_free(6, 1, 0);
    EXPECT_TRUE(c.confirmed) << c.note;
    EXPECT_LE(c.minimizer_value, 1e-6);
    ASSERT_TRUE(c.certificate);
    EXPECT_GE(c.certificate->min_eig, -1e-7 * 10);
}

TEST(Certify, BelowThresholdIsNotConfirmed) {
    const CertificateBundle b = certify_at(6, -1, -1, 200, MMethod::sdp);
    EXPECT_FALSE(b.confirmed);
    EXPECT_FALSE(b.certificate);
    EXPECT_FALSE(b.note.empty());
}

TEST(Certify, Deterministic) { EXPECT_EQ(certify_pns_free(6, 1, 0), certify_pns_free(6, 1, 0)); }

}  // namespace
}  // namespace sscirc
