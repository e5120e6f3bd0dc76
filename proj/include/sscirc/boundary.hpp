#pragma once

#include "sscirc/heig.hpp"
#include "sscirc/rational.hpp"
#include "sscirc/sos.hpp"
#include "sscirc/tensor.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace sscirc {

// Where an N_c(u) value came from.
inline constexpr const char* kNNonpositive = "closed-form-nonpositive";  // u, c <= 0
inline constexpr const char* kNEqualUC = "closed-form-equal-uc";         // u = c > 0
inline constexpr const char* kNZeroC = "scaled-eigen-c0";                // c = 0: u * N_0(1)
inline constexpr const char* kNNegLinear = "linear-c-1";                 // c = -1, u <= u0
inline constexpr const char* kNNegEigen = "eigen-c-1";                   // c = -1, u > u0
inline constexpr const char* kNPosLinear = "linear-c+1";                 // c = 1, u <= v0
inline constexpr const char* kNPosEigen = "eigen-c+1";                   // c = 1, u > v0

/// -u(2^m-2) - c(3^{m-1}-2^m+1) with a single rounding at the end.
inline double linear_threshold(int m, const Rational& u, const Rational& c) {
    const __int128 t = two_index_count(m), k = three_index_count(m);
    const __int128 num = -static_cast<__int128>(u.num()) * t * c.den() -
                         static_cast<__int128>(c.num()) * k * u.den();
    const __int128 den = static_cast<__int128>(u.den()) * c.den();
    return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

/// (3^{m-1}+1)/2^m - 1.
inline Rational u0_formula(int m) {
    require_even_order(m);
    return Rational(ipow(3, m - 1) + 1, ipow(2, m)) - Rational(1);
}

/// 1 - 3^{m-1}/(2^{m-1}+1).
inline Rational v0_formula(int m) {
    require_even_order(m);
    return Rational(1) - Rational(ipow(3, m - 1), ipow(2, m - 1) + 1);
}

enum class BreakpointKind { u0, v0 };

struct Breakpoint {
    BreakpointKind kind = BreakpointKind::u0;
    int m = 0;
    Rational value;
    /// The boundary tensor (B - u0 T, or -v0 T - B) passed the PSD check.
    bool verified = false;
    double lambda = 0.0;
    double lambda_residual = 0.0;
    std::string note;

    friend bool operator==(const Breakpoint&, const Breakpoint&) = default;
};

namespace detail {
inline Breakpoint verify_breakpoint(BreakpointKind kind, int m, const SolverConfig& cfg, double psd_tol) {
    Breakpoint bp;
    bp.kind = kind;
    bp.m = m;
    bp.value = kind == BreakpointKind::u0 ? u0_formula(m) : v0_formula(m);
    const long double u = bp.value.to_long_double();
    const CirculantTensor t = kind == BreakpointKind::u0 ? b_minus_u_t(m, u) : minus_u_t_minus_b(m, u);
    try {
        const PsdVerdict v = is_psd(t, cfg, psd_tol);
        bp.verified = v.psd;
        bp.lambda = v.evidence.lambda;
        bp.lambda_residual = v.evidence.residual;
        if (!v.psd) bp.note = "boundary tensor has a negative H-eigenvalue";
    } catch (const SolverFailure& e) {
        bp.note = e.what();
    }
    return bp;
}
}  // namespace detail

inline Breakpoint breakpoint_u0(int m, const SolverConfig& cfg = {}, double psd_tol = 1e-7) {
    return detail::verify_breakpoint(BreakpointKind::u0, m, cfg, psd_tol);
}

inline Breakpoint breakpoint_v0(int m, const SolverConfig& cfg = {}, double psd_tol = 1e-7) {
    return detail::verify_breakpoint(BreakpointKind::v0, m, cfg, psd_tol);
}

/// alpha * A(m, d', u', c') = A(m, d, u, c) with c' in {-1, 0, 1}.
struct Normalized {
    double alpha = 1.0;
    CirculantTensor canonical{4, 0, 0, 0};
};

inline Normalized normalize(const CirculantTensor& t) {
    const double alpha = t.c() != 0.0 ? std::abs(t.c()) : 1.0;
    const double cs = t.c() > 0 ? 1.0 : (t.c() < 0 ? -1.0 : 0.0);
    return {alpha, CirculantTensor(t.m(), t.d() / alpha, t.u() / alpha, cs)};
}

/// Exact version for (u, c) parameters.
struct NormalizedParams {
    Rational alpha{1};
    Rational u;
    int c = 0;
};

inline NormalizedParams normalize(const Rational& u, const Rational& c) {
    if (c.sign() == 0) return {Rational(1), u, 0};
    const Rational a = c.abs();
    return {a, u / a, c.sign()};
}

struct AnalysisConfig {
    SolverConfig eigen;
    MValueOptions mvalue;
    /// PSD decision threshold on lambda_min for breakpoint checks.
    double psd_tol = 1e-7;
    /// Threshold on the scale-free Gram margin for SOS checks.
    double sos_tol = 1e-7;
    bool certify = true;
    double confirm_abs = 1e-5;
    double confirm_rel = 1e-5;
};

struct NValue {
    double value = 0.0;
    std::string provenance;
    std::optional<EigenResult> evidence;
    std::optional<Breakpoint> breakpoint;
};

/// N_c(u): the smallest d making A(m, d, u, c) PSD.
inline NValue n_value(int m, const Rational& u, const Rational& c, const AnalysisConfig& cfg = {}) {
    require_even_order(m);
    NValue r;
    if (u.sign() <= 0 && c.sign() <= 0) {
        r.value = linear_threshold(m, u, c);
        r.provenance = kNNonpositive;
        return r;
    }
    if (u == c && u.sign() > 0) {
        r.value = u.to_double();
        r.provenance = kNEqualUC;
        return r;
    }
    const NormalizedParams np = normalize(u, c);
    const double alpha = np.alpha.to_double();
    if (np.c == 0) {
        // N_0(u) = u N_0(1) = -u lambda_min(m, 0, 1, 0) for u > 0.
        const EigenResult e = lambda_min({m, 0.0, 1.0, 0.0}, cfg.eigen);
        r.value = -np.u.to_double() * e.lambda;
        r.provenance = kNZeroC;
        r.evidence = e;
        return r;
    }
    const Breakpoint bp = np.c < 0 ? breakpoint_u0(m, cfg.eigen, cfg.psd_tol)
                                   : breakpoint_v0(m, cfg.eigen, cfg.psd_tol);
    r.breakpoint = bp;
    if (bp.verified && np.u <= bp.value) {
        r.value = alpha * linear_threshold(m, np.u, Rational(np.c));
        r.provenance = np.c < 0 ? kNNegLinear : kNPosLinear;
        return r;
    }
    // d_lin - lambda_min(m, d_lin, u, c) = -lambda_min(m, 0, u, c) by shift covariance.
    const EigenResult e = lambda_min({m, 0.0, np.u.to_double(), static_cast<double>(np.c)}, cfg.eigen);
    r.value = -alpha * e.lambda;
    r.provenance = np.c < 0 ? kNNegEigen : kNPosEigen;
    r.evidence = e;
    return r;
}

enum class ReportStatus { confirmed, unconfirmed, solver_failure };

inline std::string to_string(ReportStatus s) {
    switch (s) {
        case ReportStatus::confirmed: return "CONFIRMED";
        case ReportStatus::unconfirmed: return "UNCONFIRMED";
        case ReportStatus::solver_failure: return "SOLVER-FAILURE";
    }
    return "UNKNOWN";
}

struct BoundaryReport {
    int m = 0;
    Rational u;
    Rational c;
    double alpha = 1.0;
    Rational canonical_u;
    int canonical_c = 0;
    double n = 0.0;
    std::string n_provenance;
    double m_value = 0.0;
    std::string m_method;
    double gap = 0.0;
    std::optional<Breakpoint> breakpoint;
    std::optional<CertificateBundle> certificates;
    ReportStatus status = ReportStatus::solver_failure;
    std::vector<std::string> errors;
    // resolved settings
    std::uint64_t seed = 0;
    int n_starts = 0;
    double tol_d = 0.0;
    double sdp_tol = 0.0;
    double psd_tol = 0.0;
    double residual_tol = 0.0;
    double confirm_tolerance = 0.0;

    friend bool operator==(const BoundaryReport&, const BoundaryReport&) = default;
};

namespace detail {

/// M on a verified linear segment: the threshold at the breakpoint must be
/// SOS, after which convexity (c = -1) or the T-plus-critical-form
/// combination (c = 1) carries it to every u below.
inline bool linear_segment_sos(int m, const Breakpoint& bp, int c, const AnalysisConfig& cfg) {
    const double u = bp.value.to_double();
    const double d = linear_threshold(m, bp.value, Rational(c));
    const double mag = std::max(1.0, std::abs(d));
    try {
        return is_sos({m, d + cfg.mvalue.tol_d * mag, u, static_cast<double>(c)}, cfg.sos_tol,
                      cfg.mvalue.sos)
            .sos;
    } catch (const SolverFailure&) {
        return false;
    }
}

}  // namespace detail

/// Full PSD/SOS boundary at one (m, u, c).
inline BoundaryReport analyze(int m, const Rational& u, const Rational& c, const AnalysisConfig& base = {}) {
    AnalysisConfig cfg = base;
    if (m >= 14) {
        cfg.mvalue.sos.max_iter *= 2;
        cfg.eigen.max_iters *= 2;
    }
    BoundaryReport r;
    r.m = m;
    r.u = u;
    r.c = c;
    r.seed = cfg.eigen.seed;
    r.n_starts = cfg.eigen.n_starts;
    r.tol_d = cfg.mvalue.tol_d;
    r.sdp_tol = cfg.mvalue.sos.sdp_tol;
    r.psd_tol = cfg.psd_tol;
    r.residual_tol = cfg.eigen.residual_tol;
    try {
        require_even_order(m);
    } catch (const InvalidArgument& e) {
        r.errors.emplace_back(e.what());
        return r;
    }

    const NormalizedParams np = normalize(u, c);
    r.alpha = np.alpha.to_double();
    r.canonical_u = np.u;
    r.canonical_c = np.c;

    bool n_ok = false, m_ok = false;
    try {
        NValue nv = n_value(m, u, c, cfg);
        r.n = nv.value;
        r.n_provenance = nv.provenance;
        r.breakpoint = nv.breakpoint;
        n_ok = true;
    } catch (const std::exception& e) {
        r.errors.push_back(std::string("N: ") + e.what());
    }

    MMethod method = MMethod::sdp;
    try {
        const double ud = np.u.to_double(), cd = static_cast<double>(np.c);
        if (const auto closed = detail::m_closed_form(m, u.to_double(), c.to_double())) {
            r.m_value = *closed;
            method = MMethod::closed_form;
        } else if (np.c != 0 && r.breakpoint && r.breakpoint->verified && np.u <= r.breakpoint->value &&
                   detail::linear_segment_sos(m, *r.breakpoint, np.c, cfg)) {
            r.m_value = r.alpha * linear_threshold(m, np.u, Rational(np.c));
            method = MMethod::linear_segment;
        } else {
            MValueOptions mo = cfg.mvalue;
            if (mo.bisection && n_ok) mo.lower = r.n / r.alpha;
            r.m_value = r.alpha * m_value_detailed(m, ud, cd, mo).value;
            method = mo.bisection ? MMethod::bisection : MMethod::sdp;
        }
        r.m_method = to_string(method);
        m_ok = true;
    } catch (const std::exception& e) {
        r.errors.push_back(std::string("M: ") + e.what());
    }

    if (!(n_ok && m_ok)) {
        r.status = ReportStatus::solver_failure;
        return r;
    }
    r.gap = r.m_value - r.n;
    r.confirm_tolerance = std::max(cfg.confirm_abs, cfg.confirm_rel * std::max(std::abs(r.m_value), 1.0));
    r.status = std::abs(r.gap) <= r.confirm_tolerance ? ReportStatus::confirmed : ReportStatus::unconfirmed;

    if (cfg.certify) {
        CertifyOptions co;
        co.mvalue = cfg.mvalue;
        co.eigen = cfg.eigen;
        // Certificates live on the canonical tensor; verdicts are scale free.
        r.certificates = certify_at(m, np.u.to_double(), static_cast<double>(np.c), r.m_value / r.alpha,
                                    method, co);
    }
    return r;
}

struct SegmentPoint {
    Rational u;
    double linear = 0.0;
    double n = 0.0;
    double m_sdp = 0.0;
    bool sos_at_linear = false;
    bool confirmed = false;
};

struct SegmentReport {
    int m = 0;
    int c = 0;
    Breakpoint breakpoint;
    std::vector<SegmentPoint> points;
    /// c = 1 only: -(u - v0) * Gram(T) + Gram(threshold form at v0) is a
    /// valid Gram certificate for the threshold form at u.
    std::optional<bool> combination_ok;
    bool ok = false;
};

/// Checks M = N = linear closed form at the breakpoint and three points below.
inline SegmentReport verify_linear_segment(int m, int c, const AnalysisConfig& cfg = {}) {
    if (c != -1 && c != 1) throw InvalidArgument("linear segments exist for c = -1 and c = 1 only");
    require_even_order(m);
    SegmentReport rep;
    rep.m = m;
    rep.c = c;
    rep.breakpoint = c < 0 ? breakpoint_u0(m, cfg.eigen, cfg.psd_tol) : breakpoint_v0(m, cfg.eigen, cfg.psd_tol);
    const Rational bp = rep.breakpoint.value;
    std::vector<Rational> us;
    if (c < 0)
        us = {bp / Rational(4), bp / Rational(2), bp * Rational(3, 4), bp};
    else
        us = {bp - Rational(30), bp - Rational(10), bp - Rational(1), bp};

    bool all = rep.breakpoint.verified;
    const double conf_abs = cfg.confirm_abs, conf_rel = cfg.confirm_rel;
    for (const Rational& u : us) {
        SegmentPoint pt;
        pt.u = u;
        pt.linear = linear_threshold(m, u, Rational(c));
        try {
            pt.n = n_value(m, u, Rational(c), cfg).value;
            MValueOptions mo = cfg.mvalue;
            pt.m_sdp = detail::m_direct(m, u.to_double(), c, mo.sos);
            const double mag = std::max(1.0, std::abs(pt.linear));
            pt.sos_at_linear =
                is_sos({m, pt.linear + cfg.mvalue.tol_d * mag, u.to_double(), static_cast<double>(c)}, cfg.sos_tol,
                       cfg.mvalue.sos)
                    .sos;
            const double tol = std::max(conf_abs, conf_rel * mag);
            pt.confirmed = pt.sos_at_linear && std::abs(pt.n - pt.linear) <= 1e-9 * mag &&
                           std::abs(pt.m_sdp - pt.linear) <= tol;
        } catch (const std::exception&) {
            pt.confirmed = false;
        }
        all = all && pt.confirmed;
        rep.points.push_back(pt);
    }

    if (c > 0) {
        // g2: threshold form at v0; g1: T. f*(u) = -(u - v0) g1 + g2.
        try {
            const double v0 = bp.to_double();
            const double d_v0 = linear_threshold(m, bp, Rational(1));
            const auto g2 = is_sos({m, d_v0 + cfg.mvalue.tol_d * std::max(1.0, std::abs(d_v0)), v0, 1.0},
                                   cfg.sos_tol, cfg.mvalue.sos);
            const auto g1 = is_sos(reference_t(m), cfg.sos_tol, cfg.mvalue.sos);
            bool ok = g1.certificate && g2.certificate;
            for (std::size_t i = 0; ok && i + 1 < us.size(); ++i) {
                const double ubar = (us[i] - bp).to_double();
                const double d = linear_threshold(m, us[i], Rational(1)) +
                                 cfg.mvalue.tol_d * std::max(1.0, std::abs(d_v0));
                const Eigen::MatrixXd comb = -ubar * g1.certificate->G + g2.certificate->G;
                const SdpProblem target = build_gram_problem(to_form({m, d, us[i].to_double(), 1.0}));
                ok = check_certificate(comb, target, std::max(cfg.sos_tol, 1e-7)).ok;
            }
            rep.combination_ok = ok;
            all = all && ok;
        } catch (const std::exception&) {
            rep.combination_ok = false;
            all = false;
        }
    }
    rep.ok = all;
    return rep;
}

}  // namespace sscirc
