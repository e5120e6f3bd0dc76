#pragma once

#include "sscirc/heig.hpp"
#include "sscirc/sdp.hpp"
#include "sscirc/tensor.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace sscirc {

/// Degree-k monomials in graded-lex order; z(x) for the Gram form z' G z.
struct MonomialBasis {
    int k = 0;
    std::vector<Exponent> monos;

    [[nodiscard]] int size() const { return static_cast<int>(monos.size()); }
    friend bool operator==(const MonomialBasis&, const MonomialBasis&) = default;
};

inline MonomialBasis make_basis(int k) { return {k, exponents_of_degree(k)}; }

/// Gram matrix over the half-degree basis witnessing f = z(x)' G z(x).
struct GramCertificate {
    MonomialBasis basis;
    Eigen::MatrixXd G;
    double min_eig = 0.0;
    /// max over monomials of |sum_{e_i + e_j = mu} G_ij - coeff(mu)|.
    double reconstruction_error = 0.0;

    friend bool operator==(const GramCertificate& a, const GramCertificate& b) {
        return a.basis == b.basis && a.G.rows() == b.G.rows() && a.G.cols() == b.G.cols() && a.G == b.G &&
               a.min_eig == b.min_eig && a.reconstruction_error == b.reconstruction_error;
    }
};

/// SDP outcome that is neither a clean yes nor a clean no.
class SosUndecided : public SolverFailure {
public:
    SosUndecided(const std::string& what, SdpStatus status) : SolverFailure(what), status_(status) {}
    [[nodiscard]] SdpStatus status() const { return status_; }

private:
    SdpStatus status_;
};

struct SosOptions {
    double sdp_tol = 1e-9;
    int max_iter = 100;
    /// Run the interior point iterations in long double.
    bool extended = true;
};

/// One equality per degree-m monomial mu:
///   sum over basis pairs (i, j) with e_i + e_j = mu of G_ij = coeff(mu).
/// Constraints follow the graded-lex order of the degree-m monomials.
inline SdpProblem build_gram_problem(const TernaryForm& form) {
    if (form.m % 2 != 0 || form.m < 2) throw InvalidArgument("Gram construction needs an even degree");
    const MonomialBasis basis = make_basis(form.m / 2);
    const auto targets = exponents_of_degree(form.m);
    SdpProblem p;
    p.dim = basis.size();
    p.constraints.resize(targets.size());
    auto target_index = [&](const Exponent& e) {
        // Position of e in exponents_of_degree(m): rows by decreasing a.
        const int m = form.m;
        const int a = e[0], b = e[1];
        const int before = (m - a) * (m - a + 1) / 2;  // rows with larger a
        return before + (m - a - b);
    };
    for (std::size_t l = 0; l < targets.size(); ++l) p.constraints[l].b = form.coeff(targets[l]);
    for (int i = 0; i < p.dim; ++i) {
        for (int j = i; j < p.dim; ++j) {
            const auto& ei = basis.monos[static_cast<std::size_t>(i)];
            const auto& ej = basis.monos[static_cast<std::size_t>(j)];
            const Exponent mu{ei[0] + ej[0], ei[1] + ej[1], ei[2] + ej[2]};
            p.constraints[static_cast<std::size_t>(target_index(mu))].a.add(i, j, 1.0);
        }
    }
    for (const auto& [e, v] : form.coeffs)
        if (e[0] + e[1] + e[2] != form.m) throw InvalidArgument("form has a monomial of the wrong degree");
    return p;
}

/// Gram problem in the weighted basis sqrt(k!/(a!b!g!)) x^(a,b,g). With
/// G = D H D the constraint for mu becomes
///   sum (D_i D_j / w_mu) H_ij = coeff(mu) / w_mu,   w_mu = m!/(a!b!g!),
/// so a circulant form has right-hand sides d, u and c only.
struct ScaledGram {
    SdpProblem problem;
    Eigen::VectorXd scale;  // D
};

inline ScaledGram scale_gram_problem(const SdpProblem& p, int m) {
    const MonomialBasis basis = make_basis(m / 2);
    const auto targets = exponents_of_degree(m);
    if (p.dim != basis.size() || p.constraints.size() != targets.size())
        throw InvalidArgument("problem does not match the degree-" + std::to_string(m) + " Gram layout");
    ScaledGram out;
    out.scale.resize(p.dim);
    for (int i = 0; i < p.dim; ++i) {
        const auto& e = basis.monos[static_cast<std::size_t>(i)];
        out.scale(i) = std::sqrt(static_cast<double>(multinomial(e[0], e[1], e[2])));
    }
    out.problem.dim = p.dim;
    out.problem.constraints.resize(p.constraints.size());
    for (std::size_t l = 0; l < targets.size(); ++l) {
        const double w = static_cast<double>(multinomial(targets[l][0], targets[l][1], targets[l][2]));
        auto& dst = out.problem.constraints[l];
        dst.b = p.constraints[l].b / w;
        for (const auto& e : p.constraints[l].a.entries)
            dst.a.entries.push_back({e.i, e.j, e.v * out.scale(e.i) * out.scale(e.j) / w});
    }
    return out;
}

inline double reconstruction_error(const Eigen::MatrixXd& G, const SdpProblem& p) {
    double err = 0.0;
    for (const auto& c : p.constraints) err = std::max(err, std::abs(c.a.inner(G) - c.b));
    return err;
}

struct SosVerdict {
    bool sos = false;
    /// Achieved lambda_min of the Gram matrix, in coefficient units.
    double t_star = 0.0;
    /// t_star divided by max |d|, |u|, |c| (weighted basis): compared against -tol.
    double margin = 0.0;
    SdpStatus status = SdpStatus::max_iterations;
    std::optional<GramCertificate> certificate;
};

/// SOS membership by the Gram SDP in the weighted basis: SOS iff the largest
/// achievable lambda_min(H) is >= -tol, relative to max(|d|, |u|, |c|). On
/// success G = D H D has already passed check_certificate.
inline SosVerdict is_sos(const CirculantTensor& t, double tol = 1e-7, const SosOptions& opt = {}) {
    require_even_order(t.m());
    const SdpProblem p = build_gram_problem(to_form(t));
    const ScaledGram sg = scale_gram_problem(p, t.m());
    const SdpSolution s = opt.extended ? solve<long double>(sg.problem, opt.sdp_tol, opt.max_iter)
                                        : solve<double>(sg.problem, opt.sdp_tol, opt.max_iter);
    if (s.status == SdpStatus::infeasible)
        throw InternalError("Gram equality system is inconsistent (ls residual " +
                            std::to_string(s.ls_residual) + ")");
    SosVerdict v;
    v.status = s.status;
    v.t_star = s.t_star;
    v.margin = s.t_star / s.b_scale;
    const bool converged = s.status == SdpStatus::optimal;
    if (!converged && v.margin < -1e3 * std::max(tol, opt.sdp_tol)) return v;  // clearly not SOS
    if (v.margin < -tol) {
        if (converged) return v;
        throw SosUndecided("Gram SDP did not converge (" + to_string(s.status) + ")", s.status);
    }
    // Candidate yes: only an independently verified certificate counts, so an
    // unconverged iterate is accepted when it passes the check.
    GramCertificate cert;
    cert.basis = make_basis(t.m() / 2);
    cert.G = sg.scale.asDiagonal() * s.G * sg.scale.asDiagonal();
    cert.G = (0.5 * (cert.G + cert.G.transpose())).eval();
    const CertificateCheck chk = check_certificate(cert.G, p, std::max(tol, 10 * opt.sdp_tol));
    cert.min_eig = chk.min_eig;
    cert.reconstruction_error = chk.constraint_violation;
    if (!chk.ok) {
        if (converged) throw SosUndecided("Gram certificate failed independent verification", s.status);
        throw SosUndecided("Gram SDP did not converge (" + to_string(s.status) + ")", s.status);
    }
    v.sos = true;
    v.certificate = std::move(cert);
    return v;
}

enum class MMethod { closed_form, linear_segment, sdp, bisection };

inline std::string to_string(MMethod m) {
    switch (m) {
        case MMethod::closed_form: return "closed-form";
        case MMethod::linear_segment: return "linear-segment";
        case MMethod::sdp: return "sdp";
        case MMethod::bisection: return "bisection";
    }
    return "unknown";
}

struct MValueOptions {
    double tol_d = 1e-7;
    /// Bisection instead of the direct "minimize d" SDP.
    bool bisection = false;
    /// Lower bracket end for bisection (N_c(u) when known).
    std::optional<double> lower;
    SosOptions sos;
};

struct MValueResult {
    double value = 0.0;
    MMethod method = MMethod::sdp;
    int solves = 0;
};

namespace detail {

/// Closed forms: u, c <= 0 gives -u(2^m-2) - c(3^{m-1}-2^m+1); u = c > 0 gives u.
inline std::optional<double> m_closed_form(int m, double u, double c) {
    if (u <= 0 && c <= 0)
        return static_cast<double>(-static_cast<long double>(u) * two_index_count(m) -
                                   static_cast<long double>(c) * three_index_count(m));
    if (u == c && u > 0) return u;
    return std::nullopt;
}

/// min d  s.t.  f_{d,u,c} = z' X z,  X psd. The pure powers x_i^m carry -d.
inline double m_direct(int m, double u, double c, const SosOptions& opt) {
    const CirculantTensor t0(m, 0.0, u, c);
    const SdpProblem gram = scale_gram_problem(build_gram_problem(to_form(t0)), m).problem;
    double bmax = 0.0;
    for (const auto& k : gram.constraints) bmax = std::max(bmax, std::abs(k.b));
    if (bmax == 0.0) bmax = 1.0;
    StandardSdp sp;
    sp.dim = gram.dim;
    const int rows = static_cast<int>(gram.constraints.size());
    sp.b.resize(rows);
    sp.g = Eigen::MatrixXd::Zero(rows, 1);
    const auto targets = exponents_of_degree(m);
    for (int l = 0; l < rows; ++l) {
        sp.a.push_back(gram.constraints[static_cast<std::size_t>(l)].a);
        sp.b(l) = gram.constraints[static_cast<std::size_t>(l)].b / bmax;
        const Exponent& e = targets[static_cast<std::size_t>(l)];
        if (e[0] == m || e[1] == m || e[2] == m) sp.g(l, 0) = -1.0;
    }
    sp.f = Eigen::VectorXd::Constant(1, 1.0);
    const SdpOptions so{opt.sdp_tol, opt.max_iter};
    const StandardSolution s = opt.extended ? solve_standard<long double>(sp, so) : solve_standard<double>(sp, so);
    if (s.status != SdpStatus::optimal)
        throw SosUndecided("minimum-diagonal SDP did not converge (" + to_string(s.status) + ")", s.status);
    return bmax * s.w(0);
}

}  // namespace detail

/// M_c(u): the smallest diagonal entry d making A(m, d, u, c) SOS.
inline MValueResult m_value_detailed(int m, double u, double c, const MValueOptions& opt = {}) {
    require_even_order(m);
    if (!(opt.tol_d > 0)) throw InvalidArgument("tol_d must be positive");
    MValueResult r;
    if (const auto closed = detail::m_closed_form(m, u, c)) {
        r.value = *closed;
        r.method = MMethod::closed_form;
        r.solves = 1;
        if (!is_sos({m, r.value, u, c}, 1e-7, opt.sos).sos)
            throw InternalError("closed-form SOS threshold failed its Gram check");
        return r;
    }
    if (!opt.bisection) {
        r.value = detail::m_direct(m, u, c, opt.sos);
        r.method = MMethod::sdp;
        r.solves = 1;
        return r;
    }
    double lo = opt.lower.value_or(0.0);
    double hi = dd_bound(m, u, c);
    r.method = MMethod::bisection;
    ++r.solves;
    if (!is_sos({m, hi, u, c}, 1e-7, opt.sos).sos)
        throw InternalError("diagonally dominated tensor failed the SOS test");
    lo = std::min(lo, hi);
    while (hi - lo > opt.tol_d) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        ++r.solves;
        // Strict sign test: bisection locates the zero crossing of t_star.
        if (is_sos({m, mid, u, c}, 0.0, opt.sos).sos)
            hi = mid;
        else
            lo = mid;
    }
    r.value = hi;
    return r;
}

inline double m_value(int m, double u, double c, double tol_d = 1e-7) {
    MValueOptions opt;
    opt.tol_d = tol_d;
    return m_value_detailed(m, u, c, opt).value;
}

/// Critical value, critical Gram certificate and critical minimizer at one
/// (m, u, c). CONFIRMED means all three verified, so M_c(u) = N_c(u) there.
struct CertificateBundle {
    int m = 0;
    double u = 0.0;
    double c = 0.0;
    double critical_value = 0.0;
    MMethod method = MMethod::sdp;
    std::optional<GramCertificate> certificate;
    double certificate_margin = 0.0;
    std::optional<EigenResult> minimizer;
    /// f at the minimizer with d = critical_value (sum |x_i|^m = 1).
    double minimizer_value = 0.0;
    double minimizer_threshold = 0.0;
    bool confirmed = false;
    std::string note;

    friend bool operator==(const CertificateBundle&, const CertificateBundle&) = default;
};

struct CertifyOptions {
    MValueOptions mvalue;
    SolverConfig eigen;
};

/// Gram certificate and critical minimizer at a known threshold.
inline CertificateBundle certify_at(int m, double u, double c, double critical_value, MMethod method,
                                    const CertifyOptions& opt = {}) {
    CertificateBundle b;
    b.m = m;
    b.u = u;
    b.c = c;
    b.critical_value = critical_value;
    b.method = method;
    const double tol_d = opt.mvalue.tol_d;
    const double mag = std::max(1.0, std::abs(critical_value));
    b.minimizer_threshold = 10 * tol_d * mag;
    try {
        SosVerdict v = is_sos({m, critical_value + tol_d * mag, u, c}, 1e-7, opt.mvalue.sos);
        b.certificate_margin = v.margin;
        b.certificate = std::move(v.certificate);
    } catch (const SolverFailure& e) {
        b.note = std::string("certificate: ") + e.what();
    }
    bool minimizer_ok = false;
    try {
        const EigenResult e = lambda_min({m, critical_value, u, c}, opt.eigen);
        b.minimizer = e;
        b.minimizer_value = e.lambda;
        minimizer_ok = e.lambda <= b.minimizer_threshold;
    } catch (const EigenSolverFailure& e) {
        b.minimizer = e.best();
        b.minimizer_value = e.best().lambda;
        b.note += std::string(b.note.empty() ? "" : "; ") + "minimizer: " + e.what();
    }
    b.confirmed = b.certificate.has_value() && minimizer_ok;
    if (!b.confirmed && b.note.empty())
        b.note = b.certificate ? "no critical minimizer at the computed threshold"
                               : "no Gram certificate at the computed threshold";
    return b;
}

inline CertificateBundle certify_pns_free(int m, double u, double c, const CertifyOptions& opt = {}) {
    require_even_order(m);
    const MValueResult mv = m_value_detailed(m, u, c, opt.mvalue);
    return certify_at(m, u, c, mv.value, mv.method, opt);
}

}  // namespace sscirc
