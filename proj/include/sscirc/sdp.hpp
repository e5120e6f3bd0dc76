#pragma once

#include "sscirc/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace sscirc {

/// Symmetric matrix given by its upper-triangle entries (i <= j). An entry
/// (i, j, v) with i < j stands for both A_ij and A_ji.
struct SparseSym {
    struct Entry {
        int i = 0;
        int j = 0;
        double v = 0.0;
    };
    std::vector<Entry> entries;

    void add(int i, int j, double v) {
        if (i > j) std::swap(i, j);
        for (Entry& e : entries)
            if (e.i == i && e.j == j) {
                e.v += v;
                return;
            }
        entries.push_back({i, j, v});
    }

    /// <A, X> = trace(A X) for symmetric X.
    template <typename Derived>
    [[nodiscard]] typename Derived::Scalar inner(const Eigen::MatrixBase<Derived>& x) const {
        using S = typename Derived::Scalar;
        S s = S(0);
        for (const Entry& e : entries)
            s += static_cast<S>(e.i == e.j ? e.v : 2 * e.v) * x(e.i, e.j);
        return s;
    }

    [[nodiscard]] double trace() const {
        double s = 0;
        for (const Entry& e : entries)
            if (e.i == e.j) s += e.v;
        return s;
    }
};

struct SdpConstraint {
    SparseSym a;
    double b = 0.0;
};

/// Find a symmetric G with <A_l, G> = b_l maximizing lambda_min(G).
struct SdpProblem {
    int dim = 0;
    std::vector<SdpConstraint> constraints;
};

enum class SdpStatus { optimal, infeasible, max_iterations };

inline std::string to_string(SdpStatus s) {
    switch (s) {
        case SdpStatus::optimal: return "optimal";
        case SdpStatus::infeasible: return "infeasible";
        case SdpStatus::max_iterations: return "max-iterations";
    }
    return "unknown";
}

struct SdpSolution {
    Eigen::MatrixXd G;
    double t_star = 0.0;
    /// max_l |<A_l, G> - b_l| in the caller's units.
    double primal_residual = 0.0;
    SdpStatus status = SdpStatus::max_iterations;
    int iterations = 0;
    /// Least-squares residual of the equality system (relative to max |b|).
    double ls_residual = 0.0;
    /// max |b_l|; t_star / b_scale is the scale-free margin.
    double b_scale = 1.0;
};

/// min <C, X> + f'w  s.t.  <A_l, X> + (G w)_l = b_l,  X psd,  w free.
struct StandardSdp {
    int dim = 0;
    std::vector<SparseSym> a;
    Eigen::VectorXd b;
    Eigen::MatrixXd c;      // dim x dim, may be empty (zero objective on X)
    Eigen::MatrixXd g;      // p x q
    Eigen::VectorXd f;      // q
};

struct StandardSolution {
    Eigen::MatrixXd x;
    Eigen::VectorXd w;
    Eigen::VectorXd y;
    Eigen::MatrixXd z;
    double primal_obj = 0.0;
    double dual_obj = 0.0;
    double primal_infeasibility = 0.0;
    double dual_infeasibility = 0.0;
    double relative_gap = 0.0;
    SdpStatus status = SdpStatus::max_iterations;
    int iterations = 0;
};

/// A stalled run whose best iterate is within this factor of tol counts as optimal.
inline constexpr double kNearOptimalFactor = 100.0;

struct SdpOptions {
    double tol = 1e-9;
    int max_iter = 100;
};

namespace detail {

template <typename S>
struct OrderedEntry {
    int r;
    int c;
    S v;
};

/// Largest step alpha with X + alpha dX still positive semidefinite.
template <typename S>
S max_psd_step(const Eigen::Matrix<S, -1, -1>& x, const Eigen::Matrix<S, -1, -1>& dx) {
    using Mat = Eigen::Matrix<S, -1, -1>;
    Eigen::LLT<Mat> llt(x);
    if (llt.info() != Eigen::Success) return S(0);
    const Mat linv_dx = llt.matrixL().solve(dx);
    Mat w = llt.matrixL().solve(linv_dx.transpose());
    w = (w + w.transpose()) / S(2);
    const S lmin = Eigen::SelfAdjointEigenSolver<Mat>(w, Eigen::EigenvaluesOnly).eigenvalues()(0);
    if (lmin >= S(0)) return std::numeric_limits<S>::max();
    return S(-1) / lmin;
}

}  // namespace detail

/// Infeasible primal-dual interior point method, HKM direction with
/// Mehrotra predictor-corrector. Free variables enter through a bordered
/// Schur complement system. All arithmetic runs in S.
template <typename S = double>
StandardSolution solve_standard(const StandardSdp& prob, const SdpOptions& opt = {}) {
    using Mat = Eigen::Matrix<S, -1, -1>;
    using Vec = Eigen::Matrix<S, -1, 1>;
    const int n = prob.dim;
    const int p = static_cast<int>(prob.a.size());
    const int q = static_cast<int>(prob.f.size());
    if (n < 1 || p < 1) throw InvalidArgument("SDP needs dim >= 1 and at least one constraint");
    if (prob.b.size() != p || (q > 0 && prob.g.rows() != p) || prob.g.cols() != q)
        throw InvalidArgument("SDP data dimensions do not match");

    std::vector<std::vector<detail::OrderedEntry<S>>> ord(static_cast<std::size_t>(p));
    for (int l = 0; l < p; ++l) {
        for (const auto& e : prob.a[static_cast<std::size_t>(l)].entries) {
            if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n)
                throw InvalidArgument("constraint entry outside the matrix");
            ord[static_cast<std::size_t>(l)].push_back({e.i, e.j, static_cast<S>(e.v)});
            if (e.i != e.j) ord[static_cast<std::size_t>(l)].push_back({e.j, e.i, static_cast<S>(e.v)});
        }
    }
    const Mat C = prob.c.size() ? Mat(prob.c.cast<S>()) : Mat(Mat::Zero(n, n));
    const Vec b = prob.b.cast<S>();
    const Mat G = q ? Mat(prob.g.cast<S>()) : Mat(p, 0);
    const Vec f = q ? Vec(prob.f.cast<S>()) : Vec(0);

    auto op_a = [&](const Mat& x) {
        Vec r(p);
        for (int l = 0; l < p; ++l) {
            S s = S(0);
            for (const auto& e : ord[static_cast<std::size_t>(l)]) s += e.v * x(e.r, e.c);
            r(l) = s;
        }
        return r;
    };
    auto op_at = [&](const Vec& y) {
        Mat r = Mat::Zero(n, n);
        for (int l = 0; l < p; ++l)
            for (const auto& e : ord[static_cast<std::size_t>(l)]) r(e.r, e.c) += y(l) * e.v;
        return r;
    };
    auto sym = [](const Mat& m) { return Mat((m + m.transpose()) / S(2)); };

    // Starting point.
    S max_anorm = S(0), max_ratio = S(0);
    for (int l = 0; l < p; ++l) {
        S fn = S(0);
        for (const auto& e : ord[static_cast<std::size_t>(l)]) fn += e.v * e.v;
        fn = std::sqrt(fn);
        max_anorm = std::max(max_anorm, fn);
        max_ratio = std::max(max_ratio, (1 + std::abs(b(l))) / (1 + fn));
    }
    const S sn = std::sqrt(static_cast<S>(n));
    const S xi = std::max({S(10), sn, static_cast<S>(n) * max_ratio});
    const S eta = std::max({S(10), sn, max_anorm, static_cast<S>(C.norm())});
    Mat X = xi * Mat::Identity(n, n);
    Mat Z = eta * Mat::Identity(n, n);
    Vec y = Vec::Zero(p);
    Vec w = Vec::Zero(q);

    const S bnorm = b.norm(), cnorm = C.norm() + f.norm();
    StandardSolution out;
    S best_merit = std::numeric_limits<S>::max();
    auto record = [&](int it, S pinf, S dinf, S gap, S xzr, S pobj, S dobj, bool converged) {
        const S merit = std::max({pinf, dinf, gap, xzr});
        if (!converged && merit >= best_merit) return;
        best_merit = merit;
        out.x = X.template cast<double>();
        out.z = Z.template cast<double>();
        out.y = y.template cast<double>();
        out.w = w.template cast<double>();
        out.primal_obj = static_cast<double>(pobj);
        out.dual_obj = static_cast<double>(dobj);
        out.primal_infeasibility = static_cast<double>(pinf);
        out.dual_infeasibility = static_cast<double>(dinf);
        out.relative_gap = static_cast<double>(gap);
        out.iterations = it;
        out.status = converged ? SdpStatus::optimal : SdpStatus::max_iterations;
    };

    const S tol = static_cast<S>(opt.tol);
    int stalled = 0;
    for (int it = 0; it <= opt.max_iter; ++it) {
        const Vec rp = b - op_a(X) - G * w;
        const Mat rd = C - op_at(y) - Z;
        const Vec rf = f - G.transpose() * y;
        const S pobj = (C.cwiseProduct(X)).sum() + f.dot(w);
        const S dobj = b.dot(y);
        const S pinf = rp.norm() / (1 + bnorm);
        const S dinf = (rd.norm() + rf.norm()) / (1 + cnorm);
        const S gap = std::abs(pobj - dobj) / (1 + std::abs(pobj) + std::abs(dobj));
        const S xz = (X.cwiseProduct(Z)).sum();
        const S xzr = xz / (1 + std::abs(pobj) + std::abs(dobj));
        const bool converged = pinf <= tol && dinf <= tol && gap <= tol && xzr <= tol;
        record(it, pinf, dinf, gap, xzr, pobj, dobj, converged);
#ifdef SSCIRC_SDP_TRACE
        std::fprintf(stderr, "it %d pinf %.2e dinf %.2e gap %.2e xz %.2e pobj %.10e\n", it, double(pinf),
                     double(dinf), double(gap), double(xz), double(pobj));
#endif
        if (converged || it == opt.max_iter || stalled >= 4) break;

        const S mu = xz / static_cast<S>(n);
        Eigen::LLT<Mat> zchol(Z);
        if (zchol.info() != Eigen::Success) break;
        const Mat Zinv = sym(zchol.solve(Mat::Identity(n, n)));

        // Schur complement M_ij = trace(A_i X A_j Z^{-1}).
        Mat M(p, p);
        for (int i = 0; i < p; ++i) {
            for (int j = i; j < p; ++j) {
                S s = S(0);
                for (const auto& ei : ord[static_cast<std::size_t>(i)])
                    for (const auto& ej : ord[static_cast<std::size_t>(j)])
                        s += ei.v * ej.v * X(ei.c, ej.r) * Zinv(ej.c, ei.r);
                M(i, j) = s;
                M(j, i) = s;
            }
        }
        Eigen::LDLT<Mat> mfact(M);
        if (mfact.info() != Eigen::Success) break;
        Mat minv_g;
        Eigen::LDLT<Mat> sfact;
        if (q) {
            minv_g = mfact.solve(G);
            sfact.compute(Mat(G.transpose() * minv_g));
        }

        struct Dir {
            Mat dx, dz;
            Vec dy, dw;
        };
        auto direction = [&](S target, const Mat* corr) {
            Mat h = target * Zinv - X - X * rd * Zinv;
            if (corr) h -= (*corr) * Zinv;
            const Vec r = rp - op_a(sym(h));
            Dir d;
            if (q) {
                const Vec minv_r = mfact.solve(r);
                d.dw = sfact.solve(Vec(G.transpose() * minv_r - rf));
                d.dy = mfact.solve(Vec(r - G * d.dw));
            } else {
                d.dw = Vec(0);
                d.dy = mfact.solve(r);
            }
            const Mat aty = op_at(d.dy);
            d.dz = sym(rd - aty);
            d.dx = sym(h + X * aty * Zinv);
            return d;
        };

        const Dir pred = direction(S(0), nullptr);
        const S ap_pred = std::min(S(1), detail::max_psd_step(X, pred.dx));
        const S ad_pred = std::min(S(1), detail::max_psd_step(Z, pred.dz));
        const S mu_pred = ((X + ap_pred * pred.dx).cwiseProduct(Z + ad_pred * pred.dz)).sum() / static_cast<S>(n);
        S sigma = std::pow(std::max(S(0), mu_pred) / mu, S(3));
        sigma = std::clamp(sigma, S(0), S(1));
        const Mat corr = pred.dx * pred.dz;
        const Dir d = direction(sigma * mu, &corr);

        const S gamma = S(0.9) + S(0.09) * std::min(ap_pred, ad_pred);
        const S ap = std::min(S(1), gamma * detail::max_psd_step(X, d.dx));
        const S ad = std::min(S(1), gamma * detail::max_psd_step(Z, d.dz));
        if (!(ap > S(0)) || !(ad > S(0)) || !d.dx.allFinite() || !d.dz.allFinite()) break;
        stalled = (ap < S(1e-8) && ad < S(1e-8)) ? stalled + 1 : 0;
        X = sym(X + ap * d.dx);
        w += ap * d.dw;
        y += ad * d.dy;
        Z = sym(Z + ad * d.dz);
    }
    // Breakdown or stall close to the optimum: keep the best iterate as optimal.
    if (out.status != SdpStatus::optimal && best_merit <= S(kNearOptimalFactor) * tol) out.status = SdpStatus::optimal;
    return out;
}

/// Least-squares residual of <A_l, G> = b_l over symmetric G, relative to
/// max(1, max |b_l|).
inline double constraint_ls_residual(const SdpProblem& p) {
    const int n = p.dim;
    const int cols = n * (n + 1) / 2;
    const int rows = static_cast<int>(p.constraints.size());
    auto idx = [n](int i, int j) { return i * n - i * (i - 1) / 2 + (j - i); };
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, cols);
    Eigen::VectorXd b(rows);
    for (int l = 0; l < rows; ++l) {
        const auto& c = p.constraints[static_cast<std::size_t>(l)];
        for (const auto& e : c.a.entries) a(l, idx(e.i, e.j)) += e.i == e.j ? e.v : 2 * e.v;
        b(l) = c.b;
    }
    const Eigen::VectorXd g = a.completeOrthogonalDecomposition().solve(b);
    const double bmax = std::max(1.0, b.cwiseAbs().maxCoeff());
    return (a * g - b).cwiseAbs().maxCoeff() / bmax;
}

/// Maximize lambda_min(G) subject to <A_l, G> = b_l. Written as
/// G = X + tI with X psd and t free; b is divided by max |b_l| before solving
/// and the solution is rescaled afterwards.
template <typename S = double>
SdpSolution solve(const SdpProblem& p, double tol = 1e-9, int max_iter = 100) {
    if (p.dim < 1 || p.constraints.empty()) throw InvalidArgument("SDP needs dim >= 1 and constraints");
    for (const auto& c : p.constraints)
        for (const auto& e : c.a.entries)
            if (e.i < 0 || e.j < 0 || e.i >= p.dim || e.j >= p.dim)
                throw InvalidArgument("constraint entry outside the matrix");

    SdpSolution sol;
    sol.ls_residual = constraint_ls_residual(p);
    const int n = p.dim;
    if (sol.ls_residual > 1e-8) {
        sol.status = SdpStatus::infeasible;
        sol.G = Eigen::MatrixXd::Zero(n, n);
        sol.t_star = -std::numeric_limits<double>::infinity();
        return sol;
    }

    double bmax = 0.0;
    for (const auto& c : p.constraints) bmax = std::max(bmax, std::abs(c.b));
    if (bmax == 0.0) bmax = 1.0;
    sol.b_scale = bmax;

    StandardSdp sp;
    sp.dim = n;
    const int rows = static_cast<int>(p.constraints.size());
    sp.b.resize(rows);
    sp.g.resize(rows, 1);
    for (int l = 0; l < rows; ++l) {
        const auto& c = p.constraints[static_cast<std::size_t>(l)];
        sp.a.push_back(c.a);
        sp.b(l) = c.b / bmax;
        sp.g(l, 0) = c.a.trace();
    }
    sp.f = Eigen::VectorXd::Constant(1, -1.0);  // minimize -t

    const StandardSolution s = solve_standard<S>(sp, {tol, max_iter});
    sol.status = s.status;
    sol.iterations = s.iterations;
    const double t = s.w.size() ? s.w(0) : 0.0;
    sol.G = bmax * (s.x + t * Eigen::MatrixXd::Identity(n, n));
    sol.t_star = bmax * t;
    double res = 0.0;
    for (const auto& c : p.constraints) res = std::max(res, std::abs(c.a.inner(sol.G) - c.b));
    sol.primal_residual = res;
    return sol;
}

struct CertificateCheck {
    bool ok = false;
    /// Largest of the equality violations and max(0, -lambda_min(G)).
    double max_violation = 0.0;
    double min_eig = 0.0;
    double constraint_violation = 0.0;
};

/// Independent verifier: dense symmetric eigen-decomposition of G plus direct
/// evaluation of every constraint. tol is relative to max(1, max |b_l|).
inline CertificateCheck check_certificate(const Eigen::MatrixXd& G, const SdpProblem& p, double tol) {
    if (G.rows() != p.dim || G.cols() != p.dim) throw InvalidArgument("certificate has wrong dimensions");
    double bmax = 1.0;
    for (const auto& c : p.constraints) bmax = std::max(bmax, std::abs(c.b));
    CertificateCheck r;
    const Eigen::MatrixXd gs = (G + G.transpose()) / 2;
    r.min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gs, Eigen::EigenvaluesOnly).eigenvalues()(0);
    for (const auto& c : p.constraints)
        r.constraint_violation = std::max(r.constraint_violation, std::abs(c.a.inner(gs) - c.b));
    r.max_violation = std::max(r.constraint_violation, std::max(0.0, -r.min_eig));
    r.ok = r.constraint_violation <= tol * bmax && r.min_eig >= -tol * bmax;
    return r;
}

}  // namespace sscirc
