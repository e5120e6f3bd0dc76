#pragma once

#include "sscirc/combinatorics.hpp"
#include "sscirc/errors.hpp"

#include <array>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace sscirc {

template <typename S>
using Vec3T = std::array<S, 3>;
using Vec3 = Vec3T<double>;

/// A(m, d, u, c): the m-th order three dimensional strongly symmetric
/// circulant tensor. Entries depend only on how many distinct index values
/// occur: one -> d, two -> u, three -> c. The 3^m entry array is never formed.
class CirculantTensor {
public:
    CirculantTensor(int m, double d, double u, double c) : m_(m), d_(d), u_(u), c_(c) {
        if (m < 3 || m > kMaxOrder)
            throw InvalidArgument("tensor order must be in [3, " + std::to_string(kMaxOrder) +
                                  "], got " + std::to_string(m));
        if (!std::isfinite(d) || !std::isfinite(u) || !std::isfinite(c))
            throw InvalidArgument("tensor entries must be finite");
    }

    [[nodiscard]] int m() const { return m_; }
    [[nodiscard]] double d() const { return d_; }
    [[nodiscard]] double u() const { return u_; }
    [[nodiscard]] double c() const { return c_; }
    [[nodiscard]] bool even() const { return m_ % 2 == 0; }

    /// alpha * A, entrywise.
    [[nodiscard]] CirculantTensor scaled(double alpha) const {
        return {m_, alpha * d_, alpha * u_, alpha * c_};
    }
    /// A + shift * I, where I is the identity tensor.
    [[nodiscard]] CirculantTensor shifted(double shift) const { return {m_, d_ + shift, u_, c_}; }

    friend bool operator==(const CirculantTensor&, const CirculantTensor&) = default;

private:
    int m_;
    double d_;
    double u_;
    double c_;
};

inline CirculantTensor make_tensor(int m, double d, double u, double c) { return {m, d, u, c}; }

/// Throws unless m is even and >= 4; every positivity routine starts here.
inline void require_even_order(int m) {
    if (m % 2 != 0 || m < 4 || m > kMaxOrder)
        throw InvalidArgument("positivity analysis needs even order 4 <= m <= " +
                              std::to_string(kMaxOrder) + ", got " + std::to_string(m));
}

/// Entry a_{i1...im}; indices are 1-based.
inline double entry(const CirculantTensor& t, std::span<const int> idx) {
    if (static_cast<int>(idx.size()) != t.m())
        throw InvalidArgument("index tuple has length " + std::to_string(idx.size()) +
                              ", tensor order is " + std::to_string(t.m()));
    std::array<bool, 3> seen{};
    for (int i : idx) {
        if (i < 1 || i > 3) throw InvalidArgument("index " + std::to_string(i) + " not in {1,2,3}");
        seen[static_cast<std::size_t>(i - 1)] = true;
    }
    switch (seen[0] + seen[1] + seen[2]) {
        case 1: return t.d();
        case 2: return t.u();
        default: return t.c();
    }
}

/// f(x) = A x^m, using the grouped expansion
///   d (x1^m + x2^m + x3^m)
///   + u sum_p C(m,p) (x1^{m-p} x2^p + x1^{m-p} x3^p + x2^{m-p} x3^p)
///   + c sum_p sum_q C(m,p) C(m-p,q) x1^{m-p-q} x2^p x3^q.
/// Binomial products are exact integers converted once to S.
template <typename S = double>
S eval_form(const CirculantTensor& t, const Vec3T<S>& x) {
    const int m = t.m();
    std::array<std::array<S, kMaxOrder + 1>, 3> pw{};
    for (std::size_t i = 0; i < 3; ++i) {
        pw[i][0] = S(1);
        for (int k = 1; k <= m; ++k) pw[i][k] = pw[i][k - 1] * x[i];
    }
    S diag = pw[0][m] + pw[1][m] + pw[2][m];
    S two = S(0);
    for (int p = 1; p <= m - 1; ++p)
        two += static_cast<S>(binomial(m, p)) *
               (pw[0][m - p] * pw[1][p] + pw[0][m - p] * pw[2][p] + pw[1][m - p] * pw[2][p]);
    S three = S(0);
    for (int p = 1; p <= m - 2; ++p)
        for (int q = 1; q <= m - p - 1; ++q)
            three += static_cast<S>(binomial(m, p) * binomial(m - p, q)) * pw[0][m - p - q] *
                     pw[1][p] * pw[2][q];
    return static_cast<S>(t.d()) * diag + static_cast<S>(t.u()) * two +
           static_cast<S>(t.c()) * three;
}

using Exponent = std::array<int, 3>;

/// Explicit coefficient map of a ternary form of degree m. Absent exponents
/// have coefficient zero.
struct TernaryForm {
    int m = 0;
    std::map<Exponent, double> coeffs;

    [[nodiscard]] double coeff(const Exponent& e) const {
        const auto it = coeffs.find(e);
        return it == coeffs.end() ? 0.0 : it->second;
    }

    template <typename S = double>
    [[nodiscard]] S evaluate(const Vec3T<S>& x) const {
        S sum = S(0);
        for (const auto& [e, v] : coeffs) {
            S term = static_cast<S>(v);
            for (std::size_t i = 0; i < 3; ++i)
                for (int k = 0; k < e[i]; ++k) term *= x[i];
            sum += term;
        }
        return sum;
    }
};

/// Coefficient of x^a y^b z^g in the form of A: multinomial times the entry
/// class picked by how many exponents are nonzero.
inline double form_coefficient(const CirculantTensor& t, const Exponent& e) {
    const int nonzero = (e[0] > 0) + (e[1] > 0) + (e[2] > 0);
    const double entry_value = nonzero == 1 ? t.d() : (nonzero == 2 ? t.u() : t.c());
    return static_cast<double>(multinomial(e[0], e[1], e[2])) * entry_value;
}

/// All exponent triples of total degree `deg`, graded-lex descending:
/// (deg,0,0), (deg-1,1,0), (deg-1,0,1), (deg-2,2,0), ...
inline std::vector<Exponent> exponents_of_degree(int deg) {
    std::vector<Exponent> out;
    out.reserve(static_cast<std::size_t>((deg + 1) * (deg + 2) / 2));
    for (int a = deg; a >= 0; --a)
        for (int b = deg - a; b >= 0; --b) out.push_back({a, b, deg - a - b});
    return out;
}

inline TernaryForm to_form(const CirculantTensor& t) {
    TernaryForm f;
    f.m = t.m();
    for (const Exponent& e : exponents_of_degree(t.m())) {
        const double v = form_coefficient(t, e);
        if (v != 0.0) f.coeffs.emplace(e, v);
    }
    return f;
}

/// Off-diagonal absolute row sum r_1 = r_2 = r_3 = |u|(2^m-2) + |c|(3^{m-1}-2^m+1).
/// A tensor with d at least this large is diagonally dominated.
inline double dd_bound(int m, double u, double c) {
    if (m < 3 || m > kMaxOrder) throw InvalidArgument("order out of range");
    return std::abs(u) * static_cast<double>(two_index_count(m)) +
           std::abs(c) * static_cast<double>(three_index_count(m));
}

/// Value, gradient and Hessian of f from the expanded monomial list. Used by
/// apply_power and by the eigenvalue search, which needs second derivatives.
template <typename S>
class FormDerivatives {
public:
    explicit FormDerivatives(const CirculantTensor& t) : m_(t.m()) {
        for (const Exponent& e : exponents_of_degree(m_)) {
            const double v = form_coefficient(t, e);
            if (v != 0.0) terms_.push_back({e, static_cast<S>(v)});
        }
    }

    [[nodiscard]] int order() const { return m_; }

    struct Jet {
        S value{};
        Vec3T<S> grad{};
        std::array<std::array<S, 3>, 3> hess{};
    };

    [[nodiscard]] Jet jet(const Vec3T<S>& x, bool with_hessian = true) const {
        std::array<std::array<S, kMaxOrder + 1>, 3> pw{};
        for (std::size_t i = 0; i < 3; ++i) {
            pw[i][0] = S(1);
            for (int k = 1; k <= m_; ++k) pw[i][k] = pw[i][k - 1] * x[i];
        }
        auto p = [&](std::size_t i, int k) { return k < 0 ? S(0) : pw[i][k]; };
        Jet j;
        for (const Term& term : terms_) {
            const auto& e = term.e;
            const S a0 = p(0, e[0]), a1 = p(1, e[1]), a2 = p(2, e[2]);
            j.value += term.coef * a0 * a1 * a2;
            const S d0 = e[0] ? S(e[0]) * p(0, e[0] - 1) : S(0);
            const S d1 = e[1] ? S(e[1]) * p(1, e[1] - 1) : S(0);
            const S d2 = e[2] ? S(e[2]) * p(2, e[2] - 1) : S(0);
            j.grad[0] += term.coef * d0 * a1 * a2;
            j.grad[1] += term.coef * a0 * d1 * a2;
            j.grad[2] += term.coef * a0 * a1 * d2;
            if (!with_hessian) continue;
            const S s0 = e[0] > 1 ? S(e[0]) * S(e[0] - 1) * p(0, e[0] - 2) : S(0);
            const S s1 = e[1] > 1 ? S(e[1]) * S(e[1] - 1) * p(1, e[1] - 2) : S(0);
            const S s2 = e[2] > 1 ? S(e[2]) * S(e[2] - 1) * p(2, e[2] - 2) : S(0);
            j.hess[0][0] += term.coef * s0 * a1 * a2;
            j.hess[1][1] += term.coef * a0 * s1 * a2;
            j.hess[2][2] += term.coef * a0 * a1 * s2;
            j.hess[0][1] += term.coef * d0 * d1 * a2;
            j.hess[0][2] += term.coef * d0 * a1 * d2;
            j.hess[1][2] += term.coef * a0 * d1 * d2;
        }
        j.hess[1][0] = j.hess[0][1];
        j.hess[2][0] = j.hess[0][2];
        j.hess[2][1] = j.hess[1][2];
        return j;
    }

private:
    struct Term {
        Exponent e;
        S coef;
    };
    int m_;
    std::vector<Term> terms_;
};

/// A x^{m-1}, i.e. the gradient of f divided by m.
template <typename S = double>
Vec3T<S> apply_power(const CirculantTensor& t, const Vec3T<S>& x) {
    const auto jet = FormDerivatives<S>(t).jet(x, false);
    const S m = static_cast<S>(t.m());
    return {jet.grad[0] / m, jet.grad[1] / m, jet.grad[2] / m};
}

}  // namespace sscirc
