#pragma once

#include "sscirc/errors.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sscirc {

/// Exact rational with 64-bit numerator/denominator, always reduced and with
/// a positive denominator. Intermediate products use 128-bit integers; a
/// result that does not fit back into 64 bits throws std::overflow_error.
class Rational {
public:
    constexpr Rational() = default;
    constexpr Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT(implicit)
    Rational(std::int64_t n, std::int64_t d) { assign(n, d); }

    [[nodiscard]] constexpr std::int64_t num() const { return num_; }
    [[nodiscard]] constexpr std::int64_t den() const { return den_; }

    [[nodiscard]] double to_double() const {
        return static_cast<double>(static_cast<long double>(num_) /
                                   static_cast<long double>(den_));
    }
    [[nodiscard]] long double to_long_double() const {
        return static_cast<long double>(num_) / static_cast<long double>(den_);
    }

    [[nodiscard]] int sign() const { return (num_ > 0) - (num_ < 0); }
    [[nodiscard]] Rational abs() const { return num_ < 0 ? Rational(-num_, den_) : *this; }

    /// "p/q", an integer, or a plain decimal ("0.1", "-3.25", "1e-3").
    /// Decimals are converted exactly: 0.1 becomes 1/10.
    static Rational parse(std::string_view text);

    /// Exact conversion of a finite double (every double is dyadic).
    static Rational from_double(double x);

    [[nodiscard]] std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return make(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                    static_cast<__int128>(a.den_) * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return make(static_cast<__int128>(a.num_) * b.den_ - static_cast<__int128>(b.num_) * a.den_,
                    static_cast<__int128>(a.den_) * b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return make(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw std::domain_error("rational division by zero");
        return make(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
    }
    Rational operator-() const { return Rational(-num_, den_); }

    friend bool operator==(const Rational& a, const Rational& b) = default;
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        const __int128 l = static_cast<__int128>(a.num_) * b.den_;
        const __int128 r = static_cast<__int128>(b.num_) * a.den_;
        return l < r ? std::strong_ordering::less
                     : (l > r ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

private:
    static __int128 gcd128(__int128 a, __int128 b) {
        if (a < 0) a = -a;
        if (b < 0) b = -b;
        while (b != 0) {
            const __int128 t = a % b;
            a = b;
            b = t;
        }
        return a;
    }

    static Rational make(__int128 n, __int128 d) {
        if (d == 0) throw std::domain_error("rational with zero denominator");
        if (d < 0) {
            n = -n;
            d = -d;
        }
        const __int128 g = gcd128(n, d);
        if (g > 1) {
            n /= g;
            d /= g;
        }
        constexpr __int128 lim = std::numeric_limits<std::int64_t>::max();
        if (n > lim || n < -lim || d > lim) throw std::overflow_error("rational overflow");
        Rational r;
        r.num_ = static_cast<std::int64_t>(n);
        r.den_ = static_cast<std::int64_t>(d);
        return r;
    }

    void assign(std::int64_t n, std::int64_t d) { *this = make(n, d); }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

inline Rational Rational::from_double(double x) {
    if (!std::isfinite(x)) throw InvalidArgument("non-finite value has no rational form");
    if (x == 0.0) return Rational(0);
    int exp = 0;
    const double mant = std::frexp(x, &exp);  // x = mant * 2^exp, 0.5 <= |mant| < 1
    auto n = static_cast<__int128>(std::ldexp(mant, 53));
    int e = exp - 53;
    while (e < 0 && (n % 2) == 0) {
        n /= 2;
        ++e;
    }
    if (e >= 0) {
        if (e > 62) throw std::overflow_error("double too large for rational");
        return make(n * (static_cast<__int128>(1) << e), 1);
    }
    if (-e > 62) throw std::overflow_error("double too small for rational");
    return make(n, static_cast<__int128>(1) << (-e));
}

inline Rational Rational::parse(std::string_view text) {
    auto trim = [](std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    };
    text = trim(text);
    if (text.empty()) throw InvalidArgument("empty rational");

    auto parse_int = [](std::string_view s) {
        std::int64_t v = 0;
        if (!s.empty() && s.front() == '+') s.remove_prefix(1);
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size())
            throw InvalidArgument("bad integer '" + std::string(s) + "'");
        return v;
    };

    if (const auto slash = text.find('/'); slash != std::string_view::npos) {
        const std::int64_t d = parse_int(trim(text.substr(slash + 1)));
        if (d == 0) throw InvalidArgument("zero denominator in '" + std::string(text) + "'");
        return Rational(parse_int(trim(text.substr(0, slash))), d);
    }

    // Decimal: [sign] digits [. digits] [e|E [sign] digits]
    std::string_view mant = text;
    int exp10 = 0;
    if (const auto e = text.find_first_of("eE"); e != std::string_view::npos) {
        mant = text.substr(0, e);
        exp10 = static_cast<int>(parse_int(text.substr(e + 1)));
    }
    bool neg = false;
    if (!mant.empty() && (mant.front() == '-' || mant.front() == '+')) {
        neg = mant.front() == '-';
        mant.remove_prefix(1);
    }
    __int128 n = 0;
    bool seen_digit = false, seen_dot = false;
    for (char ch : mant) {
        if (ch == '.') {
            if (seen_dot) throw InvalidArgument("bad number '" + std::string(text) + "'");
            seen_dot = true;
            continue;
        }
        if (ch < '0' || ch > '9') throw InvalidArgument("bad number '" + std::string(text) + "'");
        seen_digit = true;
        n = n * 10 + (ch - '0');
        if (n > (static_cast<__int128>(1) << 100)) throw std::overflow_error("decimal too long");
        if (seen_dot) --exp10;
    }
    if (!seen_digit) throw InvalidArgument("bad number '" + std::string(text) + "'");
    if (neg) n = -n;
    __int128 d = 1;
    while (exp10 > 0) {
        n *= 10;
        --exp10;
    }
    while (exp10 < 0) {
        d *= 10;
        ++exp10;
        if (d > (static_cast<__int128>(1) << 100)) throw std::overflow_error("decimal too long");
    }
    return make(n, d);
}

}  // namespace sscirc
