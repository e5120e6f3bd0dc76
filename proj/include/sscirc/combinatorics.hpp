#pragma once

#include <cstdint>
#include <stdexcept>

namespace sscirc {

/// Largest order supported anywhere in the library. C(20,10) and 3^19 fit in
/// 64 bits, so every closed form below stays exact.
inline constexpr int kMaxOrder = 20;

constexpr std::int64_t ipow(std::int64_t base, int exp) {
    std::int64_t r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

constexpr std::int64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    std::int64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// m! / (a! b! g!) for a + b + g = m.
constexpr std::int64_t multinomial(int a, int b, int g) {
    return binomial(a + b + g, a) * binomial(b + g, b);
}

/// 2^m - 2: the u-part of the off-diagonal row sum.
constexpr std::int64_t two_index_count(int m) { return ipow(2, m) - 2; }

/// 3^(m-1) - 2^m + 1: the c-part of the off-diagonal row sum.
constexpr std::int64_t three_index_count(int m) { return ipow(3, m - 1) - ipow(2, m) + 1; }

static_assert(binomial(20, 10) == 184756);
static_assert(multinomial(2, 2, 2) == 90);
static_assert(two_index_count(6) == 62);
static_assert(three_index_count(6) == 180);

}  // namespace sscirc
