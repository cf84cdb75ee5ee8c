/* Arbitrary-precision modular arithmetic with an instrumented multiplication
   counter. Every full-size multiplication performed on behalf of the client
   routes through an ArithContext so the cost model (number of modular
   multiplications, pi) is measurable. Comparisons, additions, reductions and
   gcd/inverse do not count; neither do the plumbing equality checks in the
   curve layer.

   An ArithContext is single-owner mutable state: one context per session,
   never shared between concurrent sessions. Functions that take no context
   are pure. */

#pragma once

#include "expsos/common.hpp"
#include "expsos/rng.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

namespace expsos::arith {

struct ArithContext {
    std::uint64_t mult_count = 0;
    Rng rng;

    explicit ArithContext(std::uint64_t seed) : rng(seed) {}
};

// (a*b) mod m, one counted multiplication.
inline Int mod_mul(ArithContext& ctx, const Int& a, const Int& b, const Int& m) {
    if (m < 2) throw DomainError("mod_mul: modulus < 2");
    ++ctx.mult_count;
    Int r = (a * b) % m;
    if (r < 0) r += m;
    return r;
}

// Plain counted product. Blinding transforms multiply ring-size operands
// without a reduction; the cost model charges these like modular
// multiplications.
inline Int mul(ArithContext& ctx, const Int& a, const Int& b) {
    ++ctx.mult_count;
    return a * b;
}

// t * a for a small scalar t (a verification tag), realized as shift-and-add.
// The cost model counts full-size multiplications only; this is the same
// convention under which the curve formulas reach their stated counts.
inline Int small_scalar_mul(const Int& t, const Int& a) {
    if (t < 0) throw DomainError("small_scalar_mul: negative scalar");
    if (t == 0) return 0;
    Int acc = 0;
    for (std::size_t i = bit_length(t); i-- > 0;) {
        acc += acc;
        if (boost::multiprecision::bit_test(t, static_cast<unsigned>(i))) acc += a;
    }
    return acc;
}

// u^a mod m by left-to-right square-and-multiply. Counted multiplications:
// bitlen(a)-1 squarings plus popcount(a)-1 products, i.e. within
// [bitlen(a)-1, 2*bitlen(a)] for a >= 2 and (3/2)*bitlen(a) on average.
inline Int mod_exp(ArithContext& ctx, const Int& u, const Int& a, const Int& m) {
    if (m < 2) throw DomainError("mod_exp: modulus < 2");
    if (a < 0) throw DomainError("mod_exp: negative exponent");
    if (a == 0) return Int(1) % m;
    Int x = u % m;
    if (x < 0) x += m;
    std::size_t top = bit_length(a);
    Int r = x;
    for (std::size_t i = top - 1; i-- > 0;) {
        r = mod_mul(ctx, r, r, m);
        if (boost::multiprecision::bit_test(a, static_cast<unsigned>(i)))
            r = mod_mul(ctx, r, x, m);
    }
    return r;
}

// a^{-1} mod m via extended Euclid; throws NoInverseError when gcd != 1.
inline Int mod_inv(const Int& a, const Int& m) {
    if (m < 2) throw DomainError("mod_inv: modulus < 2");
    Int r0 = m, r1 = a % m;
    if (r1 < 0) r1 += m;
    Int s0 = 0, s1 = 1;
    while (r1 != 0) {
        Int q = r0 / r1;
        Int r2 = r0 - q * r1;
        r0 = r1;
        r1 = r2;
        Int s2 = s0 - q * s1;
        s0 = s1;
        s1 = s2;
    }
    if (r0 != 1) throw NoInverseError("mod_inv: not invertible");
    Int inv = s0 % m;
    if (inv < 0) inv += m;
    return inv;
}

namespace detail {

inline const std::vector<std::uint32_t>& small_primes() {
    static const std::vector<std::uint32_t> table = [] {
        std::vector<std::uint32_t> ps;
        std::vector<bool> sieve(2048, true);
        for (std::uint32_t i = 2; i < sieve.size(); ++i) {
            if (!sieve[i]) continue;
            ps.push_back(i);
            for (std::uint32_t j = 2 * i; j < sieve.size(); j += i) sieve[j] = false;
        }
        return ps;
    }();
    return table;
}

inline Int pow_mod_uncounted(Int base, Int e, const Int& m) {
    Int r = 1;
    base %= m;
    if (base < 0) base += m;
    while (e > 0) {
        if ((e & 1) != 0) r = r * base % m;
        base = base * base % m;
        e >>= 1;
    }
    return r;
}

inline bool miller_rabin_witness(const Int& n, const Int& a, const Int& d, std::size_t s) {
    Int x = pow_mod_uncounted(a, d, n);
    if (x == 1 || x == n - 1) return false;
    for (std::size_t i = 1; i < s; ++i) {
        x = x * x % n;
        if (x == n - 1) return false;
    }
    return true;
}

} // namespace detail

// Probabilistic primality: small-prime trial division, then `rounds` of
// Miller-Rabin with bases drawn from rng.
inline bool is_probable_prime(const Int& n, std::size_t rounds, Rng& rng) {
    if (n < 2) return false;
    for (std::uint32_t p : detail::small_primes()) {
        if (n == p) return true;
        if (n % p == 0) return false;
    }
    Int d = n - 1;
    std::size_t s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (std::size_t i = 0; i < rounds; ++i) {
        Int a = rng.range(2, n - 1);
        if (detail::miller_rabin_witness(n, a, d, s)) return false;
    }
    return true;
}

// Deterministic-base variant for validating untrusted inputs (key files,
// attack candidates) without threading a context around.
inline bool is_probable_prime(const Int& n, std::size_t rounds = 24) {
    Rng rng(0x5deece66dULL);
    return is_probable_prime(n, rounds, rng);
}

inline constexpr std::size_t kPrimalityRounds = 64;

// Probable prime of exactly `bits` bits (top bit set), deterministic given
// the context's seed.
inline Int gen_prime(std::size_t bits, ArithContext& ctx) {
    if (bits < 2) throw DomainError("gen_prime: bits < 2");
    for (;;) {
        Int cand = ctx.rng.bits(bits);
        cand |= Int(1) << (bits - 1);
        if (bits > 2) cand |= 1;
        if (is_probable_prime(cand, kPrimalityRounds, ctx.rng)) return cand;
    }
}

// A square-free modulus with a known factorization. The totient is computed
// once on construction and cached.
struct FactoredModulus {
    Int value;
    std::vector<Int> prime_factors;
    Int totient;

    static FactoredModulus from_factors(std::vector<Int> factors) {
        if (factors.empty()) throw InvalidModulusError("FactoredModulus: no factors");
        std::sort(factors.begin(), factors.end());
        Int v = 1, phi = 1;
        for (std::size_t i = 0; i < factors.size(); ++i) {
            const Int& p = factors[i];
            if (p < 2) throw InvalidModulusError("FactoredModulus: factor < 2");
            if (i > 0 && factors[i] == factors[i - 1])
                throw InvalidModulusError("FactoredModulus: repeated factor");
            if (!is_probable_prime(p))
                throw InvalidModulusError("FactoredModulus: non-prime factor");
            v *= p;
            phi *= p - 1;
        }
        return FactoredModulus{v, std::move(factors), phi};
    }

    static FactoredModulus from_prime(const Int& p) { return from_factors({p}); }
};

inline Int totient(const FactoredModulus& f) { return f.totient; }

} // namespace expsos::arith
