/* The two counter-examples that motivate the affine verification design,
   reproduced at toy scale.

   CE1: against the naive dual-plain scheme (A1 = a + k1 phi, A2 = a + k2 phi)
   the worker learns A1 - A2 = (k1 - k2) phi(N); factoring that shortlists N.
   CE2: against the naive additive-offset scheme (A2 = a + t + k2 phi) any
   equal shift of both exponents passes the check while corrupting the result.

   Toy bit sizes stay small enough (<= 40) for trial-division factoring; this
   is a demonstration, not a general factoring tool. */

#pragma once

#include "expsos/blind.hpp"

#include <algorithm>
#include <vector>

namespace expsos::attacks {

using arith::ArithContext;
using blind::OutsourceKey;

enum class NaiveVariant { dual_plain, additive_offset };

struct NaiveTranscript {
    Int u_blind; // U as the worker sees it
    Int a1, a2;
    Int l;
};

// A1 = a + k1 phi, A2 = a + k2 phi with k1 != k2.
inline NaiveTranscript dual_plain_transcript(const OutsourceKey& key, const Int& u, const Int& a,
                                             ArithContext& ctx) {
    Int k1 = ctx.rng.range(1, key.N());
    Int k2 = ctx.rng.range(1, key.N());
    while (k2 == k1) k2 = ctx.rng.range(1, key.N());
    Int big_u = blind::conceal_base(key, u, ctx);
    return NaiveTranscript{big_u, a + k1 * key.phi, a + k2 * key.phi, key.L};
}

// A1 = a + k1 phi, A2 = a + t + k2 phi.
inline NaiveTranscript additive_offset_transcript(const OutsourceKey& key, const Int& u,
                                                  const Int& a, const Int& t,
                                                  ArithContext& ctx) {
    Int k1 = ctx.rng.range(1, key.N());
    Int k2 = ctx.rng.range(1, key.N());
    Int big_u = blind::conceal_base(key, u, ctx);
    return NaiveTranscript{big_u, a + k1 * key.phi, a + t + k2 * key.phi, key.L};
}

// The naive additive-offset acceptance test: R1 * u^t = R2 (mod N).
inline bool naive_offset_check(const OutsourceKey& key, const Int& u, const Int& t,
                               const Int& r1, const Int& r2, ArithContext& ctx) {
    const Int& n = key.N();
    Int lhs = arith::mod_mul(ctx, blind::recover(key, r1), arith::mod_exp(ctx, u % n, t, n), n);
    return lhs == blind::recover(key, r2);
}

namespace detail {

// Complete trial-division factorization; fine for the toy sizes above.
inline std::vector<std::pair<Int, unsigned>> trial_factor(Int d) {
    std::vector<std::pair<Int, unsigned>> out;
    auto strip = [&](const Int& p) {
        unsigned e = 0;
        while (d % p == 0) {
            d /= p;
            ++e;
        }
        if (e) out.emplace_back(p, e);
    };
    strip(2);
    for (Int p = 3; p * p <= d; p += 2) strip(p);
    if (d > 1) out.emplace_back(d, 1);
    return out;
}

inline std::vector<Int> divisors(const std::vector<std::pair<Int, unsigned>>& factors,
                                 std::size_t cap = 1u << 18) {
    std::vector<Int> divs{1};
    for (const auto& [p, e] : factors) {
        std::size_t n = divs.size();
        Int pk = 1;
        for (unsigned i = 1; i <= e; ++i) {
            pk *= p;
            for (std::size_t j = 0; j < n; ++j) {
                divs.push_back(divs[j] * pk);
                if (divs.size() > cap) throw SessionError("divisor enumeration too large");
            }
        }
    }
    return divs;
}

// Divisor products that are phi-compatible with some square-free N-hat of at
// most n_bits bits: single primes q = d + 1, and pairs q1 q2 with
// (q1-1)(q2-1) dividing D.
inline std::vector<Int> phi_candidates(const Int& d_value, std::size_t n_bits) {
    auto factors = trial_factor(d_value);
    std::vector<Int> divs = divisors(factors);
    std::sort(divs.begin(), divs.end());

    std::vector<Int> primes; // q with q - 1 | D
    for (const Int& d : divs)
        if (arith::is_probable_prime(d + 1)) primes.push_back(d + 1);

    std::vector<Int> cands;
    for (const Int& q : primes)
        if (bit_length(q) <= n_bits) cands.push_back(q);
    for (std::size_t i = 0; i < primes.size(); ++i) {
        for (std::size_t j = i + 1; j < primes.size(); ++j) {
            Int prod = primes[i] * primes[j];
            if (bit_length(prod) > n_bits) continue;
            if (d_value % ((primes[i] - 1) * (primes[j] - 1)) == 0) cands.push_back(prod);
        }
    }
    std::sort(cands.begin(), cands.end());
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
    return cands;
}

} // namespace detail

// Counter-example 1: shortlist candidate moduli from a dual-plain pair.
inline std::vector<Int> ce1_recover_modulus(const Int& a1, const Int& a2, std::size_t n_bits) {
    if (n_bits > 40) throw DomainError("ce1_recover_modulus: toy sizes only (n_bits <= 40)");
    Int d = a1 - a2;
    if (d < 0) d = -d;
    if (d == 0) throw DomainError("ce1_recover_modulus: A1 = A2, nothing to factor");
    return detail::phi_candidates(d, n_bits);
}

// The same extraction against an ExpSOS MS transcript requires guessing the
// tags: D = g1*A1 - A2 + g2 is a phi(N) multiple only when (g1, g2) hits
// (t1, t2). Empty result when the guess yields nothing to factor.
inline std::vector<Int> ce1_against_ms(const Int& a1, const Int& a2, const Int& guess_t1,
                                       const Int& guess_t2, std::size_t n_bits) {
    Int d = guess_t1 * a1 - a2 + guess_t2;
    if (d < 0) d = -d;
    if (d == 0) return {};
    return detail::phi_candidates(d, n_bits);
}

// Counter-example 2: the equal-offset forgery. Any pair with
// A2' - A1' = A2 - A1 passes the naive offset check.
inline std::pair<Int, Int> ce2_forge(const Int& /*u_blind*/, const Int& a1, const Int& a2,
                                     const Int& /*l*/, const Int& delta) {
    return {a1 + delta, a2 + delta};
}

} // namespace expsos::attacks
