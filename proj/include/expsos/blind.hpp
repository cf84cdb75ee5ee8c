/* The ring homomorphism f(x) = (x + kN) mod L and the exponent-blinding
   transforms. Keys pair a secret factored modulus N with a secret cofactor
   prime p; only L = pN ever leaves the client.

   Each transform has a _with variant taking the blinding randomness
   explicitly. The random-drawing entry points delegate to it; tests and the
   golden vectors force exact values through it. */

#pragma once

#include "expsos/arith.hpp"

#include <nlohmann/json.hpp>

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <fstream>
#include <string>
#include <utility>

namespace expsos::blind {

using arith::ArithContext;
using arith::FactoredModulus;

// Immutable after keygen; safe to share across sessions.
struct OutsourceKey {
    FactoredModulus modulus; // secret N with factorization
    Int p;                   // secret cofactor prime
    Int L;                   // public ring modulus, = p * N
    Int phi;                 // cached phi(N)

    const Int& N() const { return modulus.value; }
};

struct BlindedExponent {
    Int value;
    Int k; // blinding multiple, retained client-side for audit
};

// Ephemeral verification secrets of an MS session.
struct VerificationTag {
    Int t1;
    Int t2;
    Int bound;    // security parameter B: 1 <= t1, t2 <= B
    bool swapped; // whether the two queries were sent in swapped order
};

inline VerificationTag make_tag(const Int& bound, ArithContext& ctx) {
    if (bound < 2) throw DomainError("make_tag: bound < 2");
    return VerificationTag{ctx.rng.range(1, bound + 1), ctx.rng.range(1, bound + 1),
                           bound, ctx.rng.coin()};
}

inline OutsourceKey make_key(FactoredModulus n, const Int& p, ArithContext& ctx) {
    Int l = arith::mul(ctx, p, n.value);
    Int phi = n.totient;
    return OutsourceKey{std::move(n), p, l, phi};
}

// Fresh cofactor prime of p_bits bits with p not dividing N. The cofactor is
// at least as long as N so factoring L stays as hard as factoring a generic
// semiprime of that size.
inline OutsourceKey keygen(FactoredModulus n, std::size_t p_bits, ArithContext& ctx) {
    if (p_bits < 2) throw DomainError("keygen: p_bits < 2");
    if (p_bits < bit_length(n.value)) throw DomainError("keygen: p shorter than N");
    for (int attempt = 0; attempt < 16; ++attempt) {
        Int p = arith::gen_prime(p_bits, ctx);
        if (n.value % p != 0) return make_key(std::move(n), p, ctx);
    }
    throw SessionError("keygen: cofactor kept dividing N");
}

inline Int conceal_base_with(const OutsourceKey& key, const Int& u, const Int& r,
                             ArithContext& ctx) {
    if (u < 0 || u >= key.N()) throw DomainError("conceal_base: u out of [0, N)");
    if (r < 0 || r >= key.N()) throw DomainError("conceal_base: r out of [0, N)");
    return (u + arith::mul(ctx, r, key.N())) % key.L;
}

inline Int conceal_base(const OutsourceKey& key, const Int& u, ArithContext& ctx) {
    return conceal_base_with(key, u, ctx.rng.below(key.N()), ctx);
}

// A = a + k*phi(N). Requires a >= 1: the exponent identity u^{a+k*phi} = u^a
// needs a positive exponent when gcd(u, N) != 1.
inline BlindedExponent blind_exponent_with(const OutsourceKey& key, const Int& a,
                                           const Int& k, ArithContext& ctx) {
    if (a < 1) throw DomainError("blind_exponent: a < 1");
    if (k < 0) throw DomainError("blind_exponent: k < 0");
    return BlindedExponent{a + arith::mul(ctx, k, key.phi), k};
}

inline BlindedExponent blind_exponent(const OutsourceKey& key, const Int& a,
                                      ArithContext& ctx) {
    return blind_exponent_with(key, a, ctx.rng.range(1, key.N()), ctx);
}

// A = t1*a + t2 + k*phi(N), the affine partner used for verification. The
// tag product is a small-scalar shift-and-add, so the transform counts one
// multiplication, like the plain form.
inline BlindedExponent blind_exponent_affine_with(const OutsourceKey& key, const Int& a,
                                                  const VerificationTag& tag, const Int& k,
                                                  ArithContext& ctx) {
    if (a < 1) throw DomainError("blind_exponent_affine: a < 1");
    if (k < 0) throw DomainError("blind_exponent_affine: k < 0");
    Int value = arith::small_scalar_mul(tag.t1, a) + tag.t2 + arith::mul(ctx, k, key.phi);
    return BlindedExponent{value, k};
}

inline BlindedExponent blind_exponent_affine(const OutsourceKey& key, const Int& a,
                                             const VerificationTag& tag, ArithContext& ctx) {
    return blind_exponent_affine_with(key, a, tag, ctx.rng.range(1, key.N()), ctx);
}

inline Int recover(const OutsourceKey& key, const Int& r) {
    Int v = r % key.N();
    if (v < 0) v += key.N();
    return v;
}

// Scalar concealment for the elliptic-curve side: s' = s + r*m hides s behind
// the torsion order m.
inline Int conceal_scalar_with(const Int& m, const Int& s, const Int& r) {
    if (m < 2) throw DomainError("conceal_scalar: m < 2");
    if (s < 0 || s >= m) throw DomainError("conceal_scalar: s out of [0, m)");
    if (r < 0) throw DomainError("conceal_scalar: r < 0");
    return s + r * m;
}

inline Int conceal_scalar(const Int& m, const Int& s, ArithContext& ctx) {
    return conceal_scalar_with(m, s, ctx.rng.range(1, m));
}

// Key file: {"p": hex, "n_factors": [hex...], "l": hex}. Only L is public.
inline void save_key(const std::string& path, const OutsourceKey& key) {
    nlohmann::json j;
    j["p"] = to_hex(key.p);
    j["l"] = to_hex(key.L);
    auto factors = nlohmann::json::array();
    for (const Int& f : key.modulus.prime_factors) factors.push_back(to_hex(f));
    j["n_factors"] = factors;
    std::string body = j.dump();
    body.push_back('\n');
    int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
    if (fd < 0) throw Error("save_key: cannot open " + path);
    ssize_t n = ::write(fd, body.data(), body.size());
    ::close(fd);
    if (n != static_cast<ssize_t>(body.size())) throw Error("save_key: short write");
}

inline OutsourceKey load_key(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("load_key: cannot open " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    std::vector<Int> factors;
    for (const auto& f : j.at("n_factors")) factors.push_back(from_hex(f.get<std::string>()));
    FactoredModulus n = FactoredModulus::from_factors(std::move(factors));
    Int p = from_hex(j.at("p").get<std::string>());
    Int l = from_hex(j.at("l").get<std::string>());
    if (l != p * n.value) throw InvalidModulusError("load_key: L != p*N");
    Int phi = n.totient;
    return OutsourceKey{std::move(n), p, l, phi};
}

} // namespace expsos::blind
