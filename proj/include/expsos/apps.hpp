/* End-to-end applications on top of ExpSOS: reference DSA, outsourced DSA
   signing and verification with joint affine checks over randomly ordered
   query batches, and outsourced IBE encryption treating the pairing value as
   an opaque public input.

   Hash convention across the repo: SHA-256, digest-then-reduce for
   hash-to-integer. The IBE keystream expands H(g)^r by counter-mode
   digesting: block_i = SHA256(bytes_be(v) || be32(i)).

   Outsourced verification queries U1, U3 on base G and U2, U4 on base R1;
   swapping the bases of the two middle queries breaks both joint checks
   against honest workers, and that variant is kept behind a test-only flag
   for the differential regression test. */

#pragma once

#include "expsos/blind.hpp"
#include "expsos/cloud.hpp"
#include "expsos/curve.hpp"
#include "expsos/ecsm_sos.hpp"
#include "expsos/modexp_sos.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace expsos::apps {

using arith::ArithContext;
using blind::VerificationTag;
using cloud::CloudWorker;
using cloud::ModExpQuery;
using curve::CurveParams;
using curve::ProjectivePoint;

// ---- digests ----

inline std::array<std::uint8_t, 32> sha256(const std::uint8_t* data, std::size_t len) {
    std::array<std::uint8_t, 32> out{};
    unsigned out_len = 0;
    if (EVP_Digest(data, len, out.data(), &out_len, EVP_sha256(), nullptr) != 1 || out_len != 32)
        throw Error("sha256 failed");
    return out;
}

inline std::array<std::uint8_t, 32> sha256(const std::vector<std::uint8_t>& data) {
    return sha256(data.data(), data.size());
}

inline std::vector<std::uint8_t> int_to_bytes(const Int& v) {
    if (v == 0) return {0};
    std::vector<std::uint8_t> out;
    Int x = v;
    while (x != 0) {
        out.push_back(static_cast<std::uint8_t>(x & 0xff));
        x >>= 8;
    }
    return {out.rbegin(), out.rend()};
}

inline Int bytes_to_int(const std::uint8_t* data, std::size_t len) {
    Int r = 0;
    for (std::size_t i = 0; i < len; ++i) {
        r <<= 8;
        r |= data[i];
    }
    return r;
}

// Digest-then-reduce hash-to-integer, fixed across the repo.
inline Int hash_to_int_mod(const std::vector<std::uint8_t>& data, const Int& m) {
    auto d = sha256(data);
    return bytes_to_int(d.data(), d.size()) % m;
}

inline Int hash_to_int_mod(const std::string& s, const Int& m) {
    return hash_to_int_mod(std::vector<std::uint8_t>(s.begin(), s.end()), m);
}

// Counter-mode digest expansion of an integer into `len` keystream bytes.
inline std::vector<std::uint8_t> keystream(const Int& v, std::size_t len) {
    std::vector<std::uint8_t> seed = int_to_bytes(v);
    std::vector<std::uint8_t> out;
    out.reserve(len + 32);
    std::uint32_t counter = 0;
    while (out.size() < len) {
        std::vector<std::uint8_t> block = seed;
        block.push_back(static_cast<std::uint8_t>(counter >> 24));
        block.push_back(static_cast<std::uint8_t>(counter >> 16));
        block.push_back(static_cast<std::uint8_t>(counter >> 8));
        block.push_back(static_cast<std::uint8_t>(counter));
        auto d = sha256(block);
        out.insert(out.end(), d.begin(), d.end());
        ++counter;
    }
    out.resize(len);
    return out;
}

inline std::vector<std::uint8_t> xor_bytes(const std::vector<std::uint8_t>& a,
                                           const std::vector<std::uint8_t>& b) {
    if (a.size() != b.size()) throw DomainError("xor_bytes: length mismatch");
    std::vector<std::uint8_t> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
    return out;
}

// Fisher-Yates with the session rng.
inline std::vector<std::size_t> random_permutation(std::size_t n, ArithContext& ctx) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        auto j = static_cast<std::size_t>(ctx.rng.below(Int(i)).convert_to<std::uint64_t>());
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

// ---- reference DSA ----

struct DsaParams {
    Int p; // prime
    Int q; // prime divisor of p - 1
    Int g; // order-q element
};

struct DsaSignature {
    Int r, s;
};

inline DsaParams dsa_generate_params(std::size_t p_bits, std::size_t q_bits, ArithContext& ctx) {
    if (q_bits + 2 > p_bits) throw DomainError("dsa_generate_params: q too close to p");
    Int q = arith::gen_prime(q_bits, ctx);
    for (;;) {
        Int c = ctx.rng.bits(p_bits - q_bits);
        c |= Int(1) << (p_bits - q_bits - 1);
        Int p = q * c + 1;
        if (bit_length(p) != p_bits) continue;
        if (!arith::is_probable_prime(p, arith::kPrimalityRounds, ctx.rng)) continue;
        for (Int h = 2; h < p - 1; ++h) {
            ArithContext scratch(0);
            Int g = arith::mod_exp(scratch, h, (p - 1) / q, p);
            if (g > 1) return DsaParams{p, q, g};
        }
    }
}

inline Int dsa_hash(const DsaParams& params, const std::string& message) {
    return hash_to_int_mod(message, params.q);
}

struct DsaKeyPair {
    Int x; // private
    Int y; // g^x mod p
};

inline DsaKeyPair dsa_keygen(const DsaParams& params, ArithContext& ctx) {
    Int x = ctx.rng.range(1, params.q);
    return DsaKeyPair{x, arith::mod_exp(ctx, params.g, x, params.p)};
}

inline DsaSignature dsa_local_sign(const DsaParams& params, const Int& x,
                                   const std::string& message, ArithContext& ctx) {
    Int h = dsa_hash(params, message);
    for (;;) {
        Int k = ctx.rng.range(1, params.q);
        Int r = arith::mod_exp(ctx, params.g, k, params.p) % params.q;
        if (r == 0) continue;
        Int s = arith::mod_mul(ctx, arith::mod_inv(k, params.q),
                               h + arith::mod_mul(ctx, x, r, params.q), params.q);
        if (s == 0) continue;
        return DsaSignature{r, s};
    }
}

inline bool dsa_local_verify(const DsaParams& params, const Int& y, const std::string& message,
                             const DsaSignature& sig, ArithContext& ctx) {
    if (sig.r <= 0 || sig.r >= params.q || sig.s <= 0 || sig.s >= params.q) return false;
    Int w = arith::mod_inv(sig.s, params.q);
    Int h = dsa_hash(params, message);
    Int u1 = arith::mod_mul(ctx, h, w, params.q);
    Int u2 = arith::mod_mul(ctx, sig.r, w, params.q);
    // g, y have order q; a zero exponent can be lifted by q.
    if (u1 == 0) u1 = params.q;
    if (u2 == 0) u2 = params.q;
    Int v = arith::mod_mul(ctx, arith::mod_exp(ctx, params.g, u1, params.p),
                           arith::mod_exp(ctx, y, u2, params.p), params.p) %
            params.q;
    return v == sig.r;
}

// ---- outsourced DSA ----

// {G, R1, L}: shared within the group of users; the verifier consumes exactly
// what the signer published.
struct DsaPublicTriple {
    Int g_blind; // G = (g + r1 p) mod L
    Int r1;      // worker reply for the key exponent, = G^X mod L
    Int l;       // public ring modulus
};

struct DsaSignReport {
    std::optional<DsaSignature> signature;
    DsaPublicTriple triple;
    Int y; // recovered public key g^x mod p
    bool accepted = false;
    std::uint64_t local_mults = 0;
};

// Signing against an existing outsourcing key; key generation is a one-time
// per-signer step.
inline DsaSignReport dsa_outsourced_sign_with_key(const DsaParams& params,
                                                  const blind::OutsourceKey& key, const Int& x,
                                                  const std::string& message, const Int& bound,
                                                  CloudWorker& worker, ArithContext& ctx) {
    if (x <= 0 || x >= params.q) throw DomainError("dsa_outsourced_sign: bad private key");
    if (bound < 2) throw DomainError("dsa_outsourced_sign: bound < 2");
    if (key.N() != params.p) throw DomainError("dsa_outsourced_sign: key modulus is not p");
    Int h = dsa_hash(params, message);
    const Int& p = params.p;

    for (int attempt = 0; attempt < 16; ++attempt) {
        std::uint64_t start = ctx.mult_count;
        Int t1 = ctx.rng.range(1, bound + 1);
        Int t2 = ctx.rng.range(1, bound + 1);
        Int t3 = ctx.rng.range(1, bound + 1);
        Int k = ctx.rng.range(1, params.q);

        Int l = arith::mul(ctx, key.p, key.N());
        Int big_g = blind::conceal_base(key, params.g, ctx);
        Int ex = blind::blind_exponent(key, x, ctx).value;
        Int ek = blind::blind_exponent(key, k, ctx).value;
        Int exk = arith::small_scalar_mul(t1, x) + arith::small_scalar_mul(t2, k) + t3 +
                  arith::mul(ctx, ctx.rng.range(1, key.N()), key.phi);

        std::array<Int, 3> exps{ex, ek, exk};
        std::array<Int, 3> replies;
        auto perm = random_permutation(3, ctx);
        for (std::size_t slot = 0; slot < 3; ++slot)
            replies[perm[slot]] = worker.serve_modexp(ModExpQuery{big_g, exps[perm[slot]], l});

        Int r1 = replies[0], r2 = replies[1], r3 = replies[2];
        Int lhs = arith::mod_mul(ctx, arith::mod_exp(ctx, r1 % p, t1, p),
                                 arith::mod_exp(ctx, r2 % p, t2, p), p);
        lhs = arith::mod_mul(ctx, lhs, arith::mod_exp(ctx, params.g, t3, p), p);
        DsaSignReport report;
        report.triple = DsaPublicTriple{big_g, r1, l};
        report.local_mults = ctx.mult_count - start;
        if (lhs != r3 % p) return report; // rejected, no signature

        report.y = r1 % p;
        Int r = r2 % p % params.q;
        if (r == 0) continue; // resample k
        Int s = arith::mod_mul(ctx, arith::mod_inv(k, params.q),
                               h + arith::mod_mul(ctx, x, r, params.q), params.q);
        if (s == 0) continue;
        report.signature = DsaSignature{r, s};
        report.accepted = true;
        report.local_mults = ctx.mult_count - start;
        return report;
    }
    throw SessionError("dsa_outsourced_sign: r/s resampling exhausted");
}

inline DsaSignReport dsa_outsourced_sign(const DsaParams& params, const Int& x,
                                         const std::string& message, const Int& bound,
                                         CloudWorker& worker, ArithContext& ctx) {
    blind::OutsourceKey key =
        blind::keygen(arith::FactoredModulus::from_prime(params.p), bit_length(params.p), ctx);
    return dsa_outsourced_sign_with_key(params, key, x, message, bound, worker, ctx);
}

enum class DsaVerdict { valid, invalid, rejected };

inline DsaVerdict dsa_outsourced_verify(const DsaParams& params, const DsaPublicTriple& triple,
                                        const DsaSignature& sig, const std::string& message,
                                        const Int& bound, CloudWorker& worker, ArithContext& ctx,
                                        bool swap_middle_bases = false) {
    if (bound < 2) throw DomainError("dsa_outsourced_verify: bound < 2");
    if (sig.r <= 0 || sig.r >= params.q || sig.s <= 0 || sig.s >= params.q)
        return DsaVerdict::invalid;
    const Int& p = params.p;
    Int phi = p - 1; // p is public in DSA; the verifier knows phi(p)
    Int y = triple.r1 % p;

    Int w = arith::mod_inv(sig.s, params.q);
    Int h = dsa_hash(params, message);
    Int u1 = arith::mod_mul(ctx, h, w, params.q);
    Int u2 = arith::mod_mul(ctx, sig.r, w, params.q);
    if (u1 == 0) u1 = params.q; // order-q bases: exponent q acts as zero
    if (u2 == 0) u2 = params.q;

    Int t4 = ctx.rng.range(1, bound + 1);
    Int t5 = ctx.rng.range(1, bound + 1);
    Int t6 = ctx.rng.range(1, bound + 1);
    Int t7 = ctx.rng.range(1, bound + 1);
    auto blind_plain = [&](const Int& e) { return e + arith::mul(ctx, ctx.rng.range(1, p), phi); };
    auto blind_affine = [&](const Int& ta, const Int& e, const Int& tb) {
        return arith::small_scalar_mul(ta, e) + tb + arith::mul(ctx, ctx.rng.range(1, p), phi);
    };
    Int e1 = blind_plain(u1);           // U1, base G
    Int e2 = blind_plain(u2);           // U2, base R1 (corrected; printed text says G)
    Int e3 = blind_affine(t4, u1, t5);  // U3, base G (printed text says R1)
    Int e4 = blind_affine(t6, u2, t7);  // U4, base R1

    const Int& base_g = triple.g_blind;
    const Int& base_y = triple.r1;
    std::array<const Int*, 4> bases{&base_g, swap_middle_bases ? &base_g : &base_y,
                                    swap_middle_bases ? &base_y : &base_g, &base_y};
    std::array<Int, 4> exps{e1, e2, e3, e4};
    std::array<Int, 4> replies;
    auto perm = random_permutation(4, ctx);
    for (std::size_t slot = 0; slot < 4; ++slot)
        replies[perm[slot]] =
            worker.serve_modexp(ModExpQuery{*bases[perm[slot]], exps[perm[slot]], triple.l});

    Int r4 = replies[0], r5 = replies[1], r6 = replies[2], r7 = replies[3];
    Int check1 = arith::mod_mul(ctx, arith::mod_exp(ctx, r4 % p, t4, p),
                                arith::mod_exp(ctx, params.g, t5, p), p);
    Int check2 = arith::mod_mul(ctx, arith::mod_exp(ctx, r5 % p, t6, p),
                                arith::mod_exp(ctx, y, t7, p), p);
    if (check1 != r6 % p || check2 != r7 % p) return DsaVerdict::rejected;

    Int g_u1 = r4 % p;
    Int y_u2 = r5 % p;
    Int v = arith::mod_mul(ctx, g_u1, y_u2, p) % params.q;
    return v == sig.r ? DsaVerdict::valid : DsaVerdict::invalid;
}

// ---- outsourced IBE encryption ----

struct IbeCiphertext {
    ProjectivePoint c1;             // [r]P
    std::vector<std::uint8_t> c2;   // M xor keystream(H(g)^r mod p)
};

struct IbeReport {
    std::optional<IbeCiphertext> ciphertext;
    bool accepted = false;
};

// One session scalar r serves both sides: blinded by multiples of the
// torsion order m for the curve queries and by multiples of phi(p) for the
// exponentiation queries, sharing one ring L = p*q and one tag pair.
inline IbeReport ibe_outsourced_encrypt_with(const CurveParams& E, const ProjectivePoint& P,
                                             const Int& g_pair, const std::vector<std::uint8_t>& message,
                                             const VerificationTag& tag, const Int& r,
                                             CloudWorker& worker, ArithContext& ctx) {
    if (message.empty()) throw DomainError("ibe_encrypt: empty message");
    if (r < 1 || r >= E.m) throw DomainError("ibe_encrypt: r out of [1, m)");
    ecsm::EcOutsourceKey ring = ecsm::make_ec_key(E.p, bit_length(E.p), ctx);
    const Int& p = E.p;
    Int phi = p - 1;
    Int hg = hash_to_int_mod(int_to_bytes(g_pair), p);

    for (int attempt = 0; attempt <= ecsm::kMaxRetries; ++attempt) {
        Int s1 = ecsm::detail::screened_scalar(r, E.m, ctx);
        Int s2 = ecsm::detail::screened_scalar(tag.t1 * r + tag.t2, E.m, ctx);
        ProjectivePoint pp = ecsm::conceal_point(ring, P, ctx);
        cloud::TransformedCurve ep = ecsm::conceal_curve(ring, E, ctx);
        Int a1 = r + ctx.rng.range(1, p) * phi;
        Int a2 = tag.t1 * r + tag.t2 + ctx.rng.range(1, p) * phi;
        Int u = (hg + ctx.rng.below(p) * p) % ring.N;

        ProjectivePoint q1_raw, q2_raw;
        Int r1, r2;
        auto perm = random_permutation(4, ctx);
        for (std::size_t slot = 0; slot < 4; ++slot) {
            switch (perm[slot]) {
                case 0: q1_raw = worker.serve_scalar_mul(ep, s1, pp); break;
                case 1: q2_raw = worker.serve_scalar_mul(ep, s2, pp); break;
                case 2: r1 = worker.serve_modexp(ModExpQuery{u, a1, ring.N}); break;
                default: r2 = worker.serve_modexp(ModExpQuery{u, a2, ring.N}); break;
            }
        }

        ProjectivePoint q1, q2;
        try {
            q1 = ecsm::recover_point(ring, E, q1_raw);
            q2 = ecsm::recover_point(ring, E, q2_raw);
        } catch (const IntegrityError&) {
            continue;
        }

        // (R1 mod p)^t1 * H(g)^t2 = R2 (mod p) and Q2 = [t1]Q1 + [t2]P
        Int lhs = arith::mod_mul(ctx, arith::mod_exp(ctx, r1 % p, tag.t1, p),
                                 arith::mod_exp(ctx, hg, tag.t2, p), p);
        bool exp_ok = lhs == r2 % p;
        ProjectivePoint expect = curve::double_scalar_mul(ctx, E, tag.t1, q1, tag.t2, P);
        bool ec_ok = curve::proj_eq(E, q2, expect);
        IbeReport report;
        if (exp_ok && ec_ok) {
            Int vkey = r1 % p;
            report.ciphertext = IbeCiphertext{q1, xor_bytes(message, keystream(vkey, message.size()))};
            report.accepted = true;
        }
        return report;
    }
    return IbeReport{}; // integrity never passed: rejected
}

inline IbeReport ibe_outsourced_encrypt(const CurveParams& E, const ProjectivePoint& P,
                                        const Int& g_pair, const std::vector<std::uint8_t>& message,
                                        const Int& bound, CloudWorker& worker, ArithContext& ctx) {
    if (bound < 2) throw DomainError("ibe_encrypt: bound < 2");
    VerificationTag tag = blind::make_tag(bound, ctx);
    Int r = ctx.rng.range(1, E.m);
    return ibe_outsourced_encrypt_with(E, P, g_pair, message, tag, r, worker, ctx);
}

} // namespace expsos::apps
