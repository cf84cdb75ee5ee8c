/* Client-side outsourcing sessions for modular exponentiation under the
   three threat models: HCS (single honest-but-curious worker), MS (single
   malicious worker, affine verification pair) and MM (two non-colluding
   workers cross-checked).

   Cost accounting: local_mults is the context delta across the session and
   charges all problem-transformation work, including the one L = pN ring
   product, which the session recomputes itself. Key generation (prime
   search, phi) stays uncounted; phi is a one-time per-key computation.
   Measured budgets: HCS and MM take exactly 3 multiplications, MS takes
   5 + the two small verification exponentiations + 1. */

#pragma once

#include "expsos/blind.hpp"
#include "expsos/cloud.hpp"

#include <optional>
#include <utility>

namespace expsos::sos {

using arith::ArithContext;
using blind::OutsourceKey;
using blind::VerificationTag;
using cloud::CloudWorker;
using cloud::ModExpQuery;

enum class Verified { accepted, rejected, not_applicable };

struct SessionReport {
    std::optional<Int> result; // withheld when rejected
    Verified verified = Verified::not_applicable;
    std::uint64_t local_mults = 0;
    int queries_sent = 0;
};

namespace detail {

inline void check_inputs(const OutsourceKey& key, const Int& u, const Int& a) {
    if (u < 0 || u >= key.N()) throw DomainError("outsource: u out of [0, N)");
    if (a < 1) throw DomainError("outsource: a < 1");
}

// The session performs the problem transformation itself, starting from the
// ring product.
inline Int session_ring(const OutsourceKey& key, ArithContext& ctx) {
    Int l = arith::mul(ctx, key.p, key.N());
    if (l != key.L) throw DomainError("outsource: key L mismatch");
    return l;
}

} // namespace detail

// Exact check of the MS algorithm: (R1 mod N)^t1 * u^t2 = R2 (mod N).
inline bool verify_ms(const OutsourceKey& key, const Int& u, const VerificationTag& tag,
                      const Int& r1, const Int& r2, ArithContext& ctx) {
    const Int& n = key.N();
    Int lhs = arith::mod_exp(ctx, blind::recover(key, r1), tag.t1, n);
    Int ut2 = arith::mod_exp(ctx, u % n, tag.t2, n);
    lhs = arith::mod_mul(ctx, lhs, ut2, n);
    return lhs == blind::recover(key, r2);
}

inline SessionReport outsource_hcs(const OutsourceKey& key, const Int& u, const Int& a,
                                   CloudWorker& worker, ArithContext& ctx) {
    detail::check_inputs(key, u, a);
    std::uint64_t start = ctx.mult_count;
    Int l = detail::session_ring(key, ctx);
    Int big_u = blind::conceal_base(key, u, ctx);
    blind::BlindedExponent big_a = blind::blind_exponent(key, a, ctx);
    Int r1 = worker.serve_modexp(ModExpQuery{big_u, big_a.value, l});
    SessionReport report;
    report.result = blind::recover(key, r1);
    report.verified = Verified::not_applicable;
    report.local_mults = ctx.mult_count - start;
    report.queries_sent = 1;
    return report;
}

// Randomness an MS session would draw, injectable for golden vectors.
struct MsSecrets {
    Int r;  // base blind
    Int k1; // plain exponent blind
    Int k2; // affine exponent blind
    VerificationTag tag;
};

inline SessionReport outsource_ms_with(const OutsourceKey& key, const Int& u, const Int& a,
                                       const MsSecrets& secrets, CloudWorker& worker,
                                       ArithContext& ctx) {
    detail::check_inputs(key, u, a);
    std::uint64_t start = ctx.mult_count;
    Int l = detail::session_ring(key, ctx);
    Int big_u = blind::conceal_base_with(key, u, secrets.r, ctx);
    Int a1 = blind::blind_exponent_with(key, a, secrets.k1, ctx).value;
    Int a2 = blind::blind_exponent_affine_with(key, a, secrets.tag, secrets.k2, ctx).value;

    // Two queries in randomly swapped order; the worker sees nothing but the
    // arrival sequence.
    Int first = secrets.tag.swapped ? a2 : a1;
    Int second = secrets.tag.swapped ? a1 : a2;
    Int reply_first = worker.serve_modexp(ModExpQuery{big_u, first, l});
    Int reply_second = worker.serve_modexp(ModExpQuery{big_u, second, l});
    Int r1 = secrets.tag.swapped ? reply_second : reply_first;
    Int r2 = secrets.tag.swapped ? reply_first : reply_second;

    bool ok = verify_ms(key, u, secrets.tag, r1, r2, ctx);
    SessionReport report;
    report.verified = ok ? Verified::accepted : Verified::rejected;
    if (ok) report.result = blind::recover(key, r1);
    report.local_mults = ctx.mult_count - start;
    report.queries_sent = 2;
    return report;
}

inline SessionReport outsource_ms(const OutsourceKey& key, const Int& u, const Int& a,
                                  const Int& bound, CloudWorker& worker, ArithContext& ctx) {
    if (bound < 2) throw DomainError("outsource_ms: bound < 2");
    MsSecrets secrets{ctx.rng.below(key.N()), ctx.rng.range(1, key.N()),
                      ctx.rng.range(1, key.N()), blind::make_tag(bound, ctx)};
    Int u_copy = u;
    SessionReport report = outsource_ms_with(key, u_copy, a, secrets, worker, ctx);
    u_copy = 0; // ephemeral plaintext cleared at session end
    return report;
}

inline SessionReport outsource_mm(const OutsourceKey& key, const Int& u, const Int& a,
                                  CloudWorker& worker1, CloudWorker& worker2,
                                  ArithContext& ctx) {
    detail::check_inputs(key, u, a);
    std::uint64_t start = ctx.mult_count;
    Int l = detail::session_ring(key, ctx);
    Int big_u = blind::conceal_base(key, u, ctx);
    blind::BlindedExponent big_a = blind::blind_exponent(key, a, ctx);
    ModExpQuery q{big_u, big_a.value, l};
    Int r1 = worker1.serve_modexp(q);
    Int r2 = worker2.serve_modexp(q);
    bool ok = blind::recover(key, r1) == blind::recover(key, r2);
    SessionReport report;
    report.verified = ok ? Verified::accepted : Verified::rejected;
    if (ok) report.result = blind::recover(key, r1);
    report.local_mults = ctx.mult_count - start;
    report.queries_sent = 2;
    return report;
}

} // namespace expsos::sos
