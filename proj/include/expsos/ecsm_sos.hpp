/* Secure outsourcing of point addition/doubling and scalar multiplication.

   The worker computes over Z_N, N = p*q, on coordinate-wise blinded points;
   the client recovers by reducing mod p and checks the result against the
   curve equation. The worker cannot detect projective collisions mod p, so
   before outsourcing a scalar the client screens the blinded scalar's
   double-and-add chain in residue arithmetic (curve::scalar_chain_safe) and
   redraws the blind until the chain is clean; the on-curve check plus a
   bounded retry loop remains as the integrity gate against corrupt replies.
   The z-coordinate is blinded like the others; the worker must never
   normalize. */

#pragma once

#include "expsos/blind.hpp"
#include "expsos/cloud.hpp"
#include "expsos/curve.hpp"

#include <optional>

namespace expsos::ecsm {

using arith::ArithContext;
using blind::VerificationTag;
using cloud::CloudWorker;
using cloud::TransformedCurve;
using curve::CurveParams;
using curve::ProjectivePoint;

inline constexpr int kMaxRetries = 4;       // attempts = 1 + kMaxRetries
inline constexpr int kMaxBlindRedraws = 64; // scalar-screen rejection budget

// Curve-side key. field_p is the curve's secret field modulus, q the
// auxiliary secret prime, N = p*q the public ring modulus (the roles of the
// letters are swapped relative to the modexp side, where N is secret).
struct EcOutsourceKey {
    Int field_p;
    Int q;
    Int N;
};

inline EcOutsourceKey make_ec_key(const Int& field_p, std::size_t q_bits, ArithContext& ctx) {
    if (!arith::is_probable_prime(field_p)) throw DomainError("make_ec_key: p not prime");
    for (int attempt = 0; attempt < 16; ++attempt) {
        Int q = arith::gen_prime(q_bits, ctx);
        if (q != field_p) return EcOutsourceKey{field_p, q, field_p * q};
    }
    throw SessionError("make_ec_key: q kept colliding with p");
}

inline ProjectivePoint conceal_point_with(const EcOutsourceKey& key, const ProjectivePoint& P,
                                          const Int& kx, const Int& ky, const Int& kz) {
    auto blind_coord = [&](const Int& v, const Int& k) {
        if (k < 0 || k >= key.q) throw DomainError("conceal_point: k out of [0, q)");
        return (v + k * key.field_p) % key.N;
    };
    return {blind_coord(P.x, kx), blind_coord(P.y, ky), blind_coord(P.z, kz)};
}

inline ProjectivePoint conceal_point(const EcOutsourceKey& key, const ProjectivePoint& P,
                                     ArithContext& ctx) {
    return conceal_point_with(key, P, ctx.rng.range(1, key.q), ctx.rng.range(1, key.q),
                              ctx.rng.range(1, key.q));
}

inline TransformedCurve conceal_curve_with(const EcOutsourceKey& key, const CurveParams& E,
                                           const Int& k4, const Int& k6) {
    if (k4 < 0 || k4 >= key.q || k6 < 0 || k6 >= key.q)
        throw DomainError("conceal_curve: k out of [0, q)");
    return TransformedCurve{(E.b + k4 * key.field_p) % key.N, (E.c + k6 * key.field_p) % key.N,
                            key.N};
}

inline TransformedCurve conceal_curve(const EcOutsourceKey& key, const CurveParams& E,
                                      ArithContext& ctx) {
    return conceal_curve_with(key, E, ctx.rng.range(1, key.q), ctx.rng.range(1, key.q));
}

// Coordinate-wise reduction mod p plus the validity gate.
inline ProjectivePoint recover_point(const EcOutsourceKey& key, const CurveParams& E,
                                     const ProjectivePoint& Pp) {
    ProjectivePoint r{curve::detail::norm(Pp.x, key.field_p),
                      curve::detail::norm(Pp.y, key.field_p),
                      curve::detail::norm(Pp.z, key.field_p)};
    if (!curve::valid_point(E, r)) throw IntegrityError("recover_point: off-curve result");
    return r;
}

inline ProjectivePoint outsource_point_add(const EcOutsourceKey& key, const CurveParams& E,
                                           const ProjectivePoint& P, const ProjectivePoint& Q,
                                           CloudWorker& worker, ArithContext& ctx) {
    for (int attempt = 0; attempt <= kMaxRetries; ++attempt) {
        ProjectivePoint Pp = conceal_point(key, P, ctx);
        ProjectivePoint Qp = conceal_point(key, Q, ctx);
        ProjectivePoint Rp = worker.serve_point_add(key.N, Pp, Qp);
        try {
            return recover_point(key, E, Rp);
        } catch (const IntegrityError&) {
            // fresh blinds and another attempt
        }
    }
    throw DegenerateAdditionError("outsource_point_add: retries exhausted (P = +/-Q?)");
}

namespace detail {

// Blinded scalar with a degeneracy-free double-and-add chain. base may
// exceed m (the affine combination t1*s + t2); the chain is screened on the
// full integer.
inline Int screened_scalar(const Int& base, const Int& m, ArithContext& ctx) {
    for (int i = 0; i < kMaxBlindRedraws; ++i) {
        Int sp = base + ctx.rng.range(1, m) * m;
        if (curve::scalar_chain_safe(sp, m)) return sp;
    }
    throw SessionError("screened_scalar: no clean blinding found");
}

} // namespace detail

inline ProjectivePoint outsource_scalar_mul_hcs(const EcOutsourceKey& key, const CurveParams& E,
                                                const Int& s, const ProjectivePoint& P,
                                                CloudWorker& worker, ArithContext& ctx) {
    if (s < 0 || s >= E.m) throw DomainError("outsource_scalar_mul: s out of [0, m)");
    for (int attempt = 0; attempt <= kMaxRetries; ++attempt) {
        Int sp = detail::screened_scalar(s, E.m, ctx);
        ProjectivePoint Pp = conceal_point(key, P, ctx);
        TransformedCurve Ep = conceal_curve(key, E, ctx);
        ProjectivePoint Rp = worker.serve_scalar_mul(Ep, sp, Pp);
        try {
            return recover_point(key, E, Rp);
        } catch (const IntegrityError&) {
        }
    }
    throw SessionError("outsource_scalar_mul_hcs: retries exhausted");
}

struct EcMsReport {
    std::optional<ProjectivePoint> result; // recovered Q1 when accepted
    bool accepted = false;
    int attempts = 0;
};

// MS-model scalar multiplication: two blinded scalars s1 = s + r1 m and
// s2 = t1 s + t2 + r2 m against the same concealed point, sent in random
// order; accept iff Q2 = [t1]Q1 + [t2]P after recovery. The combination is
// evaluated over F_p with the reference curve (both operands are already
// recovered), via a simultaneous double-and-add.
inline EcMsReport outsource_scalar_mul_ms(const EcOutsourceKey& key, const CurveParams& E,
                                          const Int& s, const ProjectivePoint& P,
                                          const Int& bound, CloudWorker& worker,
                                          ArithContext& ctx) {
    if (s < 0 || s >= E.m) throw DomainError("outsource_scalar_mul_ms: s out of [0, m)");
    if (bound < 2) throw DomainError("outsource_scalar_mul_ms: bound < 2");
    EcMsReport report;
    for (int attempt = 0; attempt <= kMaxRetries; ++attempt) {
        ++report.attempts;
        VerificationTag tag = blind::make_tag(bound, ctx);
        Int s1 = detail::screened_scalar(s, E.m, ctx);
        Int s2 = detail::screened_scalar(tag.t1 * s + tag.t2, E.m, ctx);
        ProjectivePoint Pp = conceal_point(key, P, ctx);
        TransformedCurve Ep = conceal_curve(key, E, ctx);

        Int first = tag.swapped ? s2 : s1;
        Int second = tag.swapped ? s1 : s2;
        ProjectivePoint reply_first = worker.serve_scalar_mul(Ep, first, Pp);
        ProjectivePoint reply_second = worker.serve_scalar_mul(Ep, second, Pp);
        ProjectivePoint q1_raw = tag.swapped ? reply_second : reply_first;
        ProjectivePoint q2_raw = tag.swapped ? reply_first : reply_second;

        ProjectivePoint q1, q2;
        try {
            q1 = recover_point(key, E, q1_raw);
            q2 = recover_point(key, E, q2_raw);
        } catch (const IntegrityError&) {
            continue; // corrupt reply; fresh blinds
        }
        ProjectivePoint expect = curve::double_scalar_mul(ctx, E, tag.t1, q1, tag.t2, P);
        if (curve::proj_eq(E, q2, expect)) {
            report.result = q1;
            report.accepted = true;
        }
        return report;
    }
    return report; // integrity never passed: rejected
}

} // namespace expsos::ecsm
