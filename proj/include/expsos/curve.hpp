/* Reference elliptic-curve arithmetic over a prime field in projective
   coordinates, using exactly the add/double formulas the outsourcing scheme
   hands to the worker:

     add:    A = y2 z1 - y1 z2, B = x2 z1 - x1 z2,
             C = A^2 z1 z2 - B^3 - 2 B^2 x1 z2,
             x3 = B C, y3 = A (B^2 x1 z2 - C) - B^3 y1 z2, z3 = B^3 z1 z2
     double: A = b z1^2 + 3 x1^2, B = y1 z1, C = x1 y1 B, D = A^2 - 8 C,
             x4 = 2 B D, y4 = A (4 C - D) - 8 y1^2 B^2, z4 = 8 B^3

   Counting convention: multiplications by the constants 2, 3, 4, 8 are
   realized as additions and do not touch the context counter; with shared
   subexpressions an addition then costs exactly 14 counted multiplications
   and a doubling exactly 12. proj_eq and the on-curve predicate are plumbing
   comparisons and count nothing.

   The same raw formulas run both over F_p (reference, this module) and over
   the blinded ring Z_N (worker side); the raw entry points therefore take
   the modulus explicitly. The point at infinity is (0 : 1 : 0); raw formula
   code never dispatches it - scalar_mul and the _general helpers do. */

#pragma once

#include "expsos/arith.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <optional>
#include <string>

namespace expsos::curve {

using arith::ArithContext;

struct ProjectivePoint {
    Int x, y, z;

    static ProjectivePoint infinity() { return {0, 1, 0}; }
};

struct CurveParams {
    Int b, c; // y^2 = x^3 + b x + c
    Int p;    // prime field modulus
    Int m;    // torsion order of the designated base point
};

inline bool is_infinity(const ProjectivePoint& pt) { return pt.z == 0; }

namespace detail {

inline Int norm(const Int& v, const Int& mod) {
    Int r = v % mod;
    if (r < 0) r += mod;
    return r;
}

// Chord addition, 14 counted multiplications. No degeneracy handling.
inline ProjectivePoint add_raw(ArithContext& ctx, const ProjectivePoint& P,
                               const ProjectivePoint& Q, const Int& mod) {
    const Int &x1 = P.x, &y1 = P.y, &z1 = P.z;
    const Int &x2 = Q.x, &y2 = Q.y, &z2 = Q.z;
    Int y2z1 = arith::mod_mul(ctx, y2, z1, mod);
    Int y1z2 = arith::mod_mul(ctx, y1, z2, mod);
    Int a = detail::norm(y2z1 - y1z2, mod);
    Int x2z1 = arith::mod_mul(ctx, x2, z1, mod);
    Int x1z2 = arith::mod_mul(ctx, x1, z2, mod);
    Int b = detail::norm(x2z1 - x1z2, mod);
    Int z1z2 = arith::mod_mul(ctx, z1, z2, mod);
    Int a2 = arith::mod_mul(ctx, a, a, mod);
    Int a2z1z2 = arith::mod_mul(ctx, a2, z1z2, mod);
    Int b2 = arith::mod_mul(ctx, b, b, mod);
    Int b3 = arith::mod_mul(ctx, b2, b, mod);
    Int b2x1z2 = arith::mod_mul(ctx, b2, x1z2, mod);
    Int c = detail::norm(a2z1z2 - b3 - (b2x1z2 + b2x1z2), mod);
    Int x3 = arith::mod_mul(ctx, b, c, mod);
    Int y3 = detail::norm(arith::mod_mul(ctx, a, detail::norm(b2x1z2 - c, mod), mod) -
                              arith::mod_mul(ctx, b3, y1z2, mod),
                          mod);
    Int z3 = arith::mod_mul(ctx, b3, z1z2, mod);
    return {x3, y3, z3};
}

// Tangent doubling, 12 counted multiplications.
inline ProjectivePoint double_raw(ArithContext& ctx, const ProjectivePoint& P,
                                  const Int& coef_b, const Int& mod) {
    const Int &x1 = P.x, &y1 = P.y, &z1 = P.z;
    Int z1z1 = arith::mod_mul(ctx, z1, z1, mod);
    Int bz1z1 = arith::mod_mul(ctx, coef_b, z1z1, mod);
    Int x1x1 = arith::mod_mul(ctx, x1, x1, mod);
    Int a = detail::norm(bz1z1 + x1x1 + x1x1 + x1x1, mod);
    Int b = arith::mod_mul(ctx, y1, z1, mod);
    Int u = arith::mod_mul(ctx, y1, b, mod); // u = y1^2 z1 = y1 * B
    Int c = arith::mod_mul(ctx, x1, u, mod); // C = x1 y1 B
    Int a2 = arith::mod_mul(ctx, a, a, mod);
    Int c8 = detail::norm(8 * c, mod);
    Int d = detail::norm(a2 - c8, mod);
    Int bd = arith::mod_mul(ctx, b, d, mod);
    Int x4 = detail::norm(bd + bd, mod);
    Int t = detail::norm(4 * c - d, mod);
    Int at = arith::mod_mul(ctx, a, t, mod);
    Int u2 = arith::mod_mul(ctx, u, u, mod); // (y1 B)^2 = y1^2 B^2
    Int y4 = detail::norm(at - 8 * u2, mod);
    Int b2 = arith::mod_mul(ctx, b, b, mod);
    Int b3 = arith::mod_mul(ctx, b2, b, mod);
    Int z4 = detail::norm(8 * b3, mod);
    return {x4, y4, z4};
}

} // namespace detail

// Cross-multiplied projective equality; no inversion, no counted work.
inline bool proj_eq(const CurveParams& E, const ProjectivePoint& P, const ProjectivePoint& Q) {
    const Int& p = E.p;
    Int z1 = detail::norm(P.z, p), z2 = detail::norm(Q.z, p);
    if (z1 == 0 || z2 == 0) return z1 == 0 && z2 == 0;
    return detail::norm(P.x * Q.z - Q.x * P.z, p) == 0 &&
           detail::norm(P.y * Q.z - Q.y * P.z, p) == 0;
}

// Homogenized curve equation y^2 z = x^3 + b x z^2 + c z^3.
inline bool on_curve(const CurveParams& E, const ProjectivePoint& P) {
    Int lhs = P.y * P.y * P.z;
    Int rhs = P.x * P.x * P.x + E.b * P.x * P.z * P.z + E.c * P.z * P.z * P.z;
    return detail::norm(lhs - rhs, E.p) == 0;
}

// A usable point: not the zero triple, on the curve, and with y != 0 whenever
// z = 0 (the infinity class is (0 : y : 0), y nonzero).
inline bool valid_point(const CurveParams& E, const ProjectivePoint& P) {
    Int x = detail::norm(P.x, E.p), y = detail::norm(P.y, E.p), z = detail::norm(P.z, E.p);
    if (x == 0 && y == 0 && z == 0) return false;
    if (z == 0 && y == 0) return false;
    return on_curve(E, {x, y, z});
}

inline ProjectivePoint negate(const CurveParams& E, const ProjectivePoint& P) {
    return {P.x, detail::norm(-P.y, E.p), P.z};
}

// Strict chord addition: requires P != +/-Q and neither operand at infinity.
// Exactly 14 counted multiplications on success.
inline ProjectivePoint point_add(ArithContext& ctx, const CurveParams& E,
                                 const ProjectivePoint& P, const ProjectivePoint& Q) {
    if (is_infinity(P) || is_infinity(Q))
        throw DomainError("point_add: infinity operand, caller dispatches");
    if (detail::norm(Q.x * P.z - P.x * Q.z, E.p) == 0)
        throw DegenerateAdditionError("point_add: P = +/-Q");
    return detail::add_raw(ctx, P, Q, E.p);
}

// Tangent doubling; exactly 12 counted multiplications. Doubling an order-2
// point (y = 0) yields the infinity class.
inline ProjectivePoint point_double(ArithContext& ctx, const CurveParams& E,
                                    const ProjectivePoint& P) {
    if (is_infinity(P)) throw DomainError("point_double: infinity operand");
    if (detail::norm(P.y, E.p) == 0) return ProjectivePoint::infinity();
    return detail::double_raw(ctx, P, E.b, E.p);
}

// Addition with identity/inverse/tangent dispatch, for internal chains.
inline ProjectivePoint add_general(ArithContext& ctx, const CurveParams& E,
                                   const ProjectivePoint& P, const ProjectivePoint& Q) {
    if (is_infinity(P)) return Q;
    if (is_infinity(Q)) return P;
    if (proj_eq(E, P, Q)) return point_double(ctx, E, P);
    if (proj_eq(E, P, negate(E, Q))) return ProjectivePoint::infinity();
    return detail::add_raw(ctx, P, Q, E.p);
}

inline ProjectivePoint double_general(ArithContext& ctx, const CurveParams& E,
                                      const ProjectivePoint& P) {
    if (is_infinity(P)) return P;
    return point_double(ctx, E, P);
}

// [s]P by left-to-right double-and-add.
inline ProjectivePoint scalar_mul(ArithContext& ctx, const CurveParams& E, const Int& s,
                                  const ProjectivePoint& P) {
    if (s < 0) throw DomainError("scalar_mul: negative scalar");
    if (s == 0 || is_infinity(P)) return ProjectivePoint::infinity();
    std::size_t top = bit_length(s);
    ProjectivePoint r = P;
    for (std::size_t i = top - 1; i-- > 0;) {
        r = double_general(ctx, E, r);
        if (boost::multiprecision::bit_test(s, static_cast<unsigned>(i)))
            r = add_general(ctx, E, r, P);
    }
    return r;
}

// [a]P + [b]Q by simultaneous double-and-add (shared doublings). At most
// bitlen(max(a,b)) doublings, as many additions, plus the one precomputed
// P+Q.
inline ProjectivePoint double_scalar_mul(ArithContext& ctx, const CurveParams& E, const Int& a,
                                         const ProjectivePoint& P, const Int& b,
                                         const ProjectivePoint& Q) {
    if (a < 0 || b < 0) throw DomainError("double_scalar_mul: negative scalar");
    if (a == 0) return scalar_mul(ctx, E, b, Q);
    if (b == 0) return scalar_mul(ctx, E, a, P);
    ProjectivePoint both = add_general(ctx, E, P, Q);
    std::size_t top = std::max(bit_length(a), bit_length(b));
    ProjectivePoint r = ProjectivePoint::infinity();
    for (std::size_t i = top; i-- > 0;) {
        r = double_general(ctx, E, r);
        bool ba = boost::multiprecision::bit_test(a, static_cast<unsigned>(i));
        bool bb = boost::multiprecision::bit_test(b, static_cast<unsigned>(i));
        if (ba && bb) r = add_general(ctx, E, r, both);
        else if (ba) r = add_general(ctx, E, r, P);
        else if (bb) r = add_general(ctx, E, r, Q);
    }
    return r;
}

// Smallest m >= 1 with [m]P = O, by iterated addition. Desk-scale oracle.
inline Int group_order_bruteforce(const CurveParams& E, const ProjectivePoint& P) {
    if (E.p > (Int(1) << 20)) throw DomainError("group_order_bruteforce: field too large");
    if (is_infinity(P)) return 1;
    ArithContext scratch(0);
    ProjectivePoint q = P;
    Int k = 1;
    while (!is_infinity(q)) {
        q = add_general(scratch, E, q, P);
        ++k;
    }
    return k;
}

/* Degeneracy screen for a blinded scalar. The worker runs the raw formulas
   over Z_N with no way to test projective collisions mod p; an add step that
   lands on R = +/-P or any operation on a mid-chain infinity class corrupts
   the mod-p component irrecoverably. The chain of intermediate multiples is
   determined by the bits of s' alone, so the client can check it in residue
   arithmetic before outsourcing. Returns true when the left-to-right
   double-and-add chain for s' stays clean (a final step that lands exactly
   on the infinity class is clean: that is the correct output for s' = 0 mod
   m). */
inline bool scalar_chain_safe(const Int& sp, const Int& m) {
    if (sp < 1 || m < 2) return false;
    std::size_t top = bit_length(sp);
    Int j = 1 % m;
    bool at_inf = (j == 0); // m = 1 excluded above; j = 1 normally
    for (std::size_t i = top - 1; i-- > 0;) {
        // double
        if (at_inf) return false;
        Int twoj = (j * 2) % m;
        if (twoj == 0) {
            at_inf = true; // doubling an order-2 point gives a valid O class
            j = 0;
        } else {
            j = twoj;
        }
        if (boost::multiprecision::bit_test(sp, static_cast<unsigned>(i))) {
            if (at_inf) return false; // O + P through the chord formula: zero triple
            if (j == 1) return false; // R = P: chord formula on equal points
            if (j == m - 1) {
                at_inf = true; // R = -P: valid O class
                j = 0;
            } else {
                j = (j + 1) % m;
            }
        }
    }
    return true;
}

struct CurveFile {
    CurveParams params;
    ProjectivePoint base;
};

// Curve file: {"b": hex, "c": hex, "p": hex, "m": hex, "gx": hex, "gy": hex}.
inline void save_curve(const std::string& path, const CurveFile& cf) {
    nlohmann::json j;
    j["b"] = to_hex(cf.params.b);
    j["c"] = to_hex(cf.params.c);
    j["p"] = to_hex(cf.params.p);
    j["m"] = to_hex(cf.params.m);
    j["gx"] = to_hex(cf.base.x);
    j["gy"] = to_hex(cf.base.y);
    std::ofstream out(path);
    if (!out) throw Error("save_curve: cannot open " + path);
    out << j.dump() << "\n";
}

inline CurveFile load_curve(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("load_curve: cannot open " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    CurveFile cf;
    cf.params.b = from_hex(j.at("b").get<std::string>());
    cf.params.c = from_hex(j.at("c").get<std::string>());
    cf.params.p = from_hex(j.at("p").get<std::string>());
    cf.params.m = from_hex(j.at("m").get<std::string>());
    cf.base = {from_hex(j.at("gx").get<std::string>()), from_hex(j.at("gy").get<std::string>()), 1};
    Int disc = detail::norm(4 * cf.params.b * cf.params.b % cf.params.p * cf.params.b +
                                27 * cf.params.c * cf.params.c,
                            cf.params.p);
    if (disc == 0) throw DomainError("load_curve: singular curve");
    if (!valid_point(cf.params, cf.base)) throw DomainError("load_curve: base point off curve");
    return cf;
}

} // namespace expsos::curve
