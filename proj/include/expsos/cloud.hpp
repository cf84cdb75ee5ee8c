/* The worker side: the CloudWorker interface, an honest implementation, a
   family of adversary strategies, and the newline-delimited JSON wire codec.

   Wire protocol (one JSON object per line, over TCP):
     {"op":"modexp","u":hex,"a":hex,"l":hex,"id":string}
     {"op":"ecmul","s":hex,"px":hex,"py":hex,"pz":hex,"b":hex,"c":hex,"n":hex,"id":string}
     {"op":"ecadd","px":hex,"py":hex,"pz":hex,"qx":hex,"qy":hex,"qz":hex,"n":hex,"id":string}
   Replies:
     {"id":string,"ok":true,"r":hex}
     {"id":string,"ok":true,"rx":hex,"ry":hex,"rz":hex}
     {"id":string,"ok":false,"err":string}

   The worker only ever sees blinded values: bases, exponents and points over
   the public ring, never N, p, phi(N) or anything over F_p. Request ids are
   client-chosen opaque strings; the MS session uses them to correlate its two
   randomly-ordered queries. */

#pragma once

#include "expsos/blind.hpp"
#include "expsos/curve.hpp"

#include <nlohmann/json.hpp>

#include <memory>
#include <optional>
#include <string>
#include <variant>

namespace expsos::cloud {

using arith::ArithContext;
using curve::ProjectivePoint;

struct ModExpQuery {
    Int base;     // U, already concealed
    Int exponent; // A, already blinded
    Int modulus;  // L, public
};

// Curve handed to the worker: coefficients over the ring, never over F_p.
struct TransformedCurve {
    Int bp, cp; // b', c'
    Int n;      // public ring modulus
};

// Honest left-to-right double-and-add over the ring with the raw formulas.
// No projective dispatch: the worker cannot detect mod-p collisions, it
// evaluates the polynomials as given. Requires s >= 1 (blinded scalars are).
inline ProjectivePoint ring_scalar_mul(ArithContext& ctx, const TransformedCurve& E,
                                       const Int& s, const ProjectivePoint& P) {
    if (s < 1) throw DomainError("ring_scalar_mul: scalar < 1");
    std::size_t top = bit_length(s);
    ProjectivePoint r = P;
    for (std::size_t i = top - 1; i-- > 0;) {
        r = curve::detail::double_raw(ctx, r, E.bp, E.n);
        if (boost::multiprecision::bit_test(s, static_cast<unsigned>(i)))
            r = curve::detail::add_raw(ctx, r, P, E.n);
    }
    return r;
}

inline ProjectivePoint ring_point_add(ArithContext& ctx, const Int& n,
                                      const ProjectivePoint& P, const ProjectivePoint& Q) {
    return curve::detail::add_raw(ctx, P, Q, n);
}

// Adversary strategies. Each is deterministic given its seed.
//   Honest        - advertised functionality.
//   RandomForger  - uniform garbage of the right shape.
//   ExponentShift - the counter-example-2 style forger: answers the pair
//                   (U^{A1+delta}, U^{A2+g*delta}) guessing the client tag g
//                   and treating first-arrival as the plain query. A guess of
//                   g = 1 degenerates to the equal-offset forgery, so the
//                   guess is drawn from [2, bound].
//   LazyReplay    - computes the first answer honestly, then replays it.
//   OrderGuesser  - computes the first arrival honestly and derives the
//                   second as R^{g1} * U^{g2}, guessing both tags in
//                   [1, bound]; succeeds only on a correct order + tag guess.
struct Honest {};
struct RandomForger {};
struct ExponentShift {
    Int delta = 1;
    Int guess_bound = 2;
};
struct LazyReplay {};
struct OrderGuesser {
    Int guess_bound = 2;
};

using WorkerBehavior = std::variant<Honest, RandomForger, ExponentShift, LazyReplay, OrderGuesser>;

inline WorkerBehavior behavior_from_name(const std::string& name, const Int& bound) {
    if (name == "honest") return Honest{};
    if (name == "random") return RandomForger{};
    if (name == "expshift") return ExponentShift{1, bound};
    if (name == "lazy") return LazyReplay{};
    if (name == "orderguess") return OrderGuesser{bound};
    throw DomainError("unknown worker behavior: " + name);
}

struct CloudWorker {
    virtual ~CloudWorker() = default;
    virtual Int serve_modexp(const ModExpQuery& q) = 0;
    virtual ProjectivePoint serve_scalar_mul(const TransformedCurve& E, const Int& s,
                                             const ProjectivePoint& P) = 0;
    virtual ProjectivePoint serve_point_add(const Int& n, const ProjectivePoint& P,
                                            const ProjectivePoint& Q) = 0;
};

// One strategy instance: holds the per-pair memory adversaries need. Shared
// by the in-process worker and by each server connection, so a behavior
// answers identically over either transport given the same query sequence.
class WorkerLogic {
  public:
    WorkerLogic(WorkerBehavior behavior, std::uint64_t seed)
        : behavior_(std::move(behavior)), ctx_(seed) {}

    Int modexp(const ModExpQuery& q) {
        if (q.modulus < 2 || q.base < 0 || q.base >= q.modulus || q.exponent < 1)
            throw ProtocolError("modexp: malformed query");
        if (std::holds_alternative<Honest>(behavior_))
            return arith::mod_exp(ctx_, q.base, q.exponent, q.modulus);
        if (std::holds_alternative<RandomForger>(behavior_))
            return ctx_.rng.below(q.modulus);
        if (auto* shift = std::get_if<ExponentShift>(&behavior_)) {
            if (!pending_shift_) {
                pending_shift_ = shift->guess_bound >= 2
                                     ? ctx_.rng.range(2, shift->guess_bound + 1)
                                     : Int(1);
                return arith::mod_exp(ctx_, q.base, q.exponent + shift->delta, q.modulus);
            }
            Int guess = *pending_shift_;
            pending_shift_.reset();
            return arith::mod_exp(ctx_, q.base, q.exponent + guess * shift->delta, q.modulus);
        }
        if (std::holds_alternative<LazyReplay>(behavior_)) {
            if (!replay_) replay_ = arith::mod_exp(ctx_, q.base, q.exponent, q.modulus);
            return *replay_;
        }
        auto& og = std::get<OrderGuesser>(behavior_);
        if (!pending_first_) {
            pending_first_ = arith::mod_exp(ctx_, q.base, q.exponent, q.modulus);
            return *pending_first_;
        }
        Int g1 = ctx_.rng.range(1, og.guess_bound + 1);
        Int g2 = ctx_.rng.range(1, og.guess_bound + 1);
        Int derived = arith::mod_mul(ctx_, arith::mod_exp(ctx_, *pending_first_, g1, q.modulus),
                                     arith::mod_exp(ctx_, q.base, g2, q.modulus), q.modulus);
        pending_first_.reset();
        return derived;
    }

    ProjectivePoint scalar_mul(const TransformedCurve& E, const Int& s,
                               const ProjectivePoint& P) {
        if (E.n < 2 || s < 1) throw ProtocolError("ecmul: malformed query");
        if (std::holds_alternative<Honest>(behavior_)) return ring_scalar_mul(ctx_, E, s, P);
        if (std::holds_alternative<RandomForger>(behavior_))
            return {ctx_.rng.below(E.n), ctx_.rng.below(E.n), ctx_.rng.below(E.n)};
        if (auto* shift = std::get_if<ExponentShift>(&behavior_)) {
            if (!pending_shift_) {
                pending_shift_ = shift->guess_bound >= 2
                                     ? ctx_.rng.range(2, shift->guess_bound + 1)
                                     : Int(1);
                return ring_scalar_mul(ctx_, E, s + shift->delta, P);
            }
            Int guess = *pending_shift_;
            pending_shift_.reset();
            return ring_scalar_mul(ctx_, E, s + guess * shift->delta, P);
        }
        if (std::holds_alternative<LazyReplay>(behavior_)) {
            if (!replay_point_) replay_point_ = ring_scalar_mul(ctx_, E, s, P);
            return *replay_point_;
        }
        auto& og = std::get<OrderGuesser>(behavior_);
        if (!pending_first_point_) {
            pending_first_point_ = ring_scalar_mul(ctx_, E, s, P);
            return *pending_first_point_;
        }
        Int g1 = ctx_.rng.range(1, og.guess_bound + 1);
        Int g2 = ctx_.rng.range(1, og.guess_bound + 1);
        ProjectivePoint q1 = ring_scalar_mul(ctx_, E, g1, *pending_first_point_);
        ProjectivePoint q2 = ring_scalar_mul(ctx_, E, g2, P);
        pending_first_point_.reset();
        return ring_point_add(ctx_, E.n, q1, q2);
    }

    ProjectivePoint point_add(const Int& n, const ProjectivePoint& P, const ProjectivePoint& Q) {
        if (n < 2) throw ProtocolError("ecadd: malformed query");
        if (std::holds_alternative<RandomForger>(behavior_))
            return {ctx_.rng.below(n), ctx_.rng.below(n), ctx_.rng.below(n)};
        return ring_point_add(ctx_, n, P, Q);
    }

  private:
    WorkerBehavior behavior_;
    ArithContext ctx_;
    std::optional<Int> pending_shift_;
    std::optional<Int> replay_;
    std::optional<Int> pending_first_;
    std::optional<ProjectivePoint> replay_point_;
    std::optional<ProjectivePoint> pending_first_point_;
};

class InProcessWorker : public CloudWorker {
  public:
    InProcessWorker(WorkerBehavior behavior, std::uint64_t seed)
        : logic_(std::move(behavior), seed) {}

    Int serve_modexp(const ModExpQuery& q) override { return logic_.modexp(q); }
    ProjectivePoint serve_scalar_mul(const TransformedCurve& E, const Int& s,
                                     const ProjectivePoint& P) override {
        return logic_.scalar_mul(E, s, P);
    }
    ProjectivePoint serve_point_add(const Int& n, const ProjectivePoint& P,
                                    const ProjectivePoint& Q) override {
        return logic_.point_add(n, P, Q);
    }

  private:
    WorkerLogic logic_;
};

inline std::unique_ptr<CloudWorker> make_inproc_worker(WorkerBehavior behavior,
                                                       std::uint64_t seed) {
    return std::make_unique<InProcessWorker>(std::move(behavior), seed);
}

// ---- wire codec ----

namespace wire {

inline std::string encode_modexp(const std::string& id, const ModExpQuery& q) {
    nlohmann::json j;
    j["op"] = "modexp";
    j["u"] = to_hex(q.base);
    j["a"] = to_hex(q.exponent);
    j["l"] = to_hex(q.modulus);
    j["id"] = id;
    return j.dump();
}

inline std::string encode_ecmul(const std::string& id, const TransformedCurve& E, const Int& s,
                                const ProjectivePoint& P) {
    nlohmann::json j;
    j["op"] = "ecmul";
    j["s"] = to_hex(s);
    j["px"] = to_hex(P.x);
    j["py"] = to_hex(P.y);
    j["pz"] = to_hex(P.z);
    j["b"] = to_hex(E.bp);
    j["c"] = to_hex(E.cp);
    j["n"] = to_hex(E.n);
    j["id"] = id;
    return j.dump();
}

inline std::string encode_ecadd(const std::string& id, const Int& n, const ProjectivePoint& P,
                                const ProjectivePoint& Q) {
    nlohmann::json j;
    j["op"] = "ecadd";
    j["px"] = to_hex(P.x);
    j["py"] = to_hex(P.y);
    j["pz"] = to_hex(P.z);
    j["qx"] = to_hex(Q.x);
    j["qy"] = to_hex(Q.y);
    j["qz"] = to_hex(Q.z);
    j["n"] = to_hex(n);
    j["id"] = id;
    return j.dump();
}

inline std::string encode_value_reply(const std::string& id, const Int& r) {
    nlohmann::json j;
    j["id"] = id;
    j["ok"] = true;
    j["r"] = to_hex(r);
    return j.dump();
}

inline std::string encode_point_reply(const std::string& id, const ProjectivePoint& p) {
    nlohmann::json j;
    j["id"] = id;
    j["ok"] = true;
    j["rx"] = to_hex(p.x);
    j["ry"] = to_hex(p.y);
    j["rz"] = to_hex(p.z);
    return j.dump();
}

inline std::string encode_error_reply(const std::string& id, const std::string& err) {
    nlohmann::json j;
    j["id"] = id;
    j["ok"] = false;
    j["err"] = err;
    return j.dump();
}

// Serve one request line. Never throws: malformed input becomes a single
// error reply and the connection stays usable.
inline std::string serve_line(WorkerLogic& logic, const std::string& line) {
    std::string id;
    try {
        nlohmann::json j = nlohmann::json::parse(line);
        id = j.value("id", "");
        std::string op = j.at("op").get<std::string>();
        auto hex = [&](const char* key) { return from_hex(j.at(key).get<std::string>()); };
        if (op == "modexp") {
            ModExpQuery q{hex("u"), hex("a"), hex("l")};
            return encode_value_reply(id, logic.modexp(q));
        }
        if (op == "ecmul") {
            TransformedCurve E{hex("b"), hex("c"), hex("n")};
            ProjectivePoint P{hex("px"), hex("py"), hex("pz")};
            return encode_point_reply(id, logic.scalar_mul(E, hex("s"), P));
        }
        if (op == "ecadd") {
            ProjectivePoint P{hex("px"), hex("py"), hex("pz")};
            ProjectivePoint Q{hex("qx"), hex("qy"), hex("qz")};
            return encode_point_reply(id, logic.point_add(hex("n"), P, Q));
        }
        return encode_error_reply(id, "unknown op");
    } catch (const std::exception& e) {
        return encode_error_reply(id, e.what());
    }
}

} // namespace wire

} // namespace expsos::cloud
