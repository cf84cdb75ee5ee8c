/* Multiplication-count experiments behind `expsos bench` and `expsos
   verify-mc`. Wall-clock numbers are hardware-bound and reported nowhere;
   efficiency is measured as alpha = pi_oracle / pi_local on the instrumented
   counters, verifiability as Monte-Carlo acceptance rates. */

#pragma once

#include "expsos/modexp_sos.hpp"
#include "expsos/net.hpp"

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace expsos::bench {

using arith::ArithContext;
using arith::FactoredModulus;

struct BenchRow {
    std::size_t bits;           // bit length of N (and of the exponents)
    Int bound;                  // security parameter B; 0 marks an HCS row
    double pi_oracle;           // mean direct mod_exp count
    double pi_local;            // mean client count per session
    double alpha;               // total oracle count / total local count
    double pass_rate;           // fraction of sessions accepted
    std::size_t trials;
};

// CSV schema: "bits,B,pi_oracle,pi_local,alpha,pass_rate,trials".
inline std::string to_csv(const std::vector<BenchRow>& rows) {
    std::string out = "bits,B,pi_oracle,pi_local,alpha,pass_rate,trials\n";
    char line[256];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%zu,%s,%.4f,%.4f,%.4f,%.4f,%zu\n", r.bits,
                      r.bound.str().c_str(), r.pi_oracle, r.pi_local, r.alpha, r.pass_rate,
                      r.trials);
        out += line;
    }
    return out;
}

// One (bits, B) experiment against an honest in-process worker. B = 0 runs
// HCS sessions, B >= 2 runs MS sessions.
inline BenchRow run_bench_config(std::size_t bits, const Int& bound, std::size_t trials,
                                 std::uint64_t seed) {
    ArithContext ctx(seed);
    FactoredModulus n = FactoredModulus::from_prime(arith::gen_prime(bits, ctx));
    blind::OutsourceKey key = blind::keygen(n, bits, ctx);
    cloud::InProcessWorker worker(cloud::Honest{}, seed ^ 0xc10dULL);

    std::uint64_t total_oracle = 0, total_local = 0;
    std::size_t accepted = 0;
    for (std::size_t i = 0; i < trials; ++i) {
        Int u = ctx.rng.below(key.N());
        Int a = ctx.rng.range(1, key.phi);
        ArithContext oracle_ctx(ctx.rng.word());
        arith::mod_exp(oracle_ctx, u, a, key.N());
        total_oracle += oracle_ctx.mult_count;

        sos::SessionReport report =
            bound == 0 ? sos::outsource_hcs(key, u, a, worker, ctx)
                       : sos::outsource_ms(key, u, a, bound, worker, ctx);
        total_local += report.local_mults;
        if (report.verified != sos::Verified::rejected) ++accepted;
    }
    BenchRow row;
    row.bits = bits;
    row.bound = bound;
    row.trials = trials;
    row.pi_oracle = double(total_oracle) / double(trials);
    row.pi_local = double(total_local) / double(trials);
    row.alpha = double(total_oracle) / double(total_local);
    row.pass_rate = double(accepted) / double(trials);
    return row;
}

inline std::vector<BenchRow> run_bench(const std::vector<std::size_t>& bits_list,
                                       const std::vector<Int>& bounds, std::size_t trials,
                                       std::uint64_t seed) {
    std::vector<BenchRow> rows;
    std::uint64_t salt = 0;
    for (std::size_t bits : bits_list)
        for (const Int& b : bounds)
            rows.push_back(run_bench_config(bits, b, trials, seed + 0x9e3779b9ULL * ++salt));
    return rows;
}

struct McRow {
    std::string adversary;
    Int bound;
    std::size_t trials;
    std::size_t accepted;
    double accept_rate;
};

// Monte-Carlo acceptance rate of MS sessions against a named adversary.
// Fresh worker per trial so pair-level adversary state never straddles
// sessions.
inline McRow run_verify_mc(const std::string& adversary, const Int& bound, std::size_t trials,
                           std::uint64_t seed, std::size_t n_bits = 64) {
    ArithContext ctx(seed);
    FactoredModulus n = FactoredModulus::from_prime(arith::gen_prime(n_bits, ctx));
    blind::OutsourceKey key = blind::keygen(n, n_bits, ctx);

    std::size_t accepted = 0;
    for (std::size_t i = 0; i < trials; ++i) {
        cloud::InProcessWorker worker(cloud::behavior_from_name(adversary, bound),
                                      seed ^ (0x5851f42d4c957f2dULL * (i + 1)));
        Int u = ctx.rng.below(key.N());
        Int a = ctx.rng.range(1, key.phi);
        sos::SessionReport report = sos::outsource_ms(key, u, a, bound, worker, ctx);
        if (report.verified == sos::Verified::accepted) ++accepted;
    }
    return McRow{adversary, bound, trials, accepted, double(accepted) / double(trials)};
}

inline double binom_sigma(double p, std::size_t n) {
    return std::sqrt(p * (1.0 - p) / double(n));
}

} // namespace expsos::bench
