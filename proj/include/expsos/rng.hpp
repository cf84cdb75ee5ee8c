/* Deterministic randomness. Every random draw in the repo flows through a
   seeded Rng so that sessions, experiments and CSV outputs replay exactly. */

#pragma once

#include "expsos/common.hpp"

#include <random>

namespace expsos {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t word() { return eng_(); }

    bool coin() { return (word() & 1) != 0; }

    // Uniform integer with at most `bits` bits (no top-bit guarantee).
    Int bits(std::size_t nbits) {
        Int r = 0;
        for (std::size_t i = 0; i < nbits; i += 64) {
            r <<= 64;
            r |= Int(word());
        }
        r &= (Int(1) << nbits) - 1;
        return r;
    }

    // Uniform in [0, n) by rejection.
    Int below(const Int& n) {
        if (n <= 0) throw DomainError("Rng::below: n <= 0");
        std::size_t k = bit_length(n);
        for (;;) {
            Int r = bits(k);
            if (r < n) return r;
        }
    }

    // Uniform in [lo, hi).
    Int range(const Int& lo, const Int& hi) {
        if (hi <= lo) throw DomainError("Rng::range: empty range");
        return lo + below(hi - lo);
    }

    // Independent child stream; deterministic given the parent state.
    Rng split(std::uint64_t salt) {
        return Rng(word() ^ (salt * 0x9e3779b97f4a7c15ULL + 0x7f4a7c15ULL));
    }

  private:
    std::mt19937_64 eng_;
};

} // namespace expsos
