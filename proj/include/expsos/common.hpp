/* Shared integer type, error hierarchy and hex serialization.
   All integers cross module and process boundaries as lowercase big-endian
   hex strings with no leading zeros ("0" for zero). */

#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace expsos {

using Int = boost::multiprecision::cpp_int;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Precondition violations (bad ranges, malformed arguments).
struct DomainError : Error {
    using Error::Error;
};
// gcd(a, m) != 1 in a modular inversion.
struct NoInverseError : Error {
    using Error::Error;
};
// FactoredModulus with repeated or non-prime factors.
struct InvalidModulusError : Error {
    using Error::Error;
};
// Chord addition applied to P = +/-Q.
struct DegenerateAdditionError : Error {
    using Error::Error;
};
// Recovered worker output fails the on-curve / validity check.
struct IntegrityError : Error {
    using Error::Error;
};
// Socket-level failures between client and worker.
struct TransportError : Error {
    using Error::Error;
};
// Malformed or error replies on an intact transport.
struct ProtocolError : Error {
    using Error::Error;
};
// A session exhausted its retry budget or cannot continue.
struct SessionError : Error {
    using Error::Error;
};

inline std::size_t bit_length(const Int& n) {
    if (n == 0) return 0;
    if (n < 0) throw DomainError("bit_length: negative");
    return boost::multiprecision::msb(n) + 1;
}

inline std::size_t popcount(Int n) {
    std::size_t c = 0;
    while (n != 0) {
        c += static_cast<std::size_t>(n & 1);
        n >>= 1;
    }
    return c;
}

inline std::string to_hex(const Int& n) {
    if (n < 0) throw DomainError("to_hex: negative");
    if (n == 0) return "0";
    static const char* digits = "0123456789abcdef";
    std::string out;
    Int v = n;
    while (v != 0) {
        out.push_back(digits[static_cast<unsigned>(v & 0xf)]);
        v >>= 4;
    }
    return {out.rbegin(), out.rend()};
}

inline Int from_hex(const std::string& s) {
    if (s.empty()) throw ProtocolError("from_hex: empty string");
    Int r = 0;
    for (char c : s) {
        unsigned d;
        if (c >= '0' && c <= '9') d = c - '0';
        else if (c >= 'a' && c <= 'f') d = 10 + (c - 'a');
        else throw ProtocolError(std::string("from_hex: bad digit '") + c + "'");
        r <<= 4;
        r |= d;
    }
    return r;
}

} // namespace expsos
