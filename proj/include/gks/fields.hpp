#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace gks {

// Coefficient fields. A field type carries its scalar type plus exact
// arithmetic on it; all linear algebra below is templated on one of these.
// Fields may have runtime state (the prime p), so operations go through a
// field object rather than bare operators.

struct F2 {
    using scalar = uint8_t;

    static constexpr bool is_f2 = true;

    scalar zero() const { return 0; }
    scalar one() const { return 1; }
    scalar add(scalar a, scalar b) const { return a ^ b; }
    scalar sub(scalar a, scalar b) const { return a ^ b; }
    scalar neg(scalar a) const { return a; }
    scalar mul(scalar a, scalar b) const { return a & b; }
    scalar inv(scalar a) const {
        if (!a) throw std::domain_error("F2: inverse of zero");
        return 1;
    }
    bool is_zero(scalar a) const { return a == 0; }
    bool eq(scalar a, scalar b) const { return a == b; }
    scalar from_int(long long v) const { return static_cast<scalar>(((v % 2) + 2) % 2); }
    std::string to_string(scalar a) const { return a ? "1" : "0"; }
    scalar parse(const std::string& s) const { return from_int(std::stoll(s)); }
    std::string name() const { return "f2"; }
    bool operator==(const F2&) const { return true; }
};

struct PrimeField {
    using scalar = uint64_t;

    static constexpr bool is_f2 = false;

    uint64_t p;

    explicit PrimeField(uint64_t p_ = 2) : p(p_) {
        if (p_ < 2) throw std::invalid_argument("PrimeField: p must be >= 2");
        for (uint64_t d = 2; d * d <= p_; ++d)
            if (p_ % d == 0) throw std::invalid_argument("PrimeField: p must be prime");
        if (p_ >= (1ull << 31)) throw std::invalid_argument("PrimeField: p too large");
    }

    scalar zero() const { return 0; }
    scalar one() const { return p > 1 ? 1 : 0; }
    scalar add(scalar a, scalar b) const { return (a + b) % p; }
    scalar sub(scalar a, scalar b) const { return (a + p - b) % p; }
    scalar neg(scalar a) const { return a ? p - a : 0; }
    scalar mul(scalar a, scalar b) const { return (a * b) % p; }
    scalar inv(scalar a) const {
        if (!a) throw std::domain_error("PrimeField: inverse of zero");
        // Fermat
        scalar r = 1, base = a, e = p - 2;
        while (e) {
            if (e & 1) r = mul(r, base);
            base = mul(base, base);
            e >>= 1;
        }
        return r;
    }
    bool is_zero(scalar a) const { return a == 0; }
    bool eq(scalar a, scalar b) const { return a == b; }
    scalar from_int(long long v) const {
        long long m = static_cast<long long>(p);
        return static_cast<scalar>(((v % m) + m) % m);
    }
    std::string to_string(scalar a) const { return std::to_string(a); }
    scalar parse(const std::string& s) const { return from_int(std::stoll(s)); }
    std::string name() const { return "fp" + std::to_string(p); }
    bool operator==(const PrimeField& o) const { return p == o.p; }
};

struct RationalField {
    using scalar = boost::multiprecision::cpp_rational;

    static constexpr bool is_f2 = false;

    scalar zero() const { return scalar(0); }
    scalar one() const { return scalar(1); }
    scalar add(const scalar& a, const scalar& b) const { return a + b; }
    scalar sub(const scalar& a, const scalar& b) const { return a - b; }
    scalar neg(const scalar& a) const { return -a; }
    scalar mul(const scalar& a, const scalar& b) const { return a * b; }
    scalar inv(const scalar& a) const {
        if (a == 0) throw std::domain_error("RationalField: inverse of zero");
        return 1 / a;
    }
    bool is_zero(const scalar& a) const { return a == 0; }
    bool eq(const scalar& a, const scalar& b) const { return a == b; }
    scalar from_int(long long v) const { return scalar(v); }
    std::string to_string(const scalar& a) const { return a.str(); }
    scalar parse(const std::string& s) const { return scalar(s); }
    std::string name() const { return "rational"; }
    bool operator==(const RationalField&) const { return true; }
};

}  // namespace gks
