#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace gks {

// Small exact rational for grid coordinates (angles and times in units of pi).
// Magnitudes stay tiny, so int64 with gcd normalization is plenty.
struct Rat {
    int64_t num = 0;
    int64_t den = 1;

    Rat() = default;
    Rat(int64_t n) : num(n), den(1) {}
    Rat(int64_t n, int64_t d) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) throw std::domain_error("Rat: zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    friend Rat operator+(const Rat& a, const Rat& b) { return Rat(a.num * b.den + b.num * a.den, a.den * b.den); }
    friend Rat operator-(const Rat& a, const Rat& b) { return Rat(a.num * b.den - b.num * a.den, a.den * b.den); }
    friend Rat operator*(const Rat& a, const Rat& b) { return Rat(a.num * b.num, a.den * b.den); }
    friend Rat operator/(const Rat& a, const Rat& b) {
        if (b.num == 0) throw std::domain_error("Rat: division by zero");
        return Rat(a.num * b.den, a.den * b.num);
    }
    Rat operator-() const { return Rat(-num, den); }

    friend bool operator==(const Rat& a, const Rat& b) { return a.num == b.num && a.den == b.den; }
    friend bool operator!=(const Rat& a, const Rat& b) { return !(a == b); }
    friend bool operator<(const Rat& a, const Rat& b) { return a.num * b.den < b.num * a.den; }
    friend bool operator<=(const Rat& a, const Rat& b) { return a.num * b.den <= b.num * a.den; }
    friend bool operator>(const Rat& a, const Rat& b) { return b < a; }
    friend bool operator>=(const Rat& a, const Rat& b) { return b <= a; }

    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
    std::string str() const { return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den); }
};

inline Rat rat_min(const Rat& a, const Rat& b) { return a < b ? a : b; }
inline Rat rat_max(const Rat& a, const Rat& b) { return a < b ? b : a; }

// Reduces x into [0, period).
inline Rat rat_mod(Rat x, const Rat& period) {
    while (x < Rat(0)) x = x + period;
    while (x >= period) x = x - period;
    return x;
}

}  // namespace gks
