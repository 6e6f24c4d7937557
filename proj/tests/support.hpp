#pragma once

// Shared test utilities: a deterministic RNG and small independent oracles
// (these stay out of the library on purpose).

#include <cstdint>
#include <map>
#include <vector>

#include "gks/cell_complex.hpp"

namespace testsupport {

struct Rng {
    uint64_t s;
    explicit Rng(uint64_t seed) : s(seed) {}
    uint64_t next() {
        s += 0x9e3779b97f4a7c15ull;
        uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    uint64_t below(uint64_t n) { return next() % n; }
    bool coin() { return next() & 1; }
};

inline int64_t chi_of_ranks(const std::map<int, gks::index_t>& h) {
    int64_t chi = 0;
    for (auto& [k, r] : h) chi += (k % 2 == 0 ? 1 : -1) * static_cast<int64_t>(r);
    return chi;
}

// convolution of rank sequences (Kunneth oracle)
inline std::map<int, gks::index_t> convolve(const std::map<int, gks::index_t>& a,
                                            const std::map<int, gks::index_t>& b) {
    std::map<int, gks::index_t> out;
    for (auto& [i, r] : a)
        for (auto& [j, s] : b) out[i + j] += r * s;
    for (auto it = out.begin(); it != out.end();)
        it = it->second == 0 ? out.erase(it) : std::next(it);
    return out;
}

// random closed subcomplex: down-closure of a random cell subset
inline gks::CellSet random_closed_set(const gks::CellComplex& X, Rng& rng, int density_pct = 30) {
    std::vector<char> seeds(X.size(), 0);
    for (gks::index_t c = 0; c < X.size(); ++c) seeds[c] = rng.below(100) < static_cast<uint64_t>(density_pct);
    return gks::down_closure(X, seeds);
}

inline gks::CellSet random_open_set(const gks::CellComplex& X, Rng& rng, int density_pct = 30) {
    std::vector<char> seeds(X.size(), 0);
    for (gks::index_t c = 0; c < X.size(); ++c) seeds[c] = rng.below(100) < static_cast<uint64_t>(density_pct);
    return gks::up_closure(X, seeds);
}

}  // namespace testsupport
