#pragma once

#include <bit>
#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace syrbo {

// splitmix64 finalizer; used for seed derivation only.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derive an independent child seed from (master, salt). Chain calls for
// multi-part salts; the chaining order is the documented stream order.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t salt) {
    return splitmix64(splitmix64(master) ^ splitmix64(salt + 0x9e3779b97f4a7c15ULL));
}

template <typename... Salts>
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t salt, Salts... rest) {
    return derive_seed(derive_seed(master, salt), rest...);
}

// FNV-1a, for deriving seed salts from names.
constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Deterministic random stream. Wraps std::mt19937_64 (whose output sequence
// is pinned by the standard) with our own int/real mappings, so every draw is
// reproducible across platforms and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, n) via bitmask rejection (unbiased).
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        std::uint64_t mask = ~std::uint64_t{0} >> std::countl_zero(n - 1);
        for (;;) {
            std::uint64_t v = next_u64() & mask;
            if (v < n) return v;
        }
    }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(below(n)); }

    // Uniform in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double range(double lo, double hi) { return lo + (hi - lo) * unit(); }

    bool chance(double p) { return unit() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace syrbo
