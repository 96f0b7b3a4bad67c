#pragma once

#include <cstdint>
#include <string_view>

namespace adn {

// splitmix64 (Vigna's reference constants). Used both as the stream
// generator and as the mixer for deriving sub-streams from a master seed.
struct SplitMix64 {
    std::uint64_t state = 0;

    explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n) by rejection; exact for any n >= 1.
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t threshold = -n % n;  // 2^64 mod n
        for (;;) {
            const std::uint64_t v = next();
            if (v >= threshold) return v % n;
        }
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }
};

inline std::uint64_t mix_u64(std::uint64_t a, std::uint64_t b) {
    SplitMix64 g(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
    return g.next();
}

inline std::uint64_t hash_tag(std::string_view tag) {
    // FNV-1a, then one splitmix round to spread low entropy tags.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return SplitMix64(h).next();
}

// Documented splitting rule: every randomness consumer draws from
// derive_stream(master, purpose_tag, indices...). Identical inputs give
// identical streams; distinct purposes or indices give independent ones.
inline std::uint64_t derive_stream(std::uint64_t master, std::string_view tag,
                                   std::uint64_t a = 0, std::uint64_t b = 0,
                                   std::uint64_t c = 0) {
    std::uint64_t h = mix_u64(master, hash_tag(tag));
    h = mix_u64(h, a);
    h = mix_u64(h, b);
    h = mix_u64(h, c);
    return h;
}

}  // namespace adn
