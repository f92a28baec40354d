#pragma once

#include <cstdint>
#include <vector>

namespace copfl {

// Deterministic keyed random streams. Every source of randomness in a run is
// a Stream derived from (seed, domain, indices...), so results do not depend
// on thread count or scheduling order.
namespace rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Stream domains. Keeping these distinct is what separates e.g. the data
// generator from the model initializer under the same experiment seed.
enum class Domain : std::uint64_t {
    init = 0x1,
    data = 0x2,
    assign = 0x3,
    shift = 0x4,
    batch = 0x5,
    test = 0xff,  // reserved for test code
};

// Folds the seed, domain and any number of indices into one 64-bit key.
template <typename... Parts>
std::uint64_t derive_key(std::uint64_t seed, Domain domain, Parts... parts) {
    std::uint64_t key = seed;
    auto fold = [&key](std::uint64_t part) {
        key ^= part + 0x9e3779b97f4a7c15ull + (key << 6) + (key >> 2);
        std::uint64_t s = key;
        key = splitmix64(s);
    };
    fold(static_cast<std::uint64_t>(domain));
    (fold(static_cast<std::uint64_t>(parts)), ...);
    return key;
}

class Stream {
public:
    explicit Stream(std::uint64_t key) : state_(key) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // Uniform in [0, 1) with 53 bits of precision.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Unbiased integer in [0, bound) via rejection.
    std::uint64_t next_below(std::uint64_t bound);

    // Standard normal via Box-Muller; pairs are cached.
    double next_normal();

    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i + 1));
            std::swap(v[i], v[j]);
        }
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace rng
}  // namespace copfl
