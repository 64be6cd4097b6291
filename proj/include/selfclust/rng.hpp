#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>

namespace selfclust {

/// Seeded source of independent named random streams.
///
/// Each purpose ("init-centroids", "init-weights", "shuffling", "synth-data", ...)
/// owns its own engine whose seed is derived from (seed, purpose). Drawing from one
/// stream never perturbs another, so results do not depend on how calls for
/// different purposes interleave.
class SeededRng {
public:
    using Engine = std::mt19937_64;

    static constexpr std::string_view kInitCentroids = "init-centroids";
    static constexpr std::string_view kInitWeights = "init-weights";
    static constexpr std::string_view kShuffling = "shuffling";
    static constexpr std::string_view kSynthData = "synth-data";

    explicit SeededRng(std::uint64_t seed = 0) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    Engine& stream(std::string_view purpose);

    /// Uniform in [0, 1) with 53 random bits.
    double uniform(std::string_view purpose);
    /// Standard normal draw (Box-Muller on `uniform`), platform independent.
    double normal(std::string_view purpose);
    /// Uniform integer in [0, n).
    std::uint64_t below(std::string_view purpose, std::uint64_t n);

private:
    std::uint64_t seed_;
    std::map<std::string, Engine, std::less<>> streams_;
};

/// Fisher-Yates shuffle driven by `rng.below`, so the permutation is reproducible
/// across standard library implementations.
template <typename Container>
void shuffle(Container& items, SeededRng& rng, std::string_view purpose) {
    for (std::size_t i = items.size(); i > 1; --i) {
        auto j = static_cast<std::size_t>(rng.below(purpose, i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace selfclust
