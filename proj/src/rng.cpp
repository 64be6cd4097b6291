#include "selfclust/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace selfclust {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// FNV-1a
std::uint64_t hash_name(std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

SeededRng::Engine& SeededRng::stream(std::string_view purpose) {
    auto it = streams_.find(purpose);
    if (it == streams_.end()) {
        auto derived = splitmix64(seed_ ^ splitmix64(hash_name(purpose)));
        it = streams_.emplace(std::string(purpose), Engine(derived)).first;
    }
    return it->second;
}

double SeededRng::uniform(std::string_view purpose) {
    return static_cast<double>(stream(purpose)() >> 11) * 0x1.0p-53;
}

double SeededRng::normal(std::string_view purpose) {
    double u1 = uniform(purpose);
    double u2 = uniform(purpose);
    // 1 - u1 lies in (0, 1], keeping the log finite.
    return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t SeededRng::below(std::string_view purpose, std::uint64_t n) {
    if (n == 0) return 0;
    // Rejection sampling removes modulo bias.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    auto& eng = stream(purpose);
    std::uint64_t x;
    do {
        x = eng();
    } while (x >= limit);
    return x % n;
}

}  // namespace selfclust
