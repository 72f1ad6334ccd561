/**
 * @file rng.hpp
 * @brief Deterministic random-number streams.
 *
 * Every stochastic routine draws from an explicitly seeded stream, never from
 * global state. Streams are derived from a global seed plus a salt (a user id
 * or a stage tag), so per-user work can run on any number of threads and still
 * reproduce byte-identical results: each unit of work owns its own stream and
 * consumes it in a fixed order.
 *
 * The engine is std::mt19937_64, whose output sequence is pinned by the
 * standard. Variate generation (bounded integers, reals, shuffles) is
 * implemented here rather than with <random> distributions, because
 * distribution output is implementation-defined and would not be portable.
 */

#ifndef PREFERREC_RNG_HPP
#define PREFERREC_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace preferrec {

/// One round of the splitmix64 mixer; used to spread seeds and salts.
[[nodiscard]] inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// FNV-1a 64-bit hash; used for stream tags and file content hashes.
[[nodiscard]] inline std::uint64_t fnv1a64(std::string_view bytes,
                                           std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// A self-contained deterministic random stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

    /// Stream for a named pipeline stage (e.g. "guided-init").
    [[nodiscard]] static Rng for_stream(std::uint64_t global_seed, std::string_view tag) {
        return Rng(splitmix64(global_seed ^ fnv1a64(tag)));
    }

    /// Stream owned by one user within one named stage. Distinct users and
    /// distinct stages never share a stream.
    [[nodiscard]] static Rng for_user(std::uint64_t global_seed, std::int64_t user,
                                      std::string_view stage) {
        std::uint64_t h = fnv1a64(stage);
        h = splitmix64(h ^ static_cast<std::uint64_t>(user));
        return Rng(splitmix64(global_seed ^ h));
    }

    [[nodiscard]] std::uint64_t next_u64() { return gen_(); }

    /// Uniform integer in [0, n). Requires n > 0.
    [[nodiscard]] std::size_t uniform_index(std::size_t n) {
        // Multiply-shift mapping of a full 64-bit draw onto [0, n).
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(gen_()) * n) >> 64);
    }

    /// Uniform real in [0, 1) with 53 bits of precision.
    [[nodiscard]] double uniform_real() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    [[nodiscard]] bool bernoulli(double p) { return uniform_real() < p; }

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

} // namespace preferrec

#endif // PREFERREC_RNG_HPP
