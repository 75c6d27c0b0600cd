#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace wat {

// Deterministic RNG with cheap keyed substreams. Substreams let batch attacks
// and Monte Carlo workers draw independently while keeping results
// bit-identical regardless of evaluation order.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(splitmix(seed ^ 0x9e3779b97f4a7c15ull)) {}

    // Derive an independent stream from a seed and a key path, e.g.
    // Rng::substream(seed, {kAttack, epoch, batch, i}).
    static Rng substream(uint64_t seed, std::initializer_list<uint64_t> path) {
        uint64_t s = splitmix(seed ^ 0x85ebca6b0aaf13b7ull);
        for (uint64_t p : path) s = splitmix(s ^ splitmix(p + 0x165667b19e3779f9ull));
        Rng r(0);
        r.state_ = s;
        return r;
    }

    uint64_t next_u64() {
        state_ = splitmix(state_);
        return state_;
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller (fresh pair per call; no cached spare,
    // so the stream position is a pure function of the call count).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Uniform integer in [0, n).
    uint64_t below(uint64_t n) {
        // rejection sampling, unbiased
        uint64_t threshold = (~n + 1) % n;  // (2^64 - n) mod n
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    double sign() { return (next_u64() & 1) ? 1.0 : -1.0; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static uint64_t splitmix(uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    uint64_t state_;
};

// Substream keys used across the project (kept in one place so streams never
// collide between subsystems).
namespace rngkey {
constexpr uint64_t kModelInit = 1;
constexpr uint64_t kShuffle = 2;
constexpr uint64_t kTrainAttack = 3;
constexpr uint64_t kEvalAttack = 4;
constexpr uint64_t kDataGen = 5;
constexpr uint64_t kRademacher = 6;
constexpr uint64_t kRestart = 7;
}  // namespace rngkey

}  // namespace wat
