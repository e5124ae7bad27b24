#pragma once

#include <cstdint>
#include <vector>

namespace delirisk {

/// Owned deterministic random stream (splitmix64 core).
///
/// Every stochastic component of the pipeline draws from one of these so
/// that results are reproducible bit-for-bit across platforms and across
/// thread counts. std::mt19937 would be portable too, but the standard
/// distributions are not; all draws here are specified exactly.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();

    /// Uniform double in [0, 1), 53 random bits.
    double uniform();

    /// Uniform integer in [0, n). n must be > 0. Unbiased (rejection).
    std::uint64_t uniform_int(std::uint64_t n);

    /// Standard normal deviate (polar Box-Muller, cached pair).
    double normal();

    /// Exponential deviate with the given mean.
    double exponential(double mean);

    bool bernoulli(double p) { return uniform() < p; }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// Child stream for a tagged subtask (fold index, stage id, ...).
    /// Derivation is a pure function of (parent seed, tag), so parallel
    /// subtasks get independent, order-free streams.
    Rng derive(std::uint64_t tag) const;

    std::uint64_t seed() const { return state_; }

private:
    std::uint64_t state_;
    bool has_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

/// Stage tags used to derive independent streams from the master seed.
namespace rng_tag {
inline constexpr std::uint64_t kSynth = 0x01;
inline constexpr std::uint64_t kFoldSplit = 0x02;
inline constexpr std::uint64_t kResample = 0x03;
inline constexpr std::uint64_t kTrainInit = 0x04;
inline constexpr std::uint64_t kTrainEpoch = 0x05;
inline constexpr std::uint64_t kDropout = 0x06;
inline constexpr std::uint64_t kBootstrap = 0x07;
inline constexpr std::uint64_t kFoldTrain = 0x08;
inline constexpr std::uint64_t kInnerSplit = 0x09;
}  // namespace rng_tag

}  // namespace delirisk
