#pragma once

#include <array>
#include <cstdint>

namespace lossq {

// splitmix64 (Steele, Lea, Flood). Used both as a state mixer for seeding
// and to derive independent substream states from (seed, stream) pairs.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

// xoshiro256++ with splittable substreams: the state is derived from
// (seed, stream) through splitmix64, so every replication owns an
// independent stream addressed by its index. Identical (seed, stream)
// always reproduces the same draw sequence, regardless of how the
// streams are scheduled across workers.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0) {
        SplitMix64 mixer(seed ^ (0xD1B54A32D192ED03ULL * (stream + 1)));
        for (auto& word : state_) word = mixer.next();
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform draw strictly inside (0,1): 53-bit mantissa offset by half an
    // ulp, so log() and inverse-cdf transforms never see 0 or 1.
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_;
};

}  // namespace lossq
