#pragma once

#include <array>
#include <cstdint>

namespace mdbell {

/// Philox-4x32 block function: 10 rounds over a 128-bit counter and 64-bit key.
/// Counter-based, so any block can be generated in O(1) without sequencing.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t prod0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
        const std::uint64_t prod1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
        const std::uint32_t hi0 = static_cast<std::uint32_t>(prod0 >> 32);
        const std::uint32_t lo0 = static_cast<std::uint32_t>(prod0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(prod1 >> 32);
        const std::uint32_t lo1 = static_cast<std::uint32_t>(prod1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

/// SplitMix64 finalizer; used to derive child context ids.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Deterministic child context id for logical sub-task k of a parent context.
inline std::uint64_t derive_context(std::uint64_t parent_context, std::uint64_t k) {
    return splitmix64(parent_context + 0x9E3779B97F4A7C15ull * (k + 1));
}

/// Reproducible random stream addressed by (master_seed, context_id, counter).
///
/// The Philox counter words are (counter lo, counter hi, context lo, context hi)
/// and the key is the master seed, so streams with distinct context_id draw from
/// disjoint regions of one keyed permutation: identical coordinates always replay
/// the same sequence, distinct context ids are statistically independent.
///
/// A stream is a single-consumer value. Parallel consumers must derive disjoint
/// streams via substream() with distinct context ids or counter blocks.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t master_seed, std::uint64_t context_id = 0,
                          std::uint64_t counter = 0)
        : master_seed_(master_seed), context_id_(context_id), counter_(counter) {}

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t context_id() const { return context_id_; }

    /// Index of the next 128-bit block to be generated.
    std::uint64_t counter() const { return counter_; }

    /// Stream with the same master seed but its own (context_id, counter) address.
    RandomStream substream(std::uint64_t context_id, std::uint64_t counter = 0) const {
        return RandomStream(master_seed_, context_id, counter);
    }

    std::uint64_t next_u64() {
        if (avail_ == 0) {
            refill();
        }
        return buf_[--avail_];
    }

    /// Uniform double in [0, 1) from the top 53 bits of one 64-bit draw.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  private:
    void refill() {
        const std::array<std::uint32_t, 4> ctr = {
            static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
            static_cast<std::uint32_t>(context_id_), static_cast<std::uint32_t>(context_id_ >> 32)};
        const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(master_seed_),
                                                  static_cast<std::uint32_t>(master_seed_ >> 32)};
        const auto out = philox4x32(ctr, key);
        buf_[1] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
        buf_[0] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
        avail_ = 2;
        ++counter_;
    }

    std::uint64_t master_seed_;
    std::uint64_t context_id_;
    std::uint64_t counter_;
    std::uint64_t buf_[2] = {0, 0};
    int avail_ = 0;
};

}  // namespace mdbell
