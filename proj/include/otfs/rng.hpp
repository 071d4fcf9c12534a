#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace otfs {

// Philox4x32-10 counter-based generator (Salmon et al., Random123).
//
// The output is a pure function of (key, counter), so every simulation frame
// gets its own stream from a derived key and results never depend on which
// worker ran the frame. Satisfies UniformRandomBitGenerator.
class Philox4x32 {
public:
    using result_type = std::uint32_t;

    explicit Philox4x32(std::uint64_t key, std::uint64_t stream = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    // Raw block function, exposed for known-answer tests.
    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                              std::array<std::uint32_t, 2> key);

private:
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 4> buffer_{};
    unsigned used_ = 4;
};

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Per-frame seed: hash of the master seed and two indices (SNR point, frame).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

// Sub-stream ids carved out of one frame seed.
enum class Stream : std::uint64_t { channel = 1, payload = 2, noise = 3, interleaver = 4 };

inline Philox4x32 make_rng(std::uint64_t seed, Stream s) {
    return Philox4x32(seed, static_cast<std::uint64_t>(s));
}

}  // namespace otfs
