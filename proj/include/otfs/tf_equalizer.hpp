#pragma once

#include <cstdint>
#include <span>

#include "otfs/channel.hpp"
#include "otfs/frame.hpp"
#include "otfs/mrc_detector.hpp"

namespace otfs {

// M x N time-frequency grid (frequency index m, time index n), row-major.
struct TimeFrequencyGrid {
    std::size_t M = 0;
    std::size_t N = 0;
    ComplexVector entries;

    Complex& operator()(std::size_t m, std::size_t n) { return entries[m * N + n]; }
    const Complex& operator()(std::size_t m, std::size_t n) const { return entries[m * N + n]; }
};

// Unitary ISFFT: DFT along delay, IDFT along Doppler, scaled by 1/sqrt(MN).
TimeFrequencyGrid isfft(std::span<const Complex> dd, std::size_t M, std::size_t N);
// Inverse of isfft.
ComplexVector sfft(const TimeFrequencyGrid& tf);

inline TimeFrequencyGrid isfft(const DelayDopplerGrid& g) { return isfft(g.entries(), g.M(), g.N()); }

// Ideal-pulse delay-Doppler impulse response: H_dd(l_i, [k_i]_N) = sum of h_i.
struct IdealDDChannelMatrix {
    std::size_t M = 0;
    std::size_t N = 0;
    ComplexVector entries;
};

IdealDDChannelMatrix ideal_dd_channel(const ChannelModel& model, const FrameConfig& cfg);
IdealDDChannelMatrix ideal_dd_channel(const DopplerSpreadTable& table);

// Single-tap channel for the ideal pulse: the unnormalized 2-D transform of
// H_dd, so that sfft(isfft(X) o H_tf) is the 2-D circular convolution of X
// with H_dd.
TimeFrequencyGrid tf_response(const IdealDDChannelMatrix& h);

// X_tf = (H_tf^* o Y_tf) / (|H_tf|^2 + sigma_w^2), X = sfft(X_tf). Rows from
// M - l_max on are zeroed. Bins with zero denominator are set to zero.
DelayDopplerGrid mmse_tf_estimate(const DelayDopplerGrid& Y, const IdealDDChannelMatrix& h, double sigma_w,
                                  std::size_t l_max, OpCounters* counters = nullptr);

struct OfdmResult {
    Bits bits;
    std::vector<std::uint32_t> symbols;
};

// CP-OFDM reference link: N symbols of M subcarriers with an l_max cyclic
// prefix through apply_channel_time, AWGN, and a per-subcarrier MMSE
// equalizer using the channel response at each symbol's mid-point. Expects
// M * N * log2|Q| bits.
OfdmResult ofdm_mmse_baseline(std::span<const std::uint8_t> bits, const ChannelModel& model, const FrameConfig& cfg,
                              const QamAlphabet& alphabet, double sigma_w, std::uint64_t seed);

}  // namespace otfs
