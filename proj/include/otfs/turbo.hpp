#pragma once

#include <functional>
#include <span>
#include <vector>

#include "otfs/channel.hpp"
#include "otfs/frame.hpp"
#include "otfs/ldpc.hpp"
#include "otfs/mrc_detector.hpp"

namespace otfs {

struct TurboConfig {
    // Initialization, epsilon and sigma_w are taken from here; the iteration
    // count is ignored (one MRC pass per turbo iteration).
    DetectorConfig detector;
    int n_turbo = 2;
    // Rebuild the y_hat cache from scratch after feedback instead of updating it.
    bool restart_from_scratch = false;
    int decoder_iterations = kDecoderIterations;
    double llr_max = kLlrMax;
};

// Decodes one codeword worth of channel LLRs.
using SoftDecoder = std::function<DecodeResult(std::span<const double>)>;

struct CodedFrameResult {
    Bits info_bits;               // codewords in frame order
    std::vector<char> converged;  // per codeword, from the last decode
    OpCounters counters;
    int passes = 0;
};

// Number of codewords an OTFS frame carries; rejects frames whose coded-bit
// capacity M' N log2|Q| is not a multiple of the code length.
std::size_t codewords_per_frame(const FrameConfig& cfg, const QamAlphabet& alphabet, const LdpcCode& code);

// Encodes consecutive codewords, interleaves over the whole frame and maps
// the coded bits onto the transmit grid.
DelayDopplerGrid encode_frame(std::span<const std::uint8_t> info, const LdpcCode& code, const Interleaver& interleaver,
                              const QamAlphabet& alphabet, const FrameConfig& cfg);

// Turbo MRC: each iteration runs one detector pass, computes LLRs,
// deinterleaves, decodes, re-interleaves, takes hard decisions on the decoder
// output and installs the re-modulated symbols as the new estimates. The last
// iteration's decoder output is returned.
CodedFrameResult turbo_detect(const DelayDopplerGrid& Y, const DopplerSpreadTable& table, const QamAlphabet& alphabet,
                              const LdpcCode& code, const Interleaver& interleaver, const TurboConfig& cfg,
                              const SoftDecoder& decoder = {});

// Coded MRC without feedback: cfg.iterations detector passes, then one decode.
CodedFrameResult coded_detect(const DelayDopplerGrid& Y, const DopplerSpreadTable& table, const QamAlphabet& alphabet,
                              const LdpcCode& code, const Interleaver& interleaver, const DetectorConfig& cfg,
                              int decoder_iterations = kDecoderIterations, double llr_max = kLlrMax,
                              const SoftDecoder& decoder = {});

}  // namespace otfs
