#include "otfs/turbo.hpp"

#include <stdexcept>
#include <string>

namespace otfs {

namespace {

struct DecodedFrame {
    std::vector<double> posteriors;  // deinterleaved order, codeword after codeword
    Bits info;
    std::vector<char> converged;
};

DecodedFrame decode_frame(const DetectorState& s, const QamAlphabet& alphabet, const LdpcCode& code,
                          const Interleaver& interleaver, double sigma_w, double llr_max, double epsilon,
                          int decoder_iterations, const SoftDecoder& decoder) {
    const auto llrs = soft_llrs(s.combiner, s.r_spectra, s.N, sigma_w, alphabet, llr_max, epsilon);
    const auto coded = interleaver.deinterleave(std::span<const double>(llrs));
    const std::size_t n = code.n();
    const std::size_t words = coded.size() / n;

    DecodedFrame out;
    out.posteriors.resize(coded.size());
    out.converged.resize(words);
    for (std::size_t w = 0; w < words; ++w) {
        const std::span<const double> block(coded.data() + w * n, n);
        const DecodeResult r = decoder ? decoder(block) : ldpc_decode(block, code, decoder_iterations);
        std::copy(r.llrs.begin(), r.llrs.end(), out.posteriors.begin() + static_cast<std::ptrdiff_t>(w * n));
        const Bits info = code.extract_info(r.bits);
        out.info.insert(out.info.end(), info.begin(), info.end());
        out.converged[w] = r.converged ? 1 : 0;
    }
    return out;
}

}  // namespace

std::size_t codewords_per_frame(const FrameConfig& cfg, const QamAlphabet& alphabet, const LdpcCode& code) {
    const std::size_t capacity = cfg.payload_symbols() * alphabet.bits_per_symbol();
    if (capacity % code.n() != 0)
        throw std::invalid_argument("frame carries " + std::to_string(capacity) +
                                    " coded bits, not a multiple of the code length " + std::to_string(code.n()));
    return capacity / code.n();
}

DelayDopplerGrid encode_frame(std::span<const std::uint8_t> info, const LdpcCode& code, const Interleaver& interleaver,
                              const QamAlphabet& alphabet, const FrameConfig& cfg) {
    const std::size_t words = codewords_per_frame(cfg, alphabet, code);
    if (info.size() != words * code.k())
        throw std::invalid_argument("encode_frame: expected " + std::to_string(words * code.k()) + " info bits");
    Bits coded;
    coded.reserve(words * code.n());
    for (std::size_t w = 0; w < words; ++w) {
        const Bits cw = code.encode(info.subspan(w * code.k(), code.k()));
        coded.insert(coded.end(), cw.begin(), cw.end());
    }
    const Bits tx = interleaver.interleave(std::span<const std::uint8_t>(coded));
    return map_to_grid(qam_modulate(tx, alphabet), cfg);
}

CodedFrameResult turbo_detect(const DelayDopplerGrid& Y, const DopplerSpreadTable& table, const QamAlphabet& alphabet,
                              const LdpcCode& code, const Interleaver& interleaver, const TurboConfig& cfg,
                              const SoftDecoder& decoder) {
    if (cfg.n_turbo < 1) throw std::invalid_argument("turbo_detect: need at least one turbo iteration");
    const auto& fc = table.config();
    codewords_per_frame(fc, alphabet, code);
    if (interleaver.size() != fc.payload_symbols() * alphabet.bits_per_symbol())
        throw std::invalid_argument("turbo_detect: interleaver does not span the frame");

    DetectorConfig init = cfg.detector;
    init.iterations = 0;
    DetectorState s = detect(Y, table, alphabet, init);

    const unsigned bps = alphabet.bits_per_symbol();
    CodedFrameResult res;
    for (int t = 1; t <= cfg.n_turbo; ++t) {
        mrc_iterate(s, table, alphabet);
        DecodedFrame d = decode_frame(s, alphabet, code, interleaver, cfg.detector.sigma_w, cfg.llr_max,
                                      cfg.detector.epsilon, cfg.decoder_iterations, decoder);
        if (t == cfg.n_turbo) {
            res.info_bits = std::move(d.info);
            res.converged = std::move(d.converged);
            break;
        }
        // Hard decisions on the re-interleaved decoder output.
        const auto fed = interleaver.interleave(std::span<const double>(d.posteriors));
        std::vector<std::uint32_t> symbols(s.rows * s.N);
        ComplexVector x_new(symbols.size());
        for (std::size_t i = 0; i < symbols.size(); ++i) {
            std::uint32_t label = 0;
            for (unsigned b = 0; b < bps; ++b) label = (label << 1) | (fed[i * bps + b] < 0.0 ? 1u : 0u);
            symbols[i] = label;
            x_new[i] = alphabet.point(label);
        }
        install_estimates(s, table, x_new, symbols, cfg.restart_from_scratch);
    }
    res.counters = s.counters;
    res.passes = s.passes;
    return res;
}

CodedFrameResult coded_detect(const DelayDopplerGrid& Y, const DopplerSpreadTable& table, const QamAlphabet& alphabet,
                              const LdpcCode& code, const Interleaver& interleaver, const DetectorConfig& cfg,
                              int decoder_iterations, double llr_max, const SoftDecoder& decoder) {
    const auto& fc = table.config();
    codewords_per_frame(fc, alphabet, code);
    if (interleaver.size() != fc.payload_symbols() * alphabet.bits_per_symbol())
        throw std::invalid_argument("coded_detect: interleaver does not span the frame");
    if (cfg.iterations < 1) throw std::invalid_argument("coded_detect: need at least one detector pass");
    const DetectorState s = detect(Y, table, alphabet, cfg);
    DecodedFrame d = decode_frame(s, alphabet, code, interleaver, cfg.sigma_w, llr_max, cfg.epsilon,
                                  decoder_iterations, decoder);
    CodedFrameResult res;
    res.info_bits = std::move(d.info);
    res.converged = std::move(d.converged);
    res.counters = s.counters;
    res.passes = s.passes;
    return res;
}

}  // namespace otfs
