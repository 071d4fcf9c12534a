#include <doctest.h>

#include <cmath>

#include "otfs/ldpc.hpp"
#include "otfs/turbo.hpp"
#include "test_util.hpp"

using namespace otfs;

namespace {

const LdpcCode& code1024() {
    static const LdpcCode c = LdpcCode::load(std::string(OTFS_DATA_DIR) + "/ldpc/peg_n1024_r12.alist");
    return c;
}

struct Link {
    FrameConfig cfg{64, 32, 8};
    QamAlphabet alphabet{16};
    Interleaver interleaver{cfg.payload_symbols() * 4, 77};
    std::size_t words = codewords_per_frame(cfg, alphabet, code1024());

    DelayDopplerGrid transmit(const Bits& info) const {
        return encode_frame(info, code1024(), interleaver, alphabet, cfg);
    }
};

DecodeResult identity_decoder(std::span<const double> llrs) {
    DecodeResult r;
    r.llrs.assign(llrs.begin(), llrs.end());
    r.bits.resize(llrs.size());
    for (std::size_t i = 0; i < llrs.size(); ++i) r.bits[i] = llrs[i] < 0.0;
    return r;
}

}  // namespace

TEST_CASE("frame capacity must be a multiple of the code length") {
    QamAlphabet q4(4);
    CHECK_THROWS_AS(codewords_per_frame(FrameConfig(64, 32, 8), q4, code1024()), std::invalid_argument);
    CHECK(codewords_per_frame(FrameConfig(64, 32, 8), QamAlphabet(16), code1024()) == 7);
}

TEST_CASE("noiseless turbo recovers the payload") {
    Link k;
    EvaOptions o;
    o.doppler_cap = 8;
    DopplerSpreadTable t(generate_eva(k.cfg, o, 3), k.cfg);
    auto info = testing::random_bits(k.words * code1024().k(), 1);
    auto Y = apply_channel(k.transmit(info), t, 0.0, 1);
    TurboConfig tc;
    tc.detector.init = InitMode::tf_mmse;
    tc.n_turbo = 1;
    auto r = turbo_detect(Y, t, k.alphabet, code1024(), k.interleaver, tc);
    CHECK(r.info_bits == info);
    for (char c : r.converged) CHECK(c == 1);
}

TEST_CASE("one turbo iteration equals coded detection with one pass") {
    Link k;
    DopplerSpreadTable t(generate_eva(k.cfg, {120.0, 8, 0.0}, 5), k.cfg);
    for (std::uint64_t s = 0; s < 3; ++s) {
        auto info = testing::random_bits(k.words * code1024().k(), s);
        const double sigma = std::pow(10.0, -14.0 / 20.0);
        auto Y = apply_channel(k.transmit(info), t, sigma, s);
        TurboConfig tc;
        tc.detector.init = InitMode::tf_mmse;
        tc.detector.sigma_w = sigma;
        tc.n_turbo = 1;
        DetectorConfig dc = tc.detector;
        dc.iterations = 1;
        auto a = turbo_detect(Y, t, k.alphabet, code1024(), k.interleaver, tc);
        auto b = coded_detect(Y, t, k.alphabet, code1024(), k.interleaver, dc);
        CHECK(a.info_bits == b.info_bits);
        CHECK(a.converged == b.converged);
        CHECK(a.passes == b.passes);
    }
}

TEST_CASE("turbo with a pass-through decoder equals plain detection") {
    Link k;
    DopplerSpreadTable t(generate_eva(k.cfg, {120.0, 8, 0.0}, 6), k.cfg);
    auto info = testing::random_bits(k.words * code1024().k(), 9);
    const double sigma = std::pow(10.0, -12.0 / 20.0);
    auto Y = apply_channel(k.transmit(info), t, sigma, 9);
    for (int T : {1, 2, 3}) {
        TurboConfig tc;
        tc.detector.sigma_w = sigma;
        tc.n_turbo = T;
        auto turbo = turbo_detect(Y, t, k.alphabet, code1024(), k.interleaver, tc, identity_decoder);
        DetectorConfig dc;
        dc.iterations = T;
        auto plain = detect(Y, t, k.alphabet, dc);
        auto coded = qam_demodulate(plain.symbols, k.alphabet);
        auto deint = k.interleaver.deinterleave(std::span<const std::uint8_t>(coded));
        Bits expect;
        for (std::size_t w = 0; w < k.words; ++w) {
            auto info_w = code1024().extract_info(std::span<const std::uint8_t>(deint).subspan(w * 1024, 1024));
            expect.insert(expect.end(), info_w.begin(), info_w.end());
        }
        CHECK(turbo.info_bits == expect);
        CHECK(turbo.passes == T);
    }
}

TEST_CASE("restarting the cache does not change decisions") {
    Link k;
    DopplerSpreadTable t(generate_eva(k.cfg, {120.0, 8, 0.0}, 7), k.cfg);
    auto info = testing::random_bits(k.words * code1024().k(), 2);
    const double sigma = std::pow(10.0, -13.0 / 20.0);
    auto Y = apply_channel(k.transmit(info), t, sigma, 2);
    TurboConfig tc;
    tc.detector.init = InitMode::tf_mmse;
    tc.detector.sigma_w = sigma;
    tc.n_turbo = 3;
    auto a = turbo_detect(Y, t, k.alphabet, code1024(), k.interleaver, tc);
    tc.restart_from_scratch = true;
    auto b = turbo_detect(Y, t, k.alphabet, code1024(), k.interleaver, tc);
    CHECK(a.info_bits == b.info_bits);
    CHECK(a.counters.iterative == b.counters.iterative);
}

TEST_CASE("turbo rejects a mismatched interleaver") {
    Link k;
    DopplerSpreadTable t(generate_eva(k.cfg, {120.0, 8, 0.0}, 7), k.cfg);
    DelayDopplerGrid Y(64, 32, GridRole::receive);
    Interleaver small(100, 1);
    CHECK_THROWS_AS(turbo_detect(Y, t, k.alphabet, code1024(), small, TurboConfig{}), std::invalid_argument);
    TurboConfig zero;
    zero.n_turbo = 0;
    CHECK_THROWS_AS(turbo_detect(Y, t, k.alphabet, code1024(), k.interleaver, zero), std::invalid_argument);
}
