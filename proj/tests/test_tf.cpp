#include <doctest.h>

#include <cmath>

#include "otfs/mrc_detector.hpp"
#include "otfs/tf_equalizer.hpp"
#include "test_util.hpp"

using namespace otfs;
using testing::max_abs_diff;

namespace {

// 2-D circular convolution of X with the ideal-pulse response.
ComplexVector circular_conv(std::span<const Complex> X, const IdealDDChannelMatrix& h) {
    const std::size_t M = h.M, N = h.N;
    ComplexVector Y(M * N);
    for (std::size_t l = 0; l < M; ++l)
        for (std::size_t k = 0; k < N; ++k) {
            const Complex g = h.entries[l * N + k];
            if (g == Complex(0, 0)) continue;
            for (std::size_t m = 0; m < M; ++m)
                for (std::size_t n = 0; n < N; ++n) Y[m * N + n] += g * X[((m + M - l) % M) * N + (n + N - k) % N];
        }
    return Y;
}

}  // namespace

TEST_CASE("isfft of zero and of an impulse") {
    ComplexVector z(64);
    for (const auto& v : isfft(z, 8, 8).entries) CHECK(v == Complex(0, 0));
    ComplexVector d(64);
    d[0] = 1.0;
    for (const auto& v : isfft(d, 8, 8).entries) CHECK(std::abs(v - Complex(0.125, 0)) < 1e-15);
}

TEST_CASE("isfft is unitary and sfft inverts it") {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const std::size_t M = 4u << (s % 3), N = 2u << (s % 4);
        auto x = testing::random_vector(M * N, s);
        auto tf = isfft(x, M, N);
        CHECK(testing::norm2(tf.entries) == doctest::Approx(testing::norm2(x)).epsilon(1e-12));
        CHECK(max_abs_diff(sfft(tf), x) < 1e-12);
    }
}

TEST_CASE("tf product is a 2-D circular convolution") {
    FrameConfig cfg(16, 8, 4);
    for (std::uint64_t s = 0; s < 10; ++s) {
        auto ch = testing::random_channel(cfg, 4, s);
        auto h = ideal_dd_channel(ch, cfg);
        auto x = testing::random_vector(128, s + 1);
        auto tf = isfft(x, 16, 8);
        auto H = tf_response(h);
        for (std::size_t i = 0; i < tf.entries.size(); ++i) tf.entries[i] *= H.entries[i];
        CHECK(max_abs_diff(sfft(tf), circular_conv(x, h)) < 1e-10);
    }
}

TEST_CASE("ideal channel from model and from table agree") {
    FrameConfig cfg(16, 8, 4);
    auto ch = testing::random_channel(cfg, 6, 3);
    DopplerSpreadTable t(ch, cfg);
    CHECK(max_abs_diff(ideal_dd_channel(ch, cfg).entries, ideal_dd_channel(t).entries) < 1e-15);
}

TEST_CASE("mmse on a unit path returns the input") {
    FrameConfig cfg(16, 8, 3);
    auto h = ideal_dd_channel(testing::single_path(cfg, Complex(1, 0), 0, 0), cfg);
    QamAlphabet a(4);
    auto X = testing::random_frame(cfg, a, 1);
    auto est = mmse_tf_estimate(X, h, 0.0, 3);
    CHECK(max_abs_diff(est.entries(), X.entries()) < 1e-12);
    auto shrunk = mmse_tf_estimate(X, h, 1e6, 3);
    CHECK(testing::norm2(shrunk.entries()) < 1e-9);
}

TEST_CASE("noiseless mmse inverts an ideal-pulse channel") {
    FrameConfig cfg(16, 8, 4);
    QamAlphabet a(16);
    ChannelModel ch({{Complex(1, 0), 0, 0}, {Complex(0.3, 0.2), 2, 1}}, cfg, false);
    auto h = ideal_dd_channel(ch, cfg);
    auto X = testing::random_frame(cfg, a, 6);
    DelayDopplerGrid Y(16, 8, circular_conv(X.entries(), h), GridRole::receive);
    auto est = mmse_tf_estimate(Y, h, 0.0, 4);
    CHECK(max_abs_diff(est.entries(), X.entries()) < 1e-10);
}

TEST_CASE("matched regularization beats zero forcing on average") {
    FrameConfig cfg(16, 16, 4);
    QamAlphabet a(4);
    const double sigma = 0.5;
    double err_zf = 0.0, err_mmse = 0.0, err_over = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        auto ch = testing::random_channel(cfg, 4, s);
        auto h = ideal_dd_channel(ch, cfg);
        auto X = testing::random_frame(cfg, a, s);
        ComplexVector y = circular_conv(X.entries(), h);
        add_awgn(y, sigma, s);
        DelayDopplerGrid Y(16, 16, y, GridRole::receive);
        auto e = [&](double reg) {
            auto est = mmse_tf_estimate(Y, h, reg, 4);
            double d = 0.0;
            for (std::size_t i = 0; i < est.entries().size(); ++i) d += std::norm(est.entries()[i] - X.entries()[i]);
            return d;
        };
        err_zf += e(1e-3);
        err_mmse += e(sigma);
        err_over += e(4.0 * sigma);
    }
    CHECK(err_mmse <= err_zf);
    CHECK(err_mmse <= err_over);
}

TEST_CASE("mmse estimate zeroes null rows and counts its multiplies") {
    FrameConfig cfg(32, 8, 5);
    auto h = ideal_dd_channel(testing::random_channel(cfg, 3, 1), cfg);
    DelayDopplerGrid Y(32, 8, testing::random_vector(256, 2), GridRole::receive);
    OpCounters c;
    auto est = mmse_tf_estimate(Y, h, 0.1, 5, &c);
    for (std::size_t m = 27; m < 32; ++m)
        for (const auto& v : est.row(m)) CHECK(v == Complex(0, 0));
    CHECK(c.tf_init == 256u * (3u + 3u * 8u));
    CHECK(c.tf_init == complexity_terms(cfg, 3, 1).tf_init);
}

TEST_CASE("ofdm on a static channel is error free without noise") {
    FrameConfig cfg(64, 8, 6);
    for (unsigned q : {4u, 16u}) {
        QamAlphabet a(q);
        ChannelModel ch({{Complex(1, 0), 0, 0}, {Complex(0.4, -0.3), 3, 0}, {Complex(0.1, 0.2), 6, 0}}, cfg);
        auto bits = testing::random_bits(64 * 8 * a.bits_per_symbol(), q);
        auto r = ofdm_mmse_baseline(bits, ch, cfg, a, 0.0, 1);
        CHECK(r.bits == bits);
    }
}

TEST_CASE("ofdm rejects delays beyond the cyclic prefix") {
    FrameConfig cfg(64, 8, 6);
    QamAlphabet a(4);
    ChannelModel ch({{Complex(1, 0), 10, 0}}, cfg);
    auto bits = testing::random_bits(64 * 8 * 2, 1);
    CHECK_THROWS_AS(ofdm_mmse_baseline(bits, ch, cfg, a, 0.0, 1), std::invalid_argument);
}
