#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "dense_oracle.hpp"
#include "otfs/channel.hpp"
#include "otfs/fft.hpp"
#include "test_util.hpp"

using namespace otfs;
using testing::max_abs_diff;

TEST_CASE("delay quantization") {
    FrameConfig cfg(512, 128, 32);
    CHECK(delay_tap(2510e-9, cfg) == 19);
    CHECK(delay_tap(0.0, cfg) == 0);
    CHECK(delay_tap(30e-9, cfg) == 0);
    CHECK(delay_tap(150e-9, cfg) == 1);
}

TEST_CASE("eva channel is power normalized with capped doppler") {
    FrameConfig cfg(512, 128, 32);
    for (std::uint64_t s = 0; s < 10; ++s) {
        auto ch = generate_eva(cfg, {}, s);
        CHECK(ch.paths().size() == 9);
        CHECK(ch.total_power() == doctest::Approx(1.0).epsilon(1e-12));
        for (const auto& p : ch.paths()) {
            CHECK(p.doppler >= 0);
            CHECK(p.doppler <= 16);
            CHECK(p.delay <= 19);
        }
    }
    EvaOptions bad;
    bad.doppler_cap = 64;
    CHECK_THROWS_AS(generate_eva(cfg, bad, 1), std::invalid_argument);
    FrameConfig tight(512, 128, 8);
    CHECK_THROWS_AS(generate_eva(tight, {}, 1), std::invalid_argument);
}

TEST_CASE("eva with a carrier derives the doppler bound") {
    FrameConfig cfg(512, 128, 32);
    EvaOptions o;
    o.carrier_hz = 4e9;
    o.speed_kmh = 120.0;
    // nu_max = v f_c / c = 444.7 Hz; tap spacing 1/(N T) = 117.2 Hz
    for (std::uint64_t s = 0; s < 10; ++s)
        for (const auto& p : generate_eva(cfg, o, s).paths()) CHECK(p.doppler <= 4);
}

TEST_CASE("channel model validation") {
    FrameConfig cfg(16, 8, 4);
    CHECK_THROWS_AS(ChannelModel({{Complex(1, 0), 16, 0}}, cfg), std::invalid_argument);
    CHECK_THROWS_AS(ChannelModel({{Complex(1, 0), 0, 4}}, cfg), std::invalid_argument);
    CHECK_THROWS_AS(ChannelModel({{Complex(1, 0), 0, -4}}, cfg), std::invalid_argument);
    ChannelModel ch({{Complex(1, 0), 2, 3}, {Complex(0, 1), 0, -3}, {Complex(1, 1), 2, 0}}, cfg);
    CHECK(ch.num_delays() == 2);
    CHECK(ch.k_max() == 3);
    // delays above l_max are rejected by the spread table
    ChannelModel far({{Complex(1, 0), 6, 0}}, cfg);
    CHECK_THROWS_AS(DopplerSpreadTable(far, cfg), std::invalid_argument);
}

TEST_CASE("rectangular phase table") {
    FrameConfig cfg(16, 8, 4);
    PhaseTable t(cfg);
    const double MN = 128.0;
    for (std::size_t m = 0; m < 16; ++m)
        for (std::size_t k = 0; k < 8; ++k) {
            CHECK(std::abs(std::abs(t(m, k)) - 1.0) < 1e-14);
            const double e = k < 4 ? double(k * m) : -double((8 - k) * m);
            CHECK(std::abs(t(m, k) - std::polar(1.0, 2.0 * kPi * e / MN)) < 1e-12);
            CHECK(t(m, k) == rect_phase(cfg, m, k));
        }
    for (std::size_t k = 0; k < 8; ++k) CHECK(t(0, k) == Complex(1, 0));
    for (std::size_t m = 0; m < 16; ++m) CHECK(t(m, 0) == Complex(1, 0));
}

TEST_CASE("spread vector of a single delayed doppler path") {
    FrameConfig cfg(4, 4, 1);
    auto ch = testing::single_path(cfg, Complex(1, 0), 1, 1);
    DopplerSpreadTable t(ch, cfg);
    auto v = t.spread_vector(2, 0);
    CHECK(std::abs(v[1] - std::polar(1.0, kPi / 8.0)) < 1e-14);
    CHECK(std::abs(v[0]) == 0.0);
    auto zero = t.spread_vector(0, 0);
    for (const auto& x : zero) CHECK(x == Complex(0, 0));
}

TEST_CASE("identity channel spectra are all ones") {
    FrameConfig cfg(16, 8, 2);
    DopplerSpreadTable t(testing::single_path(cfg, Complex(1, 0), 0, 0), cfg);
    CHECK(t.transforms() == cfg.payload_rows());
    for (std::size_t m = 0; m < cfg.payload_rows(); ++m)
        for (const auto& v : t.spectrum(m, 0)) CHECK(std::abs(v - Complex(1, 0)) < 1e-14);
}

TEST_CASE("circulant via FFT equals the explicit circulant") {
    FrameConfig cfg(16, 16, 5);
    for (std::uint64_t s = 0; s < 10; ++s) {
        auto ch = testing::random_channel(cfg, 4, s);
        DopplerSpreadTable t(ch, cfg);
        for (std::size_t li = 0; li < t.num_delays(); ++li)
            for (std::size_t m = 0; m < cfg.M(); ++m) {
                auto nu = t.spread_vector(m, li);
                auto K = oracle::circulant(nu);
                auto x = testing::random_vector(cfg.N(), s * 100 + m);
                Eigen::Map<const oracle::Vector> xv(x.data(), x.size());
                oracle::Vector ref = K * xv;
                auto lam = t.compute_spectrum(m, li);
                if (t.has_spectrum(m, li)) CHECK(max_abs_diff(lam, t.spectrum(m, li)) < 1e-12);
                auto xs = fft_copy(x);
                for (std::size_t k = 0; k < xs.size(); ++k) xs[k] *= lam[k];
                ifft(xs);
                double err = 0.0;
                for (std::size_t k = 0; k < xs.size(); ++k) err = std::max(err, std::abs(xs[k] - ref(k)));
                CHECK(err < 1e-10);
            }
    }
}

TEST_CASE("stored spectra cover exactly the data source rows") {
    FrameConfig cfg(16, 8, 4);
    DopplerSpreadTable t(ChannelModel({{Complex(1, 0), 0, 1}, {Complex(1, 0), 3, -2}}, cfg), cfg);
    CHECK(t.transforms() == 2 * cfg.payload_rows());
    for (std::size_t li = 0; li < 2; ++li)
        for (std::size_t m = 0; m < 16; ++m) {
            const int src = static_cast<int>(m) - t.delay(li);
            CHECK(t.has_spectrum(m, li) == (src >= 0 && src < static_cast<int>(cfg.payload_rows())));
        }
}

TEST_CASE("identity channel passes the frame through") {
    FrameConfig cfg(16, 8, 3);
    QamAlphabet a(4);
    auto X = testing::random_frame(cfg, a, 2);
    DopplerSpreadTable t(testing::single_path(cfg, Complex(1, 0), 0, 0), cfg);
    auto Y = apply_channel(X, t, 0.0, 1);
    CHECK(max_abs_diff(Y.entries(), X.entries()) < 1e-14);
    CHECK(Y.role() == GridRole::receive);
}

TEST_CASE("fast channel matches the path-by-path relation") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        FrameConfig cfg(16, 8, 4);
        QamAlphabet a(16);
        auto ch = testing::random_channel(cfg, 5, s);
        DopplerSpreadTable t(ch, cfg);
        auto X = testing::random_frame(cfg, a, s + 1);
        auto Y = apply_channel(X, t, 0.0, 0);
        auto R = oracle::apply_exact_io(X, ch, cfg);
        CHECK(max_abs_diff(Y.entries(), R.entries()) < 1e-10);
    }
}

TEST_CASE("single unit path preserves frame energy") {
    FrameConfig cfg(32, 16, 6);
    QamAlphabet a(4);
    auto X = testing::random_frame(cfg, a, 4);
    DopplerSpreadTable t(testing::single_path(cfg, Complex(0.6, 0.8), 6, -5), cfg);
    auto Y = apply_channel(X, t, 0.0, 0);
    CHECK(testing::norm2(Y.entries()) == doctest::Approx(testing::norm2(X.entries())).epsilon(1e-12));
}

TEST_CASE("noise variance matches sigma squared") {
    FrameConfig cfg(512, 128, 32);
    DelayDopplerGrid X(512, 128);
    DopplerSpreadTable t(testing::single_path(cfg, Complex(1, 0), 0, 0), cfg);
    const double sigma = 0.3;
    auto Y = apply_channel(X, t, sigma, 11);
    double p = 0.0;
    for (const auto& v : Y.entries()) p += std::norm(v);
    p /= static_cast<double>(Y.entries().size());
    CHECK(p > 0.95 * sigma * sigma);
    CHECK(p < 1.05 * sigma * sigma);
    auto Y2 = apply_channel(X, t, sigma, 11);
    CHECK(max_abs_diff(Y.entries(), Y2.entries()) == 0.0);
    auto Y3 = apply_channel(X, t, sigma, 12);
    CHECK(max_abs_diff(Y.entries(), Y3.entries()) > 0.0);
}

TEST_CASE("time-domain channel against a direct sum") {
    FrameConfig cfg(16, 8, 4);
    ChannelModel ch({{Complex(1, 0), 0, 0}, {Complex(0.5, -0.2), 3, 2}, {Complex(-0.1, 0.4), 1, -3}}, cfg, false);
    auto x = testing::random_vector(cfg.M() * cfg.N() + cfg.l_max(), 9);
    auto y = apply_channel_time(x, ch, cfg);
    REQUIRE(y.size() == x.size());
    const double MN = double(cfg.M() * cfg.N());
    for (std::size_t q = 0; q < x.size(); ++q) {
        Complex ref(0, 0);
        for (const auto& p : ch.paths())
            if (q >= std::size_t(p.delay))
                ref += p.gain * x[q - p.delay] * std::polar(1.0, 2.0 * kPi * p.doppler * double(q) / MN);
        CHECK(std::abs(y[q] - ref) < 1e-12);
    }
}

TEST_CASE("channel json loading") {
    FrameConfig cfg(16, 8, 4);
    auto dir = std::filesystem::temp_directory_path();
    auto good = dir / "otfs_test_channel_good.json";
    std::ofstream(good) << R"([{"gain_re":1.0,"gain_im":0.0,"delay_tap":0,"doppler_tap":0},
                              {"gain_re":0.0,"gain_im":1.0,"delay_tap":2,"doppler_tap":-1}])";
    auto ch = load_channel_json(good, cfg);
    CHECK(ch.paths().size() == 2);
    CHECK(ch.total_power() == doctest::Approx(1.0));
    CHECK(ch.paths()[1].doppler == -1);

    auto bad = dir / "otfs_test_channel_bad.json";
    std::ofstream(bad) << R"([{"gain_re":1.0,"delay_tap":0}])";
    CHECK_THROWS(load_channel_json(bad, cfg));
    std::ofstream(bad) << "not json";
    CHECK_THROWS(load_channel_json(bad, cfg));
    CHECK_THROWS(load_channel_json(dir / "otfs_no_such_file.json", cfg));
    std::filesystem::remove(good);
    std::filesystem::remove(bad);
}
