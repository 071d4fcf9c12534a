#include "otfs/tf_equalizer.hpp"

#include <cmath>
#include <stdexcept>

#include "otfs/fft.hpp"

namespace otfs {

namespace {

// Unnormalized 2-D transform: DFT along the row index (length M) and IDFT
// along the column index (length N), or the conjugate pair when `inverse`.
ComplexVector transform_2d(std::span<const Complex> a, std::size_t M, std::size_t N, bool inverse) {
    if (a.size() != M * N) throw std::invalid_argument("2-D transform: size mismatch");
    ComplexVector out(a.begin(), a.end());
    const auto& pn = FftPlan::get(N);
    const auto& pm = FftPlan::get(M);
    for (std::size_t m = 0; m < M; ++m) {
        std::span<Complex> row(out.data() + m * N, N);
        if (inverse) {
            pn.forward(row);
        } else {
            pn.inverse(row);
            for (auto& v : row) v *= static_cast<double>(N);
        }
    }
    ComplexVector col(M);
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t m = 0; m < M; ++m) col[m] = out[m * N + n];
        if (inverse) {
            pm.inverse(col);
            for (auto& v : col) v *= static_cast<double>(M);
        } else {
            pm.forward(col);
        }
        for (std::size_t m = 0; m < M; ++m) out[m * N + n] = col[m];
    }
    return out;
}

}  // namespace

TimeFrequencyGrid isfft(std::span<const Complex> dd, std::size_t M, std::size_t N) {
    TimeFrequencyGrid tf{M, N, transform_2d(dd, M, N, false)};
    const double s = 1.0 / std::sqrt(static_cast<double>(M * N));
    for (auto& v : tf.entries) v *= s;
    return tf;
}

ComplexVector sfft(const TimeFrequencyGrid& tf) {
    ComplexVector dd = transform_2d(tf.entries, tf.M, tf.N, true);
    const double s = 1.0 / std::sqrt(static_cast<double>(tf.M * tf.N));
    for (auto& v : dd) v *= s;
    return dd;
}

IdealDDChannelMatrix ideal_dd_channel(const ChannelModel& model, const FrameConfig& cfg) {
    IdealDDChannelMatrix h{cfg.M(), cfg.N(), ComplexVector(cfg.M() * cfg.N())};
    const int N = static_cast<int>(cfg.N());
    for (const auto& p : model.paths()) {
        const auto k = static_cast<std::size_t>((p.doppler + N) % N);
        h.entries[static_cast<std::size_t>(p.delay) * cfg.N() + k] += p.gain;
    }
    return h;
}

IdealDDChannelMatrix ideal_dd_channel(const DopplerSpreadTable& table) {
    const auto& cfg = table.config();
    IdealDDChannelMatrix h{cfg.M(), cfg.N(), ComplexVector(cfg.M() * cfg.N())};
    for (std::size_t li = 0; li < table.num_delays(); ++li) {
        const auto nu = table.doppler_vector(li);
        std::copy(nu.begin(), nu.end(), h.entries.begin() + static_cast<std::ptrdiff_t>(table.delay(li) * cfg.N()));
    }
    return h;
}

TimeFrequencyGrid tf_response(const IdealDDChannelMatrix& h) {
    return TimeFrequencyGrid{h.M, h.N, transform_2d(h.entries, h.M, h.N, false)};
}

DelayDopplerGrid mmse_tf_estimate(const DelayDopplerGrid& Y, const IdealDDChannelMatrix& h, double sigma_w,
                                  std::size_t l_max, OpCounters* counters) {
    if (Y.M() != h.M || Y.N() != h.N) throw std::invalid_argument("mmse_tf_estimate: size mismatch");
    const std::size_t M = Y.M(), N = Y.N();
    const TimeFrequencyGrid h_tf = tf_response(h);
    TimeFrequencyGrid x_tf = isfft(Y);
    const double nv = sigma_w * sigma_w;
    for (std::size_t i = 0; i < M * N; ++i) {
        const Complex hv = h_tf.entries[i];
        const double den = std::norm(hv) + nv;
        x_tf.entries[i] = den > 0.0 ? std::conj(hv) * x_tf.entries[i] / den : Complex{};
    }
    DelayDopplerGrid X(M, N, sfft(x_tf), GridRole::transmit);
    for (std::size_t m = M - l_max; m < M; ++m)
        for (auto& v : X.row(m)) v = Complex{};
    if (counters) {
        const std::uint64_t MN = M * N;
        counters->tf_init += MN * (3 + 3 * static_cast<std::uint64_t>(log2_exact(MN)));
    }
    return X;
}

OfdmResult ofdm_mmse_baseline(std::span<const std::uint8_t> bits, const ChannelModel& model, const FrameConfig& cfg,
                              const QamAlphabet& alphabet, double sigma_w, std::uint64_t seed) {
    const std::size_t M = cfg.M(), N = cfg.N(), cp = cfg.l_max();
    if (bits.size() != M * N * alphabet.bits_per_symbol())
        throw std::invalid_argument("ofdm_mmse_baseline: expected M * N * log2|Q| bits");
    for (const auto& p : model.paths())
        if (static_cast<std::size_t>(p.delay) > cp)
            throw std::invalid_argument("ofdm_mmse_baseline: path delay exceeds the cyclic prefix");

    const ComplexVector symbols = qam_modulate(bits, alphabet);
    const std::size_t len = M + cp;
    const double root_m = std::sqrt(static_cast<double>(M));
    const auto& plan = FftPlan::get(M);

    ComplexVector tx(N * len);
    ComplexVector buf(M);
    for (std::size_t n = 0; n < N; ++n) {
        std::copy_n(symbols.begin() + static_cast<std::ptrdiff_t>(n * M), M, buf.begin());
        plan.inverse(buf);
        for (auto& v : buf) v *= root_m;
        Complex* out = tx.data() + n * len;
        std::copy(buf.end() - static_cast<std::ptrdiff_t>(cp), buf.end(), out);
        std::copy(buf.begin(), buf.end(), out + cp);
    }

    ComplexVector rx = apply_channel_time(tx, model, cfg);
    add_awgn(rx, sigma_w, seed);

    const double MN = static_cast<double>(M * N);
    const double nv = sigma_w * sigma_w;
    OfdmResult res;
    res.symbols.resize(M * N);
    for (std::size_t n = 0; n < N; ++n) {
        std::copy_n(rx.begin() + static_cast<std::ptrdiff_t>(n * len + cp), M, buf.begin());
        plan.forward(buf);
        for (auto& v : buf) v /= root_m;
        const double q_mid = static_cast<double>(n * len + cp + M / 2);
        for (std::size_t m = 0; m < M; ++m) {
            Complex hf{};
            for (const auto& p : model.paths()) {
                const double ph = 2.0 * kPi * (p.doppler * q_mid / MN - static_cast<double>(m * p.delay) / M);
                hf += p.gain * std::polar(1.0, ph);
            }
            const double den = std::norm(hf) + nv;
            const Complex est = den > 0.0 ? std::conj(hf) * buf[m] / den : Complex{};
            res.symbols[n * M + m] = slice_index(est, alphabet);
        }
    }
    res.bits = qam_demodulate(res.symbols, alphabet);
    return res;
}

}  // namespace otfs
