#include "otfs/mrc_detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "otfs/fft.hpp"
#include "otfs/tf_equalizer.hpp"

namespace otfs {

OpCounters& OpCounters::operator+=(const OpCounters& o) {
    iterative += o.iterative;
    y_hat_init += o.y_hat_init;
    r_spectra += o.r_spectra;
    setup_transforms += o.setup_transforms;
    setup_transform_mults += o.setup_transform_mults;
    pass_transforms += o.pass_transforms;
    feedback += o.feedback;
    tf_init += o.tf_init;
    return *this;
}

namespace {

void charge_transforms(OpCounters& c, std::uint64_t count, std::size_t N) {
    c.setup_transforms += count;
    c.setup_transform_mults += count * N * log2_exact(N);
}

// y_hat_r += Lambda_{r,l} o d, for every l in the delay set with r = m + l.
void spread_delta(DetectorState& s, const DopplerSpreadTable& table, std::size_t m, std::span<const Complex> d) {
    const std::size_t N = s.N;
    for (std::size_t li = 0; li < table.num_delays(); ++li) {
        const std::size_t r = m + static_cast<std::size_t>(table.delay(li));
        const auto lam = table.spectrum(r, li);
        Complex* yh = s.y_hat_spectra.data() + r * N;
        for (std::size_t k = 0; k < N; ++k) yh[k] += lam[k] * d[k];
    }
}

}  // namespace

std::vector<double> precompute_r(const DopplerSpreadTable& table, OpCounters* counters) {
    const auto& cfg = table.config();
    const std::size_t rows = cfg.payload_rows(), N = cfg.N();
    std::vector<double> r(rows * N, 0.0);
    for (std::size_t m = 0; m < rows; ++m) {
        for (std::size_t li = 0; li < table.num_delays(); ++li) {
            const auto lam = table.spectrum(m + static_cast<std::size_t>(table.delay(li)), li);
            for (std::size_t k = 0; k < N; ++k) r[m * N + k] += std::norm(lam[k]);
        }
    }
    if (counters) counters->r_spectra += rows * table.num_delays() * N;
    return r;
}

void init_y_hat(DetectorState& s, const DopplerSpreadTable& table) {
    const std::size_t N = s.N, rows = s.rows, L = table.num_delays();
    std::fill(s.y_hat_spectra.begin(), s.y_hat_spectra.end(), Complex{});
    std::vector<char> done(s.M, 0);
    for (std::size_t m = 0; m < rows; ++m) {
        for (std::size_t li = 0; li < L; ++li) {
            const std::size_t r = m + static_cast<std::size_t>(table.delay(li));
            // Each rake branch (m, l) is charged its full L-term sum; terms whose
            // source row is outside the data rows multiply a null vector and are
            // skipped. Rows shared by several branches are evaluated once.
            if (s.count_ops) s.counters.y_hat_init += L * N;
            if (done[r]) continue;
            done[r] = 1;
            Complex* yh = s.y_hat_spectra.data() + r * N;
            for (std::size_t lj = 0; lj < L; ++lj) {
                const auto lp = static_cast<std::size_t>(table.delay(lj));
                if (r < lp || r - lp >= rows) continue;
                const auto lam = table.spectrum(r, lj);
                const Complex* xs = s.x_spectra.data() + (r - lp) * N;
                for (std::size_t k = 0; k < N; ++k) yh[k] += lam[k] * xs[k];
            }
        }
    }
}

DetectorState make_detector_state(const DelayDopplerGrid& Y, const DopplerSpreadTable& table,
                                  const QamAlphabet& alphabet, std::span<const Complex> x0, double epsilon,
                                  bool count_ops) {
    const auto& cfg = table.config();
    if (Y.M() != cfg.M() || Y.N() != cfg.N()) throw std::invalid_argument("detector: received grid size mismatch");
    if (epsilon < 0.0) throw std::invalid_argument("detector: epsilon must be non-negative");

    DetectorState s;
    s.M = cfg.M();
    s.rows = cfg.payload_rows();
    s.N = cfg.N();
    s.count_ops = count_ops;
    const std::size_t N = s.N, rows = s.rows, L = table.num_delays();
    const auto& plan = FftPlan::get(N);

    s.r_spectra = precompute_r(table, count_ops ? &s.counters : nullptr);
    s.r_inverse.resize(s.r_spectra.size());
    for (std::size_t i = 0; i < s.r_spectra.size(); ++i) {
        const double d = s.r_spectra[i] + epsilon;
        if (d == 0.0)
            throw SingularCombinerError("R spectrum bin " + std::to_string(i % N) + " of row " +
                                        std::to_string(i / N) + " is zero");
        s.r_inverse[i] = 1.0 / d;
    }
    if (count_ops) charge_transforms(s.counters, table.transforms(), N);

    // Initial estimates.
    s.x_hat.assign(rows * N, Complex{});
    s.symbols.assign(rows * N, 0);
    if (!x0.empty()) {
        if (x0.size() != rows * N) throw std::invalid_argument("detector: initial estimate must have M' x N entries");
        for (std::size_t i = 0; i < rows * N; ++i) {
            s.symbols[i] = slice_index(x0[i], alphabet);
            s.x_hat[i] = alphabet.point(s.symbols[i]);
        }
    } else {
        const auto zero_idx = slice_index(Complex{}, alphabet);
        std::fill(s.symbols.begin(), s.symbols.end(), zero_idx);
    }
    s.x_spectra.assign(rows * N, Complex{});
    for (std::size_t m = 0; m < rows; ++m)
        plan.forward(std::span<const Complex>(s.x_hat.data() + m * N, N),
                     std::span<Complex>(s.x_spectra.data() + m * N, N));
    if (count_ops) charge_transforms(s.counters, rows, N);

    // Received vectors in the Fourier domain, one transform per rake branch.
    s.y_spectra.assign(s.M * N, Complex{});
    for (std::size_t m = 0; m < rows; ++m) {
        for (std::size_t li = 0; li < L; ++li) {
            const std::size_t r = m + static_cast<std::size_t>(table.delay(li));
            plan.forward(Y.row(r), std::span<Complex>(s.y_spectra.data() + r * N, N));
        }
    }
    if (count_ops) charge_transforms(s.counters, rows * L, N);

    s.y_hat_spectra.assign(s.M * N, Complex{});
    init_y_hat(s, table);
    s.combiner.assign(rows * N, Complex{});
    return s;
}

void mrc_iterate(DetectorState& s, const DopplerSpreadTable& table, const QamAlphabet& alphabet) {
    const std::size_t N = s.N, rows = s.rows, L = table.num_delays();
    const auto& plan = FftPlan::get(N);
    ComplexVector g(N), c(N), x_new(N), x_new_spec(N), delta(N);

    for (std::size_t m = 0; m < rows; ++m) {
        const Complex* xs = s.x_spectra.data() + m * N;
        std::fill(g.begin(), g.end(), Complex{});
        for (std::size_t li = 0; li < L; ++li) {
            const std::size_t r = m + static_cast<std::size_t>(table.delay(li));
            const auto lam = table.spectrum(r, li);
            const Complex* y = s.y_spectra.data() + r * N;
            const Complex* yh = s.y_hat_spectra.data() + r * N;
            for (std::size_t k = 0; k < N; ++k) {
                // b = y - y_hat + K x_hat_m  (interference of every other row removed)
                const Complex b = y[k] - yh[k] + lam[k] * xs[k];
                g[k] += std::conj(lam[k]) * b;
            }
        }
        const double* rinv = s.r_inverse.data() + m * N;
        for (std::size_t k = 0; k < N; ++k) c[k] = g[k] * rinv[k];
        plan.inverse(c);

        std::copy(c.begin(), c.end(), s.combiner.begin() + static_cast<std::ptrdiff_t>(m * N));
        for (std::size_t n = 0; n < N; ++n) {
            const auto idx = slice_index(c[n], alphabet);
            s.symbols[m * N + n] = idx;
            x_new[n] = alphabet.point(idx);
        }
        plan.forward(x_new, x_new_spec);
        for (std::size_t k = 0; k < N; ++k) delta[k] = x_new_spec[k] - xs[k];
        spread_delta(s, table, m, delta);

        std::copy(x_new.begin(), x_new.end(), s.x_hat.begin() + static_cast<std::ptrdiff_t>(m * N));
        std::copy(x_new_spec.begin(), x_new_spec.end(), s.x_spectra.begin() + static_cast<std::ptrdiff_t>(m * N));
        if (s.count_ops) {
            // 2L for b and g, 1 for c, L for the y_hat update.
            s.counters.iterative += (3 * L + 1) * N;
            s.counters.pass_transforms += 2;
        }
    }
    ++s.passes;
}

void install_estimates(DetectorState& s, const DopplerSpreadTable& table, std::span<const Complex> x_new,
                       std::span<const std::uint32_t> symbols, bool from_scratch) {
    const std::size_t N = s.N, rows = s.rows, L = table.num_delays();
    if (x_new.size() != rows * N || symbols.size() != rows * N)
        throw std::invalid_argument("install_estimates: expected M' x N entries");
    const auto& plan = FftPlan::get(N);
    ComplexVector spec(N), delta(N);
    for (std::size_t m = 0; m < rows; ++m) {
        const auto row = x_new.subspan(m * N, N);
        if (std::equal(row.begin(), row.end(), s.x_hat.begin() + static_cast<std::ptrdiff_t>(m * N))) continue;
        plan.forward(row, spec);
        if (!from_scratch) {
            const Complex* xs = s.x_spectra.data() + m * N;
            for (std::size_t k = 0; k < N; ++k) delta[k] = spec[k] - xs[k];
            spread_delta(s, table, m, delta);
            if (s.count_ops) s.counters.feedback += L * N;
        }
        std::copy(row.begin(), row.end(), s.x_hat.begin() + static_cast<std::ptrdiff_t>(m * N));
        std::copy(spec.begin(), spec.end(), s.x_spectra.begin() + static_cast<std::ptrdiff_t>(m * N));
    }
    std::copy(symbols.begin(), symbols.end(), s.symbols.begin());
    if (from_scratch) {
        OpCounters saved = s.counters;
        init_y_hat(s, table);
        if (s.count_ops) {
            s.counters.feedback += s.counters.y_hat_init - saved.y_hat_init;
            s.counters.y_hat_init = saved.y_hat_init;
        }
    }
}

DetectorState detect(const DelayDopplerGrid& Y, const DopplerSpreadTable& table, const QamAlphabet& alphabet,
                     const DetectorConfig& cfg, std::optional<std::span<const Complex>> x0) {
    if (cfg.iterations < 0) throw std::invalid_argument("detect: iteration count must be non-negative");
    const auto& fc = table.config();
    std::span<const Complex> init;
    OpCounters tf_counters;
    DelayDopplerGrid tf_estimate(fc.M(), fc.N());
    switch (cfg.init) {
        case InitMode::zero:
            break;
        case InitMode::external:
            if (!x0) throw std::invalid_argument("detect: external initialization requires initial estimates");
            init = *x0;
            break;
        case InitMode::tf_mmse:
            tf_estimate = mmse_tf_estimate(Y, ideal_dd_channel(table), cfg.sigma_w, fc.l_max(),
                                           cfg.count_ops ? &tf_counters : nullptr);
            init = tf_estimate.entries().first(fc.payload_symbols());
            break;
    }
    DetectorState s = make_detector_state(Y, table, alphabet, init, cfg.epsilon, cfg.count_ops);
    s.counters += tf_counters;
    for (int i = 0; i < cfg.iterations; ++i) mrc_iterate(s, table, alphabet);
    return s;
}

std::vector<double> soft_llrs(std::span<const Complex> combiner, std::span<const double> r_spectra, std::size_t N,
                              double sigma_w, const QamAlphabet& alphabet, double llr_max, double epsilon) {
    if (N == 0 || combiner.size() % N != 0 || r_spectra.size() != combiner.size())
        throw std::invalid_argument("soft_llrs: combiner and R spectra must be rows x N");
    const unsigned b = alphabet.bits_per_symbol();
    const auto pts = alphabet.points();
    const std::size_t rows = combiner.size() / N;
    std::vector<double> out(combiner.size() * b);
    std::vector<double> dist(pts.size());
    const double inf = std::numeric_limits<double>::infinity();

    for (std::size_t m = 0; m < rows; ++m) {
        double mean_inv = 0.0;
        for (std::size_t k = 0; k < N; ++k) mean_inv += 1.0 / (r_spectra[m * N + k] + epsilon);
        mean_inv /= static_cast<double>(N);
        const double var = sigma_w * sigma_w * mean_inv;

        for (std::size_t n = 0; n < N; ++n) {
            const std::size_t i = m * N + n;
            for (std::size_t j = 0; j < pts.size(); ++j) dist[j] = std::norm(combiner[i] - pts[j]);
            for (unsigned bit = 0; bit < b; ++bit) {
                double d0 = inf, d1 = inf;
                for (std::uint32_t j = 0; j < pts.size(); ++j) {
                    if (alphabet.bit(j, bit)) d1 = std::min(d1, dist[j]);
                    else d0 = std::min(d0, dist[j]);
                }
                const double diff = d1 - d0;
                double llr;
                if (var > 0.0) llr = diff / var;
                else llr = diff > 0.0 ? llr_max : (diff < 0.0 ? -llr_max : 0.0);
                out[i * b + bit] = std::clamp(llr, -llr_max, llr_max);
            }
        }
    }
    return out;
}

ComplexityTerms complexity_terms(const FrameConfig& cfg, std::size_t L, int S) {
    const std::uint64_t N = cfg.N(), Mp = cfg.payload_rows(), M = cfg.M();
    const std::uint64_t logN = log2_exact(cfg.N());
    const std::uint64_t logNM = log2_exact(cfg.N() * cfg.M());
    return {N * Mp * static_cast<std::uint64_t>(S) * (3 * L + 1), N * Mp * L * L, N * Mp * (2 * L + 1) * logN,
            N * M * (3 + 3 * logNM)};
}

}  // namespace otfs
