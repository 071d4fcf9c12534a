#include "otfs/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "otfs/fft.hpp"
#include "otfs/rng.hpp"

namespace otfs {

ChannelModel::ChannelModel(std::vector<ChannelPath> paths, const FrameConfig& cfg, bool normalize)
    : paths_(std::move(paths)) {
    if (paths_.empty()) throw std::invalid_argument("ChannelModel: no paths");
    const int half = static_cast<int>(cfg.N() / 2);
    for (const auto& p : paths_) {
        if (p.delay < 0 || static_cast<std::size_t>(p.delay) >= cfg.M())
            throw std::invalid_argument("ChannelModel: delay tap " + std::to_string(p.delay) + " outside [0, M)");
        if (p.doppler <= -half || p.doppler >= half)
            throw std::invalid_argument("ChannelModel: Doppler tap " + std::to_string(p.doppler) +
                                        " outside (-N/2, N/2)");
        delays_.push_back(p.delay);
        k_max_ = std::max(k_max_, std::abs(p.doppler));
    }
    std::sort(delays_.begin(), delays_.end());
    delays_.erase(std::unique(delays_.begin(), delays_.end()), delays_.end());

    if (normalize) {
        const double power = total_power();
        if (!(power > 0.0)) throw std::invalid_argument("ChannelModel: zero total power");
        const double s = 1.0 / std::sqrt(power);
        for (auto& p : paths_) p.gain *= s;
    }
}

double ChannelModel::total_power() const {
    double s = 0.0;
    for (const auto& p : paths_) s += std::norm(p.gain);
    return s;
}

int delay_tap(double delay_s, const FrameConfig& cfg) {
    return static_cast<int>(std::lround(delay_s * cfg.sample_rate()));
}

ChannelModel generate_eva(const FrameConfig& cfg, const EvaOptions& opts, std::uint64_t seed) {
    const int half = static_cast<int>(cfg.N() / 2);
    if (opts.doppler_cap < 0 || opts.doppler_cap >= half)
        throw std::invalid_argument("generate_eva: doppler_cap " + std::to_string(opts.doppler_cap) +
                                    " must lie in [0, N/2)");

    auto rng = make_rng(seed, Stream::channel);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    double total = 0.0;
    for (double db : kEvaPowersDb) total += std::pow(10.0, db / 10.0);

    // nu_max expressed in Doppler taps (units of 1/(N T)).
    double nu_max_taps = static_cast<double>(opts.doppler_cap);
    if (opts.carrier_hz > 0.0) {
        const double v = opts.speed_kmh / 3.6;
        nu_max_taps = v * opts.carrier_hz / 299792458.0 * static_cast<double>(cfg.N()) * cfg.T();
    }

    std::vector<ChannelPath> paths;
    for (int i = 0; i < 9; ++i) {
        ChannelPath p;
        p.delay = delay_tap(kEvaDelaysNs[i] * 1e-9, cfg);
        if (static_cast<std::size_t>(p.delay) > cfg.l_max())
            throw std::invalid_argument("generate_eva: EVA tap " + std::to_string(p.delay) + " exceeds l_max " +
                                        std::to_string(cfg.l_max()));
        const double amp = std::sqrt(std::pow(10.0, kEvaPowersDb[i] / 10.0) / total);
        const double theta = 2.0 * kPi * unit(rng);
        p.gain = std::polar(amp, theta);
        const double nu = nu_max_taps * unit(rng);
        p.doppler = std::min(static_cast<int>(std::lround(nu)), opts.doppler_cap);
        paths.push_back(p);
    }
    return ChannelModel(std::move(paths), cfg, true);
}

ChannelModel load_channel_json(const std::filesystem::path& path, const FrameConfig& cfg, bool normalize) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open channel file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("invalid channel file " + path.string() + ": " + e.what());
    }
    if (!j.is_array()) throw std::runtime_error("channel file must hold a JSON array of paths");
    std::vector<ChannelPath> paths;
    try {
        for (const auto& e : j) {
            ChannelPath p;
            p.gain = Complex(e.at("gain_re").get<double>(), e.at("gain_im").get<double>());
            p.delay = e.at("delay_tap").get<int>();
            p.doppler = e.at("doppler_tap").get<int>();
            paths.push_back(p);
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("invalid channel file " + path.string() + ": " + e.what());
    }
    return ChannelModel(std::move(paths), cfg, normalize);
}

Complex rect_phase(const FrameConfig& cfg, std::size_t m, std::size_t k) {
    const double MN = static_cast<double>(cfg.M() * cfg.N());
    const double mm = static_cast<double>(m);
    if (k < cfg.N() / 2) return std::polar(1.0, 2.0 * kPi * static_cast<double>(k) * mm / MN);
    return std::polar(1.0, -2.0 * kPi * static_cast<double>(cfg.N() - k) * mm / MN);
}

PhaseTable::PhaseTable(const FrameConfig& cfg) : N_(cfg.N()), phases_(cfg.M() * cfg.N()) {
    for (std::size_t m = 0; m < cfg.M(); ++m)
        for (std::size_t k = 0; k < N_; ++k) phases_[m * N_ + k] = rect_phase(cfg, m, k);
}

DopplerSpreadTable::DopplerSpreadTable(const ChannelModel& model, const FrameConfig& cfg) : cfg_(cfg) {
    const std::size_t N = cfg.N();
    for (int l : model.delay_set()) {
        if (static_cast<std::size_t>(l) > cfg.l_max())
            throw std::invalid_argument("DopplerSpreadTable: delay tap " + std::to_string(l) + " exceeds l_max " +
                                        std::to_string(cfg.l_max()));
    }
    delays_.assign(model.delay_set().begin(), model.delay_set().end());
    const std::size_t L = delays_.size();

    nu_.assign(L * N, Complex{});
    for (const auto& p : model.paths()) {
        const auto li = static_cast<std::size_t>(
            std::lower_bound(delays_.begin(), delays_.end(), p.delay) - delays_.begin());
        const auto k = static_cast<std::size_t>((p.doppler + static_cast<int>(N)) % static_cast<int>(N));
        nu_[li * N + k] += p.gain;
    }

    const std::size_t rows = cfg.payload_rows();
    spectra_.assign(L * rows * N, Complex{});
    const auto& plan = FftPlan::get(N);
    for (std::size_t li = 0; li < L; ++li) {
        const auto nu = doppler_vector(li);
        for (std::size_t src = 0; src < rows; ++src) {
            std::span<Complex> out(spectra_.data() + (li * rows + src) * N, N);
            for (std::size_t k = 0; k < N; ++k)
                out[k] = nu[k] == Complex{} ? Complex{} : nu[k] * rect_phase(cfg, src, k);
            plan.forward(out);
            ++transforms_;
        }
    }
}

ComplexVector DopplerSpreadTable::spread_vector(std::size_t m, std::size_t li) const {
    const std::size_t N = cfg_.N();
    ComplexVector out(N);
    const auto l = static_cast<std::size_t>(delays_[li]);
    if (m < l) return out;
    const auto nu = doppler_vector(li);
    for (std::size_t k = 0; k < N; ++k) out[k] = nu[k] * rect_phase(cfg_, m - l, k);
    return out;
}

bool DopplerSpreadTable::has_spectrum(std::size_t m, std::size_t li) const {
    const auto l = static_cast<std::size_t>(delays_[li]);
    return m >= l && m - l < cfg_.payload_rows();
}

ComplexVector DopplerSpreadTable::compute_spectrum(std::size_t m, std::size_t li) const {
    auto v = spread_vector(m, li);
    fft(v);
    return v;
}

void add_awgn(std::span<Complex> data, double sigma_w, std::uint64_t seed) {
    if (sigma_w < 0.0) throw std::invalid_argument("add_awgn: negative noise std");
    if (sigma_w == 0.0) return;
    auto rng = make_rng(seed, Stream::noise);
    std::normal_distribution<double> g(0.0, sigma_w / std::sqrt(2.0));
    for (auto& v : data) {
        const double re = g(rng);
        const double im = g(rng);
        v += Complex(re, im);
    }
}

DelayDopplerGrid apply_channel(const DelayDopplerGrid& X, const DopplerSpreadTable& table, double sigma_w,
                               std::uint64_t seed) {
    const auto& cfg = table.config();
    if (X.M() != cfg.M() || X.N() != cfg.N()) throw std::invalid_argument("apply_channel: grid size mismatch");
    const std::size_t M = cfg.M(), N = cfg.N();
    const auto& plan = FftPlan::get(N);

    // Spectra of the source rows; rows that are entirely zero contribute nothing.
    std::vector<ComplexVector> src_spec(M);
    for (std::size_t s = 0; s < M; ++s) {
        const auto r = X.row(s);
        if (std::all_of(r.begin(), r.end(), [](const Complex& v) { return v == Complex{}; })) continue;
        src_spec[s].resize(N);
        plan.forward(r, src_spec[s]);
    }

    DelayDopplerGrid Y(M, N, GridRole::receive);
    ComplexVector acc(N);
    for (std::size_t m = 0; m < M; ++m) {
        std::fill(acc.begin(), acc.end(), Complex{});
        bool any = false;
        for (std::size_t li = 0; li < table.num_delays(); ++li) {
            const auto l = static_cast<std::size_t>(table.delay(li));
            if (m < l || src_spec[m - l].empty()) continue;
            const auto& xs = src_spec[m - l];
            if (table.has_spectrum(m, li)) {
                const auto lam = table.spectrum(m, li);
                for (std::size_t k = 0; k < N; ++k) acc[k] += lam[k] * xs[k];
            } else {
                const auto lam = table.compute_spectrum(m, li);
                for (std::size_t k = 0; k < N; ++k) acc[k] += lam[k] * xs[k];
            }
            any = true;
        }
        if (any) plan.inverse(acc, Y.row(m));
    }
    add_awgn(Y.entries(), sigma_w, seed);
    return Y;
}

ComplexVector apply_channel_time(std::span<const Complex> x, const ChannelModel& model, const FrameConfig& cfg) {
    const double MN = static_cast<double>(cfg.M() * cfg.N());
    ComplexVector y(x.size());
    for (const auto& p : model.paths()) {
        const auto l = static_cast<std::size_t>(p.delay);
        const double w = 2.0 * kPi * p.doppler / MN;
        for (std::size_t q = l; q < x.size(); ++q)
            y[q] += p.gain * x[q - l] * std::polar(1.0, w * static_cast<double>(q));
    }
    return y;
}

}  // namespace otfs
