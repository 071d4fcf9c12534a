#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "otfs/frame.hpp"
#include "otfs/types.hpp"

namespace otfs {

struct ChannelPath {
    Complex gain;
    int delay = 0;    // integer delay tap l
    int doppler = 0;  // integer Doppler tap k, -N/2 < k < N/2
};

// Sparse delay-Doppler channel. Paths are kept as given (coincident delays are
// not merged here); delay_set() holds the unique delay taps in ascending order.
class ChannelModel {
public:
    // Rejects paths outside the under-spread region of `cfg`. When `normalize`
    // is set the gains are rescaled so that sum |h_i|^2 == 1.
    ChannelModel(std::vector<ChannelPath> paths, const FrameConfig& cfg, bool normalize = true);

    std::span<const ChannelPath> paths() const { return paths_; }
    std::span<const int> delay_set() const { return delays_; }
    std::size_t num_delays() const { return delays_.size(); }
    int k_max() const { return k_max_; }
    double total_power() const;

private:
    std::vector<ChannelPath> paths_;
    std::vector<int> delays_;
    int k_max_ = 0;
};

// Extended Vehicular A power delay profile.
inline constexpr double kEvaDelaysNs[9] = {0, 30, 150, 310, 370, 710, 1090, 1730, 2510};
inline constexpr double kEvaPowersDb[9] = {0, -1.5, -1.4, -3.6, -0.6, -9.1, -7.0, -12.0, -16.9};

// Delay tap for an excess delay, quantized at the sampling rate M * delta_f.
int delay_tap(double delay_s, const FrameConfig& cfg);

struct EvaOptions {
    double speed_kmh = 120.0;
    // Largest Doppler tap a path may take; must be < N/2.
    int doppler_cap = 16;
    // Carrier frequency for the physical maximum Doppler. When zero the
    // maximum Doppler is placed exactly at doppler_cap taps.
    double carrier_hz = 0.0;
};

// One Doppler-shifted path per EVA tap, uniform phase, Doppler drawn from
// U(0, nu_max) and rounded to the nearest integer tap.
ChannelModel generate_eva(const FrameConfig& cfg, const EvaOptions& opts, std::uint64_t seed);

// Custom channel from JSON: [{"gain_re":..,"gain_im":..,"delay_tap":..,"doppler_tap":..}, ...]
ChannelModel load_channel_json(const std::filesystem::path& path, const FrameConfig& cfg,
                               bool normalize = true);

// Rectangular-pulse phase correction phi_m(k): z^{km} for k < N/2 and
// z^{-(N-k)m} otherwise.
Complex rect_phase(const FrameConfig& cfg, std::size_t m, std::size_t k);

class PhaseTable {
public:
    explicit PhaseTable(const FrameConfig& cfg);
    const Complex& operator()(std::size_t m, std::size_t k) const { return phases_[m * N_ + k]; }
    std::span<const Complex> row(std::size_t m) const { return {phases_.data() + m * N_, N_}; }

private:
    std::size_t N_;
    ComplexVector phases_;
};

// Doppler spread vectors nu_l, their phase-corrected versions nu_{m,l} and the
// spectra Lambda_{m,l} = DFT(nu_{m,l}), i.e. the eigenvalues of the circulant
// K_{m,l}. Spectra are stored for every (m, l) whose source row m - l is a
// data row (0 <= m - l < M'), which is every block a null-padded frame uses.
class DopplerSpreadTable {
public:
    DopplerSpreadTable(const ChannelModel& model, const FrameConfig& cfg);

    const FrameConfig& config() const { return cfg_; }
    std::span<const int> delay_set() const { return delays_; }
    std::size_t num_delays() const { return delays_.size(); }
    int delay(std::size_t li) const { return delays_[li]; }

    // nu_l for the li-th unique delay.
    std::span<const Complex> doppler_vector(std::size_t li) const {
        return {nu_.data() + li * cfg_.N(), cfg_.N()};
    }
    // nu_{m,l}; the zero vector when m < l.
    ComplexVector spread_vector(std::size_t m, std::size_t li) const;

    bool has_spectrum(std::size_t m, std::size_t li) const;
    // Stored Lambda_{m,l}; requires has_spectrum(m, li).
    std::span<const Complex> spectrum(std::size_t m, std::size_t li) const {
        const std::size_t src = m - static_cast<std::size_t>(delays_[li]);
        return {spectra_.data() + (li * cfg_.payload_rows() + src) * cfg_.N(), cfg_.N()};
    }
    // Lambda_{m,l} for any m, computed on demand.
    ComplexVector compute_spectrum(std::size_t m, std::size_t li) const;

    // N-point transforms executed while building the stored spectra (M' * L).
    std::uint64_t transforms() const { return transforms_; }

private:
    FrameConfig cfg_;
    std::vector<int> delays_;
    ComplexVector nu_;       // L x N
    ComplexVector spectra_;  // L x M' x N
    std::uint64_t transforms_ = 0;
};

// y_m = sum_l K_{m,l} x_{m-l} + w_m via N-point FFTs. Noise is circular
// complex Gaussian with total variance sigma_w^2, drawn from the noise stream
// of `seed`. sigma_w == 0 gives the noiseless output.
DelayDopplerGrid apply_channel(const DelayDopplerGrid& X, const DopplerSpreadTable& table, double sigma_w,
                               std::uint64_t seed);

// Adds circular Gaussian noise of total variance sigma_w^2 per entry.
void add_awgn(std::span<Complex> data, double sigma_w, std::uint64_t seed);

// Time-domain channel: y(q) = sum_i h_i x(q - l_i) e^{j2pi k_i q / (MN)}, x(q<0) = 0.
ComplexVector apply_channel_time(std::span<const Complex> x, const ChannelModel& model, const FrameConfig& cfg);

}  // namespace otfs
