#include "otfs/frame.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "otfs/fft.hpp"

namespace otfs {

FrameConfig::FrameConfig(std::size_t delay_bins, std::size_t doppler_bins, std::size_t l_max,
                         double subcarrier_spacing_hz)
    : M_(delay_bins), N_(doppler_bins), l_max_(l_max), delta_f_(subcarrier_spacing_hz) {
    if (M_ < 2 || N_ < 2) throw std::invalid_argument("FrameConfig: M and N must be at least 2");
    if (!is_power_of_two(M_) || !is_power_of_two(N_))
        throw std::invalid_argument("FrameConfig: M and N must be powers of two");
    if (l_max_ < 1 || l_max_ >= M_) throw std::invalid_argument("FrameConfig: need 1 <= l_max < M");
    if (!(delta_f_ > 0.0)) throw std::invalid_argument("FrameConfig: subcarrier spacing must be positive");
    T_ = 1.0 / delta_f_;
    z_ = std::polar(1.0, 2.0 * kPi / static_cast<double>(M_ * N_));
}

QamAlphabet::QamAlphabet(unsigned order) {
    if (order != 4 && order != 16) throw std::invalid_argument("QamAlphabet: order must be 4 or 16");
    bits_ = order == 4 ? 2 : 4;
    const unsigned axis_bits = bits_ / 2;
    const unsigned side = 1u << axis_bits;
    // Average energy of the unnormalized square grid {+-1, +-3, ...}^2.
    const double scale = 1.0 / std::sqrt(2.0 * (order - 1) / 3.0);

    auto level = [&](unsigned gray) {
        unsigned pos = 0;  // inverse Gray
        for (unsigned g = gray; g != 0; g >>= 1) pos ^= g;
        return static_cast<double>(side - 1) - 2.0 * pos;
    };

    points_.resize(order);
    for (unsigned label = 0; label < order; ++label) {
        const unsigned gi = label >> axis_bits;
        const unsigned gq = label & (side - 1);
        points_[label] = Complex(level(gi), level(gq)) * scale;
    }
}

DelayDopplerGrid::DelayDopplerGrid(std::size_t M, std::size_t N, GridRole role)
    : M_(M), N_(N), role_(role), data_(M * N) {}

DelayDopplerGrid::DelayDopplerGrid(std::size_t M, std::size_t N, ComplexVector entries, GridRole role)
    : M_(M), N_(N), role_(role), data_(std::move(entries)) {
    if (data_.size() != M_ * N_) throw std::invalid_argument("DelayDopplerGrid: entry count mismatch");
}

bool DelayDopplerGrid::has_null_rows(std::size_t l_max) const {
    for (std::size_t m = M_ - l_max; m < M_; ++m)
        for (const auto& v : row(m))
            if (v != Complex{}) return false;
    return true;
}

ComplexVector qam_modulate(std::span<const std::uint8_t> bits, const QamAlphabet& alphabet) {
    const unsigned b = alphabet.bits_per_symbol();
    if (bits.size() % b != 0)
        throw std::invalid_argument("qam_modulate: bit count " + std::to_string(bits.size()) +
                                    " not divisible by " + std::to_string(b));
    ComplexVector out(bits.size() / b);
    for (std::size_t s = 0; s < out.size(); ++s) {
        std::uint32_t label = 0;
        for (unsigned i = 0; i < b; ++i) label = (label << 1) | (bits[s * b + i] & 1u);
        out[s] = alphabet.point(label);
    }
    return out;
}

Bits qam_demodulate(std::span<const std::uint32_t> indices, const QamAlphabet& alphabet) {
    const unsigned b = alphabet.bits_per_symbol();
    Bits out(indices.size() * b);
    for (std::size_t s = 0; s < indices.size(); ++s)
        for (unsigned i = 0; i < b; ++i) out[s * b + i] = alphabet.bit(indices[s], i);
    return out;
}

DelayDopplerGrid map_to_grid(std::span<const Complex> symbols, const FrameConfig& cfg) {
    if (symbols.size() != cfg.payload_symbols())
        throw std::invalid_argument("map_to_grid: expected " + std::to_string(cfg.payload_symbols()) +
                                    " symbols, got " + std::to_string(symbols.size()));
    DelayDopplerGrid grid(cfg.M(), cfg.N(), GridRole::transmit);
    std::copy(symbols.begin(), symbols.end(), grid.entries().begin());
    return grid;
}

ComplexVector extract_payload(const DelayDopplerGrid& grid, const FrameConfig& cfg) {
    if (grid.M() != cfg.M() || grid.N() != cfg.N())
        throw std::invalid_argument("extract_payload: grid does not match frame");
    auto e = grid.entries();
    return ComplexVector(e.begin(), e.begin() + static_cast<std::ptrdiff_t>(cfg.payload_symbols()));
}

std::uint32_t slice_index(Complex c, const QamAlphabet& alphabet) {
    const auto pts = alphabet.points();
    std::uint32_t best = 0;
    double best_d = std::norm(pts[0] - c);
    for (std::uint32_t j = 1; j < pts.size(); ++j) {
        const double d = std::norm(pts[j] - c);
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return best;
}

std::vector<std::uint32_t> slice_indices(std::span<const Complex> c, const QamAlphabet& alphabet) {
    std::vector<std::uint32_t> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = slice_index(c[i], alphabet);
    return out;
}

ComplexVector ml_slice(std::span<const Complex> c, const QamAlphabet& alphabet) {
    ComplexVector out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = alphabet.point(slice_index(c[i], alphabet));
    return out;
}

}  // namespace otfs
