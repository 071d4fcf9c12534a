#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "otfs/types.hpp"

namespace otfs {

// Frame geometry. M delay bins by N Doppler bins, critically sampled
// (T * delta_f == 1). The last l_max delay rows carry null symbols.
class FrameConfig {
public:
    FrameConfig(std::size_t delay_bins, std::size_t doppler_bins, std::size_t l_max,
                double subcarrier_spacing_hz = 15e3);

    std::size_t M() const { return M_; }
    std::size_t N() const { return N_; }
    std::size_t l_max() const { return l_max_; }
    double delta_f() const { return delta_f_; }
    double T() const { return T_; }
    // e^{j2pi/(MN)}
    Complex z() const { return z_; }

    // M' = M - l_max: rows carrying data.
    std::size_t payload_rows() const { return M_ - l_max_; }
    std::size_t payload_symbols() const { return payload_rows() * N_; }
    double sample_rate() const { return static_cast<double>(M_) * delta_f_; }

    bool operator==(const FrameConfig&) const = default;

private:
    std::size_t M_;
    std::size_t N_;
    std::size_t l_max_;
    double delta_f_;
    double T_;
    Complex z_;
};

// Square Gray-mapped QAM with unit average energy. Alphabet index equals the
// bit label (first bit is the label MSB); I carries the high half of the
// label, Q the low half.
class QamAlphabet {
public:
    explicit QamAlphabet(unsigned order);

    unsigned order() const { return static_cast<unsigned>(points_.size()); }
    unsigned bits_per_symbol() const { return bits_; }
    std::span<const Complex> points() const { return points_; }
    const Complex& point(std::uint32_t index) const { return points_[index]; }
    // Bit b (0 = first transmitted) of the label of symbol `index`.
    std::uint8_t bit(std::uint32_t index, unsigned b) const {
        return static_cast<std::uint8_t>((index >> (bits_ - 1 - b)) & 1u);
    }

private:
    unsigned bits_;
    ComplexVector points_;
};

enum class GridRole { transmit, receive };

// M x N delay-Doppler grid stored delay-major: entry (m, n) at m * N + n.
class DelayDopplerGrid {
public:
    DelayDopplerGrid(std::size_t M, std::size_t N, GridRole role = GridRole::transmit);
    DelayDopplerGrid(std::size_t M, std::size_t N, ComplexVector entries, GridRole role);

    std::size_t M() const { return M_; }
    std::size_t N() const { return N_; }
    GridRole role() const { return role_; }
    void set_role(GridRole r) { role_ = r; }

    Complex& operator()(std::size_t m, std::size_t n) { return data_[m * N_ + n]; }
    const Complex& operator()(std::size_t m, std::size_t n) const { return data_[m * N_ + n]; }

    // x_m: the length-N row at delay index m.
    std::span<Complex> row(std::size_t m) { return {data_.data() + m * N_, N_}; }
    std::span<const Complex> row(std::size_t m) const { return {data_.data() + m * N_, N_}; }

    std::span<Complex> entries() { return data_; }
    std::span<const Complex> entries() const { return data_; }

    bool has_null_rows(std::size_t l_max) const;

private:
    std::size_t M_;
    std::size_t N_;
    GridRole role_;
    ComplexVector data_;
};

ComplexVector qam_modulate(std::span<const std::uint8_t> bits, const QamAlphabet& alphabet);
Bits qam_demodulate(std::span<const std::uint32_t> indices, const QamAlphabet& alphabet);

// Payload symbols fill rows 0..M'-1 delay-major; rows M'..M-1 stay zero.
DelayDopplerGrid map_to_grid(std::span<const Complex> symbols, const FrameConfig& cfg);
ComplexVector extract_payload(const DelayDopplerGrid& grid, const FrameConfig& cfg);

// Nearest alphabet point per entry; equidistant ties go to the lowest index.
std::uint32_t slice_index(Complex c, const QamAlphabet& alphabet);
std::vector<std::uint32_t> slice_indices(std::span<const Complex> c, const QamAlphabet& alphabet);
ComplexVector ml_slice(std::span<const Complex> c, const QamAlphabet& alphabet);

}  // namespace otfs
