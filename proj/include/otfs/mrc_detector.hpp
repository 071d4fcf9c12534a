#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "otfs/channel.hpp"
#include "otfs/frame.hpp"

namespace otfs {

enum class InitMode { zero, tf_mmse, external };

struct DetectorConfig {
    int iterations = 10;  // S
    InitMode init = InitMode::zero;
    // Added to every R_m spectrum bin before inversion.
    double epsilon = 1e-12;
    bool count_ops = true;
    // Noise standard deviation; used by the time-frequency MMSE initializer.
    double sigma_w = 0.0;
};

// Complex-multiplication tallies. All products are Fourier-domain elementwise
// products of length N, charged N each; an N-point transform is charged
// N log2 N.
struct OpCounters {
    // b, g and c computations inside the passes: N M' S (3L + 1).
    std::uint64_t iterative = 0;
    // Initial y_hat evaluation, L products for each of the M' L rake
    // branches: N M' L^2.
    std::uint64_t y_hat_init = 0;
    // R_m spectra from |Lambda|^2: N M' L.
    std::uint64_t r_spectra = 0;
    // Setup transforms: K first columns (M' L), received branch vectors
    // (M' L) and initial estimates (M'); charged N log2 N each.
    std::uint64_t setup_transforms = 0;
    std::uint64_t setup_transform_mults = 0;
    // Per-row IDFT/DFT pairs inside the passes (slicing needs time domain).
    std::uint64_t pass_transforms = 0;
    // y_hat refresh after turbo feedback installs new estimates.
    std::uint64_t feedback = 0;
    // Time-frequency MMSE initializer: N M (3 + 3 log2(N M)).
    std::uint64_t tf_init = 0;

    OpCounters& operator+=(const OpCounters& o);
};

class SingularCombinerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Per-frame detector state. Row-major blocks of length N; x_hat, symbols,
// x_spectra, r_spectra and combiner have M' rows, the received and y_hat
// caches have M rows.
struct DetectorState {
    std::size_t M = 0;
    std::size_t rows = 0;  // M'
    std::size_t N = 0;
    bool count_ops = true;
    int passes = 0;

    ComplexVector x_hat;
    std::vector<std::uint32_t> symbols;
    ComplexVector x_spectra;
    ComplexVector y_spectra;
    ComplexVector y_hat_spectra;
    std::vector<double> r_spectra;
    std::vector<double> r_inverse;
    ComplexVector combiner;
    OpCounters counters;

    std::span<const Complex> x_row(std::size_t m) const { return {x_hat.data() + m * N, N}; }
    std::span<const Complex> combiner_row(std::size_t m) const { return {combiner.data() + m * N, N}; }
};

// R_m(k) = sum_{l in L} |Lambda_{m+l,l}(k)|^2 for m = 0..M'-1 (M' x N, row-major).
std::vector<double> precompute_r(const DopplerSpreadTable& table, OpCounters* counters = nullptr);

// Builds the state for received grid Y. `x0` holds M' x N initial estimates
// (sliced before use); empty means zero initialization.
DetectorState make_detector_state(const DelayDopplerGrid& Y, const DopplerSpreadTable& table,
                                  const QamAlphabet& alphabet, std::span<const Complex> x0,
                                  double epsilon = 1e-12, bool count_ops = true);

// Recomputes the y_hat cache from the current estimates, rake branch by rake
// branch: y_hat_{m+l} = sum_{l'} K_{m+l,l'} x_hat_{m+l-l'}.
void init_y_hat(DetectorState& state, const DopplerSpreadTable& table);

// One pass of the rake detector over m = 0..M'-1 with in-pass decision
// feedback and incremental y_hat updates.
void mrc_iterate(DetectorState& state, const DopplerSpreadTable& table, const QamAlphabet& alphabet);

// Replaces the estimates (M' x N alphabet points) and brings the y_hat cache
// in line, either incrementally or from scratch.
void install_estimates(DetectorState& state, const DopplerSpreadTable& table, std::span<const Complex> x_new,
                       std::span<const std::uint32_t> symbols, bool from_scratch = false);

// Runs cfg.iterations passes. init external requires x0 (M' x N).
DetectorState detect(const DelayDopplerGrid& Y, const DopplerSpreadTable& table, const QamAlphabet& alphabet,
                     const DetectorConfig& cfg, std::optional<std::span<const Complex>> x0 = std::nullopt);

inline constexpr double kLlrMax = 50.0;

// Max-log bit LLRs of the combiner outputs (positive favours bit 0), ordered
// as qam_modulate consumes bits. Effective noise variance per row m is
// sigma_w^2 * mean_k 1/(R_m(k) + epsilon).
std::vector<double> soft_llrs(std::span<const Complex> combiner, std::span<const double> r_spectra, std::size_t N,
                              double sigma_w, const QamAlphabet& alphabet, double llr_max = kLlrMax,
                              double epsilon = 1e-12);

// Closed-form complexity terms.
struct ComplexityTerms {
    std::uint64_t iterative;   // N M' S (3L + 1)
    std::uint64_t y_hat_init;  // N M' L^2
    std::uint64_t transforms;  // N M' (2L + 1) log2 N
    std::uint64_t tf_init;     // N M (3 + 3 log2(N M))
};
ComplexityTerms complexity_terms(const FrameConfig& cfg, std::size_t L, int S);

}  // namespace otfs
