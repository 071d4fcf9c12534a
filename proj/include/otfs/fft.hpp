#pragma once

#include <cstddef>
#include <span>

#include "otfs/types.hpp"

namespace otfs {

// Cached FFTW plans for one transform length. Plans are created once per
// length under a global lock; execution is re-entrant and runs on any
// buffer, so a single plan is shared by all simulation workers.
class FftPlan {
public:
    static const FftPlan& get(std::size_t n);

    std::size_t size() const { return n_; }

    // Unnormalized DFT: X(k) = sum_n x(n) e^{-j2pi kn/N}.
    void forward(std::span<Complex> data) const;
    void forward(std::span<const Complex> in, std::span<Complex> out) const;
    // Inverse DFT scaled by 1/N so inverse(forward(x)) == x.
    void inverse(std::span<Complex> data) const;
    void inverse(std::span<const Complex> in, std::span<Complex> out) const;

    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;

private:
    explicit FftPlan(std::size_t n);

    std::size_t n_;
    // FFTW plans are specific to in-place vs out-of-place execution.
    void* forward_inplace_;
    void* inverse_inplace_;
    void* forward_;
    void* inverse_;
};

inline void fft(std::span<Complex> data) { FftPlan::get(data.size()).forward(data); }
inline void ifft(std::span<Complex> data) { FftPlan::get(data.size()).inverse(data); }

inline ComplexVector fft_copy(std::span<const Complex> data) {
    ComplexVector out(data.size());
    FftPlan::get(data.size()).forward(data, out);
    return out;
}

inline ComplexVector ifft_copy(std::span<const Complex> data) {
    ComplexVector out(data.size());
    FftPlan::get(data.size()).inverse(data, out);
    return out;
}

bool is_power_of_two(std::size_t n);
unsigned log2_exact(std::size_t n);

}  // namespace otfs
