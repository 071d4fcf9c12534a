#include "otfs/fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace otfs {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

fftw_complex* as_fftw(const Complex* p) {
    // FFTW takes non-const input even for out-of-place transforms it does not modify.
    return reinterpret_cast<fftw_complex*>(const_cast<Complex*>(p));
}

}  // namespace

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

unsigned log2_exact(std::size_t n) {
    if (!is_power_of_two(n)) throw std::invalid_argument("log2_exact: not a power of two");
    unsigned r = 0;
    while ((std::size_t{1} << r) < n) ++r;
    return r;
}

FftPlan::FftPlan(std::size_t n) : n_(n) {
    std::vector<Complex> a(n), b(n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    const int len = static_cast<int>(n);
    forward_inplace_ = fftw_plan_dft_1d(len, as_fftw(a.data()), as_fftw(a.data()), FFTW_FORWARD, flags);
    inverse_inplace_ = fftw_plan_dft_1d(len, as_fftw(a.data()), as_fftw(a.data()), FFTW_BACKWARD, flags);
    forward_ = fftw_plan_dft_1d(len, as_fftw(a.data()), as_fftw(b.data()), FFTW_FORWARD, flags);
    inverse_ = fftw_plan_dft_1d(len, as_fftw(a.data()), as_fftw(b.data()), FFTW_BACKWARD, flags);
    if (!forward_inplace_ || !inverse_inplace_ || !forward_ || !inverse_)
        throw std::runtime_error("FFTW plan creation failed");
}

const FftPlan& FftPlan::get(std::size_t n) {
    if (n == 0) throw std::invalid_argument("FftPlan: zero length");
    // Plans live for the whole process.
    static auto* cache = new std::map<std::size_t, std::unique_ptr<FftPlan>>();
    std::lock_guard lock(planner_mutex());
    auto it = cache->find(n);
    if (it == cache->end()) it = cache->emplace(n, std::unique_ptr<FftPlan>(new FftPlan(n))).first;
    return *it->second;
}

void FftPlan::forward(std::span<Complex> data) const {
    if (data.size() != n_) throw std::invalid_argument("FftPlan: length mismatch");
    fftw_execute_dft(static_cast<fftw_plan>(forward_inplace_), as_fftw(data.data()), as_fftw(data.data()));
}

void FftPlan::forward(std::span<const Complex> in, std::span<Complex> out) const {
    if (in.size() != n_ || out.size() != n_) throw std::invalid_argument("FftPlan: length mismatch");
    if (in.data() == out.data()) return forward(out);
    fftw_execute_dft(static_cast<fftw_plan>(forward_), as_fftw(in.data()), as_fftw(out.data()));
}

void FftPlan::inverse(std::span<Complex> data) const {
    if (data.size() != n_) throw std::invalid_argument("FftPlan: length mismatch");
    fftw_execute_dft(static_cast<fftw_plan>(inverse_inplace_), as_fftw(data.data()), as_fftw(data.data()));
    const double scale = 1.0 / static_cast<double>(n_);
    for (auto& v : data) v *= scale;
}

void FftPlan::inverse(std::span<const Complex> in, std::span<Complex> out) const {
    if (in.size() != n_ || out.size() != n_) throw std::invalid_argument("FftPlan: length mismatch");
    if (in.data() == out.data()) return inverse(out);
    fftw_execute_dft(static_cast<fftw_plan>(inverse_), as_fftw(in.data()), as_fftw(out.data()));
    const double scale = 1.0 / static_cast<double>(n_);
    for (auto& v : out) v *= scale;
}

}  // namespace otfs
