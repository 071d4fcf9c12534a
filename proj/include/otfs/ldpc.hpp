#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "otfs/types.hpp"

namespace otfs {

// Binary LDPC code given by a sparse parity-check matrix. The encoder is
// derived at construction by Gaussian elimination over GF(2): pivot columns
// carry parity, the remaining columns carry the information bits verbatim.
class LdpcCode {
public:
    // check_rows[i] lists the variable (column) indices of check i.
    LdpcCode(std::size_t n, std::vector<std::vector<std::uint32_t>> check_rows);

    static LdpcCode from_alist(std::istream& in);
    static LdpcCode load(const std::filesystem::path& path);
    void write_alist(std::ostream& out) const;

    std::size_t n() const { return n_; }
    std::size_t m() const { return checks_.size(); }
    std::size_t k() const { return info_cols_.size(); }
    double rate() const { return static_cast<double>(k()) / static_cast<double>(n_); }

    const std::vector<std::vector<std::uint32_t>>& checks() const { return checks_; }
    const std::vector<std::vector<std::uint32_t>>& variables() const { return vars_; }
    std::span<const std::uint32_t> info_positions() const { return info_cols_; }

    Bits encode(std::span<const std::uint8_t> info) const;
    Bits extract_info(std::span<const std::uint8_t> codeword) const;
    bool is_codeword(std::span<const std::uint8_t> bits) const;
    std::size_t syndrome_weight(std::span<const std::uint8_t> bits) const;

private:
    std::size_t n_;
    std::vector<std::vector<std::uint32_t>> checks_;
    std::vector<std::vector<std::uint32_t>> vars_;
    std::vector<std::uint32_t> info_cols_;
    std::vector<std::uint32_t> parity_cols_;
    // For parity j: packed mask over the information bits.
    std::vector<std::vector<std::uint64_t>> parity_masks_;
};

struct DecodeResult {
    std::vector<double> llrs;  // posterior, positive favours 0
    Bits bits;
    bool converged = false;
    int iterations = 0;
};

inline constexpr double kMinSumScale = 0.75;
inline constexpr int kDecoderIterations = 50;

// Flooding normalized min-sum. Stops once the hard decisions satisfy every
// check; a zero posterior counts as undecided and blocks convergence.
DecodeResult ldpc_decode(std::span<const double> llrs, const LdpcCode& code, int max_iters = kDecoderIterations,
                         double scale = kMinSumScale);

// Seeded permutation over a block of coded bits.
class Interleaver {
public:
    Interleaver(std::size_t size, std::uint64_t seed);

    std::size_t size() const { return perm_.size(); }
    std::span<const std::uint32_t> permutation() const { return perm_; }

    // out[i] = in[perm[i]]
    template <typename T>
    std::vector<T> interleave(std::span<const T> in) const {
        check(in.size());
        std::vector<T> out(in.size());
        for (std::size_t i = 0; i < perm_.size(); ++i) out[i] = in[perm_[i]];
        return out;
    }
    template <typename T>
    std::vector<T> deinterleave(std::span<const T> in) const {
        check(in.size());
        std::vector<T> out(in.size());
        for (std::size_t i = 0; i < perm_.size(); ++i) out[perm_[i]] = in[i];
        return out;
    }

private:
    void check(std::size_t n) const;
    std::vector<std::uint32_t> perm_;
};

}  // namespace otfs
