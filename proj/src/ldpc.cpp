#include "otfs/ldpc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <stdexcept>

#include "otfs/rng.hpp"

namespace otfs {

namespace {

using Row = std::vector<std::uint64_t>;

bool get_bit(const Row& r, std::size_t c) { return (r[c >> 6] >> (c & 63)) & 1u; }
void set_bit(Row& r, std::size_t c) { r[c >> 6] |= std::uint64_t{1} << (c & 63); }

std::size_t read_count(std::istream& in, const char* what) {
    long long v;
    if (!(in >> v)) throw std::runtime_error(std::string("alist: missing ") + what);
    if (v < 0) throw std::runtime_error(std::string("alist: negative ") + what);
    return static_cast<std::size_t>(v);
}

}  // namespace

LdpcCode::LdpcCode(std::size_t n, std::vector<std::vector<std::uint32_t>> check_rows)
    : n_(n), checks_(std::move(check_rows)), vars_(n) {
    if (n_ == 0 || checks_.empty()) throw std::invalid_argument("LdpcCode: empty matrix");
    for (std::size_t c = 0; c < checks_.size(); ++c) {
        auto& row = checks_[c];
        std::sort(row.begin(), row.end());
        if (std::adjacent_find(row.begin(), row.end()) != row.end())
            throw std::invalid_argument("LdpcCode: repeated entry in check " + std::to_string(c));
        for (auto v : row) {
            if (v >= n_) throw std::invalid_argument("LdpcCode: column index out of range");
            vars_[v].push_back(static_cast<std::uint32_t>(c));
        }
    }

    // Reduced row echelon form over GF(2).
    const std::size_t m = checks_.size();
    const std::size_t words = (n_ + 63) / 64;
    std::vector<Row> h(m, Row(words, 0));
    for (std::size_t c = 0; c < m; ++c)
        for (auto v : checks_[c]) set_bit(h[c], v);

    std::size_t rank = 0;
    std::vector<char> is_pivot(n_, 0);
    for (std::size_t col = 0; col < n_ && rank < m; ++col) {
        std::size_t piv = rank;
        while (piv < m && !get_bit(h[piv], col)) ++piv;
        if (piv == m) continue;
        std::swap(h[piv], h[rank]);
        for (std::size_t r = 0; r < m; ++r) {
            if (r == rank || !get_bit(h[r], col)) continue;
            for (std::size_t w = col >> 6; w < words; ++w) h[r][w] ^= h[rank][w];
        }
        is_pivot[col] = 1;
        parity_cols_.push_back(static_cast<std::uint32_t>(col));
        ++rank;
    }
    if (rank < m)
        throw std::invalid_argument("LdpcCode: parity-check matrix is rank deficient (rank " + std::to_string(rank) +
                                    " of " + std::to_string(m) + ")");
    for (std::size_t col = 0; col < n_; ++col)
        if (!is_pivot[col]) info_cols_.push_back(static_cast<std::uint32_t>(col));

    const std::size_t info_words = (info_cols_.size() + 63) / 64;
    parity_masks_.assign(m, Row(info_words, 0));
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t t = 0; t < info_cols_.size(); ++t)
            if (get_bit(h[r], info_cols_[t])) set_bit(parity_masks_[r], t);
}

LdpcCode LdpcCode::from_alist(std::istream& in) {
    const std::size_t n = read_count(in, "column count");
    const std::size_t m = read_count(in, "row count");
    const std::size_t max_col = read_count(in, "max column weight");
    const std::size_t max_row = read_count(in, "max row weight");
    std::vector<std::size_t> col_w(n), row_w(m);
    for (auto& w : col_w) {
        w = read_count(in, "column weight");
        if (w > max_col) throw std::runtime_error("alist: column weight exceeds declared maximum");
    }
    for (auto& w : row_w) {
        w = read_count(in, "row weight");
        if (w > max_row) throw std::runtime_error("alist: row weight exceeds declared maximum");
    }

    std::set<std::pair<std::uint32_t, std::uint32_t>> from_cols;  // (row, col)
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t j = 0; j < max_col; ++j) {
            const std::size_t v = read_count(in, "column entry");
            if (j < col_w[c]) {
                if (v < 1 || v > m) throw std::runtime_error("alist: row index out of range");
                from_cols.emplace(static_cast<std::uint32_t>(v - 1), static_cast<std::uint32_t>(c));
            } else if (v != 0) {
                throw std::runtime_error("alist: nonzero padding in column list");
            }
        }
    }
    std::vector<std::vector<std::uint32_t>> rows(m);
    std::size_t entries = 0;
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t j = 0; j < max_row; ++j) {
            const std::size_t v = read_count(in, "row entry");
            if (j < row_w[r]) {
                if (v < 1 || v > n) throw std::runtime_error("alist: column index out of range");
                const auto col = static_cast<std::uint32_t>(v - 1);
                if (!from_cols.count({static_cast<std::uint32_t>(r), col}))
                    throw std::runtime_error("alist: row and column lists disagree");
                rows[r].push_back(col);
                ++entries;
            } else if (v != 0) {
                throw std::runtime_error("alist: nonzero padding in row list");
            }
        }
    }
    if (entries != from_cols.size()) throw std::runtime_error("alist: row and column lists disagree");
    return LdpcCode(n, std::move(rows));
}

LdpcCode LdpcCode::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open alist file " + path.string());
    return from_alist(in);
}

void LdpcCode::write_alist(std::ostream& out) const {
    std::size_t max_col = 0, max_row = 0;
    for (const auto& v : vars_) max_col = std::max(max_col, v.size());
    for (const auto& c : checks_) max_row = std::max(max_row, c.size());
    out << n_ << ' ' << m() << '\n' << max_col << ' ' << max_row << '\n';
    for (std::size_t i = 0; i < n_; ++i) out << vars_[i].size() << (i + 1 < n_ ? ' ' : '\n');
    for (std::size_t i = 0; i < m(); ++i) out << checks_[i].size() << (i + 1 < m() ? ' ' : '\n');
    auto emit = [&](const std::vector<std::uint32_t>& list, std::size_t width) {
        for (std::size_t j = 0; j < width; ++j) {
            out << (j < list.size() ? list[j] + 1 : 0);
            out << (j + 1 < width ? ' ' : '\n');
        }
    };
    for (const auto& v : vars_) emit(v, max_col);
    for (const auto& c : checks_) emit(c, max_row);
}

Bits LdpcCode::encode(std::span<const std::uint8_t> info) const {
    if (info.size() != k())
        throw std::invalid_argument("ldpc encode: expected " + std::to_string(k()) + " information bits");
    Row packed((k() + 63) / 64, 0);
    for (std::size_t t = 0; t < k(); ++t)
        if (info[t] & 1u) set_bit(packed, t);
    Bits cw(n_, 0);
    for (std::size_t t = 0; t < k(); ++t) cw[info_cols_[t]] = info[t] & 1u;
    for (std::size_t r = 0; r < parity_cols_.size(); ++r) {
        unsigned acc = 0;
        for (std::size_t w = 0; w < packed.size(); ++w) acc += std::popcount(parity_masks_[r][w] & packed[w]);
        cw[parity_cols_[r]] = static_cast<std::uint8_t>(acc & 1u);
    }
    return cw;
}

Bits LdpcCode::extract_info(std::span<const std::uint8_t> codeword) const {
    if (codeword.size() != n_) throw std::invalid_argument("extract_info: length mismatch");
    Bits info(k());
    for (std::size_t t = 0; t < k(); ++t) info[t] = codeword[info_cols_[t]];
    return info;
}

std::size_t LdpcCode::syndrome_weight(std::span<const std::uint8_t> bits) const {
    if (bits.size() != n_) throw std::invalid_argument("syndrome: length mismatch");
    std::size_t w = 0;
    for (const auto& row : checks_) {
        unsigned acc = 0;
        for (auto v : row) acc ^= bits[v] & 1u;
        w += acc;
    }
    return w;
}

bool LdpcCode::is_codeword(std::span<const std::uint8_t> bits) const { return syndrome_weight(bits) == 0; }

DecodeResult ldpc_decode(std::span<const double> llrs, const LdpcCode& code, int max_iters, double scale) {
    const std::size_t n = code.n();
    if (llrs.size() != n) throw std::invalid_argument("ldpc_decode: expected " + std::to_string(n) + " LLRs");
    const auto& checks = code.checks();

    std::vector<std::size_t> offset(checks.size() + 1, 0);
    for (std::size_t c = 0; c < checks.size(); ++c) offset[c + 1] = offset[c] + checks[c].size();
    std::vector<double> c2v(offset.back(), 0.0);

    DecodeResult res;
    res.llrs.assign(llrs.begin(), llrs.end());
    res.bits.assign(n, 0);
    std::vector<double> v2c;
    for (std::size_t v = 0; v < n; ++v) res.bits[v] = llrs[v] < 0.0 ? 1 : 0;

    for (int it = 1; it <= max_iters; ++it) {
        for (std::size_t c = 0; c < checks.size(); ++c) {
            const auto& row = checks[c];
            v2c.resize(row.size());
            double min1 = std::numeric_limits<double>::infinity(), min2 = min1;
            std::size_t arg = 0;
            bool negative = false;
            for (std::size_t j = 0; j < row.size(); ++j) {
                v2c[j] = res.llrs[row[j]] - c2v[offset[c] + j];
                const double a = std::abs(v2c[j]);
                if (v2c[j] < 0.0) negative = !negative;
                if (a < min1) {
                    min2 = min1;
                    min1 = a;
                    arg = j;
                } else if (a < min2) {
                    min2 = a;
                }
            }
            for (std::size_t j = 0; j < row.size(); ++j) {
                const double mag = scale * (j == arg ? min2 : min1);
                const bool neg = negative != (v2c[j] < 0.0);
                c2v[offset[c] + j] = neg ? -mag : mag;
            }
        }
        std::copy(llrs.begin(), llrs.end(), res.llrs.begin());
        for (std::size_t c = 0; c < checks.size(); ++c)
            for (std::size_t j = 0; j < checks[c].size(); ++j) res.llrs[checks[c][j]] += c2v[offset[c] + j];

        bool undecided = false;
        for (std::size_t v = 0; v < n; ++v) {
            res.bits[v] = res.llrs[v] < 0.0 ? 1 : 0;
            if (res.llrs[v] == 0.0) undecided = true;
        }
        res.iterations = it;
        if (!undecided && code.is_codeword(res.bits)) {
            res.converged = true;
            break;
        }
    }
    return res;
}

Interleaver::Interleaver(std::size_t size, std::uint64_t seed) : perm_(size) {
    std::iota(perm_.begin(), perm_.end(), 0u);
    auto rng = make_rng(seed, Stream::interleaver);
    std::shuffle(perm_.begin(), perm_.end(), rng);
}

void Interleaver::check(std::size_t n) const {
    if (n != perm_.size())
        throw std::invalid_argument("interleaver: block of " + std::to_string(n) + " bits, expected " +
                                    std::to_string(perm_.size()));
}

}  // namespace otfs
