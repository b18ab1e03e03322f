#pragma once

// Dense bit matrix over GF(2), rows packed into 64-bit words.
//
// The matrix carries an operation counter that increments once per row XOR.
// One "row operation" in the cost model means one matrix row XOR together
// with the paired symbol XOR when payload symbols are attached, so the
// counter is bumped exactly once per xor_rows call and solvers add their
// symbol-substitution work explicitly.

#include <bit>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bandfec {

class BitMatrix {
public:
    BitMatrix(std::uint32_t rows, std::uint32_t cols)
        : rows_(rows),
          cols_(cols),
          words_per_row_((static_cast<std::size_t>(cols) + 63) / 64),
          bits_(static_cast<std::size_t>(rows) * words_per_row_, 0) {}

    std::uint32_t rows() const { return rows_; }
    std::uint32_t cols() const { return cols_; }

    bool get(std::uint32_t r, std::uint32_t c) const {
        return (word(r, c / 64) >> (c % 64) & 1u) != 0;
    }

    void set(std::uint32_t r, std::uint32_t c, bool value = true) {
        std::uint64_t& w = bits_[static_cast<std::size_t>(r) * words_per_row_ + c / 64];
        const std::uint64_t mask = std::uint64_t{1} << (c % 64);
        if (value) {
            w |= mask;
        } else {
            w &= ~mask;
        }
    }

    void flip(std::uint32_t r, std::uint32_t c) {
        bits_[static_cast<std::size_t>(r) * words_per_row_ + c / 64] ^= std::uint64_t{1} << (c % 64);
    }

    // dst ^= src.  The single entry point for elimination; bumps the counter.
    void xor_rows(std::uint32_t dst, std::uint32_t src) {
        if (dst == src) throw std::invalid_argument("xor_rows: dst and src must differ");
        std::uint64_t* d = &bits_[static_cast<std::size_t>(dst) * words_per_row_];
        const std::uint64_t* s = &bits_[static_cast<std::size_t>(src) * words_per_row_];
        for (std::size_t w = 0; w < words_per_row_; ++w) d[w] ^= s[w];
        ++op_counter_;
    }

    std::uint64_t op_counter() const { return op_counter_; }
    void reset_op_counter() { op_counter_ = 0; }
    void count_op(std::uint64_t n = 1) { op_counter_ += n; }

    std::span<const std::uint64_t> row_words(std::uint32_t r) const {
        return {&bits_[static_cast<std::size_t>(r) * words_per_row_], words_per_row_};
    }

    std::size_t row_weight(std::uint32_t r) const {
        std::size_t count = 0;
        for (std::uint64_t w : row_words(r)) count += static_cast<std::size_t>(std::popcount(w));
        return count;
    }

    // First set column of a row, or cols() when the row is zero.
    std::uint32_t row_first(std::uint32_t r) const {
        const auto words = row_words(r);
        for (std::size_t w = 0; w < words.size(); ++w) {
            if (words[w] != 0) {
                return static_cast<std::uint32_t>(w * 64 + static_cast<std::size_t>(std::countr_zero(words[w])));
            }
        }
        return cols_;
    }

    // Last set column of a row, or 0 when the row is zero.
    std::uint32_t row_last(std::uint32_t r) const {
        const auto words = row_words(r);
        for (std::size_t w = words.size(); w-- > 0;) {
            if (words[w] != 0) {
                return static_cast<std::uint32_t>(w * 64 + 63 - static_cast<std::size_t>(std::countl_zero(words[w])));
            }
        }
        return 0;
    }

    // Column indices of the set bits of a row, ascending.
    std::vector<std::uint32_t> row_support(std::uint32_t r) const {
        std::vector<std::uint32_t> cols;
        const auto words = row_words(r);
        for (std::size_t wi = 0; wi < words.size(); ++wi) {
            std::uint64_t w = words[wi];
            while (w != 0) {
                cols.push_back(static_cast<std::uint32_t>(wi * 64 +
                               static_cast<std::size_t>(std::countr_zero(w))));
                w &= w - 1;
            }
        }
        return cols;
    }

private:
    std::uint64_t word(std::uint32_t r, std::size_t w) const {
        return bits_[static_cast<std::size_t>(r) * words_per_row_ + w];
    }

    std::uint32_t rows_;
    std::uint32_t cols_;
    std::size_t words_per_row_;
    std::vector<std::uint64_t> bits_;
    std::uint64_t op_counter_ = 0;
};

// Debug dump: one line of '0'/'1' characters per row.
inline std::string dump(const BitMatrix& m) {
    std::string out;
    out.reserve(static_cast<std::size_t>(m.rows()) * (m.cols() + 1));
    for (std::uint32_t r = 0; r < m.rows(); ++r) {
        for (std::uint32_t c = 0; c < m.cols(); ++c) out += m.get(r, c) ? '1' : '0';
        out += '\n';
    }
    return out;
}

inline BitMatrix parse_dump(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        if (end > start) lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    if (lines.empty()) throw std::invalid_argument("parse_dump: empty dump");
    BitMatrix m(static_cast<std::uint32_t>(lines.size()),
                static_cast<std::uint32_t>(lines[0].size()));
    for (std::size_t r = 0; r < lines.size(); ++r) {
        if (lines[r].size() != lines[0].size()) {
            throw std::invalid_argument("parse_dump: ragged rows");
        }
        for (std::size_t c = 0; c < lines[r].size(); ++c) {
            if (lines[r][c] == '1') {
                m.set(static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c));
            } else if (lines[r][c] != '0') {
                throw std::invalid_argument("parse_dump: invalid character");
            }
        }
    }
    return m;
}

// Rank by plain forward elimination on a scratch copy.  Does not touch the
// caller's matrix or its operation counter.
inline std::uint32_t rank(const BitMatrix& m) {
    BitMatrix scratch = m;
    // Rows grouped by current leading column; each elimination strictly
    // advances a row's leading column, so every row is visited O(width) times.
    std::vector<std::vector<std::uint32_t>> by_lead(scratch.cols() + 1);
    for (std::uint32_t r = 0; r < scratch.rows(); ++r) by_lead[scratch.row_first(r)].push_back(r);
    std::uint32_t rank_count = 0;
    for (std::uint32_t c = 0; c < scratch.cols(); ++c) {
        auto& bucket = by_lead[c];
        if (bucket.empty()) continue;
        const std::uint32_t pivot = bucket.front();
        ++rank_count;
        for (std::size_t i = 1; i < bucket.size(); ++i) {
            const std::uint32_t r = bucket[i];
            scratch.xor_rows(r, pivot);
            by_lead[scratch.row_first(r)].push_back(r);
        }
        bucket.clear();
    }
    return rank_count;
}

}  // namespace bandfec
