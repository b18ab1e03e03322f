#pragma once

// Linear system solvers over GF(2) with attached symbol payloads.
//
// Both solvers process columns left to right, so the set of pivot columns
// they find is the greedy (lexicographically first) column basis of the
// matrix.  That set is a property of the matrix alone, which is why the two
// algorithms always agree on solvability and on which unknowns are
// undetermined, while differing enormously in row operations on banded
// inputs:
//
//  - dense_solve is classical Gauss-Jordan ("invert the matrix"): every
//    other row holding the pivot column is cleared immediately.  On a banded
//    system the already-reduced rows keep acquiring fresh tail bits from
//    later pivots, so the cost stays quadratic in the number of unknowns.
//
//  - banded_solve keeps rows bucketed by their current leading column and
//    only ever combines rows that lead at the same column.  Fill-in cannot
//    escape the union of the two row spans, so the work per row stays
//    proportional to the band width and the total is linear in the system
//    size for fixed band width.  Back-substitution then combines solved
//    symbols directly (one row operation per substitution).
//
// Pivot choice inside a bucket prefers the row with the sparsest remaining
// segment, ties broken by the lowest row index, which keeps fill-in low and
// the procedure fully deterministic.

#include <cstdint>
#include <limits>
#include <vector>

#include "bandfec/bitmatrix.hpp"
#include "bandfec/symbols.hpp"

namespace bandfec {

inline constexpr std::uint32_t kNoPivot = std::numeric_limits<std::uint32_t>::max();

struct BandProfile {
    std::vector<std::uint32_t> first;  // leading column per row; cols() for zero rows
    std::vector<std::uint32_t> last;   // trailing column per row; 0 for zero rows
    std::uint32_t bandwidth = 0;       // widest nonzero row span

    static BandProfile measure(const BitMatrix& m) {
        BandProfile p;
        p.first.resize(m.rows());
        p.last.resize(m.rows());
        for (std::uint32_t r = 0; r < m.rows(); ++r) {
            p.first[r] = m.row_first(r);
            p.last[r] = m.row_last(r);
            if (p.first[r] < m.cols()) {
                p.bandwidth = std::max(p.bandwidth, p.last[r] - p.first[r] + 1);
            }
        }
        return p;
    }
};

struct SolveOutcome {
    std::uint32_t rank = 0;
    std::vector<std::uint32_t> unsolvable;  // pivot-free columns, ascending
    bool inconsistent = false;              // a zero row carried a nonzero right-hand side
    std::uint64_t row_ops = 0;              // row XORs plus symbol substitutions this call
    std::uint32_t bandwidth_used = 0;       // widest active span seen (banded solver)
    SymbolStore solution;                   // one row per column, filled when solved()

    bool solved() const { return !inconsistent && unsolvable.empty(); }
};

// Gauss-Jordan elimination.  Mutates the matrix (and rhs rows, when given)
// into reduced form.  Returns the unique solution when the matrix has full
// column rank; otherwise reports the pivot-free columns.
inline SolveOutcome dense_solve(BitMatrix& m, SymbolStore* rhs = nullptr) {
    SolveOutcome out;
    const std::uint64_t ops_before = m.op_counter();
    std::vector<std::uint32_t> pivot_of(m.cols(), kNoPivot);
    std::vector<bool> used(m.rows(), false);

    for (std::uint32_t c = 0; c < m.cols(); ++c) {
        std::uint32_t pivot = kNoPivot;
        for (std::uint32_t r = 0; r < m.rows(); ++r) {
            if (!used[r] && m.get(r, c)) {
                pivot = r;
                break;
            }
        }
        if (pivot == kNoPivot) {
            out.unsolvable.push_back(c);
            continue;
        }
        used[pivot] = true;
        pivot_of[c] = pivot;
        ++out.rank;
        for (std::uint32_t r = 0; r < m.rows(); ++r) {
            if (r != pivot && m.get(r, c)) {
                m.xor_rows(r, pivot);
                if (rhs != nullptr) rhs->xor_rows(r, pivot);
            }
        }
    }

    if (rhs != nullptr) {
        for (std::uint32_t r = 0; r < m.rows(); ++r) {
            if (!used[r] && !rhs->row_is_zero(r)) out.inconsistent = true;
        }
        if (out.solved()) {
            out.solution = SymbolStore(m.cols(), rhs->symbol_size());
            for (std::uint32_t c = 0; c < m.cols(); ++c) {
                out.solution.assign(c, rhs->row(pivot_of[c]));
            }
        }
    }
    out.row_ops = m.op_counter() - ops_before;
    return out;
}

// Band-respecting elimination.  The profile describes the incoming rows and
// is used for reporting; correctness does not depend on it.  Never fails on
// a solvable system: if no row leads at a column, that column has no pivot in
// any elimination order, so the system is genuinely underdetermined there.
inline SolveOutcome banded_solve(BitMatrix& m, const BandProfile& profile,
                                 SymbolStore* rhs = nullptr) {
    SolveOutcome out;
    const std::uint64_t ops_before = m.op_counter();
    std::uint64_t substitution_ops = 0;

    // Bucket rows by their true leading column; the profile is advisory
    // (reporting only) and must not be trusted for correctness.
    (void)profile;
    std::vector<std::vector<std::uint32_t>> bucket(m.cols() + 1);
    std::vector<std::uint32_t> weight(m.rows());
    for (std::uint32_t r = 0; r < m.rows(); ++r) {
        bucket[m.row_first(r)].push_back(r);
        weight[r] = static_cast<std::uint32_t>(m.row_weight(r));
    }

    std::vector<std::uint32_t> pivot_of(m.cols(), kNoPivot);
    std::vector<std::uint32_t> zero_rows;
    zero_rows.reserve(bucket[m.cols()].size());
    for (std::uint32_t r : bucket[m.cols()]) zero_rows.push_back(r);

    for (std::uint32_t c = 0; c < m.cols(); ++c) {
        auto& rows_here = bucket[c];
        if (rows_here.empty()) {
            out.unsolvable.push_back(c);
            continue;
        }
        std::uint32_t pivot = rows_here[0];
        for (std::uint32_t r : rows_here) {
            if (weight[r] < weight[pivot] || (weight[r] == weight[pivot] && r < pivot)) pivot = r;
        }
        pivot_of[c] = pivot;
        ++out.rank;
        out.bandwidth_used = std::max(out.bandwidth_used, m.row_last(pivot) - c + 1);

        for (std::uint32_t r : rows_here) {
            if (r == pivot) continue;
            m.xor_rows(r, pivot);
            if (rhs != nullptr) rhs->xor_rows(r, pivot);
            const std::uint32_t lead = m.row_first(r);
            if (lead == m.cols()) {
                zero_rows.push_back(r);
            } else {
                bucket[lead].push_back(r);
                weight[r] = static_cast<std::uint32_t>(m.row_weight(r));
                out.bandwidth_used = std::max(out.bandwidth_used, m.row_last(r) - lead + 1);
            }
        }
        rows_here.clear();
    }

    if (rhs != nullptr) {
        for (std::uint32_t r : zero_rows) {
            if (!rhs->row_is_zero(r)) out.inconsistent = true;
        }
        if (out.solved()) {
            // Echelon rows only reach forward, so substituting from the last
            // column backwards finishes each unknown in one pass.
            out.solution = SymbolStore(m.cols(), rhs->symbol_size());
            for (std::uint32_t c = m.cols(); c-- > 0;) {
                const std::uint32_t p = pivot_of[c];
                out.solution.assign(c, rhs->row(p));
                for (std::uint32_t e : m.row_support(p)) {
                    if (e == c) continue;
                    out.solution.xor_rows(c, e);
                    ++substitution_ops;
                }
            }
        }
    }
    out.row_ops = m.op_counter() - ops_before + substitution_ops;
    return out;
}

}  // namespace bandfec
