#pragma once
// Systematic encoding, iterative (peeling) decoding, and maximum-likelihood
// decoding over the reduced generator system.
//
// The decode pipeline mirrors how the codes are meant to be used on an
// erasure channel: peel first — every parity equation with a single missing
// participant resolves it at the cost of one XOR per present member — and
// fall back to Gaussian elimination only on the residue.  The ML system is
// shrunk three ways before solving: received sources leave the unknown set,
// only available repair symbols contribute equations, and peeling-recovered
// symbols count as available.  Band codes keep their band structure through
// that reduction (column deletion leaves a ragged band), which is what lets
// the banded solver replace the quadratic dense elimination.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bandfec/bitmatrix.hpp"
#include "bandfec/codespec.hpp"
#include "bandfec/construct.hpp"
#include "bandfec/solve.hpp"
#include "bandfec/symbols.hpp"

namespace bandfec {

// Windowed codes never transmit the sources, so their blocks carry k source
// slots followed by the n output slots.  Systematic families use one slot
// per encoding symbol, sources first.
inline std::size_t slot_count(const CodeSpec& spec) {
    return spec.family == CodeFamily::Windowed
               ? static_cast<std::size_t>(spec.k) + spec.n
               : spec.n;
}

// Block slot holding the encoding symbol with the given ID.
inline std::size_t transmit_slot(const CodeSpec& spec, std::uint32_t esi) {
    return spec.family == CodeFamily::Windowed
               ? static_cast<std::size_t>(spec.k) + esi
               : esi;
}

struct DecodeOutcome {
    bool success = false;
    std::uint32_t recovered_count = 0;     // source slots recovered by this call
    std::uint32_t iterative_recovered = 0; // of which, by peeling
    std::uint32_t ml_recovered = 0;        // of which, by elimination
    std::uint32_t unsolvable_count = 0;    // undetermined unknowns on failure
    std::uint64_t row_ops = 0;             // symbol/matrix row XORs, all stages
    std::chrono::nanoseconds wall_time{0};
};

// Fills every non-source slot from the k source symbols.  Band repairs XOR
// the sources under each repair column's polynomial support; staircase
// repairs accumulate forward; windowed outputs mix their window's sources.
inline void encode(const CodeSpec& spec, const CodeMatrices& matrices, SymbolBlock& block) {
    const std::uint32_t k = spec.k;
    if (block.slots() != slot_count(spec)) {
        throw std::invalid_argument("block slot count does not match the code");
    }
    for (std::uint32_t i = 0; i < k; ++i) {
        if (!block.present(i)) {
            throw std::invalid_argument("encoding needs all source symbols present");
        }
    }
    if (spec.family == CodeFamily::Windowed) {
        for (std::uint32_t r = 0; r < spec.n; ++r) {
            const std::size_t slot = static_cast<std::size_t>(k) + r;
            const auto out = block.symbol_mut(slot);
            std::fill(out.begin(), out.end(), 0);
            for (std::uint32_t i : matrices.gen_rows[r]) block.xor_from(slot, i);
            block.mark(slot, SlotState::Received);
        }
        return;
    }
    const std::uint32_t nrep = spec.n - k;
    for (std::uint32_t j = 0; j < nrep; ++j) {
        const std::size_t slot = static_cast<std::size_t>(k) + j;
        const auto out = block.symbol_mut(slot);
        std::fill(out.begin(), out.end(), 0);
        for (std::uint32_t i : matrices.repair_sources[j]) block.xor_from(slot, i);
        if (spec.family == CodeFamily::Staircase && j > 0) block.xor_from(slot, slot - 1);
        block.mark(slot, SlotState::Received);
    }
}

struct PeelingReport {
    std::uint32_t recovered_sources = 0;
    std::uint32_t recovered_repairs = 0;
    std::uint32_t missing_sources = 0;  // remaining after the fixpoint
    std::uint64_t row_ops = 0;
};

// Runs erasure peeling on the parity-check rows to its fixpoint.  Recovered
// slots (sources and repairs alike) are tagged Iterative.  Windowed codes
// have no parity rows, so this is a no-op for them.
inline PeelingReport iterative_decode(const CodeSpec& spec, const CodeMatrices& matrices,
                                      SymbolBlock& block) {
    PeelingReport report;
    const std::size_t rows = matrices.h_rows.size();
    std::vector<std::uint32_t> unknown(rows, 0);
    std::vector<std::vector<std::uint32_t>> eqs_of(block.slots());
    std::vector<std::uint32_t> ready;
    for (std::size_t j = 0; j < rows; ++j) {
        for (std::uint32_t slot : matrices.h_rows[j]) {
            if (!block.present(slot)) {
                ++unknown[j];
                eqs_of[slot].push_back(static_cast<std::uint32_t>(j));
            }
        }
        if (unknown[j] == 1) ready.push_back(static_cast<std::uint32_t>(j));
    }
    while (!ready.empty()) {
        const std::uint32_t j = ready.back();
        ready.pop_back();
        if (unknown[j] != 1) continue;  // resolved while queued
        std::uint32_t target = UINT32_MAX;
        for (std::uint32_t slot : matrices.h_rows[j]) {
            if (!block.present(slot)) {
                target = slot;
                break;
            }
        }
        auto out = block.symbol_mut(target);
        std::fill(out.begin(), out.end(), 0);
        for (std::uint32_t slot : matrices.h_rows[j]) {
            if (slot == target) continue;
            block.xor_from(target, slot);
            ++report.row_ops;
        }
        block.mark(target, SlotState::Iterative);
        if (target < spec.k) {
            ++report.recovered_sources;
        } else {
            ++report.recovered_repairs;
        }
        for (std::uint32_t e : eqs_of[target]) {
            if (--unknown[e] == 1) ready.push_back(e);
        }
    }
    for (std::uint32_t i = 0; i < spec.k; ++i) {
        if (!block.present(i)) ++report.missing_sources;
    }
    return report;
}

// Presence-only peeling: identical fixpoint to iterative_decode but without
// touching any symbol bytes.  Used for cheap feasibility probes.
inline std::vector<char> peel_indices(const CodeMatrices& matrices,
                                      std::vector<char> present) {
    const std::size_t rows = matrices.h_rows.size();
    std::vector<std::uint32_t> unknown(rows, 0);
    std::vector<std::vector<std::uint32_t>> eqs_of(present.size());
    std::vector<std::uint32_t> ready;
    for (std::size_t j = 0; j < rows; ++j) {
        for (std::uint32_t slot : matrices.h_rows[j]) {
            if (!present[slot]) {
                ++unknown[j];
                eqs_of[slot].push_back(static_cast<std::uint32_t>(j));
            }
        }
        if (unknown[j] == 1) ready.push_back(static_cast<std::uint32_t>(j));
    }
    while (!ready.empty()) {
        const std::uint32_t j = ready.back();
        ready.pop_back();
        if (unknown[j] != 1) continue;
        std::uint32_t target = UINT32_MAX;
        for (std::uint32_t slot : matrices.h_rows[j]) {
            if (!present[slot]) {
                target = slot;
                break;
            }
        }
        present[target] = 1;
        for (std::uint32_t e : eqs_of[target]) {
            if (--unknown[e] == 1) ready.push_back(e);
        }
    }
    return present;
}

// The reduced ML system: one equation per available repair/output symbol,
// one column per still-missing source (original source order preserved).
struct MlSystem {
    BitMatrix matrix{0, 0};
    SymbolStore rhs{0, 1};
    std::vector<std::uint32_t> unknowns;  // source slot per matrix column
    std::uint64_t rhs_ops = 0;
};

// Builds the reduced system.  Pass the block to also build the right-hand
// side; pass nullptr for a structure-only system (rank probes).  `present`
// must hold one flag per block slot.
inline MlSystem build_ml_system(const CodeSpec& spec, const CodeMatrices& matrices,
                                const SymbolBlock* block,
                                const std::vector<char>& present) {
    if (present.size() != slot_count(spec)) {
        throw std::invalid_argument("presence flags do not match the code's slot count");
    }
    const std::uint32_t k = spec.k;
    MlSystem sys;
    std::vector<std::uint32_t> column_of(k, UINT32_MAX);
    for (std::uint32_t i = 0; i < k; ++i) {
        if (!present[i]) {
            column_of[i] = static_cast<std::uint32_t>(sys.unknowns.size());
            sys.unknowns.push_back(i);
        }
    }

    std::vector<std::vector<std::uint32_t>> supports;   // missing-source columns
    std::vector<std::vector<std::uint32_t>> rhs_slots;  // block slots XORed per row

    const auto emit = [&](const std::vector<std::uint32_t>& missing,
                          std::vector<std::uint32_t>&& slots) {
        if (missing.empty()) return;  // no unknowns involved: nothing to learn
        std::vector<std::uint32_t> columns;
        columns.reserve(missing.size());
        for (std::uint32_t i : missing) columns.push_back(column_of[i]);
        supports.push_back(std::move(columns));
        rhs_slots.push_back(std::move(slots));
    };

    if (spec.family == CodeFamily::Band) {
        const std::uint32_t nrep = spec.n - k;
        std::vector<std::uint32_t> missing;
        for (std::uint32_t j = 0; j < nrep; ++j) {
            if (!present[k + j]) continue;
            missing.clear();
            std::vector<std::uint32_t> slots{k + j};
            for (std::uint32_t i : matrices.repair_sources[j]) {
                if (present[i]) {
                    slots.push_back(i);
                } else {
                    missing.push_back(i);
                }
            }
            emit(missing, std::move(slots));
        }
    } else if (spec.family == CodeFamily::Staircase) {
        // Differences of consecutive available repairs telescope the
        // accumulator away: XOR of the A-rows between them equals the XOR of
        // the two repair symbols.  This keeps every equation as sparse as
        // the underlying rows, and the triangular change of basis preserves
        // both the solution set and the rank of the generator view.
        const std::uint32_t nrep = spec.n - k;
        std::vector<char> parity(k, 0);
        std::vector<std::uint32_t> touched;
        std::uint32_t prev = UINT32_MAX;
        std::uint32_t next_row = 0;
        for (std::uint32_t t = 0; t < nrep; ++t) {
            if (!present[k + t]) continue;
            for (std::uint32_t r = next_row; r <= t; ++r) {
                for (std::uint32_t i : matrices.repair_sources[r]) {
                    parity[i] ^= 1;
                    touched.push_back(i);
                }
            }
            next_row = t + 1;
            std::vector<std::uint32_t> missing;
            std::vector<std::uint32_t> slots{k + t};
            if (prev != UINT32_MAX) slots.push_back(k + prev);
            for (std::uint32_t i : touched) {
                if (!parity[i]) continue;
                parity[i] = 0;
                if (present[i]) {
                    slots.push_back(i);
                } else {
                    missing.push_back(i);
                }
            }
            touched.clear();
            emit(missing, std::move(slots));
            prev = t;
        }
    } else {
        std::vector<std::uint32_t> missing;
        for (std::uint32_t r = 0; r < spec.n; ++r) {
            if (!present[k + r]) continue;
            missing.clear();
            std::vector<std::uint32_t> slots{k + r};
            for (std::uint32_t i : matrices.gen_rows[r]) {
                if (present[i]) {
                    slots.push_back(i);
                } else {
                    missing.push_back(i);
                }
            }
            emit(missing, std::move(slots));
        }
    }

    sys.matrix = BitMatrix(static_cast<std::uint32_t>(supports.size()),
                           static_cast<std::uint32_t>(sys.unknowns.size()));
    for (std::uint32_t r = 0; r < sys.matrix.rows(); ++r) {
        for (std::uint32_t c : supports[r]) sys.matrix.set(r, c);
    }
    if (block != nullptr) {
        sys.rhs = SymbolStore(supports.size(), block->symbol_size());
        for (std::uint32_t r = 0; r < sys.matrix.rows(); ++r) {
            sys.rhs.assign(r, block->symbol(rhs_slots[r][0]));
            for (std::size_t s = 1; s < rhs_slots[r].size(); ++s) {
                sys.rhs.xor_bytes(r, block->symbol(rhs_slots[r][s]));
                ++sys.rhs_ops;
            }
        }
    }
    return sys;
}

struct MlOptions {
    enum class Solver { Auto, Banded, Dense };
    Solver solver = Solver::Auto;  // Auto: banded for band codes, dense otherwise
};

namespace detail {

inline std::vector<char> presence_flags(const SymbolBlock& block) {
    std::vector<char> present(block.slots(), 0);
    for (std::size_t i = 0; i < block.slots(); ++i) present[i] = block.present(i) ? 1 : 0;
    return present;
}

}  // namespace detail

// Maximum-likelihood decoding: solves the reduced system for the missing
// sources.  On success the solution is written back and tagged Ml; on
// failure the block keeps everything recovered so far.
inline DecodeOutcome ml_decode(const CodeSpec& spec, const CodeMatrices& matrices,
                               SymbolBlock& block, const MlOptions& options = {}) {
    const auto started = std::chrono::steady_clock::now();
    DecodeOutcome out;
    MlSystem sys = build_ml_system(spec, matrices, &block, detail::presence_flags(block));
    if (sys.unknowns.empty()) {
        out.success = true;
        out.wall_time = std::chrono::steady_clock::now() - started;
        return out;
    }
    const bool banded = options.solver == MlOptions::Solver::Banded ||
                        (options.solver == MlOptions::Solver::Auto &&
                         spec.family == CodeFamily::Band);
    const SolveOutcome solved =
        banded ? banded_solve(sys.matrix, BandProfile::measure(sys.matrix), &sys.rhs)
               : dense_solve(sys.matrix, &sys.rhs);
    out.row_ops = sys.rhs_ops + solved.row_ops;
    if (solved.solved()) {
        for (std::uint32_t c = 0; c < sys.unknowns.size(); ++c) {
            block.receive(sys.unknowns[c], solved.solution.row(c));
            block.mark(sys.unknowns[c], SlotState::Ml);
        }
        out.success = true;
        out.ml_recovered = static_cast<std::uint32_t>(sys.unknowns.size());
        out.recovered_count = out.ml_recovered;
    } else {
        out.unsolvable_count = solved.unsolvable.empty()
                                   ? static_cast<std::uint32_t>(sys.unknowns.size()) -
                                         solved.rank
                                   : static_cast<std::uint32_t>(solved.unsolvable.size());
    }
    out.wall_time = std::chrono::steady_clock::now() - started;
    return out;
}

// Peel first, eliminate only if sources are still missing.
inline DecodeOutcome hybrid_decode(const CodeSpec& spec, const CodeMatrices& matrices,
                                   SymbolBlock& block, const MlOptions& options = {}) {
    const auto started = std::chrono::steady_clock::now();
    const PeelingReport peel = iterative_decode(spec, matrices, block);
    DecodeOutcome out;
    out.iterative_recovered = peel.recovered_sources;
    out.recovered_count = peel.recovered_sources;
    out.row_ops = peel.row_ops;
    if (peel.missing_sources == 0) {
        out.success = true;
        out.wall_time = std::chrono::steady_clock::now() - started;
        return out;
    }
    const DecodeOutcome ml = ml_decode(spec, matrices, block, options);
    out.success = ml.success;
    out.ml_recovered = ml.ml_recovered;
    out.recovered_count += ml.ml_recovered;
    out.unsolvable_count = ml.unsolvable_count;
    out.row_ops += ml.row_ops;
    out.wall_time = std::chrono::steady_clock::now() - started;
    return out;
}

// End-to-end consistency: re-encodes the sources and checks every present
// non-source slot byte for byte.  Requires all k sources present.
inline bool verify_block(const CodeSpec& spec, const CodeMatrices& matrices,
                         const SymbolBlock& block) {
    for (std::uint32_t i = 0; i < spec.k; ++i) {
        if (!block.present(i)) return false;
    }
    SymbolBlock scratch(slot_count(spec), block.symbol_size());
    for (std::uint32_t i = 0; i < spec.k; ++i) scratch.receive(i, block.symbol(i));
    encode(spec, matrices, scratch);
    for (std::size_t slot = spec.k; slot < block.slots(); ++slot) {
        if (!block.present(slot)) continue;
        const auto got = block.symbol(slot);
        const auto want = scratch.symbol(slot);
        if (!std::equal(got.begin(), got.end(), want.begin(), want.end())) return false;
    }
    return true;
}

}  // namespace bandfec
