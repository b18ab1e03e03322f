#include "bandfec/codec.hpp"

#include "bandfec/rng.hpp"
#include "catch_amalgamated.hpp"

using bandfec::BitMatrix;
using bandfec::Code;
using bandfec::CodeFamily;
using bandfec::DecodeOutcome;
using bandfec::Gf2Poly;
using bandfec::MlOptions;
using bandfec::Rational;
using bandfec::Rng;
using bandfec::ScheduleKind;
using bandfec::SlotState;
using bandfec::SymbolBlock;

namespace {

constexpr std::size_t kSymbolSize = 16;
const Rational kHalf = Rational::reduced(1, 2);

// An odd-weight accumulator: with even weight every parity column would sum
// to zero, capping rank(A) below n-k and blocking repairs-only recovery.
Code band_code(std::uint32_t k, std::uint32_t band, std::uint64_t seed = 7) {
    const Gf2Poly u({0, 1, 3});
    const auto interior = bandfec::find_candidates(
        u, bandfec::CandidateQuery{band - 1, 5, 8, band > 4 ? band - 3 : 1});
    const auto edge =
        bandfec::find_candidates(u, bandfec::CandidateQuery{band / 2, 5, 6, 0});
    return bandfec::build_band(k, kHalf, band, u, interior, edge, ScheduleKind::RoundRobin,
                               seed);
}

SymbolBlock encoded_block(const Code& code, Rng& rng) {
    SymbolBlock block(bandfec::slot_count(code.spec), kSymbolSize);
    std::vector<std::uint8_t> bytes(kSymbolSize);
    for (std::uint32_t i = 0; i < code.spec.k; ++i) {
        for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.below(256));
        block.receive(i, bytes);
    }
    bandfec::encode(code.spec, code.matrices, block);
    return block;
}

SymbolBlock receive_esis(const Code& code, const SymbolBlock& sent,
                         const std::vector<std::uint32_t>& esis) {
    SymbolBlock block(bandfec::slot_count(code.spec), kSymbolSize);
    for (std::uint32_t esi : esis) {
        const std::size_t slot = bandfec::transmit_slot(code.spec, esi);
        block.receive(slot, sent.symbol(slot));
    }
    return block;
}

std::vector<std::uint32_t> random_esis(Rng& rng, std::uint32_t n, std::size_t take) {
    const auto order = rng.permutation(n);
    return {order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take)};
}

bool sources_match(const Code& code, const SymbolBlock& got, const SymbolBlock& want) {
    for (std::uint32_t i = 0; i < code.spec.k; ++i) {
        if (!got.present(i)) return false;
        const auto a = got.symbol(i);
        const auto b = want.symbol(i);
        if (!std::equal(a.begin(), a.end(), b.begin(), b.end())) return false;
    }
    return true;
}

// Feasibility predicates on presence flags only.
bool ml_feasible(const Code& code, const std::vector<char>& present) {
    const auto sys = bandfec::build_ml_system(code.spec, code.matrices, nullptr, present);
    return bandfec::rank(sys.matrix) == sys.unknowns.size();
}

bool hybrid_feasible(const Code& code, const std::vector<char>& present) {
    const std::vector<char> peeled = bandfec::peel_indices(code.matrices, present);
    for (std::uint32_t i = 0; i < code.spec.k; ++i) {
        if (!peeled[i]) return ml_feasible(code, peeled);
    }
    return true;
}

}  // namespace

TEST_CASE("encoding matches the dense generator matrix") {
    Rng rng(100);
    const Code codes[] = {band_code(60, 8), bandfec::build_staircase(60, kHalf, 5, 3),
                          bandfec::build_windowed(64, kHalf, 4)};
    for (const Code& code : codes) {
        const SymbolBlock block = encoded_block(code, rng);
        const BitMatrix g = bandfec::generator_matrix(code.spec, code.matrices);
        const bool systematic = code.spec.family != CodeFamily::Windowed;
        const std::uint32_t outputs = systematic ? code.spec.n : code.spec.n;
        for (std::uint32_t esi = 0; esi < outputs; ++esi) {
            std::vector<std::uint8_t> expected(kSymbolSize, 0);
            for (std::uint32_t i = 0; i < code.spec.k; ++i) {
                const bool bit = systematic ? g.get(i, esi) : g.get(esi, i);
                if (!bit) continue;
                const auto src = block.symbol(i);
                for (std::size_t b = 0; b < kSymbolSize; ++b) expected[b] ^= src[b];
            }
            const auto got = block.symbol(bandfec::transmit_slot(code.spec, esi));
            CHECK(std::equal(got.begin(), got.end(), expected.begin(), expected.end()));
        }
        CHECK(bandfec::verify_block(code.spec, code.matrices, block));
    }
}

TEST_CASE("all-zero sources encode to all-zero outputs") {
    const Code code = band_code(60, 8);
    SymbolBlock block(bandfec::slot_count(code.spec), kSymbolSize);
    const std::vector<std::uint8_t> zeros(kSymbolSize, 0);
    for (std::uint32_t i = 0; i < code.spec.k; ++i) block.receive(i, zeros);
    bandfec::encode(code.spec, code.matrices, block);
    for (std::size_t slot = 0; slot < block.slots(); ++slot) {
        const auto sym = block.symbol(slot);
        for (std::uint8_t b : sym) CHECK(b == 0);
    }
}

TEST_CASE("encode requires a complete source block of the right shape") {
    const Code code = band_code(60, 8);
    SymbolBlock short_block(10, kSymbolSize);
    CHECK_THROWS_AS(bandfec::encode(code.spec, code.matrices, short_block),
                    std::invalid_argument);
    SymbolBlock missing(bandfec::slot_count(code.spec), kSymbolSize);
    CHECK_THROWS_AS(bandfec::encode(code.spec, code.matrices, missing),
                    std::invalid_argument);
}

TEST_CASE("first repair of the tiny band code is the XOR of the first two sources") {
    const Gf2Poly one({0});
    const Gf2Poly step({0, 1});
    const Code code = bandfec::build_band(4, kHalf, 2, one, {step}, {one},
                                          ScheduleKind::RoundRobin, 0);
    Rng rng(5);
    const SymbolBlock block = encoded_block(code, rng);
    std::vector<std::uint8_t> expected(kSymbolSize);
    for (std::size_t b = 0; b < kSymbolSize; ++b) {
        expected[b] = static_cast<std::uint8_t>(block.symbol(0)[b] ^ block.symbol(1)[b]);
    }
    const auto repair0 = block.symbol(4);
    CHECK(std::equal(repair0.begin(), repair0.end(), expected.begin(), expected.end()));
}

TEST_CASE("no losses: peeling does nothing, decode is an identity round trip") {
    Rng rng(6);
    const Code code = band_code(60, 8);
    const SymbolBlock sent = encoded_block(code, rng);
    std::vector<std::uint32_t> all(code.spec.n);
    for (std::uint32_t e = 0; e < code.spec.n; ++e) all[e] = e;
    SymbolBlock block = receive_esis(code, sent, all);
    const auto report = bandfec::iterative_decode(code.spec, code.matrices, block);
    CHECK(report.recovered_sources == 0);
    CHECK(report.recovered_repairs == 0);
    CHECK(report.row_ops == 0);
    CHECK(report.missing_sources == 0);
    const DecodeOutcome out = bandfec::hybrid_decode(code.spec, code.matrices, block);
    CHECK(out.success);
    CHECK(out.recovered_count == 0);
    CHECK(out.row_ops == 0);
    CHECK(sources_match(code, block, sent));
}

TEST_CASE("a single erased source peels back") {
    Rng rng(7);
    for (const Code& code : {band_code(60, 8), bandfec::build_staircase(60, kHalf, 5, 3)}) {
        for (std::uint32_t victim : {0u, 17u, 59u}) {
            const SymbolBlock sent = encoded_block(code, rng);
            std::vector<std::uint32_t> esis;
            for (std::uint32_t e = 0; e < code.spec.n; ++e) {
                if (e != victim) esis.push_back(e);
            }
            SymbolBlock block = receive_esis(code, sent, esis);
            const auto report = bandfec::iterative_decode(code.spec, code.matrices, block);
            CHECK(report.missing_sources == 0);
            CHECK(report.recovered_sources == 1);
            CHECK(block.state(victim) == SlotState::Iterative);
            CHECK(report.row_ops >= 1);
            CHECK(sources_match(code, block, sent));
            CHECK(bandfec::verify_block(code.spec, code.matrices, block));
        }
    }
}

TEST_CASE("a four-cycle stopping set stalls peeling and defeats ML") {
    // Two missing sources appear in exactly the same two equations: peeling
    // sees two unknowns everywhere and the reduced matrix has rank 1.
    bandfec::CodeSpec spec;
    spec.family = CodeFamily::Band;
    spec.k = 4;
    spec.n = 6;
    spec.rate = Rational::reduced(2, 3);
    bandfec::CodeMatrices matrices;
    matrices.h_rows = {{0, 1, 4}, {0, 1, 5}};
    matrices.repair_sources = {{0, 1}, {0, 1}};

    SymbolBlock sent(6, kSymbolSize);
    Rng rng(8);
    std::vector<std::uint8_t> bytes(kSymbolSize);
    for (std::uint32_t i = 0; i < 4; ++i) {
        for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.below(256));
        sent.receive(i, bytes);
    }
    for (std::uint32_t j = 0; j < 2; ++j) {
        std::vector<std::uint8_t> repair(kSymbolSize);
        for (std::size_t b = 0; b < kSymbolSize; ++b) {
            repair[b] = static_cast<std::uint8_t>(sent.symbol(0)[b] ^ sent.symbol(1)[b]);
        }
        sent.receive(4 + j, repair);
    }

    SymbolBlock block(6, kSymbolSize);
    for (std::uint32_t slot : {2u, 3u, 4u, 5u}) block.receive(slot, sent.symbol(slot));
    const auto report = bandfec::iterative_decode(spec, matrices, block);
    CHECK(report.recovered_sources == 0);
    CHECK(report.missing_sources == 2);

    const DecodeOutcome out = bandfec::hybrid_decode(spec, matrices, block);
    CHECK_FALSE(out.success);
    CHECK(out.unsolvable_count >= 1);
    // Partial delivery: everything recovered so far stays in the block.
    CHECK(block.present(2));
    CHECK(block.present(3));
    CHECK_FALSE(block.present(0));
}

TEST_CASE("ML with no missing sources is free") {
    Rng rng(9);
    const Code code = band_code(60, 8);
    const SymbolBlock sent = encoded_block(code, rng);
    std::vector<std::uint32_t> sources_only;
    for (std::uint32_t e = 0; e < 60; ++e) sources_only.push_back(e);
    SymbolBlock block = receive_esis(code, sent, sources_only);
    const DecodeOutcome out = bandfec::ml_decode(code.spec, code.matrices, block);
    CHECK(out.success);
    CHECK(out.row_ops == 0);
    CHECK(out.ml_recovered == 0);
}

TEST_CASE("ML recovers every source from repairs alone, banded and dense alike") {
    Rng rng(10);
    // Losing every source is the hardest pattern a code can face; not every
    // instance inverts there, so pick one whose repairs-only system is full
    // rank and check the recovery contract on it.
    const Code code = bandfec::build_band_default(80, kHalf, 10, 7);
    std::vector<char> repairs_present(bandfec::slot_count(code.spec), 0);
    for (std::uint32_t e = 80; e < 160; ++e) repairs_present[e] = 1;
    REQUIRE(ml_feasible(code, repairs_present));

    const SymbolBlock sent = encoded_block(code, rng);
    std::vector<std::uint32_t> repairs_only;
    for (std::uint32_t e = 80; e < 160; ++e) repairs_only.push_back(e);

    SymbolBlock banded_block = receive_esis(code, sent, repairs_only);
    MlOptions banded;
    banded.solver = MlOptions::Solver::Banded;
    const DecodeOutcome banded_out =
        bandfec::ml_decode(code.spec, code.matrices, banded_block, banded);

    SymbolBlock dense_block = receive_esis(code, sent, repairs_only);
    MlOptions dense;
    dense.solver = MlOptions::Solver::Dense;
    const DecodeOutcome dense_out =
        bandfec::ml_decode(code.spec, code.matrices, dense_block, dense);

    REQUIRE(banded_out.success);
    REQUIRE(dense_out.success);
    CHECK(banded_out.ml_recovered == 80);
    CHECK(banded_block.count_state(SlotState::Ml) == 80);
    CHECK(sources_match(code, banded_block, sent));
    CHECK(sources_match(code, dense_block, sent));
    CHECK(bandfec::verify_block(code.spec, code.matrices, banded_block));
}

TEST_CASE("the reduced system shrinks to the missing-source count") {
    Rng rng(11);
    const Code code = band_code(60, 8);
    // Erase exactly (1-r)k = 30 sources and keep every repair: the system
    // solved is at most k/2 by k/2 at rate one half.
    const auto victims = random_esis(rng, 60, 30);
    std::vector<char> present(bandfec::slot_count(code.spec), 1);
    for (std::uint32_t v : victims) present[v] = 0;
    const auto sys = bandfec::build_ml_system(code.spec, code.matrices, nullptr, present);
    CHECK(sys.unknowns.size() == 30);
    CHECK(sys.matrix.cols() == 30);
    CHECK(sys.matrix.rows() <= 60);
    // Band columns stay in source order.
    for (std::size_t i = 1; i < sys.unknowns.size(); ++i) {
        CHECK(sys.unknowns[i - 1] < sys.unknowns[i]);
    }
}

TEST_CASE("hybrid short-circuits when peeling already finished") {
    Rng rng(12);
    const Code code = band_code(60, 8);
    const SymbolBlock sent = encoded_block(code, rng);
    std::vector<std::uint32_t> esis;
    for (std::uint32_t e = 0; e < code.spec.n; ++e) {
        if (e != 31) esis.push_back(e);
    }
    SymbolBlock block = receive_esis(code, sent, esis);
    const DecodeOutcome out = bandfec::hybrid_decode(code.spec, code.matrices, block);
    CHECK(out.success);
    CHECK(out.iterative_recovered == 1);
    CHECK(out.ml_recovered == 0);
    CHECK(sources_match(code, block, sent));
}

TEST_CASE("random search finds patterns where peeling stalls but ML succeeds") {
    Rng rng(13);
    const Code code = band_code(100, 10, 21);
    const SymbolBlock sent = encoded_block(code, rng);
    bool found = false;
    for (int attempt = 0; attempt < 300 && !found; ++attempt) {
        const auto esis = random_esis(rng, code.spec.n, 120);
        SymbolBlock block = receive_esis(code, sent, esis);
        const DecodeOutcome out = bandfec::hybrid_decode(code.spec, code.matrices, block);
        if (out.success && out.ml_recovered > 0) {
            found = true;
            CHECK(sources_match(code, block, sent));
            CHECK(bandfec::verify_block(code.spec, code.matrices, block));
        }
    }
    CHECK(found);
}

TEST_CASE("hybrid and pure ML succeed on exactly the same received sets") {
    // Exhaustive over every subset of the eight-source code's slots.
    const Code code = band_code(8, 4, 2);
    REQUIRE(code.spec.n == 16);
    for (std::uint32_t mask = 0; mask < (1u << 16); ++mask) {
        std::vector<char> present(16, 0);
        for (std::uint32_t b = 0; b < 16; ++b) present[b] = (mask >> b) & 1;
        if (hybrid_feasible(code, present) != ml_feasible(code, present)) {
            CAPTURE(mask);
            FAIL("peeling changed ML solvability");
        }
    }
}

TEST_CASE("hybrid and pure ML agree byte for byte on random patterns") {
    Rng rng(14);
    for (const Code& code : {band_code(60, 8), bandfec::build_staircase(60, kHalf, 5, 3)}) {
        const SymbolBlock sent = encoded_block(code, rng);
        for (int trial = 0; trial < 120; ++trial) {
            const std::size_t take = 60 + rng.below(30);
            const auto esis = random_esis(rng, code.spec.n, take);
            SymbolBlock hybrid_block = receive_esis(code, sent, esis);
            SymbolBlock ml_block = receive_esis(code, sent, esis);
            const DecodeOutcome hybrid =
                bandfec::hybrid_decode(code.spec, code.matrices, hybrid_block);
            const DecodeOutcome ml = bandfec::ml_decode(code.spec, code.matrices, ml_block);
            REQUIRE(hybrid.success == ml.success);
            if (hybrid.success) {
                CHECK(sources_match(code, hybrid_block, sent));
                CHECK(sources_match(code, ml_block, sent));
                CHECK(bandfec::verify_block(code.spec, code.matrices, hybrid_block));
            }
        }
    }
}

TEST_CASE("adding a received symbol never breaks decodability") {
    Rng rng(15);
    const Code code = band_code(60, 8);
    int decodable_seen = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t take = 70 + rng.below(20);
        const auto esis = random_esis(rng, code.spec.n, take);
        std::vector<char> present(code.spec.n, 0);
        for (std::uint32_t e : esis) present[e] = 1;
        if (!ml_feasible(code, present)) continue;
        ++decodable_seen;
        std::vector<std::uint32_t> absent;
        for (std::uint32_t e = 0; e < code.spec.n; ++e) {
            if (!present[e]) absent.push_back(e);
        }
        if (absent.empty()) continue;
        present[absent[rng.below(absent.size())]] = 1;
        CHECK(ml_feasible(code, present));
    }
    CHECK(decodable_seen > 20);
}

TEST_CASE("the peeling fixpoint is order independent") {
    Rng rng(16);
    const Code code = bandfec::build_staircase(60, kHalf, 5, 9);
    for (int trial = 0; trial < 40; ++trial) {
        const auto esis = random_esis(rng, code.spec.n, 60 + rng.below(40));
        std::vector<char> present(code.spec.n, 0);
        for (std::uint32_t e : esis) present[e] = 1;

        const std::vector<char> reference = bandfec::peel_indices(code.matrices, present);

        // Re-run the peeling by hand, resolving ready equations in a random
        // order instead of stack order.
        std::vector<char> state = present;
        while (true) {
            std::vector<std::pair<std::uint32_t, std::uint32_t>> ready;  // (eq, slot)
            for (std::uint32_t j = 0; j < code.matrices.h_rows.size(); ++j) {
                std::uint32_t missing = 0;
                std::uint32_t last = 0;
                for (std::uint32_t slot : code.matrices.h_rows[j]) {
                    if (!state[slot]) {
                        ++missing;
                        last = slot;
                    }
                }
                if (missing == 1) ready.push_back({j, last});
            }
            if (ready.empty()) break;
            const auto& pick = ready[rng.below(ready.size())];
            state[pick.second] = 1;
        }
        CHECK(state == reference);
    }
}

TEST_CASE("windowed codes decode through ML alone") {
    Rng rng(17);
    const Code code = bandfec::build_windowed(64, kHalf, 5);
    const SymbolBlock sent = encoded_block(code, rng);
    int successes = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto esis = random_esis(rng, code.spec.n, 64 + 20);
        SymbolBlock block = receive_esis(code, sent, esis);
        const auto peel = bandfec::iterative_decode(code.spec, code.matrices, block);
        CHECK(peel.recovered_sources == 0);  // no parity rows to peel
        const DecodeOutcome out = bandfec::hybrid_decode(code.spec, code.matrices, block);
        CHECK(out.iterative_recovered == 0);
        if (out.success) {
            ++successes;
            CHECK(out.ml_recovered == 64);
            CHECK(sources_match(code, block, sent));
            CHECK(bandfec::verify_block(code.spec, code.matrices, block));
        }
    }
    CHECK(successes > 10);
}

TEST_CASE("staircase ML handles mixed source and repair losses") {
    Rng rng(18);
    const Code code = bandfec::build_staircase(60, kHalf, 5, 6);
    const SymbolBlock sent = encoded_block(code, rng);
    int successes = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const auto esis = random_esis(rng, code.spec.n, 70 + rng.below(20));
        SymbolBlock block = receive_esis(code, sent, esis);
        const DecodeOutcome out = bandfec::hybrid_decode(code.spec, code.matrices, block);
        if (out.success) {
            ++successes;
            REQUIRE(sources_match(code, block, sent));
            REQUIRE(bandfec::verify_block(code.spec, code.matrices, block));
        }
    }
    CHECK(successes > 30);
}
