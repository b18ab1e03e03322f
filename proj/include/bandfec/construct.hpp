#pragma once
// Builders for complete code instances.
//
// Band codes place one polynomial per source symbol inside a sliding band
// over the repair columns.  The generator is systematic, G = (Id | M); the
// parity-check matrix is H = (A | U) where U is the unit-lower-triangular
// Toeplitz matrix of the accumulator polynomial u and column i of A carries
// the coefficients of u(x)·m_i(x) starting at that row's band column.  With
// A = U·M^T the orthogonality G·H^T = 0 holds by construction; realize()
// still verifies it against the materialized matrices because every decoder
// correctness argument rests on it.
//
// The staircase baseline follows the classic repeat-accumulate layout: a
// column-regular random left part plus a double-diagonal accumulator.  The
// windowed baseline is non-systematic: every output symbol mixes a few
// sources drawn from a window that slides across the source range.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "bandfec/bitmatrix.hpp"
#include "bandfec/codespec.hpp"
#include "bandfec/gf2poly.hpp"
#include "bandfec/rng.hpp"
#include "bandfec/solve.hpp"

namespace bandfec {

// How interior rows pick from the candidate pool.
enum class ScheduleKind { RoundRobin, Seeded };

// Sparse matrices realized from a CodeSpec.  Column indices are ascending in
// every row list.
struct CodeMatrices {
    // Parity-check rows over all n symbol slots (band and staircase).
    std::vector<std::vector<std::uint32_t>> h_rows;
    // Per repair symbol: the source symbols XORed into it.  For staircase
    // codes these are the per-row increments of the accumulator chain.
    std::vector<std::vector<std::uint32_t>> repair_sources;
    // Windowed only: per output row, the source columns it mixes.
    std::vector<std::vector<std::uint32_t>> gen_rows;
    // Band only: profile of the banded generator part M.
    BandProfile band_profile;
};

struct Code {
    CodeSpec spec;
    CodeMatrices matrices;
};

namespace detail {

// G·H^T = 0 is checked exhaustively up to this size, sampled above it.
inline constexpr std::uint32_t kVerifyExhaustiveLimit = 4000;
inline constexpr std::uint32_t kVerifySampleCount = 200000;

struct BandGeometry {
    std::uint32_t nrep = 0;
    std::uint64_t step_num = 0;   // average start increment, as step_num/step_den
    std::uint64_t step_den = 1;
    std::uint32_t half = 0;       // band / 2

    std::uint64_t prefix(std::uint32_t i) const { return i * step_num / step_den; }

    // Band-window anchor and edge classification for source row i.  The
    // natural window of row i is [sigma, sigma + band); rows whose window
    // sticks out past either boundary are edge rows and take the short edge
    // candidates instead.  Each edge row keeps the surviving endpoint of its
    // window — a left edge row keeps the window end (its start was truncated
    // away), a right edge row keeps the window start — so edge rows march
    // with the band like interior rows do.  Piling them all on one corner
    // column would leave only pool-many distinct columns there and shed rank
    // proportional to the band width.
    struct Position {
        std::int64_t sigma;  // natural window start; negative on the left edge
        bool edge;
        bool right;
    };
    Position position(std::uint32_t i, std::uint32_t band) const {
        const std::int64_t sigma = static_cast<std::int64_t>(prefix(i)) - half;
        if (sigma < 0) return {sigma, true, false};
        if (sigma + band > nrep) return {sigma, true, true};
        return {sigma, false, false};
    }
};

inline BandGeometry band_geometry(std::uint32_t k, std::uint32_t nrep, std::uint32_t band) {
    BandGeometry geometry;
    geometry.nrep = nrep;
    const std::uint32_t g = std::gcd(nrep, k);
    geometry.step_num = nrep / g;
    geometry.step_den = k / g;
    geometry.half = band / 2;
    return geometry;
}

inline std::uint64_t checked_total(std::uint32_t k, const Rational& rate) {
    // n = k/rate must be integral; with the rate reduced this needs num | k.
    if (k == 0) throw std::invalid_argument("need at least one source symbol");
    if (k % rate.num != 0) {
        throw std::invalid_argument("source count is not divisible by the rate numerator");
    }
    const std::uint64_t n = static_cast<std::uint64_t>(k) / rate.num * rate.den;
    if (n > UINT32_MAX) throw std::invalid_argument("total symbol count overflows");
    return n;
}

inline void verify_band(const CodeSpec& spec, const CodeMatrices& matrices) {
    const std::uint32_t k = spec.k;
    const std::uint32_t nrep = spec.n - spec.k;
    BitMatrix a_bits(nrep, k);
    for (std::uint32_t r = 0; r < nrep; ++r) {
        for (std::uint32_t c : matrices.h_rows[r]) {
            if (c < k) a_bits.set(r, c);
        }
    }
    BitMatrix m_bits(k, nrep);
    for (std::uint32_t i = 0; i < k; ++i) {
        for (std::uint32_t e : spec.row_polys[i].poly.exponents()) {
            m_bits.set(i, spec.row_polys[i].start + e);
        }
    }
    const auto& u_exps = spec.u.exponents();
    const auto product_bit = [&](std::uint32_t i, std::uint32_t j) {
        // <row i of G, row j of H> = A[j][i] + <row i of M, row j of U>.
        bool parity = a_bits.get(j, i);
        for (std::uint32_t e : u_exps) {
            if (e <= j) parity ^= m_bits.get(i, j - e);
        }
        return parity;
    };
    if (k <= kVerifyExhaustiveLimit) {
        for (std::uint32_t i = 0; i < k; ++i) {
            for (std::uint32_t j = 0; j < nrep; ++j) {
                if (product_bit(i, j)) {
                    throw std::logic_error("generator/parity product is nonzero");
                }
            }
        }
    } else {
        Rng rng(spec.hash());
        for (std::uint32_t s = 0; s < kVerifySampleCount; ++s) {
            const auto i = static_cast<std::uint32_t>(rng.below(k));
            const auto j = static_cast<std::uint32_t>(rng.below(nrep));
            if (product_bit(i, j)) {
                throw std::logic_error("generator/parity product is nonzero");
            }
        }
    }
}

}  // namespace detail

// Materializes the parity-check and generator matrices from a spec.  Band
// specs are validated and checked for generator/parity orthogonality here,
// so hand-edited spec files cannot smuggle in an inconsistent code.
inline CodeMatrices realize(const CodeSpec& spec) {
    CodeMatrices matrices;
    const std::uint32_t k = spec.k;
    const std::uint32_t nrep = spec.n - spec.k;

    if (spec.family == CodeFamily::Band) {
        if (!spec.u.has_term(0)) {
            throw std::invalid_argument("accumulator polynomial must have a constant term");
        }
        if (spec.row_polys.size() != k) {
            throw std::invalid_argument("need one row polynomial per source symbol");
        }
        matrices.h_rows.resize(nrep);
        matrices.repair_sources.resize(nrep);
        matrices.band_profile.first.resize(k);
        matrices.band_profile.last.resize(k);
        matrices.band_profile.bandwidth = 0;
        for (std::uint32_t i = 0; i < k; ++i) {
            const auto& [poly, start] = spec.row_polys[i];
            if (poly.is_zero()) {
                throw std::invalid_argument("row polynomials must be nonzero");
            }
            if (poly.degree() >= spec.band ||
                static_cast<std::uint64_t>(start) + poly.degree() >= nrep) {
                throw std::invalid_argument("row polynomial does not fit the band");
            }
            for (std::uint32_t e : poly.exponents()) {
                matrices.repair_sources[start + e].push_back(i);
            }
            const Gf2Poly a = poly_mul(spec.u, poly);
            for (std::uint32_t e : a.exponents()) {
                const std::uint64_t row = static_cast<std::uint64_t>(start) + e;
                if (row < nrep) matrices.h_rows[row].push_back(i);
            }
            matrices.band_profile.first[i] = start + poly.exponents().front();
            matrices.band_profile.last[i] = start + poly.degree();
            matrices.band_profile.bandwidth =
                std::max(matrices.band_profile.bandwidth, poly.degree() + 1);
        }
        // Accumulator part: row j of U has ones at columns j - e, e ∈ exps(u).
        const auto& u_exps = spec.u.exponents();
        for (std::uint32_t j = 0; j < nrep; ++j) {
            for (auto it = u_exps.rbegin(); it != u_exps.rend(); ++it) {
                if (*it <= j) matrices.h_rows[j].push_back(k + j - *it);
            }
        }
        detail::verify_band(spec, matrices);
        return matrices;
    }

    if (spec.family == CodeFamily::Staircase) {
        if (spec.n1 < 3) throw std::invalid_argument("source-node degree must be at least 3");
        if (spec.n1 > nrep) {
            throw std::invalid_argument("source-node degree exceeds the repair row count");
        }
        // Column-regular left part: a pool listing every row index in
        // rotation gives each column n1 distinct rows while keeping the row
        // weights balanced.  Entries are drawn without replacement; when the
        // remaining pool holds no row that is still free in this column, the
        // draw falls back to a uniform free row so regularity never breaks.
        std::vector<std::vector<std::uint32_t>> a_cols(k);
        std::vector<char> used(nrep);
        const std::size_t pool_size = static_cast<std::size_t>(k) * spec.n1;
        std::vector<std::uint32_t> pool(pool_size);
        for (std::size_t h = 0; h < pool_size; ++h) {
            pool[h] = static_cast<std::uint32_t>(h % nrep);
        }
        Rng rng(spec.seed);
        std::size_t t = 0;
        for (std::uint32_t j = 0; j < k; ++j) {
            std::fill(used.begin(), used.end(), 0);
            for (std::uint32_t picked = 0; picked < spec.n1; ++picked) {
                std::uint32_t row = nrep;
                for (int attempt = 0; attempt < 32 && t < pool_size; ++attempt) {
                    const std::size_t i = t + rng.below(pool_size - t);
                    if (!used[pool[i]]) {
                        row = pool[i];
                        pool[i] = pool[t];
                        ++t;
                        break;
                    }
                }
                if (row == nrep) {
                    do {
                        row = static_cast<std::uint32_t>(rng.below(nrep));
                    } while (used[row]);
                }
                used[row] = 1;
                a_cols[j].push_back(row);
            }
        }
        matrices.h_rows.resize(nrep);
        matrices.repair_sources.resize(nrep);
        for (std::uint32_t j = 0; j < k; ++j) {
            for (std::uint32_t row : a_cols[j]) matrices.h_rows[row].push_back(j);
        }
        for (std::uint32_t r = 0; r < nrep; ++r) {
            matrices.repair_sources[r] = matrices.h_rows[r];
            if (r > 0) matrices.h_rows[r].push_back(k + r - 1);
            matrices.h_rows[r].push_back(k + r);
        }
        return matrices;
    }

    // Windowed: column i places its ones inside a window that slides evenly
    // across the n output rows.
    if (spec.k < 16) throw std::invalid_argument("windowed codes need k >= 16");
    const std::uint32_t window = spec.band;
    std::uint32_t expected = 2;
    while (static_cast<std::uint64_t>(expected) * expected < 4ull * spec.k) ++expected;
    if (window != expected) {
        throw std::invalid_argument("window width does not match the source count");
    }
    if (window > spec.n) throw std::invalid_argument("window exceeds the output count");
    const auto weight =
        static_cast<std::uint32_t>(std::ceil(2.0 * std::log(static_cast<double>(spec.k))));
    Rng rng(spec.seed);
    matrices.gen_rows.resize(spec.n);
    std::vector<char> taken(window);
    for (std::uint32_t i = 0; i < k; ++i) {
        const std::uint32_t start = static_cast<std::uint32_t>(
            static_cast<std::uint64_t>(i) * (spec.n - window) / (k - 1));
        std::fill(taken.begin(), taken.end(), 0);
        for (std::uint32_t picked = 0; picked < weight; ++picked) {
            std::uint32_t offset;
            do {
                offset = static_cast<std::uint32_t>(rng.below(window));
            } while (taken[offset]);
            taken[offset] = 1;
            matrices.gen_rows[start + offset].push_back(i);
        }
    }
    return matrices;
}

// Builds a band code.  Interior rows draw full-width polynomials from
// `candidates`; rows whose band would overhang either end of the repair
// range draw short polynomials (degree at most band/2) from
// `edge_candidates` instead, which keeps the rate exact.
inline Code build_band(std::uint32_t k, Rational rate, std::uint32_t band, const Gf2Poly& u,
                       const std::vector<Gf2Poly>& candidates,
                       const std::vector<Gf2Poly>& edge_candidates, ScheduleKind schedule,
                       std::uint64_t seed) {
    const std::uint64_t n = detail::checked_total(k, rate);
    const std::uint64_t nrep = n - k;
    if (band < 2 || band % 2 != 0) {
        throw std::invalid_argument("band width must be even and at least 2");
    }
    if (band > nrep) {
        throw std::invalid_argument("band width exceeds the repair symbol count");
    }
    if (!u.has_term(0)) {
        throw std::invalid_argument("accumulator polynomial must have a constant term");
    }
    std::vector<Gf2Poly> interior;
    for (const Gf2Poly& m : candidates) {
        if (!m.is_zero() && m.degree() < band) interior.push_back(m);
    }
    std::vector<Gf2Poly> edge;
    for (const Gf2Poly& m : edge_candidates) {
        if (!m.is_zero() && m.degree() <= band / 2) edge.push_back(m);
    }
    if (interior.empty() || edge.empty()) {
        throw std::invalid_argument("empty candidate pool after degree filtering");
    }

    Code code;
    code.spec.family = CodeFamily::Band;
    code.spec.k = k;
    code.spec.n = static_cast<std::uint32_t>(n);
    code.spec.rate = Rational::reduced(rate.num, rate.den);
    code.spec.seed = seed;
    code.spec.band = band;
    code.spec.u = u;

    const detail::BandGeometry geometry =
        detail::band_geometry(k, static_cast<std::uint32_t>(nrep), band);
    for (std::uint32_t i = 0; i < geometry.step_den; ++i) {
        code.spec.offsets.push_back(
            static_cast<std::uint32_t>(geometry.prefix(i + 1) - geometry.prefix(i)));
    }

    Rng rng(seed);
    std::size_t interior_next = 0;
    std::size_t edge_next = 0;
    code.spec.row_polys.reserve(k);
    for (std::uint32_t i = 0; i < k; ++i) {
        const auto position = geometry.position(i, band);
        const std::vector<Gf2Poly>& pool = position.edge ? edge : interior;
        std::size_t& next = position.edge ? edge_next : interior_next;
        std::size_t pick;
        if (schedule == ScheduleKind::RoundRobin) {
            pick = next % pool.size();
            ++next;
        } else {
            pick = rng.below(pool.size());
        }
        const Gf2Poly& m = pool[pick];
        std::int64_t start = position.sigma;
        if (position.edge && !position.right) {
            // Anchor to the window end, clamped into the matrix.  The first
            // row is pinned to column 0 so the first repair column cannot be
            // left empty when no pool polynomial reaches full edge degree.
            start = i == 0 ? 0
                           : std::max<std::int64_t>(
                                 0, position.sigma + band - 1 - m.degree());
        } else if (position.edge && i == k - 1) {
            // Mirror-image pin: the last row reaches the final column.
            start = static_cast<std::int64_t>(nrep) - 1 - m.degree();
        }
        code.spec.row_polys.push_back(RowPoly{m, static_cast<std::uint32_t>(start)});
    }
    code.matrices = realize(code.spec);
    return code;
}

// Default accumulator polynomial for a given band width.  Three properties
// matter.  Weight 3 (and odd): parity columns on the Toeplitz side keep
// weight 3, and an even-weight u would put the all-ones vector in the left
// null space of the untruncated columns, capping the achievable rank.
// Irreducible with the multiplicative order of x above every product degree
// the candidate search can reach (about band + deg u): if the order is
// small, u divides 1 + x^d for in-range d, so the search returns weight-2
// products and near-translates of one short pattern, and the resulting
// repeated structure in the generator band collapses its rank at large k.
// Orders here are 7, 127, 511 and 2047 for degrees 3, 7, 9 and 11.
inline Gf2Poly default_band_u(std::uint32_t band) {
    if (band >= 500) return Gf2Poly({0, 2, 11});
    if (band >= 120) return Gf2Poly({0, 4, 9});
    if (band >= 12) return Gf2Poly({0, 1, 7});
    return Gf2Poly({0, 1, 3});
}

namespace detail {

// Hamming weight of x^shift * a + b, counted by merging exponent lists.
inline std::size_t shifted_xor_weight(const Gf2Poly& a, const Gf2Poly& b, std::int64_t shift) {
    const auto& ea = a.exponents();
    const auto& eb = b.exponents();
    std::size_t ia = 0, ib = 0, shared = 0;
    while (ia < ea.size() && ib < eb.size()) {
        const std::int64_t va = static_cast<std::int64_t>(ea[ia]) + shift;
        const std::int64_t vb = static_cast<std::int64_t>(eb[ib]);
        if (va == vb) { ++shared; ++ia; ++ib; }
        else if (va < vb) ++ia;
        else ++ib;
    }
    return ea.size() + eb.size() - 2 * shared;
}

// Least XOR weight of the pair over every overlapping relative shift.  With
// rows placed at roughly unit start increments, any two pool polynomials
// meet at every shift within the band, so the weakest shift is what counts.
inline std::size_t min_shift_weight(const Gf2Poly& a, const Gf2Poly& b, std::uint32_t band,
                                    bool same) {
    std::size_t best = SIZE_MAX;
    for (std::int64_t d = -static_cast<std::int64_t>(band); d <= band; ++d) {
        if (same && d == 0) continue;
        best = std::min(best, shifted_xor_weight(a, b, d));
    }
    return best;
}

// Greedy anti-collision selection.  The row space of the generator band
// contains, for every pair of rows, their XOR at the relative shift the
// placement gives them; if any such combination is sparse, the code has a
// low-weight codeword and rare-but-deep rank losses follow (two searched
// candidates can differ by a sparse multiple of u even when each product is
// fine on its own).  Walking candidates in searched order, a polynomial is
// accepted only when every pairing with the accepted set — and with its own
// shifted copies — stays above a weight floor proportional to the lighter
// row involved.  If the floor cannot fill the pool it is relaxed stepwise,
// so very small parameter sets still construct.
inline std::vector<Gf2Poly> diverse_pool(const std::vector<Gf2Poly>& candidates,
                                         const std::vector<Gf2Poly>& fixed, std::size_t want,
                                         std::uint32_t band) {
    for (std::uint32_t divisor = 2; ; ++divisor) {
        const bool accept_all = divisor >= 8;
        std::vector<Gf2Poly> picked;
        for (const Gf2Poly& cand : candidates) {
            if (picked.size() == want) break;
            const std::size_t own = cand.weight();
            bool ok = accept_all ||
                      min_shift_weight(cand, cand, band, true) >= own / divisor;
            for (std::size_t p = 0; ok && !accept_all && p < picked.size() + fixed.size();
                 ++p) {
                const Gf2Poly& other =
                    p < picked.size() ? picked[p] : fixed[p - picked.size()];
                const std::size_t floor = std::min(own, other.weight()) / divisor;
                ok = min_shift_weight(cand, other, band, false) >= floor;
            }
            if (ok) picked.push_back(cand);
        }
        if (picked.size() >= want || accept_all) return picked;
    }
}

}  // namespace detail

namespace detail {

// Searches candidates at the target degree and anti-collision-filters them.
// The degree is held exactly at `hi` when possible: rows of one common span
// keep the per-column coverage of the generator band flat, and measured
// nullity of the square repair system drops by an order of magnitude
// compared to a mixed-degree window (mixed spans leave a handful of global
// row dependencies at any k).  Only when the exact-degree class cannot fill
// the pool — tiny bands — is the window widened stepwise toward lo_floor.
inline std::vector<Gf2Poly> searched_pool(const Gf2Poly& u, std::uint32_t hi,
                                          std::uint32_t lo_floor, std::size_t want,
                                          std::uint32_t band,
                                          const std::vector<Gf2Poly>& fixed) {
    std::vector<Gf2Poly> best;
    for (std::uint32_t delta = 0;;) {
        const std::uint32_t lo = static_cast<std::uint32_t>(std::max<std::int64_t>(
            static_cast<std::int64_t>(hi) - delta, lo_floor));
        auto pool =
            diverse_pool(find_candidates(u, CandidateQuery{hi, 5, 256, lo}), fixed, want, band);
        if (pool.size() > best.size()) best = std::move(pool);
        if (best.size() >= want || lo == lo_floor) return best;
        delta = delta == 0 ? 1 : delta * 2;
    }
}

}  // namespace detail

// Band construction with searched default pools.  Interior rows span the
// full band (degree exactly B-1); edge rows likewise reach their B/2 cap so
// the first and last repair symbols connect to as many sources as fit.  The
// weight bound on accumulator products keeps the peeling graph light, while
// the anti-collision filter supplies the pattern variety that
// maximum-likelihood rank depends on.
inline Code build_band_default(std::uint32_t k, Rational rate, std::uint32_t band,
                               std::uint64_t seed, const Gf2Poly& u_choice = Gf2Poly(),
                               ScheduleKind schedule = ScheduleKind::RoundRobin) {
    const Gf2Poly u = u_choice.is_zero() ? default_band_u(band) : u_choice;
    const auto interior =
        detail::searched_pool(u, band - 1, band > 3 ? band / 2 : 1, 16, band, {});
    const auto edge = detail::searched_pool(u, band / 2, 0, 12, band, interior);
    return build_band(k, rate, band, u, interior, edge, schedule, seed);
}

inline Code build_staircase(std::uint32_t k, Rational rate, std::uint32_t n1,
                            std::uint64_t seed) {
    Code code;
    code.spec.family = CodeFamily::Staircase;
    code.spec.k = k;
    code.spec.n = static_cast<std::uint32_t>(detail::checked_total(k, rate));
    code.spec.rate = Rational::reduced(rate.num, rate.den);
    code.spec.seed = seed;
    code.spec.n1 = n1;
    code.matrices = realize(code.spec);
    return code;
}

inline Code build_windowed(std::uint32_t k, Rational rate, std::uint64_t seed) {
    Code code;
    code.spec.family = CodeFamily::Windowed;
    code.spec.k = k;
    code.spec.n = static_cast<std::uint32_t>(detail::checked_total(k, rate));
    code.spec.rate = Rational::reduced(rate.num, rate.den);
    code.spec.seed = seed;
    std::uint32_t window = 2;
    while (static_cast<std::uint64_t>(window) * window < 4ull * k) ++window;
    code.spec.band = window;
    code.matrices = realize(code.spec);
    return code;
}

// Dense parity-check matrix, (n-k) × n.  Windowed codes have none.
inline BitMatrix parity_matrix(const CodeSpec& spec, const CodeMatrices& matrices) {
    if (spec.family == CodeFamily::Windowed) {
        throw std::invalid_argument("windowed codes have no parity-check matrix");
    }
    BitMatrix h(spec.n - spec.k, spec.n);
    for (std::uint32_t r = 0; r < h.rows(); ++r) {
        for (std::uint32_t c : matrices.h_rows[r]) h.set(r, c);
    }
    return h;
}

// Dense generator matrix: k × n systematic for band and staircase, n × k for
// the non-systematic windowed family.
inline BitMatrix generator_matrix(const CodeSpec& spec, const CodeMatrices& matrices) {
    const std::uint32_t k = spec.k;
    if (spec.family == CodeFamily::Band) {
        BitMatrix g(k, spec.n);
        for (std::uint32_t i = 0; i < k; ++i) {
            g.set(i, i);
            const auto& [poly, start] = spec.row_polys[i];
            for (std::uint32_t e : poly.exponents()) g.set(i, k + start + e);
        }
        return g;
    }
    if (spec.family == CodeFamily::Staircase) {
        BitMatrix g(k, spec.n);
        std::vector<char> current(k, 0);
        for (std::uint32_t i = 0; i < k; ++i) g.set(i, i);
        for (std::uint32_t t = 0; t < spec.n - k; ++t) {
            for (std::uint32_t i : matrices.repair_sources[t]) current[i] ^= 1;
            for (std::uint32_t i = 0; i < k; ++i) {
                if (current[i]) g.set(i, k + t);
            }
        }
        return g;
    }
    BitMatrix g(spec.n, k);
    for (std::uint32_t r = 0; r < spec.n; ++r) {
        for (std::uint32_t c : matrices.gen_rows[r]) g.set(r, c);
    }
    return g;
}

struct ReweightOutcome {
    CodeSpec spec;
    std::uint64_t residual = 0;  // remaining L1 distance to the target profile
};

// Moves the parity-check row weights toward a target profile by swapping row
// polynomials between positions of equal product weight.  Such swaps leave
// every column weight of A unchanged, so the degree distribution seen by the
// iterative decoder's variable nodes is preserved.  Best effort: rows whose
// product would truncate at either end never move.
inline ReweightOutcome reweight_rows(const CodeSpec& spec,
                                     const std::vector<std::uint32_t>& target) {
    if (spec.family != CodeFamily::Band) {
        throw std::invalid_argument("row reweighting applies to band codes only");
    }
    const std::uint32_t nrep = spec.n - spec.k;
    if (target.size() != nrep) {
        throw std::invalid_argument("target profile length must match the repair row count");
    }

    ReweightOutcome out;
    out.spec = spec;
    std::vector<Gf2Poly> products(spec.k);
    std::vector<std::uint32_t> weight(nrep, 0);
    for (std::uint32_t i = 0; i < spec.k; ++i) {
        products[i] = poly_mul(spec.u, spec.row_polys[i].poly);
        for (std::uint32_t e : products[i].exponents()) {
            const std::uint64_t r = static_cast<std::uint64_t>(spec.row_polys[i].start) + e;
            if (r < nrep) ++weight[r];
        }
    }
    const auto& u_exps = spec.u.exponents();
    for (std::uint32_t j = 0; j < nrep; ++j) {
        for (std::uint32_t e : u_exps) {
            if (e <= j) ++weight[j];
        }
    }
    auto deviation_at = [&](std::uint32_t j) {
        return weight[j] > target[j] ? weight[j] - target[j] : target[j] - weight[j];
    };
    std::int64_t deviation = 0;
    for (std::uint32_t j = 0; j < nrep; ++j) deviation += deviation_at(j);
    const std::int64_t initial = deviation;

    // A position can host a polynomial only if the full product lands inside
    // the repair range; truncated placements would change column weights.
    auto fits = [&](std::uint32_t pos, std::uint32_t product_degree) {
        return static_cast<std::uint64_t>(out.spec.row_polys[pos].start) + product_degree <
               nrep;
    };
    std::map<std::uint32_t, std::vector<std::uint32_t>> groups;
    for (std::uint32_t i = 0; i < spec.k; ++i) {
        if (fits(i, products[i].degree())) groups[products[i].weight()].push_back(i);
    }

    Rng rng(spec.hash());
    std::map<std::uint32_t, std::int64_t> net;
    for (int pass = 0; pass < 6; ++pass) {
        bool improved = false;
        for (const auto& [group_weight, members] : groups) {
            (void)group_weight;
            if (members.size() < 2) continue;
            const std::size_t tries = std::min<std::size_t>(members.size() * 2, 512);
            for (std::size_t attempt = 0; attempt < tries; ++attempt) {
                const std::uint32_t a = members[rng.below(members.size())];
                const std::uint32_t b = members[rng.below(members.size())];
                if (a == b || products[a] == products[b]) continue;
                if (!fits(a, products[b].degree()) || !fits(b, products[a].degree())) continue;
                net.clear();
                for (std::uint32_t e : products[a].exponents()) {
                    --net[out.spec.row_polys[a].start + e];
                    ++net[out.spec.row_polys[b].start + e];
                }
                for (std::uint32_t e : products[b].exponents()) {
                    ++net[out.spec.row_polys[a].start + e];
                    --net[out.spec.row_polys[b].start + e];
                }
                std::int64_t delta = 0;
                for (const auto& [row, change] : net) {
                    const std::int64_t now = deviation_at(row);
                    std::int64_t then = static_cast<std::int64_t>(weight[row]) + change -
                                        static_cast<std::int64_t>(target[row]);
                    if (then < 0) then = -then;
                    delta += then - now;
                }
                if (delta >= 0) continue;
                for (const auto& [row, change] : net) {
                    weight[row] = static_cast<std::uint32_t>(
                        static_cast<std::int64_t>(weight[row]) + change);
                }
                std::swap(out.spec.row_polys[a].poly, out.spec.row_polys[b].poly);
                std::swap(products[a], products[b]);
                deviation += delta;
                improved = true;
            }
        }
        if (!improved) break;
    }
    if (deviation > initial) throw std::logic_error("reweighting made the profile worse");
    out.residual = static_cast<std::uint64_t>(deviation);
    return out;
}

}  // namespace bandfec
