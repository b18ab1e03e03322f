#pragma once

// Polynomials over GF(2), stored as strictly increasing exponent lists.
//
// The library only ever needs sparse polynomials (a handful of terms for the
// accumulator polynomial u and the parity columns, up to a few hundred terms
// for band row polynomials), so the exponent-list representation is both
// compact and convenient: weight and degree are immediate, and addition is a
// sorted merge.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bandfec {

class Gf2Poly {
public:
    Gf2Poly() = default;

    // Accepts exponents in any order; repeated exponents cancel in pairs
    // (mod-2 coefficient folding).
    Gf2Poly(std::initializer_list<std::uint32_t> exps)
        : Gf2Poly(std::vector<std::uint32_t>(exps)) {}

    explicit Gf2Poly(std::vector<std::uint32_t> exps) : exps_(std::move(exps)) {
        std::sort(exps_.begin(), exps_.end());
        std::size_t out = 0;
        for (std::size_t i = 0; i < exps_.size();) {
            std::size_t j = i;
            while (j < exps_.size() && exps_[j] == exps_[i]) ++j;
            if ((j - i) % 2 != 0) exps_[out++] = exps_[i];
            i = j;
        }
        exps_.resize(out);
    }

    bool is_zero() const { return exps_.empty(); }
    bool is_one() const { return exps_.size() == 1 && exps_[0] == 0; }

    // Degree of the zero polynomial is reported as 0; check is_zero() first
    // where the distinction matters.
    std::uint32_t degree() const { return exps_.empty() ? 0 : exps_.back(); }

    std::size_t weight() const { return exps_.size(); }

    bool has_term(std::uint32_t e) const {
        return std::binary_search(exps_.begin(), exps_.end(), e);
    }

    const std::vector<std::uint32_t>& exponents() const { return exps_; }

    bool operator==(const Gf2Poly& other) const = default;

    // Lexicographic order on the exponent sequence; used as a tie-break when
    // sorting candidate lists.
    bool lex_less(const Gf2Poly& other) const {
        return std::lexicographical_compare(exps_.begin(), exps_.end(),
                                            other.exps_.begin(), other.exps_.end());
    }

private:
    std::vector<std::uint32_t> exps_;
};

// Sum over GF(2): symmetric difference of the exponent sets.
inline Gf2Poly poly_add(const Gf2Poly& a, const Gf2Poly& b) {
    std::vector<std::uint32_t> out;
    out.reserve(a.weight() + b.weight());
    std::set_symmetric_difference(a.exponents().begin(), a.exponents().end(),
                                  b.exponents().begin(), b.exponents().end(),
                                  std::back_inserter(out));
    return Gf2Poly(std::move(out));
}

// Product over GF(2): all pairwise exponent sums, folded mod 2.  Cost is
// weight(a) * weight(b) independent of the degrees involved.
inline Gf2Poly poly_mul(const Gf2Poly& a, const Gf2Poly& b) {
    std::vector<std::uint32_t> sums;
    sums.reserve(a.weight() * b.weight());
    for (std::uint32_t ea : a.exponents()) {
        for (std::uint32_t eb : b.exponents()) {
            sums.push_back(ea + eb);
        }
    }
    return Gf2Poly(std::move(sums));
}

// Multiplies by x^shift.
inline Gf2Poly poly_shift(const Gf2Poly& p, std::uint32_t shift) {
    std::vector<std::uint32_t> exps = p.exponents();
    for (auto& e : exps) e += shift;
    return Gf2Poly(std::move(exps));
}

// Canonical text form: comma-separated exponents in increasing order, e.g.
// "0,1,3" for 1 + x + x^3.  The zero polynomial serializes to the empty
// string.
inline std::string to_string(const Gf2Poly& p) {
    std::string out;
    for (std::size_t i = 0; i < p.exponents().size(); ++i) {
        if (i != 0) out += ',';
        out += std::to_string(p.exponents()[i]);
    }
    return out;
}

inline Gf2Poly parse_poly(const std::string& text) {
    std::vector<std::uint32_t> exps;
    std::size_t pos = 0;
    while (pos < text.size()) {
        while (pos < text.size() && text[pos] == ' ') ++pos;
        if (pos == text.size()) break;
        std::size_t digits = 0;
        std::uint64_t value = 0;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            value = value * 10 + static_cast<std::uint64_t>(text[pos] - '0');
            if (value > 0xFFFFFFFFull) throw std::invalid_argument("exponent out of range: " + text);
            ++pos;
            ++digits;
        }
        if (digits == 0) throw std::invalid_argument("malformed polynomial text: " + text);
        exps.push_back(static_cast<std::uint32_t>(value));
        while (pos < text.size() && text[pos] == ' ') ++pos;
        if (pos < text.size()) {
            if (text[pos] != ',') throw std::invalid_argument("malformed polynomial text: " + text);
            ++pos;
        }
    }
    return Gf2Poly(std::move(exps));
}

namespace detail {

// Dense word-packed coefficient vector, least significant exponent first.
inline std::vector<std::uint64_t> to_bits(const Gf2Poly& p) {
    std::vector<std::uint64_t> bits(p.is_zero() ? 1 : p.degree() / 64 + 1, 0);
    for (std::uint32_t e : p.exponents()) bits[e / 64] ^= std::uint64_t{1} << (e % 64);
    return bits;
}

inline Gf2Poly from_bits(const std::vector<std::uint64_t>& bits) {
    std::vector<std::uint32_t> exps;
    for (std::size_t w = 0; w < bits.size(); ++w) {
        std::uint64_t word = bits[w];
        while (word != 0) {
            const int bit = std::countr_zero(word);
            exps.push_back(static_cast<std::uint32_t>(w * 64 + static_cast<std::size_t>(bit)));
            word &= word - 1;
        }
    }
    return Gf2Poly(std::move(exps));
}

// Long division a = q*b + r over GF(2); b must be nonzero.
inline std::pair<Gf2Poly, Gf2Poly> poly_divmod(const Gf2Poly& a, const Gf2Poly& b) {
    if (b.is_zero()) throw std::invalid_argument("poly_divmod: division by zero polynomial");
    if (a.is_zero() || a.degree() < b.degree()) return {Gf2Poly{}, a};
    auto rem = to_bits(a);
    std::vector<std::uint32_t> quotient;
    const std::uint32_t db = b.degree();
    for (std::uint32_t pos = a.degree() + 1; pos-- > db;) {
        if ((rem[pos / 64] >> (pos % 64) & 1u) == 0) continue;
        quotient.push_back(pos - db);
        for (std::uint32_t e : b.exponents()) {
            const std::uint32_t target = pos - db + e;
            rem[target / 64] ^= std::uint64_t{1} << (target % 64);
        }
    }
    return {Gf2Poly(std::move(quotient)), from_bits(rem)};
}

}  // namespace detail

// Search controls for find_candidates.  Degrees refer to the returned row
// polynomials m; the weight bound applies to the product u*m.
struct CandidateQuery {
    std::uint32_t max_degree = 0;
    std::uint32_t max_product_weight = 0;
    std::size_t max_count = 0;
    std::uint32_t min_degree = 0;
};

// Finds row polynomials m with constant term 1 and min_degree <= deg(m) <=
// max_degree such that weight(u * m) <= max_product_weight.  Products with
// few terms keep the parity columns sparse, which is what drives iterative
// decoding performance; the row polynomial itself may be (and usually is)
// dense across its band, which is what ML decoding wants.
//
// The search walks the product side: it enumerates sparse polynomials
// a = 1 + x^{e_1} + ... + x^{e_{w-1}} in increasing weight, keeps those
// divisible by u (checked in O(w) with a precomputed x^e mod u table), and
// returns m = a / u.  This enumeration is exhaustive over everything the
// postconditions admit, because a candidate of product weight w corresponds
// one-to-one to a weight-w multiple of u.  Results are sorted by (product
// weight, degree, lexicographic exponents) and truncated to max_count; the
// enumeration of a weight class stops early once max_count results exist.
//
// Cost is roughly sum over w <= max_product_weight of C(max_degree, w - 2)
// combinations, each tested in constant time; weights up to 5 at degrees of
// a few hundred run in seconds.  Requires deg(u) <= 63 and u(0) = 1.
inline std::vector<Gf2Poly> find_candidates(const Gf2Poly& u, const CandidateQuery& query) {
    if (u.is_zero() || !u.has_term(0)) {
        throw std::invalid_argument("find_candidates: u must have constant term 1");
    }
    if (u.degree() > 63) throw std::invalid_argument("find_candidates: deg(u) must be <= 63");
    if (query.max_count == 0) return {};
    if (query.min_degree > query.max_degree) return {};

    const std::uint32_t du = u.degree();
    const std::uint32_t top_lo = query.min_degree + du;
    const std::uint32_t top_hi = query.max_degree + du;

    // residue[e] = x^e mod u packed into the low deg(u) bits.
    std::vector<std::uint64_t> residue(top_hi + 1);
    std::uint64_t u_low = 0;  // u without its leading term
    for (std::uint32_t e : u.exponents()) {
        if (e < du) u_low |= std::uint64_t{1} << e;
    }
    std::uint64_t r = du == 0 ? 0 : 1;
    for (std::uint32_t e = 0; e <= top_hi; ++e) {
        residue[e] = r;
        r <<= 1;
        if (du != 0 && (r >> du & 1u) != 0) r = (r ^ (std::uint64_t{1} << du)) ^ u_low;
    }

    std::vector<Gf2Poly> found;
    auto emit = [&](const std::vector<std::uint32_t>& product_exps) {
        auto [m, rem] = detail::poly_divmod(Gf2Poly(std::vector<std::uint32_t>(product_exps)), u);
        if (!rem.is_zero()) throw std::logic_error("find_candidates: residue table disagrees with division");
        found.push_back(std::move(m));
    };

    // Weight-1 product: a = 1, possible only when u = 1.
    if (du == 0 && query.min_degree == 0) emit({0});

    std::vector<std::uint32_t> picks;  // inner exponents, descending
    for (std::uint32_t w = 2; w <= query.max_product_weight; ++w) {
        if (found.size() >= query.max_count) break;
        const std::uint32_t inner = w - 2;  // exponents strictly between 0 and the top
        const std::uint64_t const_residue = du == 0 ? 0 : 1;  // 1 mod u
        for (std::uint32_t top = top_lo; top <= top_hi && found.size() < query.max_count; ++top) {
            if (top == 0) continue;
            if (top < inner + 1) continue;
            const std::uint64_t want = const_residue ^ residue[top];  // what the inner picks must add up to
            picks.clear();
            // Depth-first enumeration of `inner` exponents in (0, top).
            auto recurse = [&](auto&& self, std::uint32_t remaining, std::uint32_t hi,
                               std::uint64_t acc) -> void {
                if (found.size() >= query.max_count) return;
                if (remaining == 0) {
                    if (acc == want) {
                        std::vector<std::uint32_t> exps{0};
                        exps.insert(exps.end(), picks.rbegin(), picks.rend());
                        exps.push_back(top);
                        emit(exps);
                    }
                    return;
                }
                for (std::uint32_t e = remaining; e < hi; ++e) {
                    picks.push_back(e);
                    self(self, remaining - 1, e, acc ^ residue[e]);
                    picks.pop_back();
                    if (found.size() >= query.max_count) return;
                }
            };
            recurse(recurse, inner, top, 0);
        }
    }

    std::sort(found.begin(), found.end(), [&](const Gf2Poly& a, const Gf2Poly& b) {
        const std::size_t wa = poly_mul(u, a).weight();
        const std::size_t wb = poly_mul(u, b).weight();
        if (wa != wb) return wa < wb;
        if (a.degree() != b.degree()) return a.degree() < b.degree();
        return a.lex_less(b);
    });
    if (found.size() > query.max_count) found.resize(query.max_count);
    return found;
}

inline std::vector<Gf2Poly> find_candidates(const Gf2Poly& u, std::uint32_t max_degree,
                                            std::uint32_t max_product_weight,
                                            std::size_t max_count) {
    CandidateQuery query;
    query.max_degree = max_degree;
    query.max_product_weight = max_product_weight;
    query.max_count = max_count;
    return find_candidates(u, query);
}

}  // namespace bandfec
