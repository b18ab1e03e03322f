#pragma once
// Code instance descriptions and their canonical text form.
//
// A CodeSpec pins down one concrete code: the family, the geometry (symbol
// counts, band width), and — for banded codes — every realized row polynomial
// with its start column.  The text serialization is the interchange format
// between the command line tools.  Its exact bytes are hashed (FNV-1a, 64
// bit) and embedded in symbol packets so a decoder can refuse symbols that
// were produced under a different code.

#include <charconv>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bandfec/gf2poly.hpp"

namespace bandfec {

enum class CodeFamily : std::uint8_t { Band = 1, Staircase = 2, Windowed = 3 };

inline std::string_view family_name(CodeFamily family) {
    switch (family) {
        case CodeFamily::Band: return "band";
        case CodeFamily::Staircase: return "staircase";
        case CodeFamily::Windowed: return "windowed";
    }
    throw std::invalid_argument("unknown code family");
}

inline CodeFamily parse_family(std::string_view name) {
    if (name == "band") return CodeFamily::Band;
    if (name == "staircase") return CodeFamily::Staircase;
    if (name == "windowed") return CodeFamily::Windowed;
    throw std::invalid_argument("unknown code family '" + std::string(name) + "'");
}

// Code rate as an exact reduced fraction.
struct Rational {
    std::uint32_t num = 1;
    std::uint32_t den = 1;

    static Rational reduced(std::uint32_t num, std::uint32_t den) {
        if (num == 0 || den == 0 || num > den) {
            throw std::invalid_argument("code rate must lie in (0, 1]");
        }
        const std::uint32_t g = std::gcd(num, den);
        return Rational{num / g, den / g};
    }

    bool operator==(const Rational&) const = default;
};

// One row of the banded generator part: a polynomial and its start column.
struct RowPoly {
    Gf2Poly poly;
    std::uint32_t start = 0;

    bool operator==(const RowPoly&) const = default;
};

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace detail {

inline std::string_view next_line(std::string_view& rest) {
    if (rest.empty()) throw std::invalid_argument("code spec: unexpected end of text");
    const std::size_t pos = rest.find('\n');
    if (pos == std::string_view::npos) {
        throw std::invalid_argument("code spec: missing final newline");
    }
    const std::string_view line = rest.substr(0, pos);
    rest.remove_prefix(pos + 1);
    return line;
}

inline std::string_view expect_field(std::string_view& rest, std::string_view key) {
    const std::string_view line = next_line(rest);
    if (line.size() <= key.size() || line.substr(0, key.size()) != key ||
        line[key.size()] != ' ') {
        throw std::invalid_argument("code spec: expected '" + std::string(key) + "' line");
    }
    return line.substr(key.size() + 1);
}

inline std::uint64_t parse_uint(std::string_view text, std::uint64_t max_value) {
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || value > max_value) {
        throw std::invalid_argument("code spec: bad integer '" + std::string(text) + "'");
    }
    return value;
}

inline std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    while (true) {
        const std::size_t pos = text.find(sep);
        if (pos == std::string_view::npos) {
            parts.push_back(text);
            return parts;
        }
        parts.push_back(text.substr(0, pos));
        text.remove_prefix(pos + 1);
    }
}

}  // namespace detail

// Complete description of one code instance.  For the band family the
// realized rows are stored explicitly, so a parsed spec reconstructs the
// exact same matrices without access to the original candidate pools.
struct CodeSpec {
    CodeFamily family = CodeFamily::Band;
    std::uint32_t k = 0;
    std::uint32_t n = 0;
    Rational rate;
    std::uint64_t seed = 0;
    std::uint32_t band = 0;                  // band width (band) or window width (windowed)
    Gf2Poly u;                               // accumulator polynomial (band)
    std::vector<std::uint32_t> offsets;      // one period of start increments (band)
    std::vector<RowPoly> row_polys;          // banded generator rows, one per source (band)
    std::uint32_t n1 = 0;                    // source-node degree (staircase)

    std::string to_text() const {
        std::ostringstream out;
        out << "bandfec-code v1\n";
        out << "family " << family_name(family) << '\n';
        out << "k " << k << '\n';
        out << "n " << n << '\n';
        out << "rate " << rate.num << '/' << rate.den << '\n';
        out << "seed " << seed << '\n';
        if (family == CodeFamily::Band) {
            out << "band " << band << '\n';
            out << "u " << to_string(u) << '\n';
            out << "offsets ";
            for (std::size_t i = 0; i < offsets.size(); ++i) {
                if (i > 0) out << ',';
                out << offsets[i];
            }
            out << '\n';
            out << "rows ";
            for (std::size_t i = 0; i < row_polys.size(); ++i) {
                if (i > 0) out << ';';
                out << row_polys[i].start << ':' << to_string(row_polys[i].poly);
            }
            out << '\n';
        } else if (family == CodeFamily::Staircase) {
            out << "n1 " << n1 << '\n';
        } else {
            out << "band " << band << '\n';
        }
        out << "end\n";
        return out.str();
    }

    static CodeSpec from_text(std::string_view text) {
        using detail::expect_field;
        using detail::parse_uint;
        CodeSpec spec;
        std::string_view rest = text;
        if (detail::next_line(rest) != "bandfec-code v1") {
            throw std::invalid_argument("code spec: bad header line");
        }
        spec.family = parse_family(expect_field(rest, "family"));
        spec.k = static_cast<std::uint32_t>(parse_uint(expect_field(rest, "k"), UINT32_MAX));
        spec.n = static_cast<std::uint32_t>(parse_uint(expect_field(rest, "n"), UINT32_MAX));
        const auto rate_parts = detail::split(expect_field(rest, "rate"), '/');
        if (rate_parts.size() != 2) throw std::invalid_argument("code spec: bad rate");
        const auto rate_num =
            static_cast<std::uint32_t>(parse_uint(rate_parts[0], UINT32_MAX));
        const auto rate_den =
            static_cast<std::uint32_t>(parse_uint(rate_parts[1], UINT32_MAX));
        spec.rate = Rational::reduced(rate_num, rate_den);
        if (spec.rate.num != rate_num || spec.rate.den != rate_den) {
            throw std::invalid_argument("code spec: rate must be in lowest terms");
        }
        spec.seed = parse_uint(expect_field(rest, "seed"), UINT64_MAX);
        if (spec.k == 0 || spec.n <= spec.k) {
            throw std::invalid_argument("code spec: need 0 < k < n");
        }
        if (static_cast<std::uint64_t>(spec.k) * spec.rate.den !=
            static_cast<std::uint64_t>(spec.n) * spec.rate.num) {
            throw std::invalid_argument("code spec: rate does not match k and n");
        }
        if (spec.family == CodeFamily::Band) {
            spec.band =
                static_cast<std::uint32_t>(parse_uint(expect_field(rest, "band"), UINT32_MAX));
            spec.u = parse_poly(std::string(expect_field(rest, "u")));
            for (std::string_view part : detail::split(expect_field(rest, "offsets"), ',')) {
                spec.offsets.push_back(
                    static_cast<std::uint32_t>(parse_uint(part, UINT32_MAX)));
            }
            const auto rows = detail::split(expect_field(rest, "rows"), ';');
            if (rows.size() != spec.k) {
                throw std::invalid_argument("code spec: need one row polynomial per source");
            }
            spec.row_polys.reserve(rows.size());
            for (std::string_view entry : rows) {
                const std::size_t colon = entry.find(':');
                if (colon == std::string_view::npos) {
                    throw std::invalid_argument("code spec: bad row entry");
                }
                RowPoly row;
                row.start = static_cast<std::uint32_t>(
                    parse_uint(entry.substr(0, colon), UINT32_MAX));
                row.poly = parse_poly(std::string(entry.substr(colon + 1)));
                spec.row_polys.push_back(std::move(row));
            }
        } else if (spec.family == CodeFamily::Staircase) {
            spec.n1 =
                static_cast<std::uint32_t>(parse_uint(expect_field(rest, "n1"), UINT32_MAX));
        } else {
            spec.band =
                static_cast<std::uint32_t>(parse_uint(expect_field(rest, "band"), UINT32_MAX));
        }
        if (detail::next_line(rest) != "end") {
            throw std::invalid_argument("code spec: expected 'end' line");
        }
        if (!rest.empty()) throw std::invalid_argument("code spec: trailing content");
        return spec;
    }

    std::uint64_t hash() const { return fnv1a64(to_text()); }
};

}  // namespace bandfec
