// Command-line front end for the bandfec library: polynomial search, code
// construction, file encode/decode over the symbol-packet format, matrix
// dumps, and the overhead/throughput experiment runners.
//
// Exit codes: 0 success, 1 decode failure, 2 construction/search failure,
// 64 usage error (including unreadable/unwritable files).

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bandfec/codec.hpp"
#include "bandfec/construct.hpp"
#include "bandfec/packet.hpp"
#include "bandfec/sim.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kDecodeFailed = 1;
constexpr int kConstructionFailed = 2;
constexpr int kUsage = 64;

// File-access problems (bad paths, permissions) and bad flag values or
// combinations are usage errors; domain errors from the library
// (std::invalid_argument) are construction failures.
struct FileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::uint8_t> read_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot open '" + path + "' for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot open '" + path + "' for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_binary(const std::string& path, const std::uint8_t* data, std::size_t size) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) throw FileError("write to '" + path + "' failed");
}

// Empty path means stdout.
void emit_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    write_binary(path, reinterpret_cast<const std::uint8_t*>(text.data()), text.size());
}

bandfec::Code load_code(const std::string& path) {
    bandfec::Code code;
    code.spec = bandfec::CodeSpec::from_text(read_text(path));
    code.matrices = bandfec::realize(code.spec);
    return code;
}

bandfec::Rational parse_rate(const std::string& text) {
    const auto slash = text.find('/');
    if (slash == std::string::npos || slash == 0 || slash + 1 == text.size()) {
        throw UsageError("rate must be a fraction like 1/2, got '" + text + "'");
    }
    const auto num = std::stoul(text.substr(0, slash));
    const auto den = std::stoul(text.substr(slash + 1));
    return bandfec::Rational::reduced(static_cast<std::uint32_t>(num),
                                      static_cast<std::uint32_t>(den));
}

bandfec::DecoderKind parse_decoder(std::string name) {
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (name == "it" || name == "iterative") return bandfec::DecoderKind::Iterative;
    if (name == "ml") return bandfec::DecoderKind::Ml;
    if (name == "hybrid") return bandfec::DecoderKind::Hybrid;
    throw UsageError("unknown decoder '" + name +
                     "'; use iterative (or it), ml, or hybrid");
}

bandfec::ScheduleKind parse_schedule(const std::string& name) {
    if (name == "round-robin" || name == "rrobin") return bandfec::ScheduleKind::RoundRobin;
    if (name == "seeded") return bandfec::ScheduleKind::Seeded;
    throw UsageError("unknown schedule '" + name + "'; use round-robin or seeded");
}

// One polynomial per line, comma-separated exponents; blank lines and lines
// starting with '#' are skipped.
std::vector<bandfec::Gf2Poly> read_poly_list(const std::string& path) {
    const std::string text = read_text(path);
    std::vector<bandfec::Gf2Poly> polys;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = std::min(text.find('\n', pos), text.size());
        std::string line = text.substr(pos, eol - pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        pos = eol + 1;
        if (line.empty() || line[0] == '#') continue;
        polys.push_back(bandfec::parse_poly(line));
    }
    if (polys.empty()) {
        throw std::invalid_argument("polynomial list '" + path + "' holds no polynomials");
    }
    return polys;
}

// ---- shared code-construction flags ----------------------------------------

struct CodeArgs {
    std::string spec;        // pre-built spec file; overrides everything below
    std::string family;
    std::uint32_t k = 0;
    std::string rate = "1/2";
    std::uint32_t band = 0;
    std::string u;
    std::string candidates;  // interior pool file (band)
    std::string edge;        // edge pool file (band); defaults to --candidates
    std::uint32_t n1 = 5;
    std::string schedule = "round-robin";
    std::uint64_t seed = 1;  // construction seed
};

void add_code_options(CLI::App& cmd, CodeArgs& args, bool with_spec) {
    if (with_spec) {
        cmd.add_option("--spec", args.spec, "code spec file (alternative to --family flags)");
    }
    cmd.add_option("--family", args.family, "code family: band, staircase, or windowed");
    cmd.add_option("--k", args.k, "source symbol count");
    cmd.add_option("--rate", args.rate, "code rate as a fraction")->capture_default_str();
    cmd.add_option("--B", args.band, "band width (band family)");
    cmd.add_option("--u", args.u, "accumulator polynomial, comma-separated exponents "
                                  "(band; default picked per band width)");
    cmd.add_option("--candidates", args.candidates,
                   "row-polynomial pool file for interior rows (band; needs --u)");
    cmd.add_option("--edge-candidates", args.edge,
                   "row-polynomial pool file for edge rows (band; default --candidates)");
    cmd.add_option("--n1", args.n1, "source-node degree (staircase)")->capture_default_str();
    cmd.add_option("--schedule", args.schedule, "pool interlacing: round-robin or seeded")
        ->capture_default_str();
    cmd.add_option("--code-seed", args.seed, "construction seed")->capture_default_str();
}

bandfec::Code build_from_args(const CodeArgs& args) {
    if (!args.spec.empty()) return load_code(args.spec);
    if (args.family.empty()) {
        throw UsageError("give --spec FILE, or --family with --k");
    }
    if (args.k == 0) throw UsageError("--family needs --k SOURCE_COUNT");
    const bandfec::CodeFamily family = bandfec::parse_family(args.family);
    const bandfec::Rational rate = parse_rate(args.rate);
    switch (family) {
        case bandfec::CodeFamily::Band: {
            if (args.band == 0) {
                throw UsageError("band codes need --B BAND_WIDTH");
            }
            const bandfec::ScheduleKind schedule = parse_schedule(args.schedule);
            if (!args.candidates.empty()) {
                if (args.u.empty()) {
                    throw UsageError(
                        "--candidates needs --u: the pool is only meaningful for the "
                        "accumulator it was searched against");
                }
                const auto interior = read_poly_list(args.candidates);
                const auto edge =
                    args.edge.empty() ? interior : read_poly_list(args.edge);
                return bandfec::build_band(args.k, rate, args.band,
                                           bandfec::parse_poly(args.u), interior, edge,
                                           schedule, args.seed);
            }
            const bandfec::Gf2Poly u =
                args.u.empty() ? bandfec::Gf2Poly() : bandfec::parse_poly(args.u);
            return bandfec::build_band_default(args.k, rate, args.band, args.seed, u,
                                               schedule);
        }
        case bandfec::CodeFamily::Staircase:
            return bandfec::build_staircase(args.k, rate, args.n1, args.seed);
        case bandfec::CodeFamily::Windowed:
            return bandfec::build_windowed(args.k, rate, args.seed);
    }
    throw std::invalid_argument("unknown code family");
}

// ---- findpoly ---------------------------------------------------------------

struct FindpolyArgs {
    std::string u;
    std::uint32_t max_degree = 0;
    std::uint32_t max_weight = 0;
    std::size_t count = 16;
    std::uint32_t min_degree = 0;
    std::string out;
};

int run_findpoly(const FindpolyArgs& args) {
    const bandfec::Gf2Poly u = bandfec::parse_poly(args.u);
    const auto found = bandfec::find_candidates(
        u, bandfec::CandidateQuery{args.max_degree, args.max_weight, args.count,
                                   args.min_degree});
    std::string text;
    for (const bandfec::Gf2Poly& m : found) {
        text += bandfec::to_string(m);
        text += '\n';
    }
    emit_text(args.out, text);
    if (found.empty()) {
        std::cerr << "findpoly: no polynomial of degree in [" << args.min_degree << ", "
                  << args.max_degree << "] keeps weight(u*m) <= " << args.max_weight
                  << "; raise --max-weight or widen the degree range\n";
        return kConstructionFailed;
    }
    return kOk;
}

// ---- makecode ---------------------------------------------------------------

struct MakecodeArgs {
    CodeArgs code;
    std::string out;
};

int run_makecode(const MakecodeArgs& args) {
    const bandfec::Code code = build_from_args(args.code);
    emit_text(args.out, code.spec.to_text());
    return kOk;
}

// ---- encode -----------------------------------------------------------------

struct EncodeArgs {
    std::string spec;
    std::string in;
    std::string out;
    std::uint32_t symbol_size = 1024;
};

int run_encode(const EncodeArgs& args) {
    if (args.symbol_size < 8) {
        std::cerr << "encode: --symbol-size must be at least 8 (the stream trailer "
                     "stores a 64-bit padding count)\n";
        return kUsage;
    }
    const bandfec::Code code = load_code(args.spec);
    const bandfec::CodeSpec& spec = code.spec;
    std::vector<std::uint8_t> data = read_binary(args.in);
    const std::uint64_t capacity =
        static_cast<std::uint64_t>(spec.k) * args.symbol_size;
    if (data.size() > capacity) {
        const std::uint64_t needed = (data.size() + spec.k - 1) / spec.k;
        std::cerr << "encode: input is " << data.size() << " bytes but one block holds "
                  << capacity << " (k=" << spec.k << " symbols of " << args.symbol_size
                  << " bytes); rerun with --symbol-size " << needed
                  << " or larger, or split the input\n";
        return kUsage;
    }
    const std::uint64_t padding = capacity - data.size();
    data.resize(capacity, 0);

    bandfec::SymbolBlock block(bandfec::slot_count(spec), args.symbol_size);
    for (std::uint32_t i = 0; i < spec.k; ++i) {
        block.receive(i, std::span<const std::uint8_t>(
                             data.data() + static_cast<std::size_t>(i) * args.symbol_size,
                             args.symbol_size));
    }
    bandfec::encode(spec, code.matrices, block);

    const std::uint64_t spec_hash = spec.hash();
    std::ofstream out(args.out, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError("cannot open '" + args.out + "' for writing");
    bandfec::SymbolPacket packet;
    packet.family = spec.family;
    packet.k = spec.k;
    packet.n = spec.n;
    packet.symbol_size = args.symbol_size;
    packet.spec_hash = spec_hash;
    for (std::uint32_t esi = 0; esi < spec.n; ++esi) {
        packet.esi = esi;
        const auto symbol = block.symbol(bandfec::transmit_slot(spec, esi));
        packet.payload.assign(symbol.begin(), symbol.end());
        const auto bytes = bandfec::serialize_packet(packet);
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
    }
    packet.esi = bandfec::kTrailerEsi;
    packet.payload.clear();
    bandfec::detail::put_u64(packet.payload, padding);
    packet.payload.resize(args.symbol_size, 0);
    const auto trailer = bandfec::serialize_packet(packet);
    out.write(reinterpret_cast<const char*>(trailer.data()),
              static_cast<std::streamsize>(trailer.size()));
    if (!out) throw FileError("write to '" + args.out + "' failed");
    return kOk;
}

// ---- decode -----------------------------------------------------------------

struct DecodeArgs {
    std::string spec;
    std::string in;
    std::string out;
    bool partial = false;
};

int run_decode(const DecodeArgs& args) {
    const bandfec::Code code = load_code(args.spec);
    const bandfec::CodeSpec& spec = code.spec;
    const std::uint64_t spec_hash = spec.hash();
    const std::vector<std::uint8_t> stream = read_binary(args.in);

    bandfec::PacketReader reader(stream.data(), stream.size());
    std::optional<bandfec::SymbolBlock> block;
    std::uint32_t symbol_size = 0;
    std::uint64_t accepted = 0, duplicates = 0, rejected = 0;
    std::optional<std::uint64_t> padding;
    while (auto packet = reader.next()) {
        if (!bandfec::packet_matches(*packet, spec, spec_hash)) {
            ++rejected;
            continue;
        }
        if (symbol_size == 0) {
            symbol_size = packet->symbol_size;
        } else if (packet->symbol_size != symbol_size) {
            ++rejected;
            continue;
        }
        if (packet->is_trailer()) {
            if (packet->payload.size() >= 8) {
                padding = bandfec::detail::get_u64(packet->payload.data());
            } else {
                ++rejected;
            }
            continue;
        }
        if (!block) block.emplace(bandfec::slot_count(spec), symbol_size);
        const std::size_t slot = bandfec::transmit_slot(spec, packet->esi);
        if (block->present(slot)) {
            ++duplicates;
            continue;
        }
        block->receive(slot, std::span<const std::uint8_t>(packet->payload));
        ++accepted;
    }

    if (!block) {
        std::cerr << "decode: no usable symbol packets (rejected " << rejected
                  << " packets, skipped " << reader.skipped_bytes() << " bytes)\n";
        return kDecodeFailed;
    }
    if (rejected > 0 || reader.skipped_bytes() > 0) {
        std::cerr << "decode: ignored " << rejected << " foreign/corrupt packets and "
                  << reader.skipped_bytes() << " unparseable bytes\n";
    }

    const bandfec::DecodeOutcome outcome =
        bandfec::hybrid_decode(spec, code.matrices, *block);

    nlohmann::ordered_json report;
    report["success"] = outcome.success;
    report["recovered_count"] = outcome.recovered_count;
    report["iterative_recovered"] = outcome.iterative_recovered;
    report["ml_recovered"] = outcome.ml_recovered;
    report["unsolvable_count"] = outcome.unsolvable_count;
    report["row_ops"] = outcome.row_ops;
    report["wall_time"] = outcome.wall_time.count();
    std::cout << report.dump() << '\n';

    std::uint64_t total = static_cast<std::uint64_t>(spec.k) * symbol_size;
    if (padding) {
        total -= std::min(*padding, total);
    } else {
        std::cerr << "decode: stream trailer missing; writing the full padded block\n";
    }

    const auto write_sources = [&]() {
        std::vector<std::uint8_t> bytes;
        bytes.reserve(total);
        for (std::uint32_t i = 0; i < spec.k && bytes.size() < total; ++i) {
            const auto symbol = block->symbol(i);
            const std::uint64_t take =
                std::min<std::uint64_t>(symbol.size(), total - bytes.size());
            bytes.insert(bytes.end(), symbol.begin(), symbol.begin() + take);
        }
        write_binary(args.out, bytes.data(), bytes.size());
    };

    if (outcome.success) {
        write_sources();
        return kOk;
    }
    std::cerr << "decode: failed with " << outcome.unsolvable_count
              << " unresolvable symbols (" << accepted << " received, " << duplicates
              << " duplicates)";
    if (args.partial) {
        std::cerr << "; writing partial output (missing symbols zero-filled)\n";
        write_sources();
    } else {
        std::cerr << "; output suppressed (use --partial to keep recovered symbols)\n";
    }
    return kDecodeFailed;
}

// ---- dump-matrix ------------------------------------------------------------

struct DumpArgs {
    std::string spec;
    std::string kind = "parity";
    std::string out;
};

int run_dump(const DumpArgs& args) {
    const bandfec::Code code = load_code(args.spec);
    const bandfec::BitMatrix matrix =
        args.kind == "parity" ? bandfec::parity_matrix(code.spec, code.matrices)
                              : bandfec::generator_matrix(code.spec, code.matrices);
    emit_text(args.out, bandfec::dump(matrix));
    return kOk;
}

// ---- bench ------------------------------------------------------------------

struct BenchArgs {
    CodeArgs code;
    std::uint64_t trials = 100;
    std::uint64_t seed = 1;  // master seed for trial derivation
    std::uint32_t symbol_size = 1024;
    std::string decoder = "hybrid";
    std::string solver;      // banded | dense; empty = automatic
    bool timing = false;
    std::vector<double> loss_grid;
    std::string out;
};

bandfec::ExperimentConfig bench_config(const BenchArgs& args) {
    bandfec::ExperimentConfig cfg;
    cfg.master_seed = args.seed;
    cfg.trials = args.trials;
    cfg.symbol_size = args.symbol_size;
    cfg.decoder = parse_decoder(args.decoder);
    cfg.record_timing = args.timing;
    cfg.loss_grid = args.loss_grid;
    if (!args.solver.empty()) {
        if (args.solver == "banded") {
            cfg.ml.solver = bandfec::MlOptions::Solver::Banded;
        } else if (args.solver == "dense") {
            cfg.ml.solver = bandfec::MlOptions::Solver::Dense;
        } else {
            throw UsageError("unknown solver '" + args.solver +
                             "'; use banded or dense");
        }
    }
    return cfg;
}

int run_bench_overhead(const BenchArgs& args) {
    const bandfec::Code code = build_from_args(args.code);
    const bandfec::ExperimentConfig cfg = bench_config(args);
    const bandfec::OverheadResult result = bandfec::overhead_experiment(code, cfg);
    emit_text(args.out, bandfec::overhead_csv(code, cfg.decoder, result));
    return kOk;
}

int run_bench_speed(const BenchArgs& args) {
    const bandfec::Code code = build_from_args(args.code);
    const bandfec::ExperimentConfig cfg = bench_config(args);
    const bandfec::ThroughputResult result = bandfec::throughput_experiment(code, cfg);
    emit_text(args.out, bandfec::throughput_csv(code, cfg.decoder, result));
    return kOk;
}

void add_bench_options(CLI::App& cmd, BenchArgs& args, bool speed) {
    add_code_options(cmd, args.code, true);
    cmd.add_option("--trials", args.trials, "trial count")->capture_default_str();
    cmd.add_option("--seed", args.seed, "master seed; per-trial seeds derive from it")
        ->capture_default_str();
    cmd.add_option("--symbol-size", args.symbol_size, "symbol payload bytes")
        ->capture_default_str();
    cmd.add_option("--decoder", args.decoder, "iterative (it), ml, or hybrid")
        ->capture_default_str();
    cmd.add_option("--solver", args.solver,
                   "force the ML elimination backend: banded or dense");
    if (speed) {
        cmd.add_option("--loss-grid", args.loss_grid,
                       "comma-separated loss probabilities, e.g. 0,0.05,0.1")
            ->required()
            ->delimiter(',');
    } else {
        cmd.add_flag("--timing", args.timing,
                     "re-decode once per trial to record real wall times");
    }
    cmd.add_option("--out", args.out, "write CSV here instead of stdout");
}

template <typename Fn, typename Args>
void attach(CLI::App* cmd, int& rc, Fn fn, const Args& args) {
    cmd->callback([&rc, fn, &args]() {
        try {
            rc = fn(args);
        } catch (const FileError& e) {
            std::cerr << "error: " << e.what() << '\n';
            rc = kUsage;
        } catch (const UsageError& e) {
            std::cerr << "error: " << e.what() << '\n';
            rc = kUsage;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            rc = kConstructionFailed;
        }
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bandfec: banded LDPC erasure codes — construction, packet "
                 "encode/decode, and benchmark experiments"};
    app.require_subcommand(1);
    int rc = kOk;

    FindpolyArgs findpoly;
    CLI::App* cmd_findpoly = app.add_subcommand(
        "findpoly", "search row polynomials whose accumulator product is sparse");
    cmd_findpoly->add_option("--u", findpoly.u, "accumulator polynomial, e.g. 0,1,3")
        ->required();
    cmd_findpoly->add_option("--max-degree,--B", findpoly.max_degree,
                             "largest row-polynomial degree")
        ->required();
    cmd_findpoly->add_option("--max-weight", findpoly.max_weight,
                             "largest allowed weight of u*m")
        ->required();
    cmd_findpoly->add_option("--count", findpoly.count, "maximum results")
        ->capture_default_str();
    cmd_findpoly->add_option("--min-degree", findpoly.min_degree,
                             "smallest row-polynomial degree")
        ->capture_default_str();
    cmd_findpoly->add_option("--out", findpoly.out, "output file; default stdout");
    attach(cmd_findpoly, rc, run_findpoly, findpoly);

    MakecodeArgs makecode;
    CLI::App* cmd_makecode =
        app.add_subcommand("makecode", "construct a code and print its spec file");
    add_code_options(*cmd_makecode, makecode.code, false);
    cmd_makecode->add_option("--out", makecode.out, "output file; default stdout");
    attach(cmd_makecode, rc, run_makecode, makecode);

    EncodeArgs encode;
    CLI::App* cmd_encode =
        app.add_subcommand("encode", "encode a file into a symbol-packet stream");
    cmd_encode->add_option("--spec", encode.spec, "code spec file")->required();
    cmd_encode->add_option("--in", encode.in, "input file")->required();
    cmd_encode->add_option("--out", encode.out, "packet stream output")->required();
    cmd_encode->add_option("--symbol-size", encode.symbol_size, "symbol payload bytes")
        ->capture_default_str();
    attach(cmd_encode, rc, run_encode, encode);

    DecodeArgs decode;
    CLI::App* cmd_decode = app.add_subcommand(
        "decode", "decode a symbol-packet stream back into the original file");
    cmd_decode->add_option("--spec", decode.spec, "code spec file")->required();
    cmd_decode->add_option("--in", decode.in, "packet stream input")->required();
    cmd_decode->add_option("--out", decode.out, "decoded output file")->required();
    cmd_decode->add_flag("--partial", decode.partial,
                         "on failure, still write recovered symbols (gaps zero-filled)");
    attach(cmd_decode, rc, run_decode, decode);

    DumpArgs dump;
    CLI::App* cmd_dump =
        app.add_subcommand("dump-matrix", "print a code matrix as 0/1 rows");
    cmd_dump->add_option("--spec", dump.spec, "code spec file")->required();
    cmd_dump->add_option("--kind", dump.kind, "parity or generator")
        ->check(CLI::IsMember({"parity", "generator"}))
        ->capture_default_str();
    cmd_dump->add_option("--out", dump.out, "output file; default stdout");
    attach(cmd_dump, rc, run_dump, dump);

    CLI::App* cmd_bench =
        app.add_subcommand("bench", "run Monte-Carlo experiments, CSV per trial");
    cmd_bench->require_subcommand(1);
    BenchArgs overhead;
    CLI::App* cmd_overhead = cmd_bench->add_subcommand(
        "overhead", "minimal decodable prefix over random arrival orders");
    add_bench_options(*cmd_overhead, overhead, false);
    attach(cmd_overhead, rc, run_bench_overhead, overhead);
    BenchArgs speed;
    CLI::App* cmd_speed = cmd_bench->add_subcommand(
        "speed", "timed decode bitrate across a loss-probability grid");
    add_bench_options(*cmd_speed, speed, true);
    attach(cmd_speed, rc, run_bench_speed, speed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int cli_rc = app.exit(e);
        return cli_rc == 0 ? kOk : kUsage;
    }
    return rc;
}
