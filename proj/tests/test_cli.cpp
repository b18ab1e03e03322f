// End-to-end tests of the command-line tool: each case shells out to the
// built binary (path injected as BANDFEC_CLI_PATH) inside a scratch
// directory and checks files, streams, and exit codes.
//
// Exit code contract: 0 success, 1 decode failure, 2 construction/search
// failure, 64 usage error.

#include <sys/wait.h>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "bandfec/construct.hpp"
#include "bandfec/gf2poly.hpp"
#include "bandfec/packet.hpp"
#include "catch_amalgamated.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

fs::path scratch_root() {
    static const fs::path base = [] {
        const fs::path p = fs::temp_directory_path() / "bandfec_cli_tests";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return base;
}

// Fresh subdirectory per test case.
fs::path scratch(const std::string& name) {
    const fs::path dir = scratch_root() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    REQUIRE(out.good());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

RunResult run_cli(const std::string& args, const fs::path& dir) {
    const fs::path out_path = dir / "_stdout";
    const fs::path err_path = dir / "_stderr";
    const std::string command = std::string(BANDFEC_CLI_PATH) + " " + args + " >'" +
                                out_path.string() + "' 2>'" + err_path.string() + "'";
    const int raw = std::system(command.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    result.out = read_file(out_path);
    result.err = read_file(err_path);
    return result;
}

std::string random_bytes(std::size_t size, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::string bytes(size, '\0');
    for (char& b : bytes) b = static_cast<char>(rng() & 0xFF);
    return bytes;
}

// Splits an encoded stream into its fixed-size packets (header + payload).
std::vector<std::string> split_packets(const std::string& stream,
                                       std::size_t symbol_size) {
    const std::size_t stride = bandfec::kPacketHeaderSize + symbol_size;
    REQUIRE(stream.size() % stride == 0);
    std::vector<std::string> packets;
    for (std::size_t pos = 0; pos < stream.size(); pos += stride) {
        packets.push_back(stream.substr(pos, stride));
    }
    return packets;
}

std::string join(const std::vector<std::string>& parts) {
    std::string all;
    for (const std::string& p : parts) all += p;
    return all;
}

// Writes a band code spec for k=60, B=10 and encodes 3000 random input bytes
// at symbol size 64; shared start state for the decode gauntlet.
struct EncodedFixture {
    fs::path dir;
    fs::path spec = "";
    fs::path input = "";
    fs::path packets = "";
    std::string payload;
    std::vector<std::string> pieces;  // n data packets, then the trailer

    explicit EncodedFixture(const std::string& name) : dir(scratch(name)) {
        spec = dir / "code.spec";
        input = dir / "input.bin";
        packets = dir / "packets.bin";
        REQUIRE(run_cli("makecode --family band --k 60 --rate 1/2 --B 10 --out '" +
                            spec.string() + "'",
                        dir)
                    .exit_code == 0);
        payload = random_bytes(3000, 42);
        write_file(input, payload);
        REQUIRE(run_cli("encode --spec '" + spec.string() + "' --in '" + input.string() +
                            "' --out '" + packets.string() + "' --symbol-size 64",
                        dir)
                    .exit_code == 0);
        pieces = split_packets(read_file(packets), 64);
        REQUIRE(pieces.size() == 121);  // n = 120 symbols plus the trailer
    }

    int decode(const std::string& stream_name, const std::string& out_name,
               const std::string& extra, RunResult* capture = nullptr) const {
        const RunResult r =
            run_cli("decode --spec '" + spec.string() + "' --in '" +
                        (dir / stream_name).string() + "' --out '" +
                        (dir / out_name).string() + "' " + extra,
                    dir);
        if (capture != nullptr) *capture = r;
        return r.exit_code;
    }
};

}  // namespace

TEST_CASE("cli: encode then decode with zero loss restores the file") {
    EncodedFixture fx("roundtrip");
    RunResult r;
    REQUIRE(fx.decode("packets.bin", "out.bin", "", &r) == 0);
    CHECK(read_file(fx.dir / "out.bin") == fx.payload);

    // Complete systematic set: nothing to recover, report says so.
    const nlohmann::json report = nlohmann::json::parse(r.out);
    CHECK(report.at("success") == true);
    CHECK(report.at("iterative_recovered") == 0);
    CHECK(report.at("ml_recovered") == 0);
    CHECK(report.at("recovered_count") == 0);
    CHECK(report.at("unsolvable_count") == 0);
    CHECK(report.contains("row_ops"));
    CHECK(report.contains("wall_time"));
}

TEST_CASE("cli: decode survives deletion, duplication, and shuffling") {
    EncodedFixture fx("gauntlet");
    const std::string trailer = fx.pieces.back();
    for (const std::uint32_t seed : {1u, 2u, 3u, 4u, 5u}) {
        std::vector<std::string> keep(fx.pieces.begin(), fx.pieces.end() - 1);
        std::mt19937 rng(seed);
        std::shuffle(keep.begin(), keep.end(), rng);
        keep.resize(80);  // drop a third of the symbols; well inside ML reach
        keep.push_back(keep.front());
        keep.push_back(keep[1]);
        std::shuffle(keep.begin(), keep.end(), rng);
        keep.insert(keep.begin() + 10, trailer);
        write_file(fx.dir / "mangled.bin", join(keep));
        REQUIRE(fx.decode("mangled.bin", "out.bin", "") == 0);
        CHECK(read_file(fx.dir / "out.bin") == fx.payload);
    }
}

TEST_CASE("cli: corrupt packets are skipped and decode continues") {
    EncodedFixture fx("corrupt");
    std::vector<std::string> pieces = fx.pieces;
    pieces[3][0] = 'X';              // break one magic
    pieces[7][4] = '\x07';           // break one version
    std::string stream = join(pieces);
    stream.insert(stream.size() / 2, "garbage in the middle");
    write_file(fx.dir / "corrupt.bin", stream);
    RunResult r;
    REQUIRE(fx.decode("corrupt.bin", "out.bin", "", &r) == 0);
    CHECK(read_file(fx.dir / "out.bin") == fx.payload);
    CHECK(r.err.find("unparseable") != std::string::npos);
}

TEST_CASE("cli: duplicates of one symbol count only once") {
    EncodedFixture fx("dupes");
    // A stream of one symbol repeated plus the trailer holds one symbol of
    // information: decoding must fail exactly as if it arrived once.
    std::vector<std::string> only{fx.pieces[5], fx.pieces[5], fx.pieces[5],
                                  fx.pieces[5], fx.pieces.back()};
    write_file(fx.dir / "only.bin", join(only));
    RunResult r;
    REQUIRE(fx.decode("only.bin", "out.bin", "", &r) == 1);
    const nlohmann::json report = nlohmann::json::parse(r.out);
    CHECK(report.at("success") == false);
    CHECK_FALSE(fs::exists(fx.dir / "out.bin"));
}

TEST_CASE("cli: any permutation of a decodable set yields the same bytes") {
    EncodedFixture fx("permute");
    std::vector<std::string> keep(fx.pieces.begin(), fx.pieces.end() - 1);
    std::mt19937 rng(99);
    std::shuffle(keep.begin(), keep.end(), rng);
    keep.resize(75);
    keep.push_back(fx.pieces.back());

    std::vector<std::string> other = keep;
    std::shuffle(other.begin(), other.end(), std::mt19937(7));

    write_file(fx.dir / "a.bin", join(keep));
    write_file(fx.dir / "b.bin", join(other));
    REQUIRE(fx.decode("a.bin", "a.out", "") == 0);
    REQUIRE(fx.decode("b.bin", "b.out", "") == 0);
    CHECK(read_file(fx.dir / "a.out") == read_file(fx.dir / "b.out"));
    CHECK(read_file(fx.dir / "a.out") == fx.payload);
}

TEST_CASE("cli: undecodable stream exits 1 and honors --partial") {
    EncodedFixture fx("partial");
    // Keep 40 of the 60 systematic packets and nothing else: 20 sources are
    // unrecoverable no matter the decoder.
    std::vector<std::string> keep(fx.pieces.begin(), fx.pieces.begin() + 40);
    keep.push_back(fx.pieces.back());
    write_file(fx.dir / "starved.bin", join(keep));

    RunResult r;
    REQUIRE(fx.decode("starved.bin", "out.bin", "", &r) == 1);
    CHECK_FALSE(fs::exists(fx.dir / "out.bin"));
    const nlohmann::json report = nlohmann::json::parse(r.out);
    CHECK(report.at("success") == false);
    CHECK(report.at("unsolvable_count") > 0);

    REQUIRE(fx.decode("starved.bin", "partial.bin", "--partial") == 1);
    const std::string partial = read_file(fx.dir / "partial.bin");
    REQUIRE(partial.size() == fx.payload.size());
    // Received symbols are intact; the missing tail is zero-filled.
    CHECK(partial.substr(0, 40 * 64) == fx.payload.substr(0, 40 * 64));
    CHECK(partial.substr(40 * 64) == std::string(3000 - 40 * 64, '\0'));
}

TEST_CASE("cli: packets from a different code are rejected by hash") {
    EncodedFixture fx("hash_guard");
    const fs::path other = fx.dir / "other.spec";
    REQUIRE(run_cli("makecode --family band --k 60 --rate 1/2 --B 10 --code-seed 2 "
                    "--out '" + other.string() + "'",
                    fx.dir)
                .exit_code == 0);
    const RunResult r = run_cli("decode --spec '" + other.string() + "' --in '" +
                                    fx.packets.string() + "' --out '" +
                                    (fx.dir / "out.bin").string() + "'",
                                fx.dir);
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("no usable symbol packets") != std::string::npos);
}

TEST_CASE("cli: oversized input is refused with sizing guidance") {
    const fs::path dir = scratch("oversize");
    const fs::path spec = dir / "code.spec";
    REQUIRE(run_cli("makecode --family band --k 60 --rate 1/2 --B 10 --out '" +
                        spec.string() + "'",
                    dir)
                .exit_code == 0);
    write_file(dir / "big.bin", random_bytes(60 * 64 + 1, 3));
    const RunResult r = run_cli("encode --spec '" + spec.string() + "' --in '" +
                                    (dir / "big.bin").string() + "' --out '" +
                                    (dir / "p.bin").string() + "' --symbol-size 64",
                                dir);
    CHECK(r.exit_code == 64);
    CHECK(r.err.find("--symbol-size 65") != std::string::npos);
}

TEST_CASE("cli: findpoly results verify against the product-weight bound") {
    const fs::path dir = scratch("findpoly");
    const RunResult r =
        run_cli("findpoly --u 0,1,3 --max-degree 19 --max-weight 4 --count 12", dir);
    REQUIRE(r.exit_code == 0);
    const bandfec::Gf2Poly u({0, 1, 3});
    std::size_t listed = 0;
    std::size_t pos = 0;
    while (pos < r.out.size()) {
        const std::size_t eol = r.out.find('\n', pos);
        REQUIRE(eol != std::string::npos);
        const bandfec::Gf2Poly m = bandfec::parse_poly(r.out.substr(pos, eol - pos));
        pos = eol + 1;
        ++listed;
        CHECK(m.has_term(0));
        CHECK(m.degree() <= 19);
        CHECK(bandfec::poly_mul(u, m).weight() <= 4);
    }
    CHECK(listed >= 1);
    CHECK(listed <= 12);

    // Same flags, same list.
    const RunResult again =
        run_cli("findpoly --u 0,1,3 --max-degree 19 --max-weight 4 --count 12", dir);
    CHECK(again.out == r.out);

    // An unsatisfiable search exits 2; a missing required flag exits 64.
    CHECK(run_cli("findpoly --u 0,1,3 --max-degree 3 --min-degree 3 --max-weight 2", dir)
              .exit_code == 2);
    CHECK(run_cli("findpoly --max-degree 3 --max-weight 2", dir).exit_code == 64);
}

TEST_CASE("cli: dump-matrix matches the library's dense dumps") {
    const fs::path dir = scratch("dump");
    const fs::path spec = dir / "stairs.spec";
    REQUIRE(run_cli("makecode --family staircase --k 8 --rate 1/2 --n1 3 --code-seed 4 "
                    "--out '" + spec.string() + "'",
                    dir)
                .exit_code == 0);

    const bandfec::Code code = bandfec::build_staircase(
        8, bandfec::Rational::reduced(1, 2), 3, 4);
    const RunResult parity =
        run_cli("dump-matrix --spec '" + spec.string() + "' --kind parity", dir);
    REQUIRE(parity.exit_code == 0);
    CHECK(parity.out == bandfec::dump(bandfec::parity_matrix(code.spec, code.matrices)));

    const RunResult gen =
        run_cli("dump-matrix --spec '" + spec.string() + "' --kind generator", dir);
    REQUIRE(gen.exit_code == 0);
    CHECK(gen.out == bandfec::dump(bandfec::generator_matrix(code.spec, code.matrices)));

    // Windowed codes have no parity-check matrix to dump.
    const fs::path win = dir / "win.spec";
    REQUIRE(run_cli("makecode --family windowed --k 64 --rate 1/2 --out '" +
                        win.string() + "'",
                    dir)
                .exit_code == 0);
    const RunResult bad =
        run_cli("dump-matrix --spec '" + win.string() + "' --kind parity", dir);
    CHECK(bad.exit_code == 2);
    CHECK(bad.err.find("no parity-check matrix") != std::string::npos);
}

TEST_CASE("cli: bench overhead emits deterministic well-formed CSV") {
    const fs::path dir = scratch("bench");
    const std::string flags =
        "bench overhead --family band --k 100 --rate 1/2 --B 20 --decoder ml "
        "--trials 5 --seed 77 --symbol-size 16";
    const RunResult a = run_cli(flags, dir);
    REQUIRE(a.exit_code == 0);
    const RunResult b = run_cli(flags, dir);
    CHECK(a.out == b.out);

    REQUIRE(a.out.rfind("code_family,k,n,B,decoder,trial,seed,symbols_needed,overhead,"
                        "row_ops,decode_ns,loss_prob,success\n",
                        0) == 0);
    std::size_t rows = 0;
    std::size_t summaries = 0;
    std::size_t pos = a.out.find('\n') + 1;
    while (pos < a.out.size()) {
        const std::size_t eol = a.out.find('\n', pos);
        const std::string line = a.out.substr(pos, eol - pos);
        pos = eol + 1;
        if (line.rfind("#summary", 0) == 0) {
            ++summaries;
            continue;
        }
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 12);  // 13 columns
        CHECK(line.rfind("band,100,200,20,ml,", 0) == 0);
    }
    CHECK(rows == 5);
    CHECK(summaries == 1);

    // --out writes the same bytes to a file instead.
    const fs::path csv = dir / "run.csv";
    REQUIRE(run_cli(flags + " --out '" + csv.string() + "'", dir).exit_code == 0);
    CHECK(read_file(csv) == a.out);
}

TEST_CASE("cli: bench speed covers its loss grid") {
    const fs::path dir = scratch("speed");
    const RunResult r = run_cli(
        "bench speed --family staircase --k 100 --rate 1/2 --n1 5 --trials 3 "
        "--seed 5 --symbol-size 64 --loss-grid 0,0.2",
        dir);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("#summary,throughput,staircase,100,200,5,hybrid,loss=0.0000") !=
          std::string::npos);
    CHECK(r.out.find("#summary,throughput,staircase,100,200,5,hybrid,loss=0.2000") !=
          std::string::npos);
    // Speed mode requires the grid.
    CHECK(run_cli("bench speed --family staircase --k 100 --n1 5 --trials 1", dir)
              .exit_code == 64);
}

TEST_CASE("cli: windowed codes round-trip through packets") {
    const fs::path dir = scratch("windowed");
    const fs::path spec = dir / "win.spec";
    REQUIRE(run_cli("makecode --family windowed --k 64 --rate 1/2 --code-seed 6 "
                    "--out '" + spec.string() + "'",
                    dir)
                .exit_code == 0);
    const std::string payload = random_bytes(64 * 32 - 11, 8);
    write_file(dir / "in.bin", payload);
    REQUIRE(run_cli("encode --spec '" + spec.string() + "' --in '" +
                        (dir / "in.bin").string() + "' --out '" +
                        (dir / "p.bin").string() + "' --symbol-size 32",
                    dir)
                .exit_code == 0);
    const RunResult r = run_cli("decode --spec '" + spec.string() + "' --in '" +
                                    (dir / "p.bin").string() + "' --out '" +
                                    (dir / "out.bin").string() + "'",
                                dir);
    REQUIRE(r.exit_code == 0);
    CHECK(read_file(dir / "out.bin") == payload);
    // Windowed streams never carry the sources: everything is solved by ML.
    const nlohmann::json report = nlohmann::json::parse(r.out);
    CHECK(report.at("ml_recovered") == 64);
}

TEST_CASE("cli: usage errors exit 64") {
    const fs::path dir = scratch("usage");
    CHECK(run_cli("bench overhead --family band --k 100", dir).exit_code == 64);
    CHECK(run_cli("bench overhead --k 100", dir).exit_code == 64);
    CHECK(run_cli("makecode --family band --k 9 --B 4 --rate 7", dir).exit_code == 64);
    CHECK(run_cli("decode --spec /missing --in /missing --out /dev/null", dir)
              .exit_code == 64);
    CHECK(run_cli("no-such-command", dir).exit_code == 64);
}
