#pragma once

// Monte-Carlo experiment harness.
//
// Two protocols, both emitting one CSV row per trial:
//
//  * Overhead: symbols arrive in a uniformly random order and the trial
//    reports the shortest arrival prefix the selected decoder can decode
//    from.  Decodability is monotone in the received set, so the minimal
//    prefix is located by bisection over presence-only feasibility probes
//    and then decoded once for real; the result is identical to retrying
//    the decoder after every single arrival, just cheaper.
//
//  * Throughput: each transmitted symbol is lost independently with a fixed
//    probability, the decoder runs exactly once on whatever arrived, and the
//    trial reports the wall-clock decode rate.
//
// Determinism: every trial derives its own stream via trial_seed(master,
// index), so records are reproducible byte for byte regardless of how
// trials are batched.  Overhead rows write decode_ns = 0 unless timing was
// explicitly requested, keeping repeated runs of the same experiment
// byte-identical; throughput rows always carry real timings and are only
// statistically reproducible.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bandfec/codec.hpp"
#include "bandfec/rng.hpp"

namespace bandfec {

enum class DecoderKind { Iterative, Ml, Hybrid };

inline const char* decoder_name(DecoderKind decoder) {
    switch (decoder) {
        case DecoderKind::Iterative: return "iterative";
        case DecoderKind::Ml: return "ml";
        case DecoderKind::Hybrid: return "hybrid";
    }
    throw std::invalid_argument("unknown decoder kind");
}

// The per-family structural parameter reported in the CSV "B" column: band
// width for band codes, N1 for staircase, window width for windowed.
inline std::uint32_t structure_parameter(const CodeSpec& spec) {
    return spec.family == CodeFamily::Staircase ? spec.n1 : spec.band;
}

// One decode attempt, as a CSV row.  Overhead trials fill symbols_needed
// with the minimal decodable prefix (n on failure, per the protocol); for
// throughput trials it is simply the number of symbols the channel
// delivered, which may fall below k on a bad draw.
struct TrialRecord {
    CodeFamily family = CodeFamily::Band;
    std::uint32_t k = 0;
    std::uint32_t n = 0;
    std::uint32_t structure = 0;
    DecoderKind decoder = DecoderKind::Hybrid;
    std::uint64_t trial = 0;
    std::uint64_t seed = 0;
    std::uint32_t symbols_needed = 0;
    double overhead = 0.0;  // (symbols_needed - k) / k
    std::uint64_t row_ops = 0;
    std::uint64_t decode_ns = 0;
    double loss_prob = 0.0;
    bool success = false;
};

struct ExperimentConfig {
    std::uint64_t master_seed = 1;
    std::uint64_t trials = 100;
    std::size_t symbol_size = 1024;
    DecoderKind decoder = DecoderKind::Hybrid;
    MlOptions ml;                  // solver override, for forced comparisons
    bool record_timing = false;    // overhead rows: emit real decode_ns
    std::vector<double> loss_grid; // throughput mode only
};

struct OverheadSummary {
    std::uint64_t trials = 0;
    std::uint64_t failures = 0;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation
    double p50 = 0.0;
    double p90 = 0.0;
    double p99 = 0.0;
};

struct ThroughputPoint {
    double loss_prob = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t failures = 0;       // excluded from the bitrate mean
    double mean_bitrate_bps = 0.0;    // k * symbol_size * 8 / decode seconds
    double mean_decode_ns = 0.0;
};

// Runs the selected decoder once on the block.
inline DecodeOutcome run_decoder(const Code& code, DecoderKind decoder, SymbolBlock& block,
                                 const MlOptions& options = {}) {
    switch (decoder) {
        case DecoderKind::Iterative: {
            const auto started = std::chrono::steady_clock::now();
            const PeelingReport peel = iterative_decode(code.spec, code.matrices, block);
            DecodeOutcome out;
            out.success = peel.missing_sources == 0;
            out.recovered_count = peel.recovered_sources;
            out.iterative_recovered = peel.recovered_sources;
            out.unsolvable_count = peel.missing_sources;
            out.row_ops = peel.row_ops;
            out.wall_time = std::chrono::steady_clock::now() - started;
            return out;
        }
        case DecoderKind::Ml:
            return ml_decode(code.spec, code.matrices, block, options);
        case DecoderKind::Hybrid:
            return hybrid_decode(code.spec, code.matrices, block, options);
    }
    throw std::invalid_argument("unknown decoder kind");
}

namespace detail {

// Presence-only decodability probe; must answer exactly as a real decode
// with these flags would.  Peeling feasibility reuses the fixpoint twin;
// ML feasibility asks the same solver ml_decode would use.
inline bool decode_feasible(const Code& code, DecoderKind decoder,
                            std::vector<char> present, const MlOptions& options = {}) {
    if (decoder != DecoderKind::Ml) {
        present = peel_indices(code.matrices, std::move(present));
        bool all_sources = true;
        for (std::uint32_t i = 0; i < code.spec.k && all_sources; ++i) {
            all_sources = present[i] != 0;
        }
        if (all_sources || decoder == DecoderKind::Iterative) return all_sources;
    }
    MlSystem sys = build_ml_system(code.spec, code.matrices, nullptr, present);
    if (sys.unknowns.empty()) return true;
    const bool banded = options.solver == MlOptions::Solver::Banded ||
                        (options.solver == MlOptions::Solver::Auto &&
                         code.spec.family == CodeFamily::Band);
    const SolveOutcome solved =
        banded ? banded_solve(sys.matrix, BandProfile::measure(sys.matrix)) :
                 dense_solve(sys.matrix);
    return solved.solved();
}

// Fills the k source slots with bytes from the trial stream and encodes.
inline SymbolBlock encoded_trial_block(const Code& code, std::size_t symbol_size, Rng& rng) {
    SymbolBlock block(slot_count(code.spec), symbol_size);
    std::vector<std::uint8_t> bytes(symbol_size);
    for (std::uint32_t i = 0; i < code.spec.k; ++i) {
        for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.below(256));
        block.receive(i, bytes);
    }
    encode(code.spec, code.matrices, block);
    return block;
}

inline SymbolBlock receive_prefix(const Code& code, const SymbolBlock& sent,
                                  const std::vector<std::uint32_t>& order,
                                  std::uint32_t count) {
    SymbolBlock block(slot_count(code.spec), sent.symbol_size());
    for (std::uint32_t j = 0; j < count; ++j) {
        const std::size_t slot = transmit_slot(code.spec, order[j]);
        block.receive(slot, sent.symbol(slot));
    }
    return block;
}

}  // namespace detail

// Shortest prefix of the arrival order the decoder can decode from, or
// nullopt when even all n symbols are not enough.  Equivalent to probing
// every prefix length in turn: decodability never flips back once gained
// (monotonicity), so bisection finds the same boundary.
inline std::optional<std::uint32_t> minimal_decodable_prefix(
    const Code& code, DecoderKind decoder, const std::vector<std::uint32_t>& order,
    const MlOptions& options = {}) {
    const std::uint32_t k = code.spec.k;
    const std::uint32_t n = code.spec.n;
    if (order.size() != n) {
        throw std::invalid_argument("arrival order must cover all n symbols");
    }
    auto feasible = [&](std::uint32_t count) {
        std::vector<char> present(slot_count(code.spec), 0);
        for (std::uint32_t j = 0; j < count; ++j) {
            present[transmit_slot(code.spec, order[j])] = 1;
        }
        return detail::decode_feasible(code, decoder, std::move(present), options);
    };
    if (!feasible(n)) return std::nullopt;
    // Invariant: infeasible at lo, feasible at hi.  Fewer than k symbols can
    // never determine k sources, so k-1 seeds the infeasible side.
    std::uint32_t lo = k - 1;
    std::uint32_t hi = n;
    while (hi - lo > 1) {
        const std::uint32_t mid = lo + (hi - lo) / 2;
        (feasible(mid) ? hi : lo) = mid;
    }
    return hi;
}

// One overhead trial: draw the arrival permutation, locate the minimal
// decodable prefix, then decode once at that prefix for the cost figures.
// An undecodable trial decodes (and fails) at the full n, recording
// overhead (n-k)/k with the failure flag, as the protocol prescribes.
inline TrialRecord overhead_trial(const Code& code, DecoderKind decoder, std::uint64_t seed,
                                  std::size_t symbol_size = 1024,
                                  bool record_timing = false,
                                  const MlOptions& options = {}) {
    const std::uint32_t k = code.spec.k;
    const std::uint32_t n = code.spec.n;
    Rng rng(seed);
    const SymbolBlock sent = detail::encoded_trial_block(code, symbol_size, rng);
    const auto order = rng.permutation(n);

    TrialRecord record;
    record.family = code.spec.family;
    record.k = k;
    record.n = n;
    record.structure = structure_parameter(code.spec);
    record.decoder = decoder;
    record.seed = seed;

    const auto needed = minimal_decodable_prefix(code, decoder, order, options);
    record.success = needed.has_value();
    record.symbols_needed = needed.value_or(n);
    record.overhead = static_cast<double>(record.symbols_needed - k) / k;

    SymbolBlock block = detail::receive_prefix(code, sent, order, record.symbols_needed);
    const DecodeOutcome outcome = run_decoder(code, decoder, block, options);
    if (outcome.success != record.success) {
        throw std::logic_error("feasibility probe contradicted the real decode");
    }
    record.row_ops = outcome.row_ops;
    if (record_timing) {
        record.decode_ns = static_cast<std::uint64_t>(outcome.wall_time.count());
    }
    return record;
}

struct OverheadResult {
    std::vector<TrialRecord> records;
    OverheadSummary summary;
};

namespace detail {

// Nearest-rank percentile on a sorted sample.
inline double percentile(const std::vector<double>& sorted, double fraction) {
    if (sorted.empty()) return 0.0;
    const double rank = std::ceil(fraction * static_cast<double>(sorted.size()));
    const std::size_t index = rank < 1.0 ? 0 : static_cast<std::size_t>(rank) - 1;
    return sorted[std::min(index, sorted.size() - 1)];
}

inline OverheadSummary summarize_overheads(const std::vector<TrialRecord>& records) {
    OverheadSummary summary;
    summary.trials = records.size();
    std::vector<double> overheads;
    overheads.reserve(records.size());
    double sum = 0.0;
    for (const TrialRecord& record : records) {
        if (!record.success) ++summary.failures;
        overheads.push_back(record.overhead);
        sum += record.overhead;
    }
    if (overheads.empty()) return summary;
    summary.mean = sum / static_cast<double>(overheads.size());
    double squares = 0.0;
    for (double value : overheads) {
        squares += (value - summary.mean) * (value - summary.mean);
    }
    if (overheads.size() > 1) {
        summary.stddev = std::sqrt(squares / static_cast<double>(overheads.size() - 1));
    }
    std::sort(overheads.begin(), overheads.end());
    summary.p50 = percentile(overheads, 0.50);
    summary.p90 = percentile(overheads, 0.90);
    summary.p99 = percentile(overheads, 0.99);
    return summary;
}

}  // namespace detail

// Runs cfg.trials overhead trials with per-trial derived seeds.  Failed
// trials stay in the aggregate at their recorded ceiling overhead (n-k)/k,
// so means never understate the cost of a code that sometimes cannot
// decode at all.
inline OverheadResult overhead_experiment(const Code& code, const ExperimentConfig& cfg) {
    if (cfg.trials == 0) throw std::invalid_argument("need at least one trial");
    OverheadResult result;
    result.records.reserve(cfg.trials);
    for (std::uint64_t t = 0; t < cfg.trials; ++t) {
        TrialRecord record = overhead_trial(code, cfg.decoder, trial_seed(cfg.master_seed, t),
                                            cfg.symbol_size, cfg.record_timing, cfg.ml);
        record.trial = t;
        result.records.push_back(record);
    }
    result.summary = detail::summarize_overheads(result.records);
    return result;
}

struct ThroughputResult {
    std::vector<TrialRecord> records;
    std::vector<ThroughputPoint> points;
};

// For each loss probability, erases every transmitted symbol independently,
// decodes exactly once (timed), and averages the decode bitrate over the
// successful trials.  Retry costs never enter the timing: the received set
// is fixed before the clock starts.
inline ThroughputResult throughput_experiment(const Code& code, const ExperimentConfig& cfg) {
    if (cfg.trials == 0) throw std::invalid_argument("need at least one trial");
    if (cfg.loss_grid.empty()) {
        throw std::invalid_argument("throughput experiments need a loss grid");
    }
    const std::uint32_t k = code.spec.k;
    ThroughputResult result;
    for (std::size_t p_index = 0; p_index < cfg.loss_grid.size(); ++p_index) {
        const double p = cfg.loss_grid[p_index];
        if (p < 0.0 || p >= 1.0) {
            throw std::invalid_argument("loss probability must lie in [0, 1)");
        }
        ThroughputPoint point;
        point.loss_prob = p;
        point.trials = cfg.trials;
        double bitrate_sum = 0.0;
        double ns_sum = 0.0;
        for (std::uint64_t t = 0; t < cfg.trials; ++t) {
            const std::uint64_t seed = trial_seed(cfg.master_seed, p_index * cfg.trials + t);
            Rng rng(seed);
            const SymbolBlock sent = detail::encoded_trial_block(code, cfg.symbol_size, rng);
            SymbolBlock block(slot_count(code.spec), cfg.symbol_size);
            std::uint32_t received = 0;
            for (std::uint32_t esi = 0; esi < code.spec.n; ++esi) {
                if (rng.chance(p)) continue;
                const std::size_t slot = transmit_slot(code.spec, esi);
                block.receive(slot, sent.symbol(slot));
                ++received;
            }
            const DecodeOutcome outcome = run_decoder(code, cfg.decoder, block, cfg.ml);

            TrialRecord record;
            record.family = code.spec.family;
            record.k = k;
            record.n = code.spec.n;
            record.structure = structure_parameter(code.spec);
            record.decoder = cfg.decoder;
            record.trial = p_index * cfg.trials + t;
            record.seed = seed;
            record.symbols_needed = received;
            record.overhead = (static_cast<double>(received) - k) / k;
            record.row_ops = outcome.row_ops;
            record.decode_ns = static_cast<std::uint64_t>(outcome.wall_time.count());
            record.loss_prob = p;
            record.success = outcome.success;
            result.records.push_back(record);

            if (outcome.success && record.decode_ns > 0) {
                const double seconds = static_cast<double>(record.decode_ns) * 1e-9;
                bitrate_sum += static_cast<double>(k) * cfg.symbol_size * 8.0 / seconds;
                ns_sum += static_cast<double>(record.decode_ns);
            } else if (!outcome.success) {
                ++point.failures;
            }
        }
        const std::uint64_t successes = point.trials - point.failures;
        if (successes > 0) {
            point.mean_bitrate_bps = bitrate_sum / static_cast<double>(successes);
            point.mean_decode_ns = ns_sum / static_cast<double>(successes);
        }
        result.points.push_back(point);
    }
    return result;
}

// ---- CSV emission ---------------------------------------------------------

inline std::string csv_header() {
    return "code_family,k,n,B,decoder,trial,seed,symbols_needed,overhead,row_ops,"
           "decode_ns,loss_prob,success\n";
}

inline std::string csv_row(const TrialRecord& record) {
    const std::string family(family_name(record.family));
    char buffer[256];
    std::snprintf(buffer, sizeof(buffer), "%s,%u,%u,%u,%s,%llu,%llu,%u,%.6f,%llu,%llu,%.4f,%d\n",
                  family.c_str(), record.k, record.n, record.structure,
                  decoder_name(record.decoder),
                  static_cast<unsigned long long>(record.trial),
                  static_cast<unsigned long long>(record.seed), record.symbols_needed,
                  record.overhead, static_cast<unsigned long long>(record.row_ops),
                  static_cast<unsigned long long>(record.decode_ns), record.loss_prob,
                  record.success ? 1 : 0);
    return buffer;
}

inline std::string csv_summary_row(const Code& code, DecoderKind decoder,
                                   const OverheadSummary& summary) {
    const std::string family(family_name(code.spec.family));
    char buffer[320];
    std::snprintf(buffer, sizeof(buffer),
                  "#summary,overhead,%s,%u,%u,%u,%s,trials=%llu,failures=%llu,mean=%.6f,"
                  "stddev=%.6f,p50=%.6f,p90=%.6f,p99=%.6f\n",
                  family.c_str(), code.spec.k, code.spec.n,
                  structure_parameter(code.spec), decoder_name(decoder),
                  static_cast<unsigned long long>(summary.trials),
                  static_cast<unsigned long long>(summary.failures), summary.mean,
                  summary.stddev, summary.p50, summary.p90, summary.p99);
    return buffer;
}

inline std::string csv_summary_row(const Code& code, DecoderKind decoder,
                                   const ThroughputPoint& point) {
    const std::string family(family_name(code.spec.family));
    char buffer[320];
    std::snprintf(buffer, sizeof(buffer),
                  "#summary,throughput,%s,%u,%u,%u,%s,loss=%.4f,trials=%llu,failures=%llu,"
                  "mean_mbps=%.3f\n",
                  family.c_str(), code.spec.k, code.spec.n,
                  structure_parameter(code.spec), decoder_name(decoder), point.loss_prob,
                  static_cast<unsigned long long>(point.trials),
                  static_cast<unsigned long long>(point.failures),
                  point.mean_bitrate_bps * 1e-6);
    return buffer;
}

inline std::string overhead_csv(const Code& code, DecoderKind decoder,
                                const OverheadResult& result) {
    std::string csv = csv_header();
    for (const TrialRecord& record : result.records) csv += csv_row(record);
    csv += csv_summary_row(code, decoder, result.summary);
    return csv;
}

inline std::string throughput_csv(const Code& code, DecoderKind decoder,
                                  const ThroughputResult& result) {
    std::string csv = csv_header();
    for (const TrialRecord& record : result.records) csv += csv_row(record);
    for (const ThroughputPoint& point : result.points) {
        csv += csv_summary_row(code, decoder, point);
    }
    return csv;
}

}  // namespace bandfec
