#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "analytika/api_matchers.hpp"
#include "analytika/bytes.hpp"
#include "analytika/cancel.hpp"
#include "analytika/corpus.hpp"
#include "analytika/report.hpp"

namespace analytika {

struct AnalysisConfig {
    int timeout_seconds = 900;
    int worker_count = 1;
    std::filesystem::path patterns_dir;  // tee_patterns.csv, crypto_patterns.csv, native_patterns.csv
    std::filesystem::path known_prefixes;
    std::filesystem::path output_dir;
    bool proguard_as_main = true;
    bool force = false;
    std::string fetch_endpoint;
    std::string api_key;

    // Throws ConfigError.
    void validate() const;
};

// Compiled pattern sets, shared read-only by all workers.
struct AnalysisResources {
    std::vector<PatternSet> pattern_sets;
    std::vector<NativeLibPattern> native_patterns;
    TeeMatcher tee;
    CryptoMatcher crypto;

    AnalysisResources(std::vector<PatternSet> sets, std::vector<NativeLibPattern> native);

    // Reads every *.csv under `dir`: files named native*.csv hold native
    // patterns, the rest bytecode patterns.
    static AnalysisResources load(const std::filesystem::path& dir);
};

// Directory holding the shipped pattern and list files.
std::filesystem::path default_data_dir();

// Full per-app analysis. Never throws for analysis failures: they end up in
// status/message, with matches discarded.
AppReport analyze_apk(ByteView bytes, const CorpusEntry& entry, const AnalysisResources& res,
                      const AttributionPolicy& policy, const Deadline& deadline = Deadline::never());

struct RunSummary {
    std::size_t analyzed = 0;
    std::size_t ok = 0;
    std::size_t timeout = 0;
    std::size_t error = 0;
    std::size_t skipped = 0;  // resumed: report already present with status ok
};

// Analyzes entries on config.worker_count threads, writing
// <output_dir>/<sha256>.json per app via temp file + rename.
// Throws FatalIoError when the output directory is not writable.
RunSummary run_corpus(const std::vector<CorpusEntry>& entries, const AnalysisConfig& config,
                      const AnalysisResources& res);

// Atomically writes `r` to <dir>/<sha256>.json and returns that path.
std::filesystem::path write_report(const std::filesystem::path& dir, const AppReport& r);

}  // namespace analytika
