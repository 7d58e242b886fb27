#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "analytika/attribution.hpp"
#include "analytika/corpus.hpp"
#include "analytika/report.hpp"

namespace analytika {

struct SelectionFilter {
    std::uint64_t min_downloads = 10000;
    std::optional<std::chrono::year_month_day> min_last_update =
        std::chrono::year_month_day{std::chrono::year{2020}, std::chrono::January, std::chrono::day{1}};
    std::set<std::string> excluded_categories;

    // Keeps everything.
    static SelectionFilter none() { return {0, std::nullopt, {}}; }
};

// One category name per line, '#' comments.
std::set<std::string> load_category_list(const std::filesystem::path& path);

struct CorpusRecord {
    AppReport report;
    std::optional<CorpusEntry> meta;  // absent: no metadata row for the report
};

struct JoinedCorpus {
    std::vector<CorpusRecord> records;  // ordered by sha256
    std::size_t metadata_without_report = 0;
};

// Reads every *.json report in `report_dir` (run_summary.json excluded) and
// joins with the corpus CSV on sha256. Throws CorpusError{IoError,
// DuplicateSha256, ParseError}.
JoinedCorpus load_corpus(const std::filesystem::path& report_dir, const std::filesystem::path& corpus_csv);
JoinedCorpus join_corpus(std::vector<AppReport> reports, const std::vector<CorpusEntry>& metadata);

// Keeps downloads >= min, last_update >= min, category not excluded. Records
// without metadata (or without a date) are kept: nothing is known to
// disqualify them.
JoinedCorpus apply_filter(const JoinedCorpus& corpus, const SelectionFilter& f);

struct ApiCount {
    std::string api;
    std::size_t apps = 0;
    double share = 0;  // of ok apps
};

struct Prevalence {
    std::size_t ok_apps = 0;
    std::vector<ApiCount> per_api;  // one row per TEE detector, fixed order
    ApiCount any, none, all, all_except_pc;
};

Prevalence api_prevalence(const JoinedCorpus& corpus);

// Shares are 0 when their denominator is 0.
struct LocationStats {
    std::size_t total_matches = 0;  // TEE matches of ok apps
    std::size_t inmain_matches = 0, inlib_matches = 0, obfuscated_matches = 0;
    double inlib_match_share = 0;

    std::size_t ok_apps = 0;
    std::size_t matched_apps = 0;
    std::size_t inlib_apps = 0, inmain_apps = 0, exclusively_inmain_apps = 0, obfuscated_apps = 0;
    double inlib_apps_share_of_ok = 0;
    double inlib_apps_share = 0;  // of matched apps
    double inmain_apps_share = 0;
    double exclusively_inmain_share = 0;
    double obfuscated_apps_share = 0;

    // Distinct normalized libraries with an inlib match, over inlib apps.
    double libraries_per_app_mean = 0;
    double libraries_per_app_median = 0;

    // Among inlib (inmain) apps, share with an inlib (inmain) match per API.
    std::vector<ApiCount> per_api_inlib, per_api_inmain;
};

LocationStats location_split(const JoinedCorpus& corpus, const std::vector<PackageName>& known_prefixes);

struct LibraryRow {
    std::string library;
    std::size_t apps = 0;
};

struct LibraryTable {
    std::string detector;
    std::vector<LibraryRow> rows;  // top n: apps desc, then library asc
    std::size_t unique_libraries = 0;
};

LibraryTable top_libraries(const JoinedCorpus& corpus, std::string_view detector, std::size_t n,
                           const std::vector<PackageName>& known_prefixes);

struct CategoryRow {
    std::string category;
    std::size_t apps = 0;                 // denominator
    std::vector<std::size_t> api_apps;    // per TEE detector
    std::vector<double> api_share;
};

// Per-category share of apps using each API. `inmain_only` restricts both
// the denominator and the numerators to apps with inmain matches.
std::vector<CategoryRow> category_breakdown(const JoinedCorpus& corpus, bool inmain_only = false);

struct CryptoRow {
    std::string kind;  // "software" or "native"
    std::string library;
    std::size_t apps = 0;
};

struct CryptoTable {
    std::vector<CryptoRow> rows;
    std::size_t apps_with_software = 0;
    std::size_t apps_with_native = 0;
};

// `software`/`native` list the library names in display order; libraries
// found in reports but absent from the lists follow in name order.
CryptoTable crypto_table(const JoinedCorpus& corpus, const std::vector<std::string>& software,
                         const std::vector<std::string>& native);

struct AggregateOptions {
    std::vector<PackageName> known_prefixes;
    std::vector<std::string> software_libraries;
    std::vector<std::string> native_libraries;
    std::size_t top_n = 10;
};

struct CorpusStats {
    std::size_t records = 0, ok = 0, timeout = 0, error = 0;
    std::size_t metadata_without_report = 0;
    std::size_t without_metadata = 0;
    std::map<std::string, std::size_t> package_checks;
    Prevalence prevalence;
    LocationStats locations;
    std::vector<LibraryTable> top_libraries;  // per TEE detector
    std::vector<CategoryRow> categories, categories_inmain;
    CryptoTable crypto;
    std::optional<double> duration_min, duration_median, duration_max;
};

CorpusStats compute_stats(const JoinedCorpus& corpus, const AggregateOptions& opts);

// Writes prevalence.csv, locations.csv, top_libs_<detector>.csv,
// categories.csv, categories_long.csv, categories_inmain.csv,
// categories_inmain_long.csv, crypto.csv and summary.json.
void write_stats(const CorpusStats& stats, const std::filesystem::path& out_dir);

nlohmann::ordered_json stats_summary_json(const CorpusStats& stats);

// Human-readable overview with one-decimal percentages.
std::string format_stats_table(const CorpusStats& stats);

// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace analytika
