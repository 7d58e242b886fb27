#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "analytika/aggregator.hpp"
#include "analytika/apk_container.hpp"
#include "analytika/error.hpp"
#include "analytika/pipeline.hpp"

namespace fs = std::filesystem;
using namespace analytika;

namespace {

struct AnalyzeArgs {
    std::string apk;
    std::string corpus;
    std::string patterns;
    std::string out = "reports";
    int timeout = 900;
    int workers = 1;
    std::string fetch_endpoint;
    std::string api_key_env;
    bool force = false;
    bool proguard_as_main = true;
};

struct StatsArgs {
    std::string reports;
    std::string corpus;
    std::string out = "stats";
    bool filter_defaults = false;
    std::optional<std::uint64_t> min_downloads;
    std::string min_date;
    std::string exclude_categories;
    std::string known_prefixes;
    std::string patterns;
    std::size_t top = 10;
};

fs::path or_default(const std::string& given, const char* file) {
    return given.empty() ? default_data_dir() / file : fs::path(given);
}

int run_analyze(const AnalyzeArgs& a) {
    AnalysisConfig cfg;
    cfg.timeout_seconds = a.timeout;
    cfg.worker_count = a.workers;
    cfg.patterns_dir = a.patterns.empty() ? default_data_dir() : fs::path(a.patterns);
    cfg.output_dir = a.out;
    cfg.proguard_as_main = a.proguard_as_main;
    cfg.force = a.force;
    cfg.fetch_endpoint = a.fetch_endpoint;
    if (!a.api_key_env.empty()) {
        const char* key = std::getenv(a.api_key_env.c_str());
        if (!key || !*key) throw ConfigError("environment variable " + a.api_key_env + " is not set");
        cfg.api_key = key;
    }
    cfg.validate();

    std::vector<CorpusEntry> entries;
    if (!a.corpus.empty()) {
        entries = load_corpus_csv(a.corpus);
    } else {
        CorpusEntry e;
        e.path = a.apk;
        e.sha256 = sha256_digest(read_file(a.apk));
        entries.push_back(std::move(e));
    }
    const AnalysisResources res = AnalysisResources::load(cfg.patterns_dir);
    const RunSummary s = run_corpus(entries, cfg, res);
    std::cout << "analyzed " << s.analyzed << " (ok " << s.ok << ", timeout " << s.timeout << ", error " << s.error
              << "), skipped " << s.skipped << "; reports in " << cfg.output_dir.string() << "\n";
    return 0;
}

int run_stats(const StatsArgs& a) {
    SelectionFilter f = SelectionFilter::none();
    if (a.filter_defaults) {
        f = SelectionFilter{};
        f.excluded_categories = load_category_list(default_data_dir() / "game_categories.txt");
    }
    if (a.min_downloads) f.min_downloads = *a.min_downloads;
    if (!a.min_date.empty()) {
        f.min_last_update = parse_date(a.min_date);
        if (!f.min_last_update) throw ConfigError("invalid --min-date '" + a.min_date + "', expected YYYY-MM-DD");
    }
    if (!a.exclude_categories.empty()) f.excluded_categories = load_category_list(a.exclude_categories);

    AggregateOptions opts;
    opts.top_n = a.top;
    opts.known_prefixes = load_known_prefixes(or_default(a.known_prefixes, "known_prefixes.txt"));
    const AnalysisResources res = AnalysisResources::load(a.patterns.empty() ? default_data_dir() : fs::path(a.patterns));
    for (const auto& s : res.pattern_sets)
        if (s.kind == PatternKind::crypto_software) opts.software_libraries.push_back(s.detector_id);
    for (const auto& p : res.native_patterns) opts.native_libraries.push_back(p.library);

    const JoinedCorpus corpus = apply_filter(load_corpus(a.reports, a.corpus), f);
    const CorpusStats stats = compute_stats(corpus, opts);
    write_stats(stats, a.out);
    std::cout << format_stats_table(stats);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Detects TEE-backed Android API and crypto library use in APKs"};
    app.require_subcommand(1);

    AnalyzeArgs aa;
    auto* analyze = app.add_subcommand("analyze", "analyze one APK or a corpus");
    auto* apk_opt = analyze->add_option("apk", aa.apk, "APK file")->check(CLI::ExistingFile);
    auto* corpus_opt = analyze->add_option("--corpus", aa.corpus, "corpus CSV")->check(CLI::ExistingFile);
    apk_opt->excludes(corpus_opt);
    analyze->add_option("--patterns", aa.patterns, "pattern directory");
    analyze->add_option("--out", aa.out, "report directory")->capture_default_str();
    analyze->add_option("--timeout", aa.timeout, "per-app deadline in seconds")->capture_default_str();
    analyze->add_option("--workers", aa.workers, "parallel analyses")->capture_default_str();
    auto* ep = analyze->add_option("--fetch-endpoint", aa.fetch_endpoint, "download URL for remote entries");
    analyze->add_option("--api-key-env", aa.api_key_env, "environment variable holding the API key")->needs(ep);
    analyze->add_flag("--force", aa.force, "re-analyze apps that already have an ok report");
    analyze->add_option("--proguard-as-main", aa.proguard_as_main, "attribute shrinker-shaped packages to the app")
        ->capture_default_str();

    StatsArgs sa;
    auto* stats = app.add_subcommand("stats", "aggregate reports into corpus tables");
    stats->add_option("--reports", sa.reports, "report directory")->required()->check(CLI::ExistingDirectory);
    stats->add_option("--corpus", sa.corpus, "corpus CSV")->check(CLI::ExistingFile);
    stats->add_option("--out", sa.out, "output directory")->capture_default_str();
    stats->add_flag("--filter-defaults", sa.filter_defaults,
                               ">= 10000 downloads, updated since 2020-01-01, no game categories");
    stats->add_option("--min-downloads", sa.min_downloads, "minimum download count");
    stats->add_option("--min-date", sa.min_date, "earliest last update, YYYY-MM-DD");
    stats->add_option("--exclude-categories", sa.exclude_categories, "file with one category per line")
        ->check(CLI::ExistingFile);
    stats->add_option("--known-prefixes", sa.known_prefixes, "library prefix list")->check(CLI::ExistingFile);
    stats->add_option("--patterns", sa.patterns, "pattern directory (crypto table row order)");
    stats->add_option("--top", sa.top, "rows per library table")->capture_default_str()->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);
    try {
        if (analyze->parsed()) {
            if (aa.apk.empty() && aa.corpus.empty()) throw ConfigError("give an APK path or --corpus");
            return run_analyze(aa);
        }
        return run_stats(sa);
    } catch (const FatalIoError& e) {
        std::cerr << "analytika: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "analytika: " << e.what() << "\n";
        return 2;
    }
}
