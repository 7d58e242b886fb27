#include "analytika/aggregator.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <unordered_map>

#include "analytika/error.hpp"
#include "text_util.hpp"

namespace analytika {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kApis = std::size(kTeeDetectors);

std::size_t api_slot(std::string_view id) {
    for (std::size_t i = 0; i < kApis; ++i)
        if (kTeeDetectors[i] == id) return i;
    return kApis;
}

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0;
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 ? v[mid] : (v[mid - 1] + v[mid]) / 2;
}

// Per-app facts the statistics are computed from. TEE matches only.
struct AppFacts {
    bool api[kApis] = {};
    bool api_inlib[kApis] = {};
    bool api_inmain[kApis] = {};
    bool inlib = false, inmain = false, obfuscated = false;
    std::size_t matches = 0, inlib_matches = 0, inmain_matches = 0, obfuscated_matches = 0;

    bool any() const { return matches > 0; }
};

AppFacts facts_of(const AppReport& r) {
    AppFacts f;
    for (const auto& m : r.matches) {
        if (m.kind != PatternKind::tee_api) continue;
        const std::size_t s = api_slot(m.detector_id);
        if (s == kApis) continue;
        f.api[s] = true;
        ++f.matches;
        switch (m.location) {
        case LocationClass::inlib:
            f.inlib = f.api_inlib[s] = true;
            ++f.inlib_matches;
            break;
        case LocationClass::inmain:
            f.inmain = f.api_inmain[s] = true;
            ++f.inmain_matches;
            break;
        case LocationClass::obfuscated:
            f.obfuscated = true;
            ++f.obfuscated_matches;
            break;
        }
    }
    return f;
}

template <class Fn>
void for_each_ok(const JoinedCorpus& c, Fn&& fn) {
    for (const auto& rec : c.records)
        if (rec.report.status == AppStatus::ok) fn(rec);
}

std::vector<ApiCount> per_api_counts(const std::size_t (&counts)[kApis], std::size_t den) {
    std::vector<ApiCount> out;
    for (std::size_t i = 0; i < kApis; ++i) out.push_back({std::string(kTeeDetectors[i]), counts[i], ratio(counts[i], den)});
    return out;
}

}  // namespace

std::set<std::string> load_category_list(const fs::path& path) {
    std::set<std::string> out;
    const std::string text = detail::read_text(path);
    for (std::string_view line : detail::split_lines(text)) {
        line = detail::trim(line);
        if (!line.empty() && line.front() != '#') out.emplace(line);
    }
    return out;
}

// ---------------------------------------------------------------------------

JoinedCorpus join_corpus(std::vector<AppReport> reports, const std::vector<CorpusEntry>& metadata) {
    std::unordered_map<std::string, const CorpusEntry*> by_sha;
    for (const auto& e : metadata)
        if (!by_sha.emplace(e.sha256, &e).second)
            throw CorpusError(CorpusErrc::DuplicateSha256, "duplicate sha256 in corpus metadata: " + e.sha256);
    std::sort(reports.begin(), reports.end(), [](const AppReport& a, const AppReport& b) { return a.sha256 < b.sha256; });

    JoinedCorpus out;
    std::size_t joined = 0;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        if (!out.records.empty() && reports[i].sha256 == out.records.back().report.sha256)
            throw CorpusError(CorpusErrc::DuplicateSha256, "duplicate report for " + reports[i].sha256);
        CorpusRecord rec{std::move(reports[i]), std::nullopt};
        if (auto it = by_sha.find(rec.report.sha256); it != by_sha.end()) {
            rec.meta = *it->second;
            ++joined;
        }
        out.records.push_back(std::move(rec));
    }
    out.metadata_without_report = by_sha.size() - joined;
    return out;
}

JoinedCorpus load_corpus(const fs::path& report_dir, const fs::path& corpus_csv) {
    std::error_code ec;
    if (!fs::is_directory(report_dir, ec)) throw CorpusError(CorpusErrc::IoError, "report directory not found: " + report_dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(report_dir, ec)) {
        const fs::path& p = e.path();
        if (e.is_regular_file() && p.extension() == ".json" && is_sha256_hex(p.stem().string())) files.push_back(p);
    }
    if (ec) throw CorpusError(CorpusErrc::IoError, "cannot list " + report_dir.string());
    std::vector<AppReport> reports;
    reports.reserve(files.size());
    for (const auto& p : files) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw CorpusError(CorpusErrc::IoError, "cannot open " + p.string());
        try {
            reports.push_back(report_from_json(nlohmann::json::parse(in)));
        } catch (const std::exception& e) {
            throw CorpusError(CorpusErrc::ParseError, p.string() + ": " + e.what());
        }
    }
    std::vector<CorpusEntry> meta;
    if (!corpus_csv.empty()) {
        if (!fs::is_regular_file(corpus_csv, ec)) throw CorpusError(CorpusErrc::IoError, "corpus file not found: " + corpus_csv.string());
        meta = load_corpus_csv(corpus_csv);
    }
    return join_corpus(std::move(reports), meta);
}

JoinedCorpus apply_filter(const JoinedCorpus& corpus, const SelectionFilter& f) {
    JoinedCorpus out;
    out.metadata_without_report = corpus.metadata_without_report;
    for (const auto& rec : corpus.records) {
        if (rec.meta) {
            const CorpusEntry& m = *rec.meta;
            if (m.downloads < f.min_downloads) continue;
            if (f.min_last_update && m.last_update && *m.last_update < *f.min_last_update) continue;
            if (f.excluded_categories.contains(m.category)) continue;
        }
        out.records.push_back(rec);
    }
    return out;
}

// ---------------------------------------------------------------------------

Prevalence api_prevalence(const JoinedCorpus& corpus) {
    Prevalence p;
    std::size_t counts[kApis] = {};
    std::size_t any = 0, all = 0, all_but_pc = 0;
    const std::size_t pc = api_slot(kProtectedConfirmation);
    for_each_ok(corpus, [&](const CorpusRecord& rec) {
        ++p.ok_apps;
        const AppFacts f = facts_of(rec.report);
        std::size_t n = 0, n_but_pc = 0;
        for (std::size_t i = 0; i < kApis; ++i) {
            if (!f.api[i]) continue;
            ++counts[i];
            ++n;
            if (i != pc) ++n_but_pc;
        }
        if (n > 0) ++any;
        if (n == kApis) ++all;
        if (n_but_pc == kApis - 1) ++all_but_pc;
    });
    p.per_api = per_api_counts(counts, p.ok_apps);
    p.any = {"any", any, ratio(any, p.ok_apps)};
    p.none = {"none", p.ok_apps - any, ratio(p.ok_apps - any, p.ok_apps)};
    p.all = {"all", all, ratio(all, p.ok_apps)};
    p.all_except_pc = {"all_except_protected_confirmation", all_but_pc, ratio(all_but_pc, p.ok_apps)};
    return p;
}

LocationStats location_split(const JoinedCorpus& corpus, const std::vector<PackageName>& known_prefixes) {
    LocationStats s;
    std::size_t inlib_api[kApis] = {}, inmain_api[kApis] = {};
    std::vector<double> libs_per_app;
    for_each_ok(corpus, [&](const CorpusRecord& rec) {
        ++s.ok_apps;
        const AppFacts f = facts_of(rec.report);
        s.total_matches += f.matches;
        s.inlib_matches += f.inlib_matches;
        s.inmain_matches += f.inmain_matches;
        s.obfuscated_matches += f.obfuscated_matches;
        if (!f.any()) return;
        ++s.matched_apps;
        if (f.inmain) ++s.inmain_apps;
        if (f.inmain && !f.inlib && !f.obfuscated) ++s.exclusively_inmain_apps;
        if (f.obfuscated) ++s.obfuscated_apps;
        for (std::size_t i = 0; i < kApis; ++i) {
            inlib_api[i] += f.api_inlib[i];
            inmain_api[i] += f.api_inmain[i];
        }
        if (f.inlib) {
            ++s.inlib_apps;
            std::set<std::string> libs;
            for (const auto& m : rec.report.matches)
                if (m.kind == PatternKind::tee_api && m.location == LocationClass::inlib && api_slot(m.detector_id) < kApis)
                    libs.insert(normalize_library(PackageName::parse(m.attributed_package), known_prefixes));
            libs_per_app.push_back(static_cast<double>(libs.size()));
        }
    });
    s.inlib_match_share = ratio(s.inlib_matches, s.total_matches);
    s.inlib_apps_share_of_ok = ratio(s.inlib_apps, s.ok_apps);
    s.inlib_apps_share = ratio(s.inlib_apps, s.matched_apps);
    s.inmain_apps_share = ratio(s.inmain_apps, s.matched_apps);
    s.exclusively_inmain_share = ratio(s.exclusively_inmain_apps, s.matched_apps);
    s.obfuscated_apps_share = ratio(s.obfuscated_apps, s.matched_apps);
    if (!libs_per_app.empty()) {
        double sum = 0;
        for (double v : libs_per_app) sum += v;
        s.libraries_per_app_mean = sum / static_cast<double>(libs_per_app.size());
        s.libraries_per_app_median = median_of(libs_per_app);
    }
    s.per_api_inlib = per_api_counts(inlib_api, s.inlib_apps);
    s.per_api_inmain = per_api_counts(inmain_api, s.inmain_apps);
    return s;
}

LibraryTable top_libraries(const JoinedCorpus& corpus, std::string_view detector, std::size_t n,
                           const std::vector<PackageName>& known_prefixes) {
    LibraryTable t;
    t.detector = detector;
    std::map<std::string, std::size_t> apps;
    for_each_ok(corpus, [&](const CorpusRecord& rec) {
        std::set<std::string> libs;
        for (const auto& m : rec.report.matches)
            if (m.kind == PatternKind::tee_api && m.detector_id == detector && m.location == LocationClass::inlib)
                libs.insert(normalize_library(PackageName::parse(m.attributed_package), known_prefixes));
        for (const auto& l : libs) ++apps[l];
    });
    t.unique_libraries = apps.size();
    for (const auto& [lib, count] : apps) t.rows.push_back({lib, count});
    std::stable_sort(t.rows.begin(), t.rows.end(), [](const LibraryRow& a, const LibraryRow& b) { return a.apps > b.apps; });
    if (t.rows.size() > n) t.rows.resize(n);
    return t;
}

std::vector<CategoryRow> category_breakdown(const JoinedCorpus& corpus, bool inmain_only) {
    std::map<std::string, CategoryRow> rows;
    for_each_ok(corpus, [&](const CorpusRecord& rec) {
        if (!rec.meta || rec.meta->category.empty()) return;
        const AppFacts f = facts_of(rec.report);
        if (inmain_only && !f.inmain) return;
        CategoryRow& row = rows[rec.meta->category];
        if (row.api_apps.empty()) {
            row.category = rec.meta->category;
            row.api_apps.assign(kApis, 0);
        }
        ++row.apps;
        for (std::size_t i = 0; i < kApis; ++i) row.api_apps[i] += inmain_only ? f.api_inmain[i] : f.api[i];
    });
    std::vector<CategoryRow> out;
    for (auto& [_, row] : rows) {
        for (std::size_t c : row.api_apps) row.api_share.push_back(ratio(c, row.apps));
        out.push_back(std::move(row));
    }
    return out;
}

CryptoTable crypto_table(const JoinedCorpus& corpus, const std::vector<std::string>& software,
                         const std::vector<std::string>& native) {
    std::map<std::string, std::size_t> sw, nat;
    CryptoTable t;
    for_each_ok(corpus, [&](const CorpusRecord& rec) {
        const std::set<std::string> s(rec.report.crypto_software_libs.begin(), rec.report.crypto_software_libs.end());
        std::set<std::string> n;
        for (const auto& h : rec.report.native_lib_hits) n.insert(h.library);
        for (const auto& l : s) ++sw[l];
        for (const auto& l : n) ++nat[l];
        t.apps_with_software += !s.empty();
        t.apps_with_native += !n.empty();
    });
    auto emit = [&](const char* kind, const std::vector<std::string>& order, std::map<std::string, std::size_t>& counts) {
        std::set<std::string> done;
        for (const auto& lib : order) {
            if (!done.insert(lib).second) continue;
            auto it = counts.find(lib);
            t.rows.push_back({kind, lib, it == counts.end() ? 0 : it->second});
        }
        for (const auto& [lib, c] : counts)
            if (!done.contains(lib)) t.rows.push_back({kind, lib, c});
    };
    emit("software", software, sw);
    emit("native", native, nat);
    return t;
}

CorpusStats compute_stats(const JoinedCorpus& corpus, const AggregateOptions& opts) {
    CorpusStats s;
    s.records = corpus.records.size();
    s.metadata_without_report = corpus.metadata_without_report;
    std::vector<double> durations;
    for (const auto& rec : corpus.records) {
        if (!rec.meta) ++s.without_metadata;
        switch (rec.report.status) {
        case AppStatus::ok:
            ++s.ok;
            ++s.package_checks[std::string(to_string(rec.report.package_check))];
            durations.push_back(rec.report.timing.total);
            break;
        case AppStatus::timeout: ++s.timeout; break;
        case AppStatus::error: ++s.error; break;
        }
    }
    if (!durations.empty()) {
        s.duration_min = *std::min_element(durations.begin(), durations.end());
        s.duration_max = *std::max_element(durations.begin(), durations.end());
        s.duration_median = median_of(durations);
    }
    s.prevalence = api_prevalence(corpus);
    s.locations = location_split(corpus, opts.known_prefixes);
    for (std::string_view d : kTeeDetectors) s.top_libraries.push_back(top_libraries(corpus, d, opts.top_n, opts.known_prefixes));
    s.categories = category_breakdown(corpus, false);
    s.categories_inmain = category_breakdown(corpus, true);
    s.crypto = crypto_table(corpus, opts.software_libraries, opts.native_libraries);
    return s;
}

// ---------------------------------------------------------------------------

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc() ? std::string(buf, end) : std::string("nan");
}

namespace {

class CsvWriter {
public:
    CsvWriter(const fs::path& path, std::initializer_list<std::string_view> header) : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw FatalIoError("cannot write " + path.string());
        row(std::vector<std::string>(header.begin(), header.end()));
    }
    ~CsvWriter() noexcept(false) {
        out_.flush();
        if (!out_ && std::uncaught_exceptions() == 0) throw FatalIoError("cannot write " + path_.string());
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << detail::csv_field(cells[i]);
        }
        out_ << '\n';
    }

private:
    fs::path path_;
    std::ofstream out_;
};

std::string num(std::size_t v) { return std::to_string(v); }

void write_api_rows(CsvWriter& w, const ApiCount& c) { w.row({c.api, num(c.apps), format_double(c.share)}); }

void write_categories(const std::vector<CategoryRow>& rows, const fs::path& wide, const fs::path& long_form) {
    {
        CsvWriter w(wide, {"category", "apps", "keystore", "drm", "biometrics", "protected_confirmation"});
        for (const auto& r : rows) {
            std::vector<std::string> cells{r.category, num(r.apps)};
            for (double s : r.api_share) cells.push_back(format_double(s));
            w.row(cells);
        }
    }
    CsvWriter w(long_form, {"category", "api", "apps", "category_apps", "share"});
    for (const auto& r : rows)
        for (std::size_t i = 0; i < kApis; ++i)
            w.row({r.category, std::string(kTeeDetectors[i]), num(r.api_apps[i]), num(r.apps), format_double(r.api_share[i])});
}

std::string percent(double share) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", share * 100.0);
    return buf;
}

}  // namespace

nlohmann::ordered_json stats_summary_json(const CorpusStats& s) {
    using nlohmann::ordered_json;
    auto api_json = [](const std::vector<ApiCount>& v) {
        ordered_json o = ordered_json::object();
        for (const auto& c : v) o[c.api] = {{"apps", c.apps}, {"share", c.share}};
        return o;
    };
    const LocationStats& l = s.locations;
    ordered_json j;
    j["totals"] = {{"records", s.records},
                   {"ok", s.ok},
                   {"timeout", s.timeout},
                   {"error", s.error},
                   {"failed", s.timeout + s.error},
                   {"without_metadata", s.without_metadata},
                   {"metadata_without_report", s.metadata_without_report}};
    ordered_json checks = ordered_json::object();
    for (const auto& [k, v] : s.package_checks) checks[k] = v;
    j["package_checks"] = checks;
    ordered_json prev = api_json(s.prevalence.per_api);
    for (const ApiCount* c : {&s.prevalence.any, &s.prevalence.none, &s.prevalence.all, &s.prevalence.all_except_pc})
        prev[c->api] = {{"apps", c->apps}, {"share", c->share}};
    j["prevalence"] = prev;
    j["locations"] = {{"total_matches", l.total_matches},
                      {"inmain_matches", l.inmain_matches},
                      {"inlib_matches", l.inlib_matches},
                      {"obfuscated_matches", l.obfuscated_matches},
                      {"inlib_match_share", l.inlib_match_share},
                      {"matched_apps", l.matched_apps},
                      {"inlib_apps", l.inlib_apps},
                      {"inlib_apps_share_of_ok", l.inlib_apps_share_of_ok},
                      {"inlib_apps_share", l.inlib_apps_share},
                      {"inmain_apps", l.inmain_apps},
                      {"inmain_apps_share", l.inmain_apps_share},
                      {"exclusively_inmain_apps", l.exclusively_inmain_apps},
                      {"exclusively_inmain_share", l.exclusively_inmain_share},
                      {"obfuscated_apps", l.obfuscated_apps},
                      {"obfuscated_apps_share", l.obfuscated_apps_share},
                      {"libraries_per_app_mean", l.libraries_per_app_mean},
                      {"libraries_per_app_median", l.libraries_per_app_median},
                      {"per_api_inlib", api_json(l.per_api_inlib)},
                      {"per_api_inmain", api_json(l.per_api_inmain)}};
    ordered_json uniq = ordered_json::object();
    for (const auto& t : s.top_libraries) uniq[t.detector] = t.unique_libraries;
    j["unique_libraries"] = uniq;
    j["crypto"] = {{"apps_with_software", s.crypto.apps_with_software}, {"apps_with_native", s.crypto.apps_with_native}};
    auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
    j["duration_seconds"] = {{"min", opt(s.duration_min)}, {"median", opt(s.duration_median)}, {"max", opt(s.duration_max)}};
    return j;
}

void write_stats(const CorpusStats& s, const fs::path& out) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw FatalIoError("cannot create " + out.string());
    {
        CsvWriter w(out / "prevalence.csv", {"api", "apps", "share"});
        for (const auto& c : s.prevalence.per_api) write_api_rows(w, c);
        write_api_rows(w, s.prevalence.any);
        write_api_rows(w, s.prevalence.none);
        write_api_rows(w, s.prevalence.all);
        write_api_rows(w, s.prevalence.all_except_pc);
    }
    {
        const LocationStats& l = s.locations;
        CsvWriter w(out / "locations.csv", {"metric", "value"});
        w.row({"total_matches", num(l.total_matches)});
        w.row({"inmain_matches", num(l.inmain_matches)});
        w.row({"inlib_matches", num(l.inlib_matches)});
        w.row({"obfuscated_matches", num(l.obfuscated_matches)});
        w.row({"inlib_match_share", format_double(l.inlib_match_share)});
        w.row({"ok_apps", num(l.ok_apps)});
        w.row({"matched_apps", num(l.matched_apps)});
        w.row({"inlib_apps", num(l.inlib_apps)});
        w.row({"inlib_apps_share_of_ok", format_double(l.inlib_apps_share_of_ok)});
        w.row({"inlib_apps_share", format_double(l.inlib_apps_share)});
        w.row({"inmain_apps", num(l.inmain_apps)});
        w.row({"inmain_apps_share", format_double(l.inmain_apps_share)});
        w.row({"exclusively_inmain_apps", num(l.exclusively_inmain_apps)});
        w.row({"exclusively_inmain_share", format_double(l.exclusively_inmain_share)});
        w.row({"obfuscated_apps", num(l.obfuscated_apps)});
        w.row({"obfuscated_apps_share", format_double(l.obfuscated_apps_share)});
        w.row({"libraries_per_app_mean", format_double(l.libraries_per_app_mean)});
        w.row({"libraries_per_app_median", format_double(l.libraries_per_app_median)});
        for (const auto& c : l.per_api_inlib) w.row({"inlib_share_" + c.api, format_double(c.share)});
        for (const auto& c : l.per_api_inmain) w.row({"inmain_share_" + c.api, format_double(c.share)});
    }
    for (const auto& t : s.top_libraries) {
        CsvWriter w(out / ("top_libs_" + t.detector + ".csv"), {"rank", "package", "apps"});
        for (std::size_t i = 0; i < t.rows.size(); ++i) w.row({num(i + 1), t.rows[i].library, num(t.rows[i].apps)});
    }
    write_categories(s.categories, out / "categories.csv", out / "categories_long.csv");
    write_categories(s.categories_inmain, out / "categories_inmain.csv", out / "categories_inmain_long.csv");
    {
        CsvWriter w(out / "crypto.csv", {"kind", "library", "apps"});
        for (const auto& r : s.crypto.rows) w.row({r.kind, r.library, num(r.apps)});
        w.row({"software", "(any)", num(s.crypto.apps_with_software)});
        w.row({"native", "(any)", num(s.crypto.apps_with_native)});
    }
    std::ofstream j(out / "summary.json", std::ios::binary);
    j << stats_summary_json(s).dump(1) << '\n';
    if (!j) throw FatalIoError("cannot write summary.json");
}

std::string format_stats_table(const CorpusStats& s) {
    std::string out;
    char line[256];
    auto add = [&](const char* label, std::size_t n, double share) {
        std::snprintf(line, sizeof line, "  %-36s %10zu  %7s\n", label, n, percent(share).c_str());
        out += line;
    };
    std::snprintf(line, sizeof line, "records %zu, ok %zu, timeout %zu, error %zu\n", s.records, s.ok, s.timeout, s.error);
    out += line;
    out += "API prevalence (share of ok apps)\n";
    for (const auto& c : s.prevalence.per_api) add(c.api.c_str(), c.apps, c.share);
    for (const ApiCount* c : {&s.prevalence.any, &s.prevalence.none, &s.prevalence.all, &s.prevalence.all_except_pc})
        add(c->api.c_str(), c->apps, c->share);
    const LocationStats& l = s.locations;
    out += "Match locations\n";
    add("inlib matches", l.inlib_matches, l.inlib_match_share);
    add("apps with inlib (of ok)", l.inlib_apps, l.inlib_apps_share_of_ok);
    add("apps with inlib (of matched)", l.inlib_apps, l.inlib_apps_share);
    add("apps with inmain", l.inmain_apps, l.inmain_apps_share);
    add("apps exclusively inmain", l.exclusively_inmain_apps, l.exclusively_inmain_share);
    add("apps with obfuscated", l.obfuscated_apps, l.obfuscated_apps_share);
    std::snprintf(line, sizeof line, "  libraries per app: mean %.2f, median %.1f\n", l.libraries_per_app_mean,
                  l.libraries_per_app_median);
    out += line;
    for (const auto& t : s.top_libraries) {
        std::snprintf(line, sizeof line, "Top %s libraries (%zu unique)\n", t.detector.c_str(), t.unique_libraries);
        out += line;
        for (const auto& r : t.rows) {
            std::snprintf(line, sizeof line, "  %-48s %8zu\n", r.library.c_str(), r.apps);
            out += line;
        }
    }
    out += "Crypto libraries (apps)\n";
    for (const auto& r : s.crypto.rows) {
        std::snprintf(line, sizeof line, "  %-8s %-32s %8zu\n", r.kind.c_str(), r.library.c_str(), r.apps);
        out += line;
    }
    std::snprintf(line, sizeof line, "  with software library %zu, with native library %zu\n", s.crypto.apps_with_software,
                  s.crypto.apps_with_native);
    out += line;
    return out;
}

}  // namespace analytika
