#include "analytika/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "analytika/apk_container.hpp"
#include "analytika/error.hpp"
#include "analytika/fetch.hpp"
#include "analytika/manifest.hpp"

#ifndef ANALYTIKA_DATA_DIR
#define ANALYTIKA_DATA_DIR "data"
#endif

namespace analytika {

namespace fs = std::filesystem;

void AnalysisConfig::validate() const {
    if (timeout_seconds < 1) throw ConfigError("timeout must be at least 1 second");
    if (worker_count < 1) throw ConfigError("worker count must be at least 1");
    if (output_dir.empty()) throw ConfigError("output directory not set");
    if (!fetch_endpoint.empty() && api_key.empty()) throw ConfigError("fetch endpoint given without an API key");
}

AnalysisResources::AnalysisResources(std::vector<PatternSet> sets, std::vector<NativeLibPattern> native)
    : pattern_sets(std::move(sets)), native_patterns(std::move(native)), tee(pattern_sets), crypto(pattern_sets) {}

AnalysisResources AnalysisResources::load(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw ConfigError("pattern directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<PatternSet> sets;
    std::vector<NativeLibPattern> native;
    for (const auto& f : files) {
        if (f.filename().string().starts_with("native")) {
            for (auto& p : load_native_pattern_file(f)) native.push_back(std::move(p));
            continue;
        }
        for (auto& s : load_pattern_file(f)) {
            auto it = std::find_if(sets.begin(), sets.end(), [&](const PatternSet& x) {
                return x.detector_id == s.detector_id && x.kind == s.kind;
            });
            if (it == sets.end()) {
                sets.push_back(std::move(s));
                continue;
            }
            for (auto& p : s.class_prefixes)
                if (std::find(it->class_prefixes.begin(), it->class_prefixes.end(), p) == it->class_prefixes.end())
                    it->class_prefixes.push_back(std::move(p));
            for (auto& m : s.method_patterns)
                if (std::find(it->method_patterns.begin(), it->method_patterns.end(), m) == it->method_patterns.end())
                    it->method_patterns.push_back(std::move(m));
        }
    }
    return AnalysisResources(std::move(sets), std::move(native));
}

fs::path default_data_dir() {
    if (const char* env = std::getenv("ANALYTIKA_DATA_DIR"); env && *env) return env;
    return ANALYTIKA_DATA_DIR;
}

namespace {

using Clock = std::chrono::steady_clock;

class StageClock {
public:
    explicit StageClock(StageTiming& t) : t_(t), start_(Clock::now()), mark_(start_) {}
    void lap(std::string name) {
        const auto now = Clock::now();
        t_.stages.emplace_back(std::move(name), std::chrono::duration<double>(now - mark_).count());
        mark_ = now;
    }
    void finish() { t_.total = std::chrono::duration<double>(Clock::now() - start_).count(); }

private:
    StageTiming& t_;
    Clock::time_point start_, mark_;
};

void attribute(std::vector<MatchRecord>& records, const PackageName& app, const AttributionPolicy& policy) {
    for (auto& r : records) {
        const PackageName pkg = package_of_class(r.caller_class);
        r.attributed_package = pkg.str();
        r.location = classify_location(app, pkg, policy);
    }
}

void discard_results(AppReport& r) {
    r.matches.clear();
    r.native_lib_hits.clear();
    r.crypto_software_libs.clear();
}

}  // namespace

AppReport analyze_apk(ByteView bytes, const CorpusEntry& entry, const AnalysisResources& res,
                      const AttributionPolicy& policy, const Deadline& deadline) {
    AppReport r;
    r.expected_package_name = entry.expected_package_name;
    r.sha256 = entry.sha256;
    StageClock clock(r.timing);
    try {
        deadline.check();
        const std::string digest = sha256_digest(bytes);
        if (!entry.sha256.empty() && digest != entry.sha256)
            throw Error("hash mismatch: expected " + entry.sha256 + ", got " + digest);
        r.sha256 = digest;
        clock.lap("digest");

        deadline.check();
        const ArchiveIndex index = open_archive(bytes);
        r.warnings = index.warnings;
        clock.lap("archive");

        deadline.check();
        const ManifestInfo info = extract_manifest_info(parse_binary_xml(read_entry(index, bytes, "AndroidManifest.xml", deadline)));
        r.package_name = info.package_name;
        r.permissions = info.permissions;
        r.min_sdk = info.min_sdk;
        r.package_check = compare_package_names(r.package_name, r.expected_package_name);
        clock.lap("manifest");

        const PackageName app = PackageName::parse(r.package_name);
        std::vector<MatchRecord> tee, crypto;
        double parse_secs = 0, match_secs = 0;
        for (const auto& name : enumerate_dex(index)) {
            deadline.check();
            const auto t0 = Clock::now();
            const DexUnit unit = parse_dex(read_entry(index, bytes, name, deadline), name, deadline);
            const auto t1 = Clock::now();
            deadline.check();
            for (auto& m : res.tee.match(unit)) tee.push_back(std::move(m));
            for (auto& m : res.crypto.match(unit)) crypto.push_back(std::move(m));
            parse_secs += std::chrono::duration<double>(t1 - t0).count();
            match_secs += std::chrono::duration<double>(Clock::now() - t1).count();
            r.dex_files.push_back(name);
        }
        r.timing.stages.emplace_back("dex", parse_secs);
        r.timing.stages.emplace_back("match", match_secs);
        clock.lap("dex_overhead");

        deadline.check();
        attribute(tee, app, policy);
        attribute(crypto, app, policy);
        std::set<std::string> libs;
        for (const auto& m : crypto) libs.insert(m.detector_id);
        r.crypto_software_libs.assign(libs.begin(), libs.end());
        r.matches = std::move(tee);
        r.matches.insert(r.matches.end(), std::make_move_iterator(crypto.begin()), std::make_move_iterator(crypto.end()));
        clock.lap("attribution");

        deadline.check();
        r.native_lib_hits = match_native_libs(enumerate_native_libs(index), res.native_patterns);
        clock.lap("native");
        r.status = AppStatus::ok;
    } catch (const Cancelled& e) {
        r.status = AppStatus::timeout;
        r.message = e.what();
        discard_results(r);
    } catch (const std::exception& e) {
        r.status = AppStatus::error;
        r.message = e.what();
        discard_results(r);
    }
    clock.finish();
    return r;
}

fs::path write_report(const fs::path& dir, const AppReport& r) {
    if (!is_sha256_hex(r.sha256)) throw Error("report has no valid sha256");
    const fs::path final_path = dir / (r.sha256 + ".json");
    std::ostringstream tid;
    tid << std::this_thread::get_id();
    const fs::path tmp = dir / ("." + r.sha256 + ".json.tmp" + tid.str());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << report_to_json(r).dump(1) << '\n';
        out.flush();
        if (!out) throw FatalIoError("cannot write " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, final_path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw FatalIoError("cannot rename report into place: " + final_path.string());
    }
    return final_path;
}

namespace {

bool has_ok_report(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    try {
        const auto j = nlohmann::json::parse(in);
        return j.at("meta").at("status") == "ok";
    } catch (const std::exception&) {
        return false;
    }
}

void ensure_writable(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    const fs::path probe = dir / ".write_probe";
    std::ofstream out(probe);
    out << "x";
    out.close();
    if (ec || !out || !fs::exists(probe)) throw FatalIoError("output directory not writable: " + dir.string());
    fs::remove(probe, ec);
}

class RunLog {
public:
    explicit RunLog(const fs::path& path) : out_(path, std::ios::app) {}
    void line(const std::string& s) {
        std::lock_guard lock(mu_);
        out_ << s << '\n';
        out_.flush();
    }

private:
    std::mutex mu_;
    std::ofstream out_;
};

Bytes acquire(const CorpusEntry& e, const AnalysisConfig& cfg) {
    if (e.source == EntrySource::remote) {
        if (cfg.fetch_endpoint.empty()) throw Error("remote entry but no fetch endpoint configured");
        return fetch_by_hash(e.sha256, cfg.fetch_endpoint, cfg.api_key);
    }
    return read_file(e.path.string());
}

}  // namespace

RunSummary run_corpus(const std::vector<CorpusEntry>& entries, const AnalysisConfig& config,
                      const AnalysisResources& res) {
    config.validate();
    ensure_writable(config.output_dir);
    RunLog log(config.output_dir / "run.log");
    const AttributionPolicy policy{config.proguard_as_main};

    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::mutex mu;
    RunSummary summary;
    std::exception_ptr fatal;

    auto worker = [&] {
        while (!abort) {
            const std::size_t i = next++;
            if (i >= entries.size()) return;
            const CorpusEntry& e = entries[i];
            try {
                if (!config.force && !e.sha256.empty() && has_ok_report(config.output_dir / (e.sha256 + ".json"))) {
                    std::lock_guard lock(mu);
                    ++summary.skipped;
                    continue;
                }
                AppReport r;
                try {
                    const Bytes bytes = acquire(e, config);
                    const auto deadline = Deadline::after(std::chrono::seconds(config.timeout_seconds));
                    r = analyze_apk(bytes, e, res, policy, deadline);
                } catch (const std::exception& ex) {
                    r.sha256 = e.sha256;
                    r.expected_package_name = e.expected_package_name;
                    r.status = AppStatus::error;
                    r.message = ex.what();
                }
                if (r.status != AppStatus::ok && !e.sha256.empty()) r.sha256 = e.sha256;
                write_report(config.output_dir, r);
                log.line(r.sha256 + "\t" + std::string(to_string(r.status)) + "\t" + r.message);
                std::lock_guard lock(mu);
                ++summary.analyzed;
                if (r.status == AppStatus::ok) ++summary.ok;
                else if (r.status == AppStatus::timeout) ++summary.timeout;
                else ++summary.error;
            } catch (...) {
                std::lock_guard lock(mu);
                if (!fatal) fatal = std::current_exception();
                abort = true;
            }
        }
    };

    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(config.worker_count),
                                                std::max<std::size_t>(entries.size(), 1));
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (fatal) std::rethrow_exception(fatal);

    nlohmann::ordered_json j{{"analyzed", summary.analyzed},
                             {"ok", summary.ok},
                             {"timeout", summary.timeout},
                             {"error", summary.error},
                             {"skipped", summary.skipped}};
    std::ofstream(config.output_dir / "run_summary.json") << j.dump(1) << '\n';
    return summary;
}

}  // namespace analytika
