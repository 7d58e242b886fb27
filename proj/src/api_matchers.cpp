#include "analytika/api_matchers.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "analytika/error.hpp"
#include "text_util.hpp"

namespace analytika {
namespace {

void sort_records(std::vector<MatchRecord>& records) {
    std::stable_sort(records.begin(), records.end(), [](const MatchRecord& a, const MatchRecord& b) {
        return std::tie(a.dex_file, a.code_offset, a.detector_id, a.target_class, a.target_method) <
               std::tie(b.dex_file, b.code_offset, b.detector_id, b.target_class, b.target_method);
    });
}

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

}  // namespace

std::string_view to_string(PatternKind k) {
    return k == PatternKind::tee_api ? "tee_api" : "crypto_software";
}

bool is_tee_detector(std::string_view id) {
    return std::find(std::begin(kTeeDetectors), std::end(kTeeDetectors), id) != std::end(kTeeDetectors);
}

std::vector<PatternSet> parse_patterns(std::string_view text, std::string_view source) {
    std::vector<PatternSet> sets;
    std::set<std::tuple<std::string, std::string, std::string, std::string>> seen;
    const std::string src(source);
    std::size_t lineno = 0;
    for (std::string_view line : detail::split_lines(text)) {
        ++lineno;
        line = detail::trim(line);
        if (line.empty() || line.front() == '#') continue;
        auto cols = detail::split(line, ',');
        if (cols.size() != 4) throw PatternParseError(src, lineno, "expected 4 columns, got " + std::to_string(cols.size()));
        for (auto& c : cols) {
            c = detail::trim(c);
            if (c.empty()) throw PatternParseError(src, lineno, "empty pattern field");
        }
        PatternKind kind;
        if (cols[1] == "tee_api") kind = PatternKind::tee_api;
        else if (cols[1] == "crypto_software") kind = PatternKind::crypto_software;
        else throw PatternParseError(src, lineno, "unknown kind '" + std::string(cols[1]) + "'");
        if (kind == PatternKind::tee_api && !is_tee_detector(cols[0]))
            throw PatternParseError(src, lineno, "unknown TEE detector '" + std::string(cols[0]) + "'");
        if (kind == PatternKind::crypto_software && cols[3] != "*")
            throw PatternParseError(src, lineno, "crypto_software rows match by prefix; method must be '*'");

        if (!seen.emplace(cols[0], cols[1], cols[2], cols[3]).second) continue;

        auto it = std::find_if(sets.begin(), sets.end(), [&](const PatternSet& s) {
            return s.detector_id == cols[0] && s.kind == kind;
        });
        if (it == sets.end()) {
            sets.push_back(PatternSet{std::string(cols[0]), kind, {}, {}});
            it = std::prev(sets.end());
        }
        const std::string cls(cols[2]);
        if (std::find(it->class_prefixes.begin(), it->class_prefixes.end(), cls) == it->class_prefixes.end())
            it->class_prefixes.push_back(cls);
        if (kind == PatternKind::tee_api) it->method_patterns.push_back({cls, std::string(cols[3])});
    }
    return sets;
}

std::vector<PatternSet> load_pattern_file(const std::filesystem::path& path) {
    return parse_patterns(detail::read_text(path), path.string());
}

std::vector<NativeLibPattern> parse_native_patterns(std::string_view text, std::string_view source) {
    std::vector<NativeLibPattern> out;
    const std::string src(source);
    std::size_t lineno = 0;
    for (std::string_view line : detail::split_lines(text)) {
        ++lineno;
        line = detail::trim(line);
        if (line.empty() || line.front() == '#') continue;
        auto cols = detail::split(line, ',');
        if (cols.size() != 2) throw PatternParseError(src, lineno, "expected 2 columns, got " + std::to_string(cols.size()));
        const std::string library(detail::trim(cols[0]));
        const std::string stem(detail::trim(cols[1]));
        if (library.empty() || stem.empty()) throw PatternParseError(src, lineno, "empty pattern field");
        if (stem.find('/') != std::string::npos || stem.find('\\') != std::string::npos)
            throw PatternParseError(src, lineno, "stem must not contain path separators");
        bool dup = std::any_of(out.begin(), out.end(), [&](const NativeLibPattern& p) {
            return p.library == library && p.stem == stem;
        });
        if (!dup) out.push_back({library, stem});
    }
    return out;
}

std::vector<NativeLibPattern> load_native_pattern_file(const std::filesystem::path& path) {
    return parse_native_patterns(detail::read_text(path), path.string());
}

// ---------------------------------------------------------------------------

TeeMatcher::TeeMatcher(std::span<const PatternSet> sets) {
    for (const auto& s : sets) {
        if (s.kind != PatternKind::tee_api) continue;
        std::size_t slot = std::find(detector_ids_.begin(), detector_ids_.end(), s.detector_id) - detector_ids_.begin();
        if (slot == detector_ids_.size()) detector_ids_.push_back(s.detector_id);
        for (const auto& mp : s.method_patterns) classes_[mp.class_name].methods.emplace_back(slot, mp.method);
    }
}

std::vector<std::string_view> TeeMatcher::detectors_for(std::string_view cls, std::string_view method) const {
    std::vector<bool> hit(detector_ids_.size(), false);
    auto consider = [&](std::string_view candidate) {
        auto it = classes_.find(std::string(candidate));
        if (it == classes_.end()) return;
        for (const auto& [slot, m] : it->second.methods)
            if (m == "*" || m == method) hit[slot] = true;
    };
    consider(cls);
    // Nested classes match the patterns of each enclosing class.
    for (std::size_t pos = cls.find('$'); pos != std::string_view::npos; pos = cls.find('$', pos + 1))
        consider(cls.substr(0, pos));
    std::vector<std::string_view> out;
    for (std::size_t i = 0; i < hit.size(); ++i)
        if (hit[i]) out.push_back(detector_ids_[i]);
    return out;
}

std::vector<MatchRecord> TeeMatcher::match(const DexUnit& unit) const {
    std::vector<std::vector<std::string_view>> by_method(unit.methods.size());
    std::vector<bool> resolved(unit.methods.size(), false);
    std::vector<MatchRecord> out;
    for (const auto& inv : unit.invocations) {
        if (!resolved[inv.method_index]) {
            const MethodRef& m = unit.methods[inv.method_index];
            by_method[inv.method_index] = detectors_for(m.defining_class, m.method_name);
            resolved[inv.method_index] = true;
        }
        for (std::string_view det : by_method[inv.method_index]) {
            const MethodRef& m = unit.target(inv);
            MatchRecord r;
            r.detector_id = det;
            r.kind = PatternKind::tee_api;
            r.target_class = m.defining_class;
            r.target_method = m.method_name;
            r.caller_class = unit.caller_class(inv);
            r.dex_file = unit.entry_name;
            r.code_offset = inv.code_offset;
            out.push_back(std::move(r));
        }
    }
    sort_records(out);
    return out;
}

std::vector<MatchRecord> match_tee_apis(const DexUnit& unit, std::span<const PatternSet> sets) {
    return TeeMatcher(sets).match(unit);
}

// ---------------------------------------------------------------------------

CryptoMatcher::CryptoMatcher(std::span<const PatternSet> sets) {
    for (const auto& s : sets) {
        if (s.kind != PatternKind::crypto_software) continue;
        std::size_t slot = std::find(libraries_.begin(), libraries_.end(), s.detector_id) - libraries_.begin();
        if (slot == libraries_.size()) libraries_.push_back(s.detector_id);
        for (const auto& p : s.class_prefixes) prefixes_.emplace_back(p, slot);
    }
}

std::vector<std::string_view> CryptoMatcher::libraries_for(std::string_view cls) const {
    std::vector<bool> hit(libraries_.size(), false);
    for (const auto& [prefix, slot] : prefixes_) {
        if (!cls.starts_with(prefix)) continue;
        if (cls.size() == prefix.size() || cls[prefix.size()] == '.' || cls[prefix.size()] == '$') hit[slot] = true;
    }
    std::vector<std::string_view> out;
    for (std::size_t i = 0; i < hit.size(); ++i)
        if (hit[i]) out.push_back(libraries_[i]);
    return out;
}

std::vector<MatchRecord> CryptoMatcher::match(const DexUnit& unit) const {
    std::vector<MatchRecord> out;
    if (prefixes_.empty()) return out;
    std::unordered_map<std::string_view, std::vector<std::string_view>> by_class;
    std::vector<const std::vector<std::string_view>*> libs(unit.methods.size());
    for (std::size_t i = 0; i < unit.methods.size(); ++i) {
        const std::string& cls = unit.methods[i].defining_class;
        auto it = by_class.find(cls);
        if (it == by_class.end()) it = by_class.emplace(cls, libraries_for(cls)).first;
        libs[i] = &it->second;
    }

    auto make = [&](std::string_view lib, const MethodRef& m) {
        MatchRecord r;
        r.detector_id = lib;
        r.kind = PatternKind::crypto_software;
        r.target_class = m.defining_class;
        r.target_method = m.method_name;
        r.dex_file = unit.entry_name;
        return r;
    };
    std::vector<bool> invoked(unit.methods.size(), false);
    for (const auto& inv : unit.invocations) {
        if (libs[inv.method_index]->empty()) continue;
        invoked[inv.method_index] = true;
        for (std::string_view lib : *libs[inv.method_index]) {
            MatchRecord r = make(lib, unit.target(inv));
            r.caller_class = unit.caller_class(inv);
            r.code_offset = inv.code_offset;
            out.push_back(std::move(r));
        }
    }
    for (std::size_t i = 0; i < unit.methods.size(); ++i) {
        if (invoked[i]) continue;
        for (std::string_view lib : *libs[i]) out.push_back(make(lib, unit.methods[i]));
    }
    sort_records(out);
    return out;
}

std::vector<MatchRecord> match_crypto_packages(const DexUnit& unit, std::span<const PatternSet> sets) {
    return CryptoMatcher(sets).match(unit);
}

// ---------------------------------------------------------------------------

bool native_name_matches(std::string_view filename, std::string_view stem) {
    const std::size_t slash = filename.find_last_of('/');
    std::string base(slash == std::string_view::npos ? filename : filename.substr(slash + 1));
    std::string low_stem(stem);
    std::transform(base.begin(), base.end(), base.begin(), lower);
    std::transform(low_stem.begin(), low_stem.end(), low_stem.begin(), lower);
    if (low_stem.empty() || !base.starts_with(low_stem)) return false;
    const std::string_view rest = std::string_view(base).substr(low_stem.size());
    const bool boundary = rest.empty() || rest.starts_with(".so") || rest.front() == '_' || rest.front() == '-' ||
                          rest.front() == '.';
    return boundary && rest.find(".so") != std::string_view::npos;
}

std::vector<NativeLibHit> match_native_libs(std::span<const std::string> filenames,
                                            std::span<const NativeLibPattern> patterns) {
    std::vector<NativeLibHit> out;
    for (const auto& f : filenames)
        for (const auto& p : patterns)
            if (native_name_matches(f, p.stem)) out.push_back({p.library, f});
    std::sort(out.begin(), out.end(), [](const NativeLibHit& a, const NativeLibHit& b) {
        return std::tie(a.filename, a.library) < std::tie(b.filename, b.library);
    });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace analytika
