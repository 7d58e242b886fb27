#include "analytika/attribution.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "analytika/error.hpp"
#include "text_util.hpp"

namespace analytika {

PackageName PackageName::parse(std::string_view dotted) {
    PackageName p;
    if (dotted.empty()) return p;
    std::size_t begin = 0;
    while (true) {
        const std::size_t dot = dotted.find('.', begin);
        p.segments.emplace_back(dotted.substr(begin, dot - begin));
        if (dot == std::string_view::npos) break;
        begin = dot + 1;
    }
    return p;
}

std::string PackageName::str() const {
    std::string out;
    for (const auto& s : segments) {
        if (!out.empty()) out += '.';
        out += s;
    }
    return out;
}

bool PackageName::starts_with(const PackageName& prefix) const {
    return prefix.segments.size() <= segments.size() &&
           std::equal(prefix.segments.begin(), prefix.segments.end(), segments.begin());
}

std::string_view to_string(LocationClass c) {
    switch (c) {
    case LocationClass::inmain: return "inmain";
    case LocationClass::inlib: return "inlib";
    case LocationClass::obfuscated: return "obfuscated";
    }
    return "obfuscated";
}

LocationClass location_from_string(std::string_view s) {
    if (s == "inmain") return LocationClass::inmain;
    if (s == "inlib") return LocationClass::inlib;
    if (s == "obfuscated") return LocationClass::obfuscated;
    throw Error("unknown location class '" + std::string(s) + "'");
}

PackageName package_of_class(std::string_view class_name) {
    PackageName p = PackageName::parse(class_name);
    if (!p.segments.empty()) p.segments.pop_back();
    return p;
}

bool is_valid_application_id(const PackageName& pkg) {
    if (pkg.segments.size() < 2) return false;
    auto letter = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); };
    auto digit = [](char c) { return c >= '0' && c <= '9'; };
    return std::all_of(pkg.segments.begin(), pkg.segments.end(), [&](const std::string& s) {
        return !s.empty() && letter(s.front()) &&
               std::all_of(s.begin(), s.end(), [&](char c) { return letter(c) || digit(c) || c == '_'; });
    });
}

bool is_proguard_shape(const PackageName& pkg) {
    return !pkg.empty() && std::all_of(pkg.segments.begin(), pkg.segments.end(),
                                       [](const std::string& s) { return s.size() <= 2; });
}

LocationClass classify_location(const PackageName& app_pkg, const PackageName& match_pkg,
                                const AttributionPolicy& policy) {
    if (!app_pkg.empty() && match_pkg.starts_with(app_pkg)) return LocationClass::inmain;
    if (match_pkg.empty()) return LocationClass::obfuscated;
    if (is_proguard_shape(match_pkg))
        return policy.proguard_as_main ? LocationClass::inmain : LocationClass::obfuscated;
    if (!is_valid_application_id(match_pkg)) return LocationClass::obfuscated;
    return LocationClass::inlib;
}

std::string normalize_library(const PackageName& match_pkg, const std::vector<PackageName>& known_prefixes) {
    const PackageName* best = nullptr;
    for (const auto& k : known_prefixes)
        if (!k.empty() && match_pkg.starts_with(k) && (!best || k.segments.size() > best->segments.size()))
            best = &k;
    if (best) return best->str();
    PackageName cut;
    const std::size_t n = std::min<std::size_t>(4, match_pkg.segments.size());
    cut.segments.assign(match_pkg.segments.begin(), match_pkg.segments.begin() + n);
    return cut.str();
}

std::vector<PackageName> parse_known_prefixes(std::string_view text) {
    std::vector<PackageName> out;
    for (std::string_view line : detail::split_lines(text)) {
        line = detail::trim(line);
        if (line.empty() || line.front() == '#') continue;
        PackageName p = PackageName::parse(line);
        if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(std::move(p));
    }
    return out;
}

std::vector<PackageName> load_known_prefixes(const std::filesystem::path& path) {
    return parse_known_prefixes(detail::read_text(path));
}

}  // namespace analytika
