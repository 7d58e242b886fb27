#include "analytika/report.hpp"

#include "analytika/error.hpp"

namespace analytika {

std::string_view to_string(AppStatus s) {
    switch (s) {
    case AppStatus::ok: return "ok";
    case AppStatus::timeout: return "timeout";
    case AppStatus::error: return "error";
    }
    return "error";
}

std::string_view to_string(PackageCheck c) {
    switch (c) {
    case PackageCheck::unchecked: return "unchecked";
    case PackageCheck::exact: return "exact";
    case PackageCheck::shared_prefix: return "shared_prefix";
    case PackageCheck::mismatch: return "mismatch";
    }
    return "unchecked";
}

namespace {

AppStatus status_from_string(std::string_view s) {
    if (s == "ok") return AppStatus::ok;
    if (s == "timeout") return AppStatus::timeout;
    if (s == "error") return AppStatus::error;
    throw Error("unknown status '" + std::string(s) + "'");
}

PackageCheck check_from_string(std::string_view s) {
    if (s == "exact") return PackageCheck::exact;
    if (s == "shared_prefix") return PackageCheck::shared_prefix;
    if (s == "mismatch") return PackageCheck::mismatch;
    return PackageCheck::unchecked;
}

PatternKind kind_from_string(std::string_view s) {
    if (s == "tee_api") return PatternKind::tee_api;
    if (s == "crypto_software") return PatternKind::crypto_software;
    throw Error("unknown match kind '" + std::string(s) + "'");
}

}  // namespace

PackageCheck compare_package_names(const std::string& actual, const std::string& expected) {
    if (expected.empty()) return PackageCheck::unchecked;
    if (actual == expected) return PackageCheck::exact;
    const PackageName a = PackageName::parse(actual), e = PackageName::parse(expected);
    if (!a.empty() && !e.empty() && (a.starts_with(e) || e.starts_with(a))) return PackageCheck::shared_prefix;
    return PackageCheck::mismatch;
}

std::map<std::string, bool> AppReport::detector_summary() const {
    std::map<std::string, bool> out;
    for (std::string_view d : kTeeDetectors) out[std::string(d)] = false;
    for (const auto& m : matches)
        if (m.kind == PatternKind::tee_api) out[m.detector_id] = true;
    return out;
}

namespace {

nlohmann::ordered_json deterministic_json(const AppReport& r) {
    using nlohmann::ordered_json;
    ordered_json meta;
    meta["package"] = r.package_name;
    meta["expected_package"] = r.expected_package_name;
    meta["package_check"] = to_string(r.package_check);
    meta["sha256"] = r.sha256;
    meta["status"] = to_string(r.status);
    meta["message"] = r.message;
    meta["permissions"] = r.permissions;
    meta["min_sdk"] = r.min_sdk ? ordered_json(*r.min_sdk) : ordered_json(nullptr);
    meta["dex_files"] = r.dex_files;
    ordered_json det = ordered_json::object();
    for (const auto& [k, v] : r.detector_summary()) det[k] = v;
    meta["detectors"] = det;
    meta["warnings"] = r.warnings;

    ordered_json matches = ordered_json::array();
    for (const auto& m : r.matches) {
        matches.push_back({{"detector_id", m.detector_id},
                           {"kind", to_string(m.kind)},
                           {"target_class", m.target_class},
                           {"target_method", m.target_method},
                           {"caller_class", m.caller_class},
                           {"dex_file", m.dex_file},
                           {"code_offset", m.code_offset},
                           {"location", to_string(m.location)},
                           {"attributed_package", m.attributed_package}});
    }
    ordered_json native = ordered_json::array();
    for (const auto& h : r.native_lib_hits) native.push_back({{"library", h.library}, {"filename", h.filename}});

    ordered_json j;
    j["meta"] = std::move(meta);
    j["matches"] = std::move(matches);
    j["native_libs"] = std::move(native);
    j["crypto_libs"] = r.crypto_software_libs;
    return j;
}

}  // namespace

nlohmann::ordered_json report_to_json(const AppReport& r) {
    nlohmann::ordered_json j = deterministic_json(r);
    nlohmann::ordered_json stages = nlohmann::ordered_json::object();
    for (const auto& [name, secs] : r.timing.stages) stages[name] = secs;
    j["timing"] = {{"total", r.timing.total}, {"stages", std::move(stages)}};
    return j;
}

std::string deterministic_section(const AppReport& r) { return deterministic_json(r).dump(1); }

AppReport report_from_json(const nlohmann::json& j) {
    try {
        AppReport r;
        const auto& meta = j.at("meta");
        r.package_name = meta.at("package").get<std::string>();
        r.expected_package_name = meta.value("expected_package", "");
        r.package_check = check_from_string(meta.value("package_check", "unchecked"));
        r.sha256 = meta.at("sha256").get<std::string>();
        r.status = status_from_string(meta.at("status").get<std::string>());
        r.message = meta.value("message", "");
        if (meta.contains("permissions")) r.permissions = meta["permissions"].get<std::vector<std::string>>();
        if (meta.contains("min_sdk") && !meta["min_sdk"].is_null()) r.min_sdk = meta["min_sdk"].get<int>();
        if (meta.contains("dex_files")) r.dex_files = meta["dex_files"].get<std::vector<std::string>>();
        if (meta.contains("warnings")) r.warnings = meta["warnings"].get<std::vector<std::string>>();
        for (const auto& m : j.at("matches")) {
            MatchRecord rec;
            rec.detector_id = m.at("detector_id").get<std::string>();
            rec.kind = kind_from_string(m.value("kind", "tee_api"));
            rec.target_class = m.value("target_class", "");
            rec.target_method = m.value("target_method", "");
            rec.caller_class = m.value("caller_class", "");
            rec.dex_file = m.value("dex_file", "");
            rec.code_offset = m.value("code_offset", 0u);
            rec.location = location_from_string(m.at("location").get<std::string>());
            rec.attributed_package = m.value("attributed_package", "");
            r.matches.push_back(std::move(rec));
        }
        for (const auto& h : j.at("native_libs"))
            r.native_lib_hits.push_back({h.at("library").get<std::string>(), h.at("filename").get<std::string>()});
        r.crypto_software_libs = j.at("crypto_libs").get<std::vector<std::string>>();
        if (j.contains("timing")) {
            r.timing.total = j["timing"].value("total", 0.0);
            if (j["timing"].contains("stages"))
                for (const auto& [k, v] : j["timing"]["stages"].items()) r.timing.stages.emplace_back(k, v.get<double>());
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("invalid report json: ") + e.what());
    }
}

}  // namespace analytika
