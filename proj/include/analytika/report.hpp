#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "analytika/api_matchers.hpp"

namespace analytika {

enum class AppStatus { ok, timeout, error };

// Manifest package versus the corpus-declared one.
enum class PackageCheck { unchecked, exact, shared_prefix, mismatch };

std::string_view to_string(AppStatus s);
std::string_view to_string(PackageCheck c);
PackageCheck compare_package_names(const std::string& actual, const std::string& expected);

struct StageTiming {
    double total = 0;
    std::vector<std::pair<std::string, double>> stages;  // seconds, in execution order
};

struct AppReport {
    std::string package_name;
    std::string expected_package_name;
    PackageCheck package_check = PackageCheck::unchecked;
    std::string sha256;
    AppStatus status = AppStatus::ok;
    std::string message;
    std::vector<std::string> permissions;
    std::optional<int> min_sdk;
    std::vector<std::string> dex_files;
    std::vector<std::string> warnings;

    std::vector<MatchRecord> matches;  // TEE and crypto_software records
    std::vector<NativeLibHit> native_lib_hits;
    std::vector<std::string> crypto_software_libs;  // sorted, unique
    StageTiming timing;

    // Detector id -> at least one TEE match for it.
    std::map<std::string, bool> detector_summary() const;
};

// Top-level keys: meta, matches, native_libs, crypto_libs, timing. Every key
// but `timing` is deterministic for identical input.
nlohmann::ordered_json report_to_json(const AppReport& r);
AppReport report_from_json(const nlohmann::json& j);

// Serialization of everything except `timing`; byte-comparable across runs.
std::string deterministic_section(const AppReport& r);

}  // namespace analytika
