#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "analytika/attribution.hpp"
#include "analytika/dex.hpp"

namespace analytika {

enum class PatternKind { tee_api, crypto_software };

std::string_view to_string(PatternKind k);

// The four TEE-backed API detectors.
inline constexpr std::string_view kKeyStore = "keystore";
inline constexpr std::string_view kDrm = "drm";
inline constexpr std::string_view kBiometrics = "biometrics";
inline constexpr std::string_view kProtectedConfirmation = "protected_confirmation";
inline constexpr std::string_view kTeeDetectors[] = {kKeyStore, kDrm, kBiometrics, kProtectedConfirmation};

bool is_tee_detector(std::string_view id);

struct MethodPattern {
    std::string class_name;
    std::string method;  // "*" matches any method

    bool operator==(const MethodPattern&) const = default;
};

struct PatternSet {
    std::string detector_id;
    PatternKind kind = PatternKind::tee_api;
    std::vector<std::string> class_prefixes;
    std::vector<MethodPattern> method_patterns;  // empty for crypto_software
};

struct NativeLibPattern {
    std::string library;
    std::string stem;
};

struct MatchRecord {
    std::string detector_id;
    PatternKind kind = PatternKind::tee_api;
    std::string target_class;
    std::string target_method;
    std::string caller_class;  // empty for crypto references without an invoke
    std::string dex_file;
    std::uint32_t code_offset = 0;
    LocationClass location = LocationClass::obfuscated;
    std::string attributed_package;

    bool operator==(const MatchRecord&) const = default;
};

struct NativeLibHit {
    std::string library;
    std::string filename;

    bool operator==(const NativeLibHit&) const = default;
};

// Pattern CSV: `detector_id,kind,class_or_prefix,method_or_*`, no header,
// '#' comment lines. Duplicate rows are dropped. Throws PatternParseError.
std::vector<PatternSet> parse_patterns(std::string_view text, std::string_view source = "<memory>");
std::vector<PatternSet> load_pattern_file(const std::filesystem::path& path);

// Native pattern CSV: `library,stem`.
std::vector<NativeLibPattern> parse_native_patterns(std::string_view text, std::string_view source = "<memory>");
std::vector<NativeLibPattern> load_native_pattern_file(const std::filesystem::path& path);

// Invocation-level TEE API matcher. Built once, shared read-only.
class TeeMatcher {
public:
    explicit TeeMatcher(std::span<const PatternSet> sets);

    // Detector ids whose patterns accept this target, in pattern-file order.
    std::vector<std::string_view> detectors_for(std::string_view cls, std::string_view method) const;

    // One record per (invocation, detector) whose target class equals a
    // pattern class (or is nested in it) and whose method is listed. Plain
    // class references never match. Sorted by dex_file, code_offset.
    std::vector<MatchRecord> match(const DexUnit& unit) const;

private:
    struct ClassEntry {
        std::vector<std::pair<std::size_t, std::string>> methods;  // detector slot, method or "*"
    };
    std::vector<std::string> detector_ids_;
    std::unordered_map<std::string, ClassEntry> classes_;
};

std::vector<MatchRecord> match_tee_apis(const DexUnit& unit, std::span<const PatternSet> sets);

// Package-prefix matcher for software crypto libraries. Prefixes end at a
// package boundary ('.' / '$' / end of name).
class CryptoMatcher {
public:
    explicit CryptoMatcher(std::span<const PatternSet> sets);

    std::vector<std::string_view> libraries_for(std::string_view cls) const;

    // One record per invocation of a matching method_ids entry; a matching
    // entry that is never invoked yields one record with an empty caller.
    std::vector<MatchRecord> match(const DexUnit& unit) const;

private:
    std::vector<std::string> libraries_;
    std::vector<std::pair<std::string, std::size_t>> prefixes_;  // prefix, library slot
};

std::vector<MatchRecord> match_crypto_packages(const DexUnit& unit, std::span<const PatternSet> sets);

// True iff the file's base name is `stem` followed by '_', '-' or '.', with
// ".so" somewhere after the stem; case-insensitive.
bool native_name_matches(std::string_view filename, std::string_view stem);

std::vector<NativeLibHit> match_native_libs(std::span<const std::string> filenames,
                                            std::span<const NativeLibPattern> patterns);

}  // namespace analytika
