#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace analytika {

struct PackageName {
    std::vector<std::string> segments;

    static PackageName parse(std::string_view dotted);
    std::string str() const;
    bool empty() const { return segments.empty(); }
    // Whole-segment prefix test: com.package.xyz starts with com.package,
    // com.packageX does not.
    bool starts_with(const PackageName& prefix) const;

    bool operator==(const PackageName&) const = default;
};

enum class LocationClass { inmain, inlib, obfuscated };

std::string_view to_string(LocationClass c);
LocationClass location_from_string(std::string_view s);

// All segments but the trailing simple class name. "a.b.C$D" -> a.b.
PackageName package_of_class(std::string_view class_name);

// Android application-ID rules: at least two segments, each starting with an
// ASCII letter and consisting of letters, digits and underscores.
bool is_valid_application_id(const PackageName& pkg);

// Shrinker-style package: non-empty with every segment at most two chars.
bool is_proguard_shape(const PackageName& pkg);

struct AttributionPolicy {
    // Shrinker-shaped packages count as main-app code; when false they
    // join the obfuscated group.
    bool proguard_as_main = true;
};

// 1. same package as the app, or below it      -> inmain
// 2. empty package                             -> obfuscated
// 3. shrinker shape                            -> inmain (policy) / obfuscated
// 4. invalid application id                    -> obfuscated
// 5. anything else                             -> inlib
LocationClass classify_location(const PackageName& app_pkg, const PackageName& match_pkg,
                                const AttributionPolicy& policy = {});

// Grouping key for library tables: the longest known prefix the package
// starts with, otherwise its first four segments.
std::string normalize_library(const PackageName& match_pkg, const std::vector<PackageName>& known_prefixes);

// One dotted prefix per line; '#' starts a comment line.
std::vector<PackageName> parse_known_prefixes(std::string_view text);
std::vector<PackageName> load_known_prefixes(const std::filesystem::path& path);

}  // namespace analytika
