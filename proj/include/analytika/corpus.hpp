#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace analytika {

enum class EntrySource { local_path, remote };

// One row of the corpus metadata CSV:
//   sha256,package_name,category,downloads,last_update,path_or_remote
struct CorpusEntry {
    std::string sha256;  // lowercase hex; empty only for ad-hoc single-file runs
    std::string expected_package_name;
    std::string category;
    std::uint64_t downloads = 0;
    std::optional<std::chrono::year_month_day> last_update;
    EntrySource source = EntrySource::local_path;
    std::filesystem::path path;  // absolute or relative to the CSV's directory
};

bool is_sha256_hex(std::string_view s);

// "YYYY-MM-DD"; std::nullopt when malformed.
std::optional<std::chrono::year_month_day> parse_date(std::string_view s);
std::string format_date(const std::chrono::year_month_day& d);

// Throws CorpusError{ParseError, DuplicateSha256}. A first row equal to the
// column list is treated as a header. Relative paths are resolved against
// `base_dir`.
std::vector<CorpusEntry> parse_corpus_csv(std::string_view text, const std::filesystem::path& base_dir = {});
std::vector<CorpusEntry> load_corpus_csv(const std::filesystem::path& path);

inline constexpr std::string_view kCorpusHeader = "sha256,package_name,category,downloads,last_update,path_or_remote";

}  // namespace analytika
