#include "analytika/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <set>

#include "analytika/error.hpp"
#include "text_util.hpp"

namespace analytika {

bool is_sha256_hex(std::string_view s) {
    return s.size() == 64 && std::all_of(s.begin(), s.end(), [](char c) {
               return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
           });
}

std::optional<std::chrono::year_month_day> parse_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    auto num = [&](std::size_t off, std::size_t len) -> std::optional<int> {
        int v = 0;
        auto [p, ec] = std::from_chars(s.data() + off, s.data() + off + len, v);
        if (ec != std::errc{} || p != s.data() + off + len) return std::nullopt;
        return v;
    };
    auto y = num(0, 4), m = num(5, 2), d = num(8, 2);
    if (!y || !m || !d) return std::nullopt;
    std::chrono::year_month_day ymd{std::chrono::year(*y), std::chrono::month(static_cast<unsigned>(*m)),
                                    std::chrono::day(static_cast<unsigned>(*d))};
    if (!ymd.ok()) return std::nullopt;
    return ymd;
}

std::string format_date(const std::chrono::year_month_day& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                  static_cast<unsigned>(d.day()));
    return buf;
}

std::vector<CorpusEntry> parse_corpus_csv(std::string_view text, const std::filesystem::path& base_dir) {
    std::vector<CorpusEntry> out;
    std::set<std::string> seen;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& why) {
        throw CorpusError(CorpusErrc::ParseError, "corpus line " + std::to_string(lineno) + ": " + why);
    };
    for (std::string_view raw : detail::split_lines(text)) {
        ++lineno;
        std::string_view line = detail::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (lineno == 1 && line == kCorpusHeader) continue;
        auto cols = detail::parse_csv_line(line);
        if (cols.size() != 6) fail("expected 6 columns, got " + std::to_string(cols.size()));
        for (auto& c : cols) c = std::string(detail::trim(c));

        CorpusEntry e;
        if (!is_sha256_hex(cols[0])) fail("sha256 must be 64 hex characters");
        e.sha256 = cols[0];
        std::transform(e.sha256.begin(), e.sha256.end(), e.sha256.begin(),
                       [](char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); });
        if (!seen.insert(e.sha256).second)
            throw CorpusError(CorpusErrc::DuplicateSha256, "duplicate sha256 " + e.sha256);
        e.expected_package_name = cols[1];
        e.category = cols[2];
        if (!cols[3].empty()) {
            auto [p, ec] = std::from_chars(cols[3].data(), cols[3].data() + cols[3].size(), e.downloads);
            if (ec != std::errc{} || p != cols[3].data() + cols[3].size()) fail("downloads must be an integer");
        }
        if (!cols[4].empty()) {
            e.last_update = parse_date(cols[4]);
            if (!e.last_update) fail("last_update must be YYYY-MM-DD");
        }
        if (cols[5].empty() || cols[5] == "remote") {
            e.source = EntrySource::remote;
        } else {
            e.source = EntrySource::local_path;
            std::filesystem::path p(cols[5]);
            e.path = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
        }
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<CorpusEntry> load_corpus_csv(const std::filesystem::path& path) {
    std::string text;
    try {
        text = detail::read_text(path);
    } catch (const Error& e) {
        throw CorpusError(CorpusErrc::IoError, e.what());
    }
    return parse_corpus_csv(text, path.parent_path());
}

}  // namespace analytika
