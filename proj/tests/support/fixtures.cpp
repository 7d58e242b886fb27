#include "fixtures.hpp"

#include <zlib.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <sys/wait.h>
#include <unistd.h>

#include "analytika/apk_container.hpp"
#include "analytika/pipeline.hpp"

namespace analytika::testing {

namespace {

void put16(Bytes& b, std::uint16_t v) {
    b.push_back(v & 0xFF);
    b.push_back(v >> 8);
}
void put32(Bytes& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xFF);
}
void append(Bytes& b, ByteView v) { b.insert(b.end(), v.begin(), v.end()); }

Bytes raw_deflate(ByteView in) {
    z_stream zs{};
    if (deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY) != Z_OK)
        throw std::runtime_error("deflateInit2");
    Bytes out(deflateBound(&zs, in.size()) + 16);
    zs.next_in = const_cast<Bytef*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    if (deflate(&zs, Z_FINISH) != Z_STREAM_END) throw std::runtime_error("deflate");
    out.resize(zs.total_out);
    deflateEnd(&zs);
    return out;
}

constexpr std::uint32_t kNone = 0xFFFFFFFF;
constexpr const char* kAndroidNs = "http://schemas.android.com/apk/res/android";

const std::map<std::string, std::uint32_t>& attribute_ids() {
    static const std::map<std::string, std::uint32_t> ids{
        {"name", 0x01010003}, {"minSdkVersion", 0x0101020c}, {"targetSdkVersion", 0x01010270},
        {"versionCode", 0x0101021b}, {"versionName", 0x0101021c}, {"label", 0x01010001}};
    return ids;
}

class AxmlWriter {
public:
    explicit AxmlWriter(const AxmlNode& root) {
        // Resource-mapped attribute names first so the map covers them.
        collect_attr_names(root);
        for (const auto& n : mapped_) intern(n);
        intern("android");
        intern(kAndroidNs);
        collect_rest(root);
    }

    Bytes encode(const AxmlNode& root) {
        Bytes body;
        append(body, string_pool());
        append(body, resource_map());
        append(body, ns_chunk(0x0100));
        element(body, root);
        append(body, ns_chunk(0x0101));
        Bytes out;
        put16(out, 0x0003);
        put16(out, 8);
        put32(out, static_cast<std::uint32_t>(8 + body.size()));
        append(out, body);
        return out;
    }

private:
    std::vector<std::string> strings_;
    std::map<std::string, std::uint32_t> index_;
    std::vector<std::string> mapped_;

    std::uint32_t intern(const std::string& s) {
        auto [it, fresh] = index_.emplace(s, static_cast<std::uint32_t>(strings_.size()));
        if (fresh) strings_.push_back(s);
        return it->second;
    }

    void collect_attr_names(const AxmlNode& n) {
        for (const auto& [k, _] : n.attributes)
            if (attribute_ids().contains(k) && std::find(mapped_.begin(), mapped_.end(), k) == mapped_.end())
                mapped_.push_back(k);
        for (const auto& c : n.children) collect_attr_names(c);
    }

    void collect_rest(const AxmlNode& n) {
        intern(n.name);
        for (const auto& [k, v] : n.attributes) {
            intern(k);
            if (const auto* s = std::get_if<std::string>(&v)) intern(*s);
        }
        for (const auto& c : n.children) collect_rest(c);
    }

    Bytes string_pool() const {
        Bytes offsets, data;
        for (const auto& s : strings_) {
            put32(offsets, static_cast<std::uint32_t>(data.size()));
            put16(data, static_cast<std::uint16_t>(s.size()));
            for (unsigned char c : s) put16(data, c);  // fixtures are ASCII
            put16(data, 0);
        }
        while (data.size() % 4) data.push_back(0);
        Bytes out;
        const std::uint32_t header = 28;
        put16(out, 0x0001);
        put16(out, header);
        put32(out, static_cast<std::uint32_t>(header + offsets.size() + data.size()));
        put32(out, static_cast<std::uint32_t>(strings_.size()));
        put32(out, 0);  // styles
        put32(out, 0);  // UTF-16
        put32(out, static_cast<std::uint32_t>(header + offsets.size()));
        put32(out, 0);
        append(out, offsets);
        append(out, data);
        return out;
    }

    Bytes resource_map() const {
        Bytes out;
        put16(out, 0x0180);
        put16(out, 8);
        put32(out, static_cast<std::uint32_t>(8 + 4 * mapped_.size()));
        for (const auto& n : mapped_) put32(out, attribute_ids().at(n));
        return out;
    }

    Bytes ns_chunk(std::uint16_t type) const {
        Bytes out;
        put16(out, type);
        put16(out, 16);
        put32(out, 24);
        put32(out, 1);
        put32(out, kNone);
        put32(out, index_.at("android"));
        put32(out, index_.at(kAndroidNs));
        return out;
    }

    void element(Bytes& out, const AxmlNode& n) {
        Bytes start;
        put16(start, 0x0102);
        put16(start, 16);
        put32(start, static_cast<std::uint32_t>(16 + 20 + 20 * n.attributes.size()));
        put32(start, 1);
        put32(start, kNone);
        put32(start, kNone);
        put32(start, index_.at(n.name));
        put16(start, 20);
        put16(start, 20);
        put16(start, static_cast<std::uint16_t>(n.attributes.size()));
        put16(start, 0);
        put16(start, 0);
        put16(start, 0);
        for (const auto& [k, v] : n.attributes) {
            put32(start, k == "package" ? kNone : index_.at(kAndroidNs));
            put32(start, index_.at(k));
            std::uint8_t type = 0;
            std::uint32_t data = 0, raw = kNone;
            if (const auto* s = std::get_if<std::string>(&v)) {
                type = 0x03;
                data = raw = index_.at(*s);
            } else if (const auto* i = std::get_if<std::int32_t>(&v)) {
                type = 0x10;
                data = static_cast<std::uint32_t>(*i);
            } else if (const auto* b = std::get_if<bool>(&v)) {
                type = 0x12;
                data = *b ? 0xFFFFFFFF : 0;
            } else {
                const auto& r = std::get<RawValue>(v);
                type = r.data_type;
                data = r.data;
            }
            put32(start, raw);
            put16(start, 8);
            start.push_back(0);
            start.push_back(type);
            put32(start, data);
        }
        append(out, start);
        for (const auto& c : n.children) element(out, c);
        put16(out, 0x0103);
        put16(out, 16);
        put32(out, 24);
        put32(out, 1);
        put32(out, kNone);
        put32(out, kNone);
        put32(out, index_.at(n.name));
    }
};

}  // namespace

Bytes build_zip(const std::vector<ZipEntrySpec>& entries) {
    Bytes out, central;
    for (const auto& e : entries) {
        const Bytes payload = e.deflate ? raw_deflate(e.data) : e.data;
        const std::uint32_t crc = crc32(0, e.data.data(), static_cast<uInt>(e.data.size()));
        const std::uint16_t method = e.deflate ? 8 : 0;
        const std::uint32_t offset = static_cast<std::uint32_t>(out.size());

        put32(out, 0x04034b50);
        put16(out, 20);
        put16(out, 0);
        put16(out, method);
        put16(out, 0);
        put16(out, 0x21);
        put32(out, crc);
        put32(out, static_cast<std::uint32_t>(payload.size()));
        put32(out, static_cast<std::uint32_t>(e.data.size()));
        put16(out, static_cast<std::uint16_t>(e.name.size()));
        put16(out, 0);
        out.insert(out.end(), e.name.begin(), e.name.end());
        append(out, payload);

        put32(central, 0x02014b50);
        put16(central, 20);
        put16(central, 20);
        put16(central, 0);
        put16(central, method);
        put16(central, 0);
        put16(central, 0x21);
        put32(central, crc);
        put32(central, static_cast<std::uint32_t>(payload.size()));
        put32(central, static_cast<std::uint32_t>(e.data.size()));
        put16(central, static_cast<std::uint16_t>(e.name.size()));
        put16(central, 0);
        put16(central, 0);
        put16(central, 0);
        put16(central, 0);
        put32(central, 0);
        put32(central, offset);
        central.insert(central.end(), e.name.begin(), e.name.end());
    }
    const std::uint32_t cd_offset = static_cast<std::uint32_t>(out.size());
    append(out, central);
    put32(out, 0x06054b50);
    put16(out, 0);
    put16(out, 0);
    put16(out, static_cast<std::uint16_t>(entries.size()));
    put16(out, static_cast<std::uint16_t>(entries.size()));
    put32(out, static_cast<std::uint32_t>(central.size()));
    put32(out, cd_offset);
    put16(out, 0);
    return out;
}

Bytes encode_axml(const AxmlNode& root) { return AxmlWriter(root).encode(root); }

Bytes encode_manifest(const ManifestInfo& info) {
    AxmlNode root{"manifest", {{"versionCode", std::int32_t{1}}, {"package", info.package_name}}, {}};
    if (info.min_sdk) root.children.push_back({"uses-sdk", {{"minSdkVersion", std::int32_t{*info.min_sdk}}}, {}});
    for (const auto& p : info.permissions) root.children.push_back({"uses-permission", {{"name", p}}, {}});
    root.children.push_back({"application", {{"label", std::string("fixture")}}, {}});
    return encode_axml(root);
}

Bytes build_fixture_apk(const FixtureApkSpec& spec) {
    std::vector<ZipEntrySpec> entries;
    entries.push_back({"AndroidManifest.xml", encode_manifest(spec.manifest), true});
    for (std::size_t i = 0; i < spec.dex.size(); ++i) {
        const std::string name = i == 0 ? "classes.dex" : "classes" + std::to_string(i + 1) + ".dex";
        entries.push_back({name, build_fixture_dex(spec.dex[i]), true});
    }
    for (const auto& lib : spec.native_libs) {
        Bytes elf{0x7f, 'E', 'L', 'F'};
        elf.resize(256, 0);
        entries.push_back({lib, elf, false});
    }
    entries.push_back({"resources.arsc", Bytes(64, 0), false});
    return build_zip(entries);
}

std::vector<FixtureClass> random_fixture_classes(std::mt19937_64& rng, std::size_t max_classes, std::size_t max_invokes) {
    static const char* const kPackages[] = {"com.test", "com.shop.app", "org.lib.core", "a.b", "io.sdk.net.http", "x"};
    static const char* const kExternal[] = {"java.lang.String", "android.media.MediaDrm", "java.security.KeyStore",
                                            "android.security.keystore.KeyGenParameterSpec$Builder",
                                            "androidx.biometric.BiometricPrompt"};
    static const char* const kMethods[] = {"<init>", "run", "getInstance", "openSession", "build", "a", "doWork_2"};
    static const char* const kShorties[] = {"V", "I", "VL", "LLI", "Z", "JDF"};
    auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };

    std::vector<FixtureClass> out(pick(max_classes + 1));
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i].caller_class = std::string(kPackages[pick(std::size(kPackages))]) + ".C" + std::to_string(i) +
                              (pick(4) == 0 ? "$Inner" : "");
    for (auto& c : out) {
        const std::size_t n = pick(max_invokes + 1);
        for (std::size_t k = 0; k < n; ++k) {
            MethodRef m;
            m.defining_class = pick(2) ? kExternal[pick(std::size(kExternal))] : out[pick(out.size())].caller_class;
            m.method_name = kMethods[pick(std::size(kMethods))];
            m.shorty = kShorties[pick(std::size(kShorties))];
            c.targets.push_back(std::move(m));
        }
    }
    return out;
}

std::vector<std::pair<std::string, MethodRef>> planted_pairs(const std::vector<FixtureClass>& classes) {
    std::vector<std::pair<std::string, MethodRef>> out;
    for (const auto& c : classes)
        for (const auto& t : c.targets) out.emplace_back(c.caller_class, t);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::pair<std::string, MethodRef>> parsed_pairs(const DexUnit& unit) {
    std::vector<std::pair<std::string, MethodRef>> out;
    for (const auto& inv : unit.invocations) out.emplace_back(unit.caller_class(inv), unit.target(inv));
    std::sort(out.begin(), out.end());
    return out;
}

FixtureDexSpec parse_bomb_spec(std::size_t classes) {
    FixtureDexSpec spec;
    spec.alias_code_items = true;
    spec.classes.push_back({"bomb.Root", {{"x.Y", "f", "V"}}, 60000});
    for (std::size_t i = 0; i < classes; ++i) spec.classes.push_back({"bomb.C" + std::to_string(i), {}});
    return spec;
}

FixtureApkSpec planted_tee_spec() {
    FixtureApkSpec spec;
    spec.manifest.package_name = "com.test.planted";
    FixtureDexSpec dex;
    dex.classes.push_back({"com.test.planted.Main",
                           {{"android.security.keystore.KeyGenParameterSpec$Builder", "<init>", "VLI"},
                            {"android.security.keystore.KeyGenParameterSpec$Builder", "setUserAuthenticationRequired", "LZ"},
                            {"android.security.keystore.KeyGenParameterSpec$Builder", "build", "L"},
                            {"java.lang.String", "valueOf", "LI"},
                            {"android.media.MediaDrm", "openSession", "L"},
                            {"android.hardware.biometrics.BiometricPrompt", "authenticate", "VLLLL"},
                            {"android.util.Log", "d", "ILL"},
                            {"android.security.ConfirmationPrompt", "presentPrompt", "VLL"}}});
    dex.extra_strings = {"Landroid/hardware/biometrics/BiometricManager;", "android.media.MediaDrm$KeyRequest"};
    spec.dex.push_back(std::move(dex));
    return spec;
}

FixtureApkSpec varied_fixture_spec(std::size_t i) {
    FixtureApkSpec spec;
    const std::string app = "com.fixture.app" + std::to_string(i);
    spec.manifest.package_name = app;
    spec.manifest.permissions = {"android.permission.INTERNET"};
    spec.manifest.min_sdk = static_cast<int>(21 + i % 10);
    FixtureDexSpec dex;
    std::vector<MethodRef> main_calls{{"java.lang.StringBuilder", "append", "LL"}};
    if (i % 2 == 0) main_calls.push_back({"android.security.keystore.KeyGenParameterSpec$Builder", "build", "L"});
    if (i % 3 == 0) main_calls.push_back({"android.hardware.biometrics.BiometricPrompt", "authenticate", "VLLLL"});
    if (i % 5 == 0) main_calls.push_back({"android.security.ConfirmationPrompt", "presentPrompt", "VLL"});
    dex.classes.push_back({app + ".MainActivity", main_calls});
    if (i % 2 == 1) dex.classes.push_back({"com.appsflyer.internal.Q" + std::to_string(i), {{"android.media.MediaDrm", "<init>", "VL"}}});
    if (i % 4 == 1) dex.classes.push_back({"b.d.E", {{"android.security.keystore.KeyInfo", "isInsideSecureHardware", "Z"}}});
    if (i % 3 == 2) dex.classes.push_back({"org.lib.net.Client", {{"javax.crypto.Cipher", "getInstance", "LL"}}});
    spec.dex.push_back(std::move(dex));
    if (i % 4 == 3) {
        FixtureDexSpec second;
        second.classes.push_back({"com.google.android.exoplayer2.drm.FrameworkMediaDrm",
                                  {{"android.media.MediaDrm", "openSession", "L"}}});
        spec.dex.push_back(std::move(second));
    }
    if (i % 2 == 0) spec.native_libs.push_back("lib/arm64-v8a/libcrypto.so.1.1");
    return spec;
}

FixtureApkSpec slow_fixture_spec() {
    FixtureApkSpec spec;
    spec.manifest.package_name = "com.fixture.slow";
    spec.dex.push_back(parse_bomb_spec(12000));
    return spec;
}

CorpusEntry write_fixture(const std::filesystem::path& dir, const std::string& name, ByteView bytes,
                          const std::string& expected_package) {
    CorpusEntry e;
    e.path = dir / name;
    spit(e.path, bytes);
    e.sha256 = sha256_digest(bytes);
    e.expected_package_name = expected_package;
    e.category = "TOOLS";
    e.downloads = 50000;
    e.last_update = std::chrono::year{2023} / std::chrono::March / 1;
    return e;
}

Bytes slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    return Bytes(std::istreambuf_iterator<char>(in), {});
}

void spit(const std::filesystem::path& p, ByteView bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::filesystem::path test_data_dir() { return ANALYTIKA_TEST_DATA; }
std::filesystem::path repo_data_dir() { return ANALYTIKA_REPO_DATA; }
std::filesystem::path oracle_dir() { return ANALYTIKA_ORACLE_DIR; }

std::filesystem::path cli_path() { return ANALYTIKA_CLI; }
std::string python_path() { return ANALYTIKA_PYTHON; }

SyntheticCorpus random_synthetic_corpus(std::mt19937_64& rng, std::size_t max_reports) {
    static const char* const kLibPackages[] = {"com.appsflyer.internal", "com.appsflyer", "androidx.biometric",
                                               "com.google.android.exoplayer2.drm.x", "com.vendor.sdk.crypto.aes",
                                               "com.vendor.sdk.crypto.rsa", "io.sdk.a", "org.lib.net.http.impl"};
    static const char* const kCategories[] = {"FINANCE", "TOOLS", "Education", "Educational", "Puzzle", "SOCIAL", ""};
    static const char* const kSoftware[] = {"Java Security", "BouncyCastle", "Google Tink", "Unlisted Lib"};
    static const char* const kNative[] = {"libssl.so", "libcrypto.so", "libsodium.so", "libbotan-2.so"};
    static const char* const kNativeLib[] = {"OpenSSL", "OpenSSL", "Sodium", "Botan"};
    auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };

    SyntheticCorpus c;
    const std::size_t n = 1 + pick(max_reports);
    for (std::size_t i = 0; i < n; ++i) {
        AppReport r;
        r.package_name = "com.app" + std::to_string(i) + ".main";
        char sha[65];
        std::snprintf(sha, sizeof sha, "%016llx%048x", static_cast<unsigned long long>(rng()), static_cast<unsigned>(i));
        r.sha256 = sha;
        const std::size_t roll = pick(10);
        r.status = roll == 0 ? AppStatus::timeout : roll == 1 ? AppStatus::error : AppStatus::ok;
        r.package_check = static_cast<PackageCheck>(pick(4));
        r.timing.total = 0.01 * static_cast<double>(1 + pick(500));
        if (r.status == AppStatus::ok) {
            const std::size_t matches = pick(4) == 0 ? 0 : pick(9);
            for (std::size_t k = 0; k < matches; ++k) {
                MatchRecord m;
                m.detector_id = std::string(kTeeDetectors[pick(pick(3) == 0 ? 4 : 2)]);
                m.target_class = "android.x.Api";
                m.target_method = "call";
                m.location = static_cast<LocationClass>(pick(3));
                if (m.location == LocationClass::inmain) m.attributed_package = r.package_name;
                else if (m.location == LocationClass::inlib) m.attributed_package = kLibPackages[pick(std::size(kLibPackages))];
                else m.attributed_package = pick(2) ? "" : "a1.b";
                m.caller_class = m.attributed_package.empty() ? "C" : m.attributed_package + ".C";
                m.dex_file = "classes.dex";
                m.code_offset = static_cast<std::uint32_t>(112 + 6 * k);
                r.matches.push_back(std::move(m));
            }
            std::set<std::string> sw;
            for (std::size_t k = pick(3); k > 0; --k) sw.insert(kSoftware[pick(std::size(kSoftware))]);
            for (const auto& lib : sw) {
                MatchRecord m;
                m.detector_id = lib;
                m.kind = PatternKind::crypto_software;
                m.target_class = "x.y.Z";
                m.target_method = "f";
                m.location = LocationClass::inlib;
                m.attributed_package = "x.y";
                m.caller_class = "x.y.Q";
                r.matches.push_back(std::move(m));
            }
            r.crypto_software_libs.assign(sw.begin(), sw.end());
            for (std::size_t k = 0; k < std::size(kNative); ++k)
                if (pick(3) == 0) r.native_lib_hits.push_back({kNativeLib[k], std::string("lib/arm64-v8a/") + kNative[k]});
        }
        if (pick(6) != 0) {
            CorpusEntry e;
            e.sha256 = r.sha256;
            e.expected_package_name = r.package_name;
            e.category = kCategories[pick(std::size(kCategories))];
            static const std::uint64_t kDownloads[] = {0, 9999, 10000, 10001, 5000000};
            e.downloads = kDownloads[pick(std::size(kDownloads))];
            static const char* const kDates[] = {"2019-12-31", "2020-01-01", "2023-06-30", ""};
            e.last_update = parse_date(kDates[pick(std::size(kDates))]);
            e.source = EntrySource::remote;
            c.metadata.push_back(std::move(e));
        }
        c.reports.push_back(std::move(r));
    }
    if (pick(2)) {
        CorpusEntry orphan;
        orphan.sha256 = std::string(64, 'f');
        orphan.category = "TOOLS";
        orphan.downloads = 20000;
        orphan.source = EntrySource::remote;
        c.metadata.push_back(std::move(orphan));
    }
    return c;
}

namespace {

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return out + "\"";
}

}  // namespace

void write_synthetic_corpus(const SyntheticCorpus& c, const std::filesystem::path& report_dir,
                            const std::filesystem::path& corpus_csv) {
    std::filesystem::create_directories(report_dir);
    for (const auto& r : c.reports) write_report(report_dir, r);
    std::ofstream out(corpus_csv, std::ios::binary);
    out << kCorpusHeader << '\n';
    for (const auto& e : c.metadata)
        out << e.sha256 << ',' << csv_cell(e.expected_package_name) << ',' << csv_cell(e.category) << ','
            << e.downloads << ',' << (e.last_update ? format_date(*e.last_update) : "") << ",remote\n";
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char ch : s) out += ch == '\'' ? std::string("'\\''") : std::string(1, ch);
    return out + "'";
}

int run_command(const std::string& cmd, std::string* output) {
    FILE* pipe = ::popen((cmd + " 2>&1").c_str(), "r");
    if (!pipe) return -1;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0)
        if (output) output->append(buf, n);
    const int status = ::pclose(pipe);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::filesystem::path scratch_dir(const std::string& tag) {
    static std::atomic<int> counter{0};
    const auto dir = std::filesystem::temp_directory_path() /
                     ("analytika_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace analytika::testing
