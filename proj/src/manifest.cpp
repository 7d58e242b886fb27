#include "analytika/manifest.hpp"

#include <charconv>
#include <unordered_map>

#include "analytika/error.hpp"

namespace analytika {
namespace {

constexpr std::uint16_t kResXml = 0x0003;
constexpr std::uint16_t kStringPool = 0x0001;
constexpr std::uint16_t kResourceMap = 0x0180;
constexpr std::uint16_t kStartNamespace = 0x0100;
constexpr std::uint16_t kEndNamespace = 0x0101;
constexpr std::uint16_t kStartElement = 0x0102;
constexpr std::uint16_t kEndElement = 0x0103;

constexpr std::uint32_t kNoIndex = 0xFFFFFFFF;
constexpr std::uint32_t kUtf8Flag = 0x100;

constexpr std::uint8_t kTypeString = 0x03;
constexpr std::uint8_t kTypeIntDec = 0x10;
constexpr std::uint8_t kTypeIntHex = 0x11;
constexpr std::uint8_t kTypeBoolean = 0x12;

[[noreturn]] void malformed(const std::string& why) {
    throw ManifestError(ManifestErrc::MalformedManifest, "malformed manifest: " + why);
}

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// Framework attribute ids for names that shrinkers sometimes blank out of
// the string pool.
const std::unordered_map<std::uint32_t, std::string_view>& known_attribute_ids() {
    static const std::unordered_map<std::uint32_t, std::string_view> ids = {
        {0x01010003, "name"},          {0x0101020c, "minSdkVersion"},
        {0x01010270, "targetSdkVersion"}, {0x0101021b, "versionCode"},
        {0x0101021c, "versionName"},
    };
    return ids;
}

class StringPool {
public:
    StringPool() = default;

    StringPool(ByteView chunk, std::uint16_t header_size) {
        if (header_size < 28 || chunk.size() < header_size) malformed("string pool header");
        const std::uint32_t count = load_u32(&chunk[8]);
        const std::uint32_t flags = load_u32(&chunk[16]);
        const std::uint32_t strings_start = load_u32(&chunk[20]);
        if (!in_bounds(header_size, std::uint64_t{count} * 4, chunk.size()))
            malformed("string pool offsets out of bounds");
        if (strings_start > chunk.size()) malformed("string data out of bounds");
        const bool utf8 = (flags & kUtf8Flag) != 0;
        strings_.reserve(count);
        for (std::uint32_t i = 0; i < count; ++i) {
            const std::uint64_t at = std::uint64_t{strings_start} + load_u32(&chunk[header_size + 4 * i]);
            strings_.push_back(utf8 ? decode_utf8(chunk, at) : decode_utf16(chunk, at));
        }
    }

    const std::string& at(std::uint32_t i) const {
        if (i >= strings_.size()) malformed("string index " + std::to_string(i) + " out of pool bounds");
        return strings_[i];
    }
    std::string lookup_or_empty(std::uint32_t i) const { return i == kNoIndex ? std::string() : at(i); }
    std::size_t size() const { return strings_.size(); }

private:
    static std::string decode_utf8(ByteView c, std::uint64_t at) {
        auto byte = [&](std::uint64_t p) {
            if (p >= c.size()) malformed("utf-8 string out of bounds");
            return c[p];
        };
        // utf-16 length, then utf-8 byte length; either may take two bytes.
        if (byte(at) & 0x80) ++at;
        ++at;
        std::uint32_t len = byte(at);
        if (len & 0x80) len = ((len & 0x7F) << 8) | byte(++at);
        ++at;
        if (!in_bounds(at, len, c.size())) malformed("utf-8 string out of bounds");
        return std::string(reinterpret_cast<const char*>(&c[at]), len);
    }

    static std::string decode_utf16(ByteView c, std::uint64_t at) {
        if (!in_bounds(at, 2, c.size())) malformed("utf-16 string out of bounds");
        std::uint32_t len = load_u16(&c[at]);
        at += 2;
        if (len & 0x8000) {
            if (!in_bounds(at, 2, c.size())) malformed("utf-16 string out of bounds");
            len = ((len & 0x7FFF) << 16) | load_u16(&c[at]);
            at += 2;
        }
        if (!in_bounds(at, std::uint64_t{len} * 2, c.size())) malformed("utf-16 string out of bounds");
        std::string out;
        out.reserve(len);
        for (std::uint32_t i = 0; i < len; ++i) {
            std::uint32_t u = load_u16(&c[at + 2 * i]);
            if (u >= 0xD800 && u < 0xDC00 && i + 1 < len) {
                const std::uint32_t lo = load_u16(&c[at + 2 * (i + 1)]);
                if (lo >= 0xDC00 && lo < 0xE000) {
                    u = 0x10000 + ((u - 0xD800) << 10) + (lo - 0xDC00);
                    ++i;
                }
            }
            append_utf8(out, u);
        }
        return out;
    }

    std::vector<std::string> strings_;
};

}  // namespace

const XmlAttribute* XmlElement::attribute(std::string_view local_name) const {
    for (const auto& a : attributes)
        if (a.name == local_name) return &a;
    return nullptr;
}

XmlElement parse_binary_xml(ByteView b) {
    if (b.size() < 8) malformed("shorter than a chunk header");
    if (load_u16(&b[0]) != kResXml) malformed("bad magic");
    const std::uint16_t file_header = load_u16(&b[2]);
    const std::uint32_t file_size = load_u32(&b[4]);
    if (file_header < 8 || file_size < file_header || file_size > b.size())
        malformed("bad file header");
    b = b.first(file_size);

    StringPool pool;
    bool have_pool = false;
    std::vector<std::uint32_t> resource_ids;
    std::vector<XmlElement> stack;
    std::optional<XmlElement> root;

    auto attr_name = [&](std::uint32_t idx) {
        std::string name = pool.at(idx);
        if (name.empty() && idx < resource_ids.size()) {
            auto it = known_attribute_ids().find(resource_ids[idx]);
            if (it != known_attribute_ids().end()) name = it->second;
        }
        return name;
    };
    auto require_pool = [&] {
        if (!have_pool) malformed("element before string pool");
    };

    std::size_t pos = file_header;
    while (pos < b.size()) {
        if (!in_bounds(pos, 8, b.size())) malformed("truncated chunk header");
        const std::uint16_t type = load_u16(&b[pos]);
        const std::uint16_t header_size = load_u16(&b[pos + 2]);
        const std::uint32_t size = load_u32(&b[pos + 4]);
        if (header_size < 8 || size < header_size || !in_bounds(pos, size, b.size()))
            malformed("truncated chunk");
        ByteView chunk = b.subspan(pos, size);

        switch (type) {
        case kStringPool:
            pool = StringPool(chunk, header_size);
            have_pool = true;
            break;
        case kResourceMap:
            resource_ids.clear();
            for (std::size_t p = header_size; p + 4 <= size; p += 4) resource_ids.push_back(load_u32(&chunk[p]));
            break;
        case kStartElement: {
            require_pool();
            if (header_size < 16 || size < std::size_t{header_size} + 20) malformed("short start element");
            const std::uint8_t* ext = &chunk[header_size];
            XmlElement el;
            el.ns = pool.lookup_or_empty(load_u32(ext));
            el.name = pool.at(load_u32(ext + 4));
            const std::uint16_t attr_start = load_u16(ext + 8);
            const std::uint16_t attr_size = load_u16(ext + 10);
            const std::uint16_t attr_count = load_u16(ext + 12);
            if (attr_count > 0 && attr_size < 20) malformed("attribute record too small");
            const std::uint64_t first = std::uint64_t{header_size} + attr_start;
            if (!in_bounds(first, std::uint64_t{attr_count} * attr_size, size))
                malformed("attributes out of chunk bounds");
            for (std::uint16_t i = 0; i < attr_count; ++i) {
                const std::uint8_t* a = &chunk[first + std::uint64_t{i} * attr_size];
                XmlAttribute attr;
                attr.ns = pool.lookup_or_empty(load_u32(a));
                attr.name = attr_name(load_u32(a + 4));
                const std::uint32_t raw = load_u32(a + 8);
                const std::uint8_t data_type = a[15];
                const std::uint32_t data = load_u32(a + 16);
                switch (data_type) {
                case kTypeString:
                    attr.value = pool.at(data);
                    break;
                case kTypeIntDec:
                case kTypeIntHex:
                    attr.value = static_cast<std::int32_t>(data);
                    break;
                case kTypeBoolean:
                    attr.value = data != 0;
                    break;
                default:
                    if (raw != kNoIndex && data_type == 0) attr.value = pool.at(raw);
                    else attr.value = RawValue{data_type, data};
                }
                el.attributes.push_back(std::move(attr));
            }
            if (!stack.empty() || !root) stack.push_back(std::move(el));
            else malformed("multiple root elements");
            break;
        }
        case kEndElement: {
            require_pool();
            if (size < std::size_t{header_size} + 8) malformed("short end element");
            const std::string& name = pool.at(load_u32(&chunk[header_size + 4]));
            if (stack.empty() || stack.back().name != name) malformed("unbalanced end element '" + name + "'");
            XmlElement done = std::move(stack.back());
            stack.pop_back();
            if (stack.empty()) root = std::move(done);
            else stack.back().children.push_back(std::move(done));
            break;
        }
        case kStartNamespace:
        case kEndNamespace:
        default:
            break;
        }
        pos += size;
    }

    if (!stack.empty()) malformed("unclosed element '" + stack.back().name + "'");
    if (!root) malformed("no root element");
    return std::move(*root);
}

ManifestInfo extract_manifest_info(const XmlElement& root) {
    ManifestInfo info;
    const XmlAttribute* pkg = root.name == "manifest" ? root.attribute("package") : nullptr;
    const std::string* pkg_name = pkg ? std::get_if<std::string>(&pkg->value) : nullptr;
    if (pkg_name == nullptr || pkg_name->empty())
        throw ManifestError(ManifestErrc::MissingPackageName, "manifest declares no package name");
    info.package_name = *pkg_name;

    for (const auto& child : root.children) {
        if (child.name == "uses-permission") {
            if (const XmlAttribute* n = child.attribute("name"))
                if (const auto* s = std::get_if<std::string>(&n->value)) info.permissions.push_back(*s);
        } else if (child.name == "uses-sdk" && !info.min_sdk) {
            const XmlAttribute* m = child.attribute("minSdkVersion");
            if (m == nullptr) continue;
            if (const auto* i = std::get_if<std::int32_t>(&m->value)) {
                info.min_sdk = *i;
            } else if (const auto* s = std::get_if<std::string>(&m->value)) {
                int v = 0;
                auto [p, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
                if (ec == std::errc{} && p == s->data() + s->size()) info.min_sdk = v;
            }
        }
    }
    return info;
}

}  // namespace analytika
