#include <openssl/sha.h>
#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <tuple>
#include <map>
#include <set>

#include "analytika/dex.hpp"
#include "analytika/error.hpp"

namespace analytika {
namespace {

[[noreturn]] void invalid(const std::string& why) {
    throw DexError(DexErrc::InvalidSpec, "invalid fixture spec: " + why);
}

bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    auto start = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$'; };
    if (!start(s.front())) return false;
    return std::all_of(s.begin(), s.end(), [&](char c) {
        return start(c) || std::isdigit(static_cast<unsigned char>(c));
    });
}

void check_class_name(std::string_view name) {
    std::size_t begin = 0;
    while (true) {
        const std::size_t dot = name.find('.', begin);
        if (!is_identifier(name.substr(begin, dot - begin))) invalid("bad class name '" + std::string(name) + "'");
        if (dot == std::string_view::npos) return;
        begin = dot + 1;
    }
}

void check_method_name(std::string_view name) {
    if (name == "<init>" || name == "<clinit>") return;
    if (!is_identifier(name)) invalid("bad method name '" + std::string(name) + "'");
}

std::string descriptor_of(std::string_view dotted) {
    std::string d = "L";
    d += dotted;
    d += ';';
    std::replace(d.begin(), d.end(), '.', '/');
    return d;
}

std::string type_of_shorty_char(char c) {
    switch (c) {
    case 'V': case 'Z': case 'B': case 'S': case 'C': case 'I': case 'J': case 'F': case 'D':
        return std::string(1, c);
    case 'L':
        return "Ljava/lang/Object;";
    default:
        invalid(std::string("bad shorty character '") + c + "'");
    }
}

void put_uleb(Bytes& out, std::uint32_t v) {
    do {
        std::uint8_t byte = v & 0x7F;
        v >>= 7;
        if (v != 0) byte |= 0x80;
        out.push_back(byte);
    } while (v != 0);
}

void align4(Bytes& out) {
    while (out.size() % 4 != 0) out.push_back(0);
}

constexpr std::string_view kRunMethod = "run";
constexpr std::string_view kRunShorty = "V";
constexpr std::string_view kObject = "Ljava/lang/Object;";

}  // namespace

Bytes build_fixture_dex(const std::vector<FixtureClass>& classes) {
    return build_fixture_dex(FixtureDexSpec{classes, {}, false});
}

Bytes build_fixture_dex(const FixtureDexSpec& spec) {
    // Merge duplicate callers, preserving first-seen order.
    std::vector<FixtureClass> callers;
    std::map<std::string, std::size_t> caller_pos;
    for (const auto& c : spec.classes) {
        check_class_name(c.caller_class);
        for (const auto& t : c.targets) {
            check_class_name(t.defining_class);
            check_method_name(t.method_name);
        }
        auto [it, fresh] = caller_pos.emplace(c.caller_class, callers.size());
        if (fresh) {
            callers.push_back(c);
        } else {
            auto& merged = callers[it->second];
            merged.targets.insert(merged.targets.end(), c.targets.begin(), c.targets.end());
            merged.nop_padding += c.nop_padding;
        }
    }

    auto shorty_or_void = [](const MethodRef& m) { return m.shorty.empty() ? std::string(kRunShorty) : m.shorty; };

    // Collect pools.
    std::set<std::string> strings(spec.extra_strings.begin(), spec.extra_strings.end());
    std::set<std::string> types;
    std::set<std::string> shorties;
    for (const auto& c : callers) {
        types.insert(descriptor_of(c.caller_class));
        strings.insert(std::string(kRunMethod));
        shorties.insert(std::string(kRunShorty));
        for (const auto& t : c.targets) {
            types.insert(descriptor_of(t.defining_class));
            strings.insert(t.method_name);
            shorties.insert(shorty_or_void(t));
        }
    }
    if (!callers.empty()) types.insert(std::string(kObject));
    for (const auto& s : shorties)
        for (char ch : s) types.insert(type_of_shorty_char(ch));
    strings.insert(types.begin(), types.end());
    strings.insert(shorties.begin(), shorties.end());
    for (const auto& s : strings)
        if (s.find('\0') != std::string::npos) invalid("embedded NUL in string");

    // Byte order equals UTF-16 order for the ASCII names accepted above.
    const std::vector<std::string> string_pool(strings.begin(), strings.end());
    auto string_idx = [&](std::string_view s) {
        return static_cast<std::uint32_t>(std::lower_bound(string_pool.begin(), string_pool.end(), s) -
                                          string_pool.begin());
    };
    // type_ids are sorted by string index, which matches descriptor order.
    const std::vector<std::string> type_pool(types.begin(), types.end());
    if (type_pool.size() > 0xFFFF) invalid("too many types");
    auto type_idx = [&](std::string_view d) {
        return static_cast<std::uint32_t>(std::lower_bound(type_pool.begin(), type_pool.end(), d) -
                                          type_pool.begin());
    };

    struct Proto {
        std::uint32_t shorty;
        std::uint32_t ret;
        std::vector<std::uint16_t> params;
        auto operator<=>(const Proto&) const = default;
    };
    std::vector<Proto> protos;
    std::map<std::string, Proto> proto_of_shorty;
    for (const auto& s : shorties) {
        Proto p{string_idx(s), type_idx(type_of_shorty_char(s[0])), {}};
        for (std::size_t i = 1; i < s.size(); ++i)
            p.params.push_back(static_cast<std::uint16_t>(type_idx(type_of_shorty_char(s[i]))));
        proto_of_shorty.emplace(s, p);
        protos.push_back(p);
    }
    // proto_ids: by return type, then parameter list.
    std::sort(protos.begin(), protos.end(), [](const Proto& a, const Proto& b) {
        return std::tie(a.ret, a.params) < std::tie(b.ret, b.params);
    });
    auto proto_idx = [&](const std::string& shorty) {
        const Proto& p = proto_of_shorty.at(shorty);
        return static_cast<std::uint16_t>(std::find(protos.begin(), protos.end(), p) - protos.begin());
    };

    struct MethodKey {
        std::uint32_t cls;
        std::uint32_t name;
        std::uint16_t proto;
        auto operator<=>(const MethodKey&) const = default;
    };
    auto key_of = [&](std::string_view cls_dotted, std::string_view name, const std::string& shorty) {
        return MethodKey{type_idx(descriptor_of(cls_dotted)), string_idx(name), proto_idx(shorty)};
    };
    std::set<MethodKey> method_keys;
    for (const auto& c : callers) {
        method_keys.insert(key_of(c.caller_class, kRunMethod, std::string(kRunShorty)));
        for (const auto& t : c.targets) method_keys.insert(key_of(t.defining_class, t.method_name, shorty_or_void(t)));
    }
    const std::vector<MethodKey> method_pool(method_keys.begin(), method_keys.end());
    if (method_pool.size() > 0xFFFF) invalid("too many methods");
    auto method_idx = [&](const MethodKey& k) {
        return static_cast<std::uint32_t>(std::lower_bound(method_pool.begin(), method_pool.end(), k) -
                                          method_pool.begin());
    };

    // Layout.
    constexpr std::uint32_t kHeader = 0x70;
    const std::uint32_t n_strings = static_cast<std::uint32_t>(string_pool.size());
    const std::uint32_t n_types = static_cast<std::uint32_t>(type_pool.size());
    const std::uint32_t n_protos = static_cast<std::uint32_t>(protos.size());
    const std::uint32_t n_methods = static_cast<std::uint32_t>(method_pool.size());
    const std::uint32_t n_classes = static_cast<std::uint32_t>(callers.size());
    const std::uint32_t string_ids_off = kHeader;
    const std::uint32_t type_ids_off = string_ids_off + 4 * n_strings;
    const std::uint32_t proto_ids_off = type_ids_off + 4 * n_types;
    const std::uint32_t method_ids_off = proto_ids_off + 12 * n_protos;
    const std::uint32_t class_defs_off = method_ids_off + 8 * n_methods;
    const std::uint32_t data_off = class_defs_off + 32 * n_classes;

    Bytes out(data_off, 0);

    // Code items.
    std::vector<std::uint32_t> code_offs;
    const std::uint32_t code_start = static_cast<std::uint32_t>(out.size());
    for (const auto& c : callers) {
        align4(out);
        code_offs.push_back(static_cast<std::uint32_t>(out.size()));
        const std::uint64_t insns = std::uint64_t{c.nop_padding} + 3ull * c.targets.size() + 1;
        if (insns > 0xFFFFFFFFull) invalid("code too large");
        store_u16(out, 0);  // registers
        store_u16(out, 0);  // ins
        store_u16(out, 0);  // outs
        store_u16(out, 0);  // tries
        store_u32(out, 0);  // debug_info_off
        store_u32(out, static_cast<std::uint32_t>(insns));
        out.resize(out.size() + 2ull * c.nop_padding, 0);
        for (const auto& t : c.targets) {
            store_u16(out, 0x0071);  // invoke-static {}, meth@BBBB
            store_u16(out, static_cast<std::uint16_t>(method_idx(key_of(t.defining_class, t.method_name, shorty_or_void(t)))));
            store_u16(out, 0);
        }
        store_u16(out, 0x000e);  // return-void
    }
    const std::uint32_t n_code = n_classes;

    // Type lists.
    align4(out);
    const std::uint32_t type_list_start = static_cast<std::uint32_t>(out.size());
    std::map<std::vector<std::uint16_t>, std::uint32_t> type_list_off;
    for (const auto& p : protos) {
        if (p.params.empty() || type_list_off.count(p.params)) continue;
        align4(out);
        type_list_off[p.params] = static_cast<std::uint32_t>(out.size());
        store_u32(out, static_cast<std::uint32_t>(p.params.size()));
        for (auto t : p.params) store_u16(out, t);
    }

    // String data.
    const std::uint32_t string_data_start = static_cast<std::uint32_t>(out.size());
    std::vector<std::uint32_t> string_offs;
    for (const auto& s : string_pool) {
        string_offs.push_back(static_cast<std::uint32_t>(out.size()));
        put_uleb(out, static_cast<std::uint32_t>(s.size()));
        out.insert(out.end(), s.begin(), s.end());
        out.push_back(0);
    }

    // Class data.
    const std::uint32_t class_data_start = static_cast<std::uint32_t>(out.size());
    std::vector<std::uint32_t> class_data_offs;
    for (std::size_t i = 0; i < callers.size(); ++i) {
        class_data_offs.push_back(static_cast<std::uint32_t>(out.size()));
        put_uleb(out, 0);  // static fields
        put_uleb(out, 0);  // instance fields
        put_uleb(out, 1);  // direct methods
        put_uleb(out, 0);  // virtual methods
        put_uleb(out, method_idx(key_of(callers[i].caller_class, kRunMethod, std::string(kRunShorty))));
        put_uleb(out, 0x0009);  // public static
        put_uleb(out, spec.alias_code_items ? code_offs.front() : code_offs[i]);
    }

    // Map list.
    align4(out);
    const std::uint32_t map_off = static_cast<std::uint32_t>(out.size());
    struct MapItem {
        std::uint16_t type;
        std::uint32_t size;
        std::uint32_t off;
    };
    std::vector<MapItem> map = {{0x0000, 1, 0}};
    if (n_strings) map.push_back({0x0001, n_strings, string_ids_off});
    if (n_types) map.push_back({0x0002, n_types, type_ids_off});
    if (n_protos) map.push_back({0x0003, n_protos, proto_ids_off});
    if (n_methods) map.push_back({0x0005, n_methods, method_ids_off});
    if (n_classes) map.push_back({0x0006, n_classes, class_defs_off});
    if (n_code) map.push_back({0x2001, n_code, code_start});
    if (!type_list_off.empty()) map.push_back({0x1001, static_cast<std::uint32_t>(type_list_off.size()), type_list_start});
    if (n_strings) map.push_back({0x2002, n_strings, string_data_start});
    if (n_classes) map.push_back({0x2000, n_classes, class_data_start});
    map.push_back({0x1000, 1, map_off});
    store_u32(out, static_cast<std::uint32_t>(map.size()));
    for (const auto& m : map) {
        store_u16(out, m.type);
        store_u16(out, 0);
        store_u32(out, m.size);
        store_u32(out, m.off);
    }

    // Index sections.
    for (std::uint32_t i = 0; i < n_strings; ++i) patch_u32(out, string_ids_off + 4 * i, string_offs[i]);
    for (std::uint32_t i = 0; i < n_types; ++i) patch_u32(out, type_ids_off + 4 * i, string_idx(type_pool[i]));
    for (std::uint32_t i = 0; i < n_protos; ++i) {
        const std::uint32_t at = proto_ids_off + 12 * i;
        patch_u32(out, at, protos[i].shorty);
        patch_u32(out, at + 4, protos[i].ret);
        patch_u32(out, at + 8, protos[i].params.empty() ? 0 : type_list_off.at(protos[i].params));
    }
    for (std::uint32_t i = 0; i < n_methods; ++i) {
        const std::uint32_t at = method_ids_off + 8 * i;
        out[at] = static_cast<std::uint8_t>(method_pool[i].cls);
        out[at + 1] = static_cast<std::uint8_t>(method_pool[i].cls >> 8);
        out[at + 2] = static_cast<std::uint8_t>(method_pool[i].proto);
        out[at + 3] = static_cast<std::uint8_t>(method_pool[i].proto >> 8);
        patch_u32(out, at + 4, method_pool[i].name);
    }
    for (std::uint32_t i = 0; i < n_classes; ++i) {
        const std::uint32_t at = class_defs_off + 32 * i;
        patch_u32(out, at, type_idx(descriptor_of(callers[i].caller_class)));
        patch_u32(out, at + 4, 0x0001);                  // public
        patch_u32(out, at + 8, type_idx(kObject));       // superclass
        patch_u32(out, at + 12, 0);                      // interfaces
        patch_u32(out, at + 16, 0xFFFFFFFF);             // source file
        patch_u32(out, at + 20, 0);                      // annotations
        patch_u32(out, at + 24, class_data_offs[i]);
        patch_u32(out, at + 28, 0);                      // static values
    }

    // Header.
    static constexpr std::uint8_t kMagic[8] = {'d', 'e', 'x', '\n', '0', '3', '5', 0};
    std::copy(std::begin(kMagic), std::end(kMagic), out.begin());
    const auto file_size = static_cast<std::uint32_t>(out.size());
    patch_u32(out, 32, file_size);
    patch_u32(out, 36, kHeader);
    patch_u32(out, 40, 0x12345678);
    patch_u32(out, 52, map_off);
    patch_u32(out, 56, n_strings);
    patch_u32(out, 60, n_strings ? string_ids_off : 0);
    patch_u32(out, 64, n_types);
    patch_u32(out, 68, n_types ? type_ids_off : 0);
    patch_u32(out, 72, n_protos);
    patch_u32(out, 76, n_protos ? proto_ids_off : 0);
    patch_u32(out, 88, n_methods);
    patch_u32(out, 92, n_methods ? method_ids_off : 0);
    patch_u32(out, 96, n_classes);
    patch_u32(out, 100, n_classes ? class_defs_off : 0);
    patch_u32(out, 104, file_size - data_off);
    patch_u32(out, 108, data_off);

    SHA1(out.data() + 32, out.size() - 32, out.data() + 12);
    patch_u32(out, 8, static_cast<std::uint32_t>(adler32(1L, out.data() + 12, static_cast<uInt>(out.size() - 12))));
    return out;
}

}  // namespace analytika
