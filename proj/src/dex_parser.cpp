#include <algorithm>
#include <array>

#include "analytika/dex.hpp"
#include "analytika/error.hpp"

namespace analytika {
namespace {

constexpr std::size_t kHeaderSize = 0x70;
constexpr std::uint32_t kEndianConstant = 0x12345678;

constexpr std::uint16_t kPackedSwitchPayload = 0x0100;
constexpr std::uint16_t kSparseSwitchPayload = 0x0200;
constexpr std::uint16_t kFillArrayDataPayload = 0x0300;

[[noreturn]] void malformed(const std::string& why) {
    throw DexError(DexErrc::MalformedDex, "malformed dex: " + why);
}

// Instruction width in 16-bit code units, indexed by opcode. Unused opcodes
// are treated as single-unit (format 10x).
constexpr std::array<std::uint8_t, 256> make_width_table() {
    std::array<std::uint8_t, 256> w{};
    for (auto& x : w) x = 1;
    auto set = [&](int lo, int hi, std::uint8_t n) {
        for (int op = lo; op <= hi; ++op) w[op] = n;
    };
    set(0x02, 0x02, 2);  // move/from16
    set(0x03, 0x03, 3);  // move/16
    set(0x05, 0x05, 2);
    set(0x06, 0x06, 3);
    set(0x08, 0x08, 2);
    set(0x09, 0x09, 3);
    set(0x13, 0x13, 2);  // const/16
    set(0x14, 0x14, 3);  // const
    set(0x15, 0x16, 2);  // const/high16, const-wide/16
    set(0x17, 0x17, 3);  // const-wide/32
    set(0x18, 0x18, 5);  // const-wide
    set(0x19, 0x1a, 2);  // const-wide/high16, const-string
    set(0x1b, 0x1b, 3);  // const-string/jumbo
    set(0x1c, 0x1c, 2);  // const-class
    set(0x1f, 0x20, 2);  // check-cast, instance-of
    set(0x22, 0x23, 2);  // new-instance, new-array
    set(0x24, 0x26, 3);  // filled-new-array(/range), fill-array-data
    set(0x29, 0x29, 2);  // goto/16
    set(0x2a, 0x2c, 3);  // goto/32, packed-switch, sparse-switch
    set(0x2d, 0x3d, 2);  // cmp*, if-*
    set(0x44, 0x6d, 2);  // aget/aput, iget/iput, sget/sput
    set(0x6e, 0x72, 3);  // invoke-kind
    set(0x74, 0x78, 3);  // invoke-kind/range
    set(0x90, 0xaf, 2);  // binop
    set(0xd0, 0xe2, 2);  // binop/lit16, binop/lit8
    set(0xfa, 0xfb, 4);  // invoke-polymorphic(/range)
    set(0xfc, 0xfd, 3);  // invoke-custom(/range)
    set(0xfe, 0xff, 2);  // const-method-handle, const-method-type
    return w;
}
constexpr auto kWidth = make_width_table();

constexpr bool is_invoke(std::uint8_t op) {
    return (op >= 0x6e && op <= 0x72) || (op >= 0x74 && op <= 0x78);
}

class Reader {
public:
    explicit Reader(ByteView b) : b_(b) {}

    std::uint32_t u32(std::uint64_t off) const {
        if (!in_bounds(off, 4, b_.size())) malformed("read past end at " + std::to_string(off));
        return load_u32(&b_[off]);
    }
    std::uint16_t u16(std::uint64_t off) const {
        if (!in_bounds(off, 2, b_.size())) malformed("read past end at " + std::to_string(off));
        return load_u16(&b_[off]);
    }

    std::uint32_t uleb(std::uint64_t& off) const {
        std::uint32_t result = 0;
        for (int i = 0; i < 5; ++i) {
            if (off >= b_.size()) malformed("uleb128 past end");
            const std::uint8_t byte = b_[off++];
            if (i == 4 && (byte & 0xF0) != 0) malformed("invalid uleb128");
            result |= static_cast<std::uint32_t>(byte & 0x7F) << (7 * i);
            if ((byte & 0x80) == 0) return result;
        }
        malformed("invalid uleb128");
    }

    void region(std::uint32_t count, std::uint32_t off, std::uint32_t item, const char* what) const {
        if (count == 0) return;
        if (!in_bounds(off, std::uint64_t{count} * item, b_.size()))
            malformed(std::string(what) + " region out of bounds");
    }

    std::string string_data(std::uint32_t off) const {
        std::uint64_t p = off;
        uleb(p);  // utf16 length; the MUTF-8 payload is kept as bytes
        const auto* begin = b_.data() + p;
        const auto* end = b_.data() + b_.size();
        const auto* nul = std::find(begin, end, std::uint8_t{0});
        if (nul == end) malformed("unterminated string");
        return std::string(reinterpret_cast<const char*>(begin), static_cast<std::size_t>(nul - begin));
    }

    std::size_t size() const { return b_.size(); }

private:
    ByteView b_;
};

}  // namespace

std::string dotted_class_name(std::string_view d) {
    if (d.size() >= 2 && d.front() == 'L' && d.back() == ';') {
        std::string out(d.substr(1, d.size() - 2));
        std::replace(out.begin(), out.end(), '/', '.');
        return out;
    }
    return std::string(d);
}

DexUnit parse_dex(ByteView bytes, std::string entry_name, const Deadline& deadline) {
    if (bytes.size() < kHeaderSize) malformed("shorter than header");
    static constexpr std::string_view kMagic = "dex\n";
    if (std::string_view(reinterpret_cast<const char*>(bytes.data()), 4) != kMagic || bytes[7] != 0)
        malformed("bad magic");
    DexUnit unit;
    unit.entry_name = std::move(entry_name);
    DexHeader& h = unit.header;
    h.version.assign(reinterpret_cast<const char*>(bytes.data()) + 4, 3);
    if (h.version != "035" && h.version != "037" && h.version != "038" && h.version != "039")
        malformed("unsupported version " + h.version);

    h.file_size = load_u32(&bytes[32]);
    if (load_u32(&bytes[36]) != kHeaderSize) malformed("bad header size");
    if (load_u32(&bytes[40]) != kEndianConstant) malformed("unsupported endianness");
    if (h.file_size < kHeaderSize || h.file_size > bytes.size()) malformed("bad file size");
    const Reader r(bytes.first(h.file_size));

    h.string_ids_size = load_u32(&bytes[56]);
    h.string_ids_off = load_u32(&bytes[60]);
    h.type_ids_size = load_u32(&bytes[64]);
    h.type_ids_off = load_u32(&bytes[68]);
    h.proto_ids_size = load_u32(&bytes[72]);
    h.proto_ids_off = load_u32(&bytes[76]);
    h.method_ids_size = load_u32(&bytes[88]);
    h.method_ids_off = load_u32(&bytes[92]);
    h.class_defs_size = load_u32(&bytes[96]);
    h.class_defs_off = load_u32(&bytes[100]);
    r.region(h.string_ids_size, h.string_ids_off, 4, "string_ids");
    r.region(h.type_ids_size, h.type_ids_off, 4, "type_ids");
    r.region(h.proto_ids_size, h.proto_ids_off, 12, "proto_ids");
    r.region(h.method_ids_size, h.method_ids_off, 8, "method_ids");
    r.region(h.class_defs_size, h.class_defs_off, 32, "class_defs");

    unit.strings.reserve(h.string_ids_size);
    for (std::uint32_t i = 0; i < h.string_ids_size; ++i) {
        deadline.poll();
        unit.strings.push_back(r.string_data(r.u32(h.string_ids_off + 4ull * i)));
    }
    auto string_at = [&](std::uint32_t idx) -> const std::string& {
        if (idx >= unit.strings.size()) malformed("string index out of range");
        return unit.strings[idx];
    };

    unit.types.reserve(h.type_ids_size);
    for (std::uint32_t i = 0; i < h.type_ids_size; ++i)
        unit.types.push_back(dotted_class_name(string_at(r.u32(h.type_ids_off + 4ull * i))));
    auto type_at = [&](std::uint32_t idx) -> const std::string& {
        if (idx >= unit.types.size()) malformed("type index out of range");
        return unit.types[idx];
    };

    std::vector<std::uint32_t> shorty_of_proto(h.proto_ids_size);
    for (std::uint32_t i = 0; i < h.proto_ids_size; ++i) {
        shorty_of_proto[i] = r.u32(h.proto_ids_off + 12ull * i);
        string_at(shorty_of_proto[i]);
    }

    unit.methods.reserve(h.method_ids_size);
    for (std::uint32_t i = 0; i < h.method_ids_size; ++i) {
        const std::uint64_t at = h.method_ids_off + 8ull * i;
        const std::uint16_t class_idx = r.u16(at);
        const std::uint16_t proto_idx = r.u16(at + 2);
        if (proto_idx >= shorty_of_proto.size()) malformed("proto index out of range");
        // Locals first: GCC leaks earlier members when an aggregate initializer throws.
        const std::string& cls = type_at(class_idx);
        const std::string& name = string_at(r.u32(at + 4));
        unit.methods.push_back(MethodRef{cls, name, unit.strings[shorty_of_proto[proto_idx]]});
    }

    for (std::uint32_t c = 0; c < h.class_defs_size; ++c) {
        deadline.check();
        const std::uint64_t def = h.class_defs_off + 32ull * c;
        const std::uint32_t class_idx = r.u32(def);
        type_at(class_idx);
        unit.class_defs.push_back(class_idx);
        const std::uint32_t class_data_off = r.u32(def + 24);
        if (class_data_off == 0) continue;

        std::uint64_t p = class_data_off;
        const std::uint32_t static_fields = r.uleb(p);
        const std::uint32_t instance_fields = r.uleb(p);
        const std::uint32_t direct_methods = r.uleb(p);
        const std::uint32_t virtual_methods = r.uleb(p);
        for (std::uint64_t f = 0; f < std::uint64_t{static_fields} + instance_fields; ++f) {
            deadline.poll();
            r.uleb(p);
            r.uleb(p);
        }
        for (int list = 0; list < 2; ++list) {
            const std::uint32_t count = list == 0 ? direct_methods : virtual_methods;
            std::uint64_t method_idx = 0;
            for (std::uint32_t m = 0; m < count; ++m) {
                method_idx += r.uleb(p);
                r.uleb(p);  // access flags
                const std::uint32_t code_off = r.uleb(p);
                if (method_idx >= h.method_ids_size) malformed("class method index out of range");
                if (code_off == 0) continue;

                const std::uint32_t insns_size = r.u32(code_off + 12ull);
                const std::uint64_t insns_off = code_off + 16ull;
                if (!in_bounds(insns_off, std::uint64_t{insns_size} * 2, r.size()))
                    malformed("code item out of bounds");
                const std::uint8_t* insns = bytes.data() + insns_off;
                auto unit_at = [&](std::uint64_t pc) { return load_u16(insns + 2 * pc); };

                std::uint64_t pc = 0;
                while (pc < insns_size) {
                    deadline.poll();
                    const std::uint16_t first = unit_at(pc);
                    const std::uint8_t op = first & 0xFF;
                    std::uint64_t width = kWidth[op];
                    const std::uint64_t left = insns_size - pc;
                    if (op == 0x00 && first != 0) {
                        if (first == kPackedSwitchPayload) {
                            if (left < 2) malformed("truncated packed-switch payload");
                            width = 4 + 2ull * unit_at(pc + 1);
                        } else if (first == kSparseSwitchPayload) {
                            if (left < 2) malformed("truncated sparse-switch payload");
                            width = 2 + 4ull * unit_at(pc + 1);
                        } else if (first == kFillArrayDataPayload) {
                            if (left < 4) malformed("truncated fill-array-data payload");
                            const std::uint64_t elem = unit_at(pc + 1);
                            const std::uint64_t n = unit_at(pc + 2) | (std::uint64_t{unit_at(pc + 3)} << 16);
                            width = 4 + (elem * n + 1) / 2;
                        }
                    }
                    if (width > left) malformed("instruction walk escapes code region");
                    if (is_invoke(op)) {
                        const std::uint16_t target = unit_at(pc + 1);
                        if (target >= h.method_ids_size) malformed("invoke method index out of range");
                        unit.invocations.push_back(
                            Invocation{class_idx, target, static_cast<std::uint32_t>(insns_off + 2 * pc)});
                    }
                    pc += width;
                }
            }
        }
    }
    return unit;
}

}  // namespace analytika
