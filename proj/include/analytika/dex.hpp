#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "analytika/bytes.hpp"
#include "analytika/cancel.hpp"

namespace analytika {

struct DexHeader {
    std::string version;  // "035", "037", "038" or "039"
    std::uint32_t file_size = 0;
    std::uint32_t string_ids_size = 0, string_ids_off = 0;
    std::uint32_t type_ids_size = 0, type_ids_off = 0;
    std::uint32_t proto_ids_size = 0, proto_ids_off = 0;
    std::uint32_t method_ids_size = 0, method_ids_off = 0;
    std::uint32_t class_defs_size = 0, class_defs_off = 0;
};

struct MethodRef {
    std::string defining_class;  // dotted, e.g. android.media.MediaDrm
    std::string method_name;
    std::string shorty;

    bool operator==(const MethodRef&) const = default;
    auto operator<=>(const MethodRef&) const = default;
};

// One invoke-kind instruction. Names are resolved through the owning DexUnit.
struct Invocation {
    std::uint32_t caller_type = 0;   // index into DexUnit::types, a class defined in the unit
    std::uint32_t method_index = 0;  // index into DexUnit::methods
    std::uint32_t code_offset = 0;   // file offset of the invoke instruction
};

struct DexUnit {
    std::string entry_name;
    DexHeader header;
    std::vector<std::string> strings;
    std::vector<std::string> types;  // dotted class names; non-class descriptors verbatim
    std::vector<MethodRef> methods;
    std::vector<std::uint32_t> class_defs;  // type indices of defined classes
    std::vector<Invocation> invocations;

    const std::string& caller_class(const Invocation& inv) const { return types[inv.caller_type]; }
    const MethodRef& target(const Invocation& inv) const { return methods[inv.method_index]; }
};

// `Lpkg/sub/Name;` -> `pkg.sub.Name`; any other descriptor is returned unchanged.
std::string dotted_class_name(std::string_view descriptor);

// Parses a DEX image and extracts every invoke-virtual/super/direct/static/
// interface (and /range) instruction from every method body.
// Throws DexError{MalformedDex}; Cancelled when the deadline passes.
DexUnit parse_dex(ByteView bytes, std::string entry_name, const Deadline& deadline = Deadline::never());

// --- fixture construction -------------------------------------------------

struct FixtureClass {
    std::string caller_class;        // dotted
    std::vector<MethodRef> targets;  // one invoke-static each, in order
    std::uint32_t nop_padding = 0;   // nop units emitted before the invokes
};

struct FixtureDexSpec {
    std::vector<FixtureClass> classes;
    // Strings placed in the string pool without any type or method use.
    std::vector<std::string> extra_strings;
    // Every class_def method points at the first class's code item.
    bool alias_code_items = false;
};

// Emits a minimal, structurally valid DEX 035 image: sorted pools, one
// class_def per distinct caller with one static method `run()V` whose code
// is the requested invocations followed by return-void, a map_list, and
// correct checksum and signature fields. Callers named more than once are
// merged. Throws DexError{InvalidSpec} for non-identifier names.
Bytes build_fixture_dex(const FixtureDexSpec& spec);
Bytes build_fixture_dex(const std::vector<FixtureClass>& classes);

}  // namespace analytika
