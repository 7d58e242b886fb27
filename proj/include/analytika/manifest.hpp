#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "analytika/bytes.hpp"

namespace analytika {

// Typed value whose kind the framework does not interpret (references,
// floats, dimensions, colors ...).
struct RawValue {
    std::uint8_t data_type = 0;
    std::uint32_t data = 0;
    bool operator==(const RawValue&) const = default;
};

using AttrValue = std::variant<std::string, std::int32_t, bool, RawValue>;

struct XmlAttribute {
    std::string ns;  // namespace URI, empty when none
    std::string name;
    AttrValue value;
};

struct XmlElement {
    std::string ns;
    std::string name;
    std::vector<XmlAttribute> attributes;
    std::vector<XmlElement> children;

    // First attribute with this local name, regardless of namespace.
    const XmlAttribute* attribute(std::string_view local_name) const;
};

// Decodes an Android binary XML (AXML) document into an element tree.
// Throws ManifestError{MalformedManifest}.
XmlElement parse_binary_xml(ByteView bytes);

struct ManifestInfo {
    std::string package_name;
    std::vector<std::string> permissions;
    std::optional<int> min_sdk;
};

// Throws ManifestError{MissingPackageName} when the root carries no package.
ManifestInfo extract_manifest_info(const XmlElement& root);

}  // namespace analytika
