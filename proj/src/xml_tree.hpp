#pragma once

// Minimal element tree built from libexpat callbacks. Internal to the config
// parser; not part of the public headers.

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace partsim::detail {

struct XmlElement {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::vector<std::unique_ptr<XmlElement>> children;
    std::string text;
    unsigned long line = 0;

    [[nodiscard]] std::optional<std::string_view> attribute(std::string_view key) const
    {
        for (const auto& [k, v] : attributes) {
            if (k == key) {
                return std::string_view{v};
            }
        }
        return std::nullopt;
    }
};

/// Throws partsim::SyntaxError on malformed input.
std::unique_ptr<XmlElement> parse_xml(std::string_view text);

}  // namespace partsim::detail
