#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace glanoir::xml {

/// A parsed element. Names are split into namespace URI and local name;
/// attributes are keyed by local name, or `uri|local` when namespaced.
struct Element {
    std::string ns;
    std::string name;
    std::map<std::string, std::string> attributes;
    std::vector<Element> children;
    /// Character data of this element and all descendants, in document order.
    std::string text;

    const Element *child(std::string_view local, std::string_view ns_uri = {}) const;
    std::vector<const Element *> children_named(std::string_view local, std::string_view ns_uri = {}) const;
    const std::string *attribute(std::string_view key) const;
};

/// Parses a complete in-memory document. Throws MalformedXml with a
/// line/column message on the first well-formedness error.
Element parse(std::string_view document);

} // namespace glanoir::xml
