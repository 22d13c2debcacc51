#include "glanoir/xml.hpp"

#include "glanoir/error.hpp"

#include <expat.h>

#include <memory>

namespace glanoir::xml {

namespace {

constexpr char kNsSep = '|';

void split_name(const char *qualified, std::string &ns, std::string &local) {
    std::string_view q(qualified);
    const auto sep = q.find(kNsSep);
    if (sep == std::string_view::npos) {
        ns.clear();
        local.assign(q);
    } else {
        ns.assign(q.substr(0, sep));
        local.assign(q.substr(sep + 1));
    }
}

struct Builder {
    Element root;
    std::vector<Element *> stack;
    bool have_root = false;
};

void XMLCALL on_start(void *user, const XML_Char *name, const XML_Char **atts) {
    auto &b = *static_cast<Builder *>(user);
    Element *el;
    if (b.stack.empty()) {
        el = &b.root;
        b.have_root = true;
    } else {
        b.stack.back()->children.emplace_back();
        el = &b.stack.back()->children.back();
    }
    split_name(name, el->ns, el->name);
    for (int i = 0; atts[i]; i += 2)
        el->attributes.emplace(atts[i], atts[i + 1]);
    b.stack.push_back(el);
}

void XMLCALL on_end(void *user, const XML_Char *) {
    auto &b = *static_cast<Builder *>(user);
    Element *done = b.stack.back();
    b.stack.pop_back();
    if (!b.stack.empty())
        b.stack.back()->text += done->text;
}

void XMLCALL on_chars(void *user, const XML_Char *s, int len) {
    auto &b = *static_cast<Builder *>(user);
    if (!b.stack.empty())
        b.stack.back()->text.append(s, static_cast<std::size_t>(len));
}

struct ParserDeleter {
    void operator()(XML_ParserStruct *p) const { XML_ParserFree(p); }
};

} // namespace

const Element *Element::child(std::string_view local, std::string_view ns_uri) const {
    for (const auto &c : children)
        if (c.name == local && (ns_uri.empty() || c.ns == ns_uri))
            return &c;
    return nullptr;
}

std::vector<const Element *> Element::children_named(std::string_view local, std::string_view ns_uri) const {
    std::vector<const Element *> out;
    for (const auto &c : children)
        if (c.name == local && (ns_uri.empty() || c.ns == ns_uri))
            out.push_back(&c);
    return out;
}

const std::string *Element::attribute(std::string_view key) const {
    const auto it = attributes.find(std::string(key));
    return it == attributes.end() ? nullptr : &it->second;
}

Element parse(std::string_view document) {
    std::unique_ptr<XML_ParserStruct, ParserDeleter> parser(XML_ParserCreateNS(nullptr, kNsSep));
    if (!parser)
        throw MalformedXml("cannot allocate XML parser");
    Builder builder;
    XML_SetUserData(parser.get(), &builder);
    XML_SetElementHandler(parser.get(), on_start, on_end);
    XML_SetCharacterDataHandler(parser.get(), on_chars);
    if (XML_Parse(parser.get(), document.data(), static_cast<int>(document.size()), XML_TRUE) == XML_STATUS_ERROR) {
        throw MalformedXml(std::string(XML_ErrorString(XML_GetErrorCode(parser.get()))) + " at line " +
                           std::to_string(XML_GetCurrentLineNumber(parser.get())) + ", column " +
                           std::to_string(XML_GetCurrentColumnNumber(parser.get())));
    }
    if (!builder.have_root)
        throw MalformedXml("document has no root element");
    return std::move(builder.root);
}

} // namespace glanoir::xml
