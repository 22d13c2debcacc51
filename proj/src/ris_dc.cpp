#include "glanoir/metafmt.hpp"

namespace glanoir::meta {

namespace {

std::string one_line(std::string_view value) {
    std::string out(value);
    for (auto &c : out)
        if (c == '\r' || c == '\n')
            c = ' ';
    return out;
}

} // namespace

std::string_view ris_type(EntryType type) noexcept {
    switch (type) {
    case EntryType::article: return "JOUR";
    case EntryType::inproceedings: return "CONF";
    case EntryType::book: return "BOOK";
    case EntryType::incollection: return "CHAP";
    case EntryType::phdthesis:
    case EntryType::mastersthesis: return "THES";
    case EntryType::misc: break;
    }
    return "GEN";
}

std::string ris_serialize(const BibRecord &r) {
    std::string out;
    const auto line = [&](std::string_view tag, std::string_view value) {
        out += tag;
        out += "  - ";
        out += one_line(value);
        out += "\r\n";
    };
    line("TY", ris_type(r.type));
    for (const auto &a : r.authors)
        line("AU", a);
    line("TI", r.title);
    if (r.year)
        line("PY", std::to_string(*r.year));
    if (r.venue)
        line("JO", *r.venue);
    if (r.volume)
        line("VL", *r.volume);
    if (r.number)
        line("IS", *r.number);
    if (r.pages) {
        const auto dash = r.pages->find('-');
        if (dash != std::string::npos && dash > 0 && dash + 1 < r.pages->size() &&
            r.pages->find('-', dash + 1) == std::string::npos) {
            line("SP", r.pages->substr(0, dash));
            line("EP", r.pages->substr(dash + 1));
        } else {
            line("SP", *r.pages);
        }
    }
    if (r.url)
        line("UR", *r.url);
    line("ER", "");
    return out;
}

std::string_view dc_type(EntryType type) noexcept {
    switch (type) {
    case EntryType::article:
    case EntryType::inproceedings: return "Article";
    case EntryType::book:
    case EntryType::incollection: return "Book";
    default: return "Text";
    }
}

std::string dc_meta_emit(const BibRecord &r) {
    std::string out;
    const auto meta = [&](std::string_view name, std::string_view content) {
        out += "<meta name=\"DC.";
        out += name;
        out += "\" content=\"";
        out += html_escape(content);
        out += "\">\n";
    };
    meta("title", r.title);
    for (const auto &a : r.authors)
        meta("creator", a);
    if (r.year)
        meta("date", std::to_string(*r.year));
    if (r.url)
        meta("identifier", *r.url);
    meta("type", dc_type(r.type));
    return out;
}

} // namespace glanoir::meta
