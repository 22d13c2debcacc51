#include "glanoir/bibrecord.hpp"

namespace glanoir {

std::string_view to_string(EntryType type) noexcept {
    switch (type) {
    case EntryType::article: return "article";
    case EntryType::inproceedings: return "inproceedings";
    case EntryType::book: return "book";
    case EntryType::incollection: return "incollection";
    case EntryType::phdthesis: return "phdthesis";
    case EntryType::mastersthesis: return "mastersthesis";
    case EntryType::misc: return "misc";
    }
    return "misc";
}

std::optional<EntryType> parse_entry_type(std::string_view name) noexcept {
    for (auto t : kEntryTypes)
        if (to_string(t) == name)
            return t;
    return std::nullopt;
}

bool is_valid(const BibRecord &record, std::string *why) {
    const auto fail = [&](const char *msg) {
        if (why)
            *why = msg;
        return false;
    };
    if (record.id.empty())
        return fail("empty id");
    if (record.title.empty())
        return fail("empty title");
    if (record.year && (*record.year < 1000 || *record.year > 9999))
        return fail("year is not a four-digit positive integer");
    return true;
}

} // namespace glanoir
