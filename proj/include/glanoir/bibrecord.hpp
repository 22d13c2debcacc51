#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace glanoir {

enum class EntryType { article, inproceedings, book, incollection, phdthesis, mastersthesis, misc };

inline constexpr std::array<EntryType, 7> kEntryTypes{EntryType::article,   EntryType::inproceedings,
                                                      EntryType::book,      EntryType::incollection,
                                                      EntryType::phdthesis, EntryType::mastersthesis,
                                                      EntryType::misc};

std::string_view to_string(EntryType type) noexcept;
std::optional<EntryType> parse_entry_type(std::string_view name) noexcept;

/// One bibliographic notice.
struct BibRecord {
    std::string id;
    EntryType type = EntryType::misc;
    std::string title;
    std::vector<std::string> authors;
    std::optional<int> year;
    std::optional<std::string> venue; // journal or booktitle
    std::optional<std::string> pages;
    std::optional<std::string> volume;
    std::optional<std::string> number;
    std::optional<std::string> url;
    std::map<std::string, std::string> extra;

    friend bool operator==(const BibRecord &, const BibRecord &) = default;
};

/// Non-empty id and title, and a four-digit positive year when present.
bool is_valid(const BibRecord &record, std::string *why = nullptr);

} // namespace glanoir
