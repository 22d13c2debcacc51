#include "glanoir/metafmt.hpp"

#include <array>
#include <map>

namespace glanoir::meta {

namespace {

constexpr std::array<std::string_view, 9> kReservedFields{"author", "title",  "journal", "booktitle", "year",
                                                          "volume", "number", "pages",   "url"};

bool is_reserved(std::string_view name) {
    for (auto f : kReservedFields)
        if (f == name)
            return true;
    return false;
}

std::string strip_braces(std::string_view value, std::string_view field, const std::string &id,
                         Diagnostics *warnings) {
    std::string out;
    out.reserve(value.size());
    bool stripped = false;
    for (char c : value) {
        if (c == '{' || c == '}')
            stripped = true;
        else
            out += c;
    }
    if (stripped && warnings)
        warnings->push_back("stripped braces from field '" + std::string(field) + "' of " + id);
    return out;
}

bool is_name_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-' ||
           c == ':' || c == '.' || c == '+' || c == '/';
}

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
}

/// Splits on " and " outside braces.
std::vector<std::string> split_authors(std::string_view value) {
    std::vector<std::string> out;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < value.size(); ++i) {
        if (value[i] == '{')
            ++depth;
        else if (value[i] == '}')
            --depth;
        else if (depth == 0 && value.substr(i).starts_with(" and ")) {
            if (auto name = trim(value.substr(start, i - start)); !name.empty())
                out.emplace_back(name);
            start = i + 5;
            i += 4;
        }
    }
    if (auto name = trim(value.substr(start)); !name.empty())
        out.emplace_back(name);
    return out;
}

struct SyntaxError {
    std::size_t offset;
    std::string message;
};

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    BibtexParseResult run() {
        BibtexParseResult result;
        while (true) {
            const auto at = s_.find('@', pos_);
            if (at == std::string_view::npos)
                break;
            pos_ = at;
            try {
                parse_entry(result);
            } catch (const SyntaxError &e) {
                result.diagnostics.push_back(where(e.offset) + ": " + e.message + "; entry skipped");
                if (pos_ <= at)
                    pos_ = at + 1;
            }
        }
        return result;
    }

private:
    std::string where(std::size_t offset) const {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i < offset && i < s_.size(); ++i) {
            if (s_[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        return std::to_string(line) + ":" + std::to_string(col);
    }

    [[noreturn]] void fail(const std::string &message) const { throw SyntaxError{pos_, message}; }

    void skip_ws() {
        while (pos_ < s_.size() && is_space(s_[pos_]))
            ++pos_;
    }

    bool at_end() const { return pos_ >= s_.size(); }

    std::string read_name() {
        const auto start = pos_;
        while (pos_ < s_.size() && is_name_char(s_[pos_]))
            ++pos_;
        return std::string(s_.substr(start, pos_ - start));
    }

    /// True when `i` starts a line whose first non-blank character is `@`.
    bool entry_starts_at_line(std::size_t i) const {
        if (s_[i] != '\n')
            return false;
        ++i;
        while (i < s_.size() && (s_[i] == ' ' || s_[i] == '\t'))
            ++i;
        return i < s_.size() && s_[i] == '@';
    }

    std::string read_delimited(char open, char close) {
        const auto start = pos_;
        ++pos_; // opening delimiter
        int depth = 0;
        while (pos_ < s_.size()) {
            const char c = s_[pos_];
            if (entry_starts_at_line(pos_)) {
                throw SyntaxError{start, "unbalanced braces (value runs into the next entry)"};
            }
            if (c == '{') {
                ++depth;
            } else if (c == '}') {
                if (depth == 0 && close == '}') {
                    ++pos_;
                    return std::string(s_.substr(start + 1, pos_ - start - 2));
                }
                if (depth == 0)
                    throw SyntaxError{pos_, "unbalanced closing brace"};
                --depth;
            } else if (c == close && close == '"' && depth == 0) {
                ++pos_;
                return std::string(s_.substr(start + 1, pos_ - start - 2));
            }
            ++pos_;
        }
        (void)open;
        throw SyntaxError{start, "unbalanced braces (value not closed before end of input)"};
    }

    std::string read_value() {
        std::string value;
        for (;;) {
            skip_ws();
            if (at_end())
                fail("unexpected end of input in field value");
            const char c = s_[pos_];
            if (c == '{') {
                value += read_delimited('{', '}');
            } else if (c == '"') {
                value += read_delimited('"', '"');
            } else if (is_name_char(c)) {
                const auto word = read_name();
                const auto macro = macros_.find(ascii_lower(word));
                value += macro == macros_.end() ? word : macro->second;
            } else {
                fail(std::string("unexpected character '") + c + "' in field value");
            }
            skip_ws();
            if (!at_end() && s_[pos_] == '#') {
                ++pos_;
                continue;
            }
            return value;
        }
    }

    void skip_balanced() {
        if (at_end() || (s_[pos_] != '{' && s_[pos_] != '('))
            fail("expected '{' or '('");
        const char close = s_[pos_] == '{' ? '}' : ')';
        int depth = 0;
        for (; pos_ < s_.size(); ++pos_) {
            const char c = s_[pos_];
            if (c == '{' || (close == ')' && c == '('))
                ++depth;
            else if (c == '}' || (close == ')' && c == ')')) {
                if (--depth == 0) {
                    ++pos_;
                    return;
                }
            }
        }
        throw SyntaxError{pos_, "unbalanced braces in block"};
    }

    std::vector<std::pair<std::string, std::string>> read_fields(char close) {
        std::vector<std::pair<std::string, std::string>> fields;
        for (;;) {
            skip_ws();
            if (at_end())
                fail("unexpected end of input inside entry");
            if (s_[pos_] == close) {
                ++pos_;
                return fields;
            }
            auto name = ascii_lower(read_name());
            if (name.empty())
                fail("expected field name");
            skip_ws();
            if (at_end() || s_[pos_] != '=')
                fail("expected '=' after field '" + name + "'");
            ++pos_;
            auto value = read_value();
            fields.emplace_back(std::move(name), std::move(value));
            skip_ws();
            if (!at_end() && s_[pos_] == ',')
                ++pos_;
            else if (at_end() || s_[pos_] != close)
                fail("expected ',' or end of entry");
        }
    }

    void parse_entry(BibtexParseResult &result) {
        const auto entry_start = pos_;
        ++pos_; // '@'
        const auto type_name = ascii_lower(read_name());
        skip_ws();
        if (type_name == "comment" || type_name == "preamble") {
            skip_balanced();
            return;
        }
        if (at_end() || (s_[pos_] != '{' && s_[pos_] != '('))
            fail("expected '{' after @" + type_name);
        const char close = s_[pos_] == '{' ? '}' : ')';
        ++pos_;

        if (type_name == "string") {
            for (auto &[k, v] : read_fields(close))
                macros_[k] = std::move(v);
            return;
        }

        skip_ws();
        const auto key_start = pos_;
        while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != close && !is_space(s_[pos_]))
            ++pos_;
        std::string key(s_.substr(key_start, pos_ - key_start));
        skip_ws();
        std::vector<std::pair<std::string, std::string>> fields;
        if (!at_end() && s_[pos_] == ',') {
            ++pos_;
            fields = read_fields(close);
        } else if (!at_end() && s_[pos_] == close) {
            ++pos_;
        } else {
            fail("expected ',' after entry key");
        }

        BibRecord r;
        r.id = std::move(key);
        if (auto t = parse_entry_type(type_name)) {
            r.type = *t;
        } else {
            r.type = EntryType::misc;
            result.diagnostics.push_back(where(entry_start) + ": entry type @" + type_name + " read as misc");
        }
        for (auto &[name, value] : fields) {
            if (name == "author") {
                r.authors = split_authors(value);
            } else if (name == "title") {
                r.title = std::move(value);
            } else if ((name == "journal" || name == "booktitle") && !r.venue) {
                r.venue = std::move(value);
            } else if (name == "year") {
                if (auto y = parse_year(trim(value)))
                    r.year = *y;
                else
                    result.diagnostics.push_back(where(entry_start) + ": ignoring non four-digit year '" + value +
                                                 "'");
            } else if (name == "volume") {
                r.volume = std::move(value);
            } else if (name == "number") {
                r.number = std::move(value);
            } else if (name == "pages") {
                r.pages = std::move(value);
            } else if (name == "url") {
                r.url = std::move(value);
            } else {
                r.extra[name] = std::move(value);
            }
        }
        if (r.id.empty()) {
            result.diagnostics.push_back(where(entry_start) + ": entry without key skipped");
            return;
        }
        if (r.title.empty()) {
            result.diagnostics.push_back(where(entry_start) + ": entry " + r.id + " has no title; skipped");
            return;
        }
        result.records.push_back(std::move(r));
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    std::map<std::string, std::string> macros_;
};

} // namespace

std::string bibtex_serialize(const BibRecord &r, Diagnostics *warnings) {
    std::string out;
    out += '@';
    out += to_string(r.type);
    out += '{';
    out += r.id;
    out += ",\n";
    const auto field = [&](std::string_view name, std::string_view value) {
        out += "  ";
        out += name;
        out += " = {";
        out += strip_braces(value, name, r.id, warnings);
        out += "},\n";
    };
    if (!r.authors.empty())
        field("author", join(r.authors, " and "));
    field("title", r.title);
    if (r.venue)
        field(r.type == EntryType::article ? "journal" : "booktitle", *r.venue);
    if (r.year)
        field("year", std::to_string(*r.year));
    if (r.volume)
        field("volume", *r.volume);
    if (r.number)
        field("number", *r.number);
    if (r.pages)
        field("pages", *r.pages);
    if (r.url)
        field("url", *r.url);
    for (const auto &[name, value] : r.extra) {
        if (is_reserved(name)) {
            if (warnings)
                warnings->push_back("extra field '" + name + "' of " + r.id + " shadows a standard field; omitted");
            continue;
        }
        field(name, value);
    }
    out += "}\n";
    return out;
}

BibtexParseResult bibtex_parse(std::string_view text) {
    return Parser(text).run();
}

} // namespace glanoir::meta
