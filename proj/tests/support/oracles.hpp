#pragma once

// Independent reference implementations used to check the library. They
// share no code with the code under test beyond the text pipeline.

#include "glanoir/bibrecord.hpp"
#include "glanoir/textproc.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#ifndef GLANOIR_TEST_FIXTURES
#error "GLANOIR_TEST_FIXTURES must point at tests/fixtures"
#endif

namespace oracle {

inline std::filesystem::path fixture(std::string_view name) {
    return std::filesystem::path(GLANOIR_TEST_FIXTURES) / name;
}
inline std::filesystem::path data(std::string_view name) {
    return std::filesystem::path(GLANOIR_TEST_DATA) / name;
}
inline std::filesystem::path golden(std::string_view name) {
    return std::filesystem::path(GLANOIR_TEST_GOLDEN) / name;
}

inline std::string slurp(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// |A ∩ B| / sqrt(|A| |B|) over sets.
inline double binary_cosine(const std::set<std::string> &a, const std::set<std::string> &b) {
    if (a.empty() || b.empty())
        return 0.0;
    std::size_t common = 0;
    for (const auto &x : a)
        common += b.count(x);
    return static_cast<double>(common) / std::sqrt(static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

struct ScanHit {
    std::string id;
    double score;
    bool operator==(const ScanHit &) const = default;
};

/// Brute-force search: scores every record, keeps positives, orders by
/// score desc, year desc (absent last), id asc.
inline std::vector<ScanHit> scan_search(const std::vector<glanoir::BibRecord> &records,
                                        const glanoir::text::Pipeline &pipeline, glanoir::text::Language lang,
                                        const std::set<std::string> &query, std::size_t limit) {
    struct Row {
        ScanHit hit;
        std::optional<int> year;
    };
    std::vector<Row> rows;
    for (const auto &r : records) {
        const auto bag = pipeline.analyze(r.title, lang);
        const std::set<std::string> title(bag.lemmas.begin(), bag.lemmas.end());
        const double s = binary_cosine(query, title);
        if (s > 0.0)
            rows.push_back({{r.id, s}, r.year});
    }
    std::sort(rows.begin(), rows.end(), [](const Row &a, const Row &b) {
        if (a.hit.score != b.hit.score)
            return a.hit.score > b.hit.score;
        if (a.year.has_value() != b.year.has_value())
            return a.year.has_value();
        if (a.year && *a.year != *b.year)
            return *a.year > *b.year;
        return a.hit.id < b.hit.id;
    });
    std::vector<ScanHit> out;
    for (std::size_t i = 0; i < rows.size() && i < limit; ++i)
        out.push_back(rows[i].hit);
    return out;
}

inline bool is_unreserved(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '.' ||
           c == '_' || c == '~';
}

inline bool is_hex(char c) {
    return (c >= '0' && c <= '9') || (c >= 'A' && c <= 'F') || (c >= 'a' && c <= 'f');
}

/// Characters allowed raw in a span title: unreserved, `%`, `=`, and the
/// `&amp;` escape for the pair separator.
inline bool title_attribute_ok(std::string_view attr, std::string *why = nullptr) {
    for (std::size_t i = 0; i < attr.size(); ++i) {
        const char c = attr[i];
        if (is_unreserved(c) || c == '%' || c == '=')
            continue;
        if (c == '&' && attr.substr(i, 5) == "&amp;") {
            i += 4;
            continue;
        }
        if (why)
            *why = "raw character '" + std::string(1, c) + "' at " + std::to_string(i);
        return false;
    }
    return true;
}

/// KEV grammar: pair ("&" pair)*, pair = token "=" token, token =
/// (unreserved | "%" HEX HEX)*. The first pair must be ctx_ver, the second
/// rft_val_fmt; other keys come from the referent subset.
inline bool kev_valid(std::string_view kev, std::string *why = nullptr) {
    static const std::set<std::string, std::less<>> keys{"rft.atitle", "rft.btitle", "rft.jtitle", "rft.au",
                                                         "rft.date",   "rft.volume", "rft.issue",  "rft.spage",
                                                         "rft.epage",  "rft.pages",  "rft.genre"};
    const auto fail = [&](std::string msg) {
        if (why)
            *why = std::move(msg);
        return false;
    };
    const auto token_ok = [](std::string_view t) {
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (is_unreserved(t[i]))
                continue;
            if (t[i] == '%' && i + 2 < t.size() + 0 && is_hex(t[i + 1]) && is_hex(t[i + 2])) {
                i += 2;
                continue;
            }
            return false;
        }
        return true;
    };
    std::size_t index = 0, start = 0;
    std::set<std::string> singles;
    while (start <= kev.size()) {
        const auto amp = kev.find('&', start);
        const auto pair = kev.substr(start, amp == std::string_view::npos ? std::string_view::npos : amp - start);
        const auto eq = pair.find('=');
        if (eq == std::string_view::npos)
            return fail("pair without '=': " + std::string(pair));
        const auto key = pair.substr(0, eq);
        const auto value = pair.substr(eq + 1);
        if (!token_ok(key) || !token_ok(value))
            return fail("bad token in pair: " + std::string(pair));
        if (index == 0 && key != "ctx_ver")
            return fail("first key is not ctx_ver");
        if (index == 0 && value != "Z39.88-2004")
            return fail("ctx_ver is not Z39.88-2004");
        if (index == 1 && key != "rft_val_fmt")
            return fail("second key is not rft_val_fmt");
        if (index == 1 && value != "info%3Aofi%2Ffmt%3Akev%3Amtx%3Ajournal" &&
            value != "info%3Aofi%2Ffmt%3Akev%3Amtx%3Abook")
            return fail("unknown rft_val_fmt");
        if (index >= 2) {
            if (!keys.count(key))
                return fail("key outside the referent subset: " + std::string(key));
            if (key != "rft.au" && !singles.insert(std::string(key)).second)
                return fail("repeated key " + std::string(key));
        }
        ++index;
        if (amp == std::string_view::npos)
            break;
        start = amp + 1;
    }
    if (index < 2)
        return fail("missing ctx_ver or rft_val_fmt");
    return true;
}

/// `(TAG␣␣-␣value CRLF)+`, TY first, `ER  - ` last, two-letter tags.
inline bool ris_valid(std::string_view text, std::string *why = nullptr) {
    const auto fail = [&](std::string msg) {
        if (why)
            *why = std::move(msg);
        return false;
    };
    if (text.empty())
        return fail("empty");
    std::vector<std::string> tags;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto eol = text.find("\r\n", pos);
        if (eol == std::string_view::npos)
            return fail("line without CRLF");
        const auto line = text.substr(pos, eol - pos);
        if (line.size() < 6 || line.substr(2, 4) != "  - ")
            return fail("bad line: " + std::string(line));
        const auto tag = line.substr(0, 2);
        for (char c : tag)
            if (!((c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9')))
                return fail("bad tag: " + std::string(tag));
        if (line.find('\n') != std::string_view::npos || line.find('\r') != std::string_view::npos)
            return fail("embedded line break");
        tags.emplace_back(tag);
        if (tag == "ER" && line.size() != 6)
            return fail("ER carries a value");
        pos = eol + 2;
    }
    if (tags.front() != "TY")
        return fail("first tag is " + tags.front());
    if (tags.back() != "ER")
        return fail("last tag is " + tags.back());
    return true;
}

} // namespace oracle
