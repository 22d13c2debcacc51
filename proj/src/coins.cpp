#include "glanoir/error.hpp"
#include "glanoir/metafmt.hpp"

#include <set>

namespace glanoir::meta {

namespace {

constexpr std::string_view kJournalUri = "info:ofi/fmt:kev:mtx:journal";
constexpr std::string_view kBookUri = "info:ofi/fmt:kev:mtx:book";

bool is_journal_type(EntryType t) noexcept {
    return t == EntryType::article || t == EntryType::inproceedings;
}

/// `a-b` with exactly one hyphen and both sides non-empty.
std::optional<std::pair<std::string, std::string>> split_page_range(std::string_view pages) {
    const auto dash = pages.find('-');
    if (dash == std::string_view::npos || dash == 0 || dash + 1 == pages.size())
        return std::nullopt;
    if (pages.find('-', dash + 1) != std::string_view::npos)
        return std::nullopt;
    return std::pair{std::string(pages.substr(0, dash)), std::string(pages.substr(dash + 1))};
}

void append_pair(std::string &out, std::string_view key, std::string_view value) {
    out += '&';
    out += percent_encode(key);
    out += '=';
    out += percent_encode(value);
}

} // namespace

std::string_view format_uri(CoinsFormat format) noexcept {
    return format == CoinsFormat::journal ? kJournalUri : kBookUri;
}

const std::string *ContextObject::get(std::string_view key) const {
    for (const auto &[k, v] : pairs)
        if (k == key)
            return &v;
    return nullptr;
}

std::vector<std::string> ContextObject::get_all(std::string_view key) const {
    std::vector<std::string> out;
    for (const auto &[k, v] : pairs)
        if (k == key)
            out.push_back(v);
    return out;
}

ContextObject coins_encode(const BibRecord &r) {
    ContextObject c;
    const bool journal = is_journal_type(r.type);
    c.format = journal ? CoinsFormat::journal : CoinsFormat::book;
    auto &p = c.pairs;
    if (journal) {
        p.emplace_back("rft.genre", r.type == EntryType::article ? "article" : "proceeding");
        p.emplace_back("rft.atitle", r.title);
        if (r.venue)
            p.emplace_back("rft.jtitle", *r.venue);
    } else {
        p.emplace_back("rft.btitle", r.title);
    }
    for (const auto &a : r.authors)
        p.emplace_back("rft.au", a);
    if (r.year)
        p.emplace_back("rft.date", std::to_string(*r.year));
    if (r.volume)
        p.emplace_back("rft.volume", *r.volume);
    if (r.number)
        p.emplace_back("rft.issue", *r.number);
    if (r.pages) {
        if (auto range = split_page_range(*r.pages)) {
            p.emplace_back("rft.spage", range->first);
            p.emplace_back("rft.epage", range->second);
        } else {
            p.emplace_back("rft.pages", *r.pages);
        }
    }
    return c;
}

std::string coins_kev(const ContextObject &c) {
    std::string out = "ctx_ver=" + percent_encode(c.version);
    append_pair(out, "rft_val_fmt", format_uri(c.format));
    for (const auto &[k, v] : c.pairs)
        append_pair(out, k, v);
    return out;
}

std::string coins_span(const ContextObject &c) {
    return "<span class=\"Z3988\" title=\"" + html_escape(coins_kev(c)) + "\"></span>";
}

ContextObject coins_decode(std::string_view kev, CoinsDecodeOptions options, Diagnostics *diagnostics) {
    const PercentDecodeOptions pct{.plus_as_space = options.plus_as_space};
    ContextObject c;
    bool have_version = false;
    bool have_format = false;
    std::set<std::string> seen;
    for (const auto &part : split(kev, '&')) {
        if (part.empty())
            continue;
        const auto eq = part.find('=');
        const auto key = percent_decode(std::string_view(part).substr(0, eq), pct, diagnostics);
        const auto value =
            eq == std::string::npos ? std::string() : percent_decode(std::string_view(part).substr(eq + 1), pct, diagnostics);
        if (key == "ctx_ver") {
            if (value != kContextVersion)
                throw BadContextObject("unsupported ctx_ver: " + value);
            have_version = true;
        } else if (key == "rft_val_fmt") {
            if (value == kJournalUri)
                c.format = CoinsFormat::journal;
            else if (value == kBookUri)
                c.format = CoinsFormat::book;
            else
                throw BadContextObject("unsupported rft_val_fmt: " + value);
            have_format = true;
        } else if (key != "rft.au" && !seen.insert(key).second) {
            if (diagnostics)
                diagnostics->push_back("repeated key " + key + " ignored");
        } else {
            c.pairs.emplace_back(key, value);
        }
    }
    if (!have_version)
        throw BadContextObject("missing ctx_ver");
    if (!have_format)
        throw BadContextObject("missing rft_val_fmt");
    return c;
}

CoinsFields coins_fields(const BibRecord &r) {
    CoinsFields f;
    const bool journal = is_journal_type(r.type);
    f.format = journal ? CoinsFormat::journal : CoinsFormat::book;
    if (journal) {
        f.genre = r.type == EntryType::article ? "article" : "proceeding";
        f.journal = r.venue;
    }
    f.title = r.title;
    f.authors = r.authors;
    if (r.year)
        f.date = std::to_string(*r.year);
    f.volume = r.volume;
    f.issue = r.number;
    f.pages = r.pages;
    return f;
}

CoinsFields coins_fields(const ContextObject &c) {
    CoinsFields f;
    f.format = c.format;
    const auto opt = [&](std::string_view key) -> std::optional<std::string> {
        if (const auto *v = c.get(key))
            return *v;
        return std::nullopt;
    };
    f.genre = opt("rft.genre");
    f.title = opt(c.format == CoinsFormat::journal ? "rft.atitle" : "rft.btitle").value_or("");
    f.journal = opt("rft.jtitle");
    f.authors = c.get_all("rft.au");
    f.date = opt("rft.date");
    f.volume = opt("rft.volume");
    f.issue = opt("rft.issue");
    f.pages = opt("rft.pages");
    if (!f.pages) {
        const auto spage = opt("rft.spage");
        const auto epage = opt("rft.epage");
        if (spage && epage)
            f.pages = *spage + "-" + *epage;
        else if (spage)
            f.pages = spage;
    }
    return f;
}

std::vector<std::string> extract_coins(std::string_view html) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while ((pos = html.find("<span", pos)) != std::string_view::npos) {
        const auto end = html.find('>', pos);
        if (end == std::string_view::npos)
            break;
        const auto tag = html.substr(pos, end - pos);
        pos = end;
        if (tag.find("class=\"Z3988\"") == std::string_view::npos)
            continue;
        const auto t = tag.find(" title=\"");
        if (t == std::string_view::npos)
            continue;
        const auto start = t + 8;
        const auto close = tag.find('"', start);
        if (close == std::string_view::npos)
            continue;
        out.push_back(html_unescape(tag.substr(start, close - start)));
    }
    return out;
}

} // namespace glanoir::meta
