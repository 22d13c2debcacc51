#pragma once

#include "glanoir/bibrecord.hpp"
#include "glanoir/strings.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace glanoir::meta {

// ---------------------------------------------------------------------------
// BibTeX

/// Emits `@type{id,` followed by one `  field = {value},` line per populated
/// field (author, title, journal|booktitle, year, volume, number, pages, url,
/// then extra fields by name) and a closing `}`. Braces inside values are
/// stripped and reported through `warnings`.
std::string bibtex_serialize(const BibRecord &record, Diagnostics *warnings = nullptr);

struct BibtexParseResult {
    std::vector<BibRecord> records;
    Diagnostics diagnostics;
};

/// Parses `@type{key, field = {value} | "value" | bareword, ...}` entries.
/// `@string` macros are honoured; `@comment` and `@preamble` are skipped.
/// Malformed entries are reported with line:column and parsing resumes at
/// the next `@`.
BibtexParseResult bibtex_parse(std::string_view text);

// ---------------------------------------------------------------------------
// COinS / Z39.88 KEV

inline constexpr std::string_view kContextVersion = "Z39.88-2004";

enum class CoinsFormat { journal, book };

std::string_view format_uri(CoinsFormat format) noexcept;

struct ContextObject {
    std::string version{kContextVersion};
    CoinsFormat format = CoinsFormat::journal;
    std::vector<std::pair<std::string, std::string>> pairs;

    const std::string *get(std::string_view key) const;
    std::vector<std::string> get_all(std::string_view key) const;

    friend bool operator==(const ContextObject &, const ContextObject &) = default;
};

ContextObject coins_encode(const BibRecord &record);

/// `ctx_ver=...&rft_val_fmt=...&key=value...`, percent-encoded, not HTML-escaped.
std::string coins_kev(const ContextObject &context);

/// `<span class="Z3988" title="..."></span>` with the KEV entity-escaped.
std::string coins_span(const ContextObject &context);

struct CoinsDecodeOptions {
    /// Accept `+` as an encoded space. Off: COinS uses `%20`.
    bool plus_as_space = false;
};

/// Decodes an (already HTML-unescaped) KEV payload. Throws BadContextObject
/// when ctx_ver or rft_val_fmt is missing or foreign.
ContextObject coins_decode(std::string_view kev, CoinsDecodeOptions options = {}, Diagnostics *diagnostics = nullptr);

/// The part of a record a ContextObject carries.
struct CoinsFields {
    CoinsFormat format = CoinsFormat::journal;
    std::optional<std::string> genre;
    std::string title;
    std::optional<std::string> journal;
    std::vector<std::string> authors;
    std::optional<std::string> date;
    std::optional<std::string> volume;
    std::optional<std::string> issue;
    std::optional<std::string> pages;

    friend bool operator==(const CoinsFields &, const CoinsFields &) = default;
};

CoinsFields coins_fields(const BibRecord &record);
CoinsFields coins_fields(const ContextObject &context);

/// Title payloads of every `class="Z3988"` span in an HTML page, unescaped.
std::vector<std::string> extract_coins(std::string_view html);

// ---------------------------------------------------------------------------
// RIS and Dublin Core

/// CRLF-terminated tagged lines from `TY  - ` through `ER  - `.
std::string ris_serialize(const BibRecord &record);
std::string_view ris_type(EntryType type) noexcept;

/// `<meta name="DC.*" content="...">` lines: title, creators, date,
/// identifier, type.
std::string dc_meta_emit(const BibRecord &record);
std::string_view dc_type(EntryType type) noexcept;

} // namespace glanoir::meta
