#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace glanoir {

using Diagnostics = std::vector<std::string>;

std::string_view trim(std::string_view s) noexcept;
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string> &parts, std::string_view sep);
std::string ascii_lower(std::string_view s);

/// Collapses runs of ASCII whitespace into one space and trims the ends.
std::string collapse_whitespace(std::string_view s);

/// Escapes `& < > "` for use in HTML text and double-quoted attributes.
std::string html_escape(std::string_view s);

/// Decodes the five XML entities plus numeric character references.
/// Anything else is left verbatim.
std::string html_unescape(std::string_view s);

/// Percent-encodes every byte outside the RFC 3986 unreserved set
/// `A-Z a-z 0-9 - . _ ~`. Hex digits are uppercase.
std::string percent_encode(std::string_view s);

struct PercentDecodeOptions {
    bool plus_as_space = false;
};

/// Strict percent-decoding. Malformed escapes are kept literally and a
/// diagnostic is appended when `diags` is non-null.
std::string percent_decode(std::string_view s, PercentDecodeOptions opts = {}, Diagnostics *diags = nullptr);

void append_utf8(std::string &out, char32_t cp);

/// Number of code points in a UTF-8 string (invalid bytes count as one each).
std::size_t utf8_length(std::string_view s) noexcept;

/// Parses a strictly four-digit positive year.
std::optional<int> parse_year(std::string_view s) noexcept;

bool is_http_url(std::string_view s) noexcept;

} // namespace glanoir
