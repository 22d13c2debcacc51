#pragma once

// Hand-rolled random generators for property tests. Every generator takes
// the engine explicitly so a failing seed can be replayed.

#include "glanoir/bibrecord.hpp"

#include <array>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace gen {

using Rng = std::mt19937_64;

inline std::size_t uniform(Rng &rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline bool coin(Rng &rng, double p = 0.5) {
    return std::bernoulli_distribution(p)(rng);
}

template <typename T, std::size_t N> const T &pick(Rng &rng, const std::array<T, N> &items) {
    return items[uniform(rng, 0, N - 1)];
}

template <typename T> const T &pick(Rng &rng, const std::vector<T> &items) {
    return items[uniform(rng, 0, items.size() - 1)];
}

inline std::size_t utf8_count(const std::string &s) {
    std::size_t n = 0;
    for (unsigned char c : s)
        n += (c & 0xC0) != 0x80;
    return n;
}

inline constexpr std::array<std::string_view, 10> kNonAscii{"é", "è", "ü", "ß", "ø", "ç", "中", "文", "–", "€"};

/// Printable ASCII (0x20..0x7E) plus some multi-byte code points, without
/// the characters in `forbidden`.
inline std::string printable(Rng &rng, std::size_t min_len, std::size_t max_len, std::string_view forbidden = {}) {
    std::string out;
    const auto len = uniform(rng, min_len, max_len);
    while (utf8_count(out) < len) {
        if (coin(rng, 0.08)) {
            out += pick(rng, kNonAscii);
            continue;
        }
        const char c = static_cast<char>(uniform(rng, 0x20, 0x7E));
        if (forbidden.find(c) != std::string_view::npos)
            continue;
        out += c;
    }
    return out;
}

/// No leading or trailing blank, no internal run of blanks.
inline std::string tidy(std::string s) {
    std::string out;
    for (char c : s) {
        if (c == ' ' && (out.empty() || out.back() == ' '))
            continue;
        out += c;
    }
    while (!out.empty() && out.back() == ' ')
        out.pop_back();
    return out;
}

inline constexpr std::array<std::string_view, 16> kGiven{"Ada",  "Alan",   "Grace",  "Edsger", "Barbara", "Donald",
                                                         "Marie", "Jean",  "Chloé",  "Hans",   "Linh",    "Ngozi",
                                                         "Kenji", "Zoë",   "Pierre", "Ravi"};
inline constexpr std::array<std::string_view, 16> kFamily{
    "Lovelace", "Turing",   "Hopper", "Dijkstra", "Liskov", "Knuth",  "Curie", "Dupont",
    "Lefèvre",  "Müller",   "Nguyen", "Okafor",   "Tanaka", "Smith",  "Roe",   "O'Brien"};

inline std::string author(Rng &rng) {
    std::string name = std::string(pick(rng, kGiven)) + " " + std::string(pick(rng, kFamily));
    if (coin(rng, 0.1))
        name += " 000" + std::to_string(uniform(rng, 1, 9));
    return name;
}

inline std::string record_key(Rng &rng) {
    static constexpr std::string_view alphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789/:_-.";
    std::string out;
    const auto len = uniform(rng, 1, 24);
    for (std::size_t i = 0; i < len; ++i)
        out += alphabet[uniform(rng, 0, alphabet.size() - 1)];
    return out;
}

inline std::string page_range(Rng &rng) {
    const auto a = uniform(rng, 1, 900);
    switch (uniform(rng, 0, 3)) {
    case 0: return std::to_string(a);
    case 1: return std::to_string(a) + "-" + std::to_string(a + uniform(rng, 0, 40));
    case 2: return "e" + std::to_string(a);
    default: return std::to_string(a) + "-" + std::to_string(a + 3) + "-" + std::to_string(a + 9);
    }
}

/// A valid record whose string fields avoid braces and line breaks (the
/// BibTeX codec strips braces by design).
inline glanoir::BibRecord bib_record(Rng &rng) {
    static constexpr std::string_view kNoBraces = "{}";
    glanoir::BibRecord r;
    r.id = record_key(rng);
    r.type = pick(rng, glanoir::kEntryTypes);
    do {
        r.title = tidy(printable(rng, 1, 60, kNoBraces));
    } while (r.title.empty());
    const auto n_authors = uniform(rng, 0, 4);
    for (std::size_t i = 0; i < n_authors; ++i)
        r.authors.push_back(author(rng));
    if (coin(rng, 0.8))
        r.year = static_cast<int>(uniform(rng, 1000, 9999));
    if (coin(rng, 0.6))
        r.venue = tidy(printable(rng, 1, 30, kNoBraces));
    if (r.venue && r.venue->empty())
        r.venue.reset();
    if (coin(rng, 0.5))
        r.pages = page_range(rng);
    if (coin(rng, 0.4))
        r.volume = std::to_string(uniform(rng, 1, 120));
    if (coin(rng, 0.3))
        r.number = std::to_string(uniform(rng, 1, 12));
    if (coin(rng, 0.4))
        r.url = "https://example.org/" + record_key(rng);
    const auto n_extra = uniform(rng, 0, 2);
    static constexpr std::array<std::string_view, 5> kExtraKeys{"note", "isbn", "publisher", "crossref", "cdrom"};
    for (std::size_t i = 0; i < n_extra; ++i)
        r.extra[std::string(pick(rng, kExtraKeys))] = tidy(printable(rng, 1, 20, kNoBraces)) + "x";
    return r;
}

} // namespace gen
