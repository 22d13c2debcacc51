#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace glanoir::text {

enum class Language : std::uint8_t { fr, en };

inline constexpr std::array<Language, 2> kLanguages{Language::fr, Language::en};

std::string_view code(Language lang) noexcept;
std::optional<Language> parse_language(std::string_view code) noexcept;
constexpr Language other(Language lang) noexcept { return lang == Language::fr ? Language::en : Language::fr; }

/// Sorted, duplicate-free lemmas: the representation proximity works on.
using LemmaSet = std::vector<std::string>;

LemmaSet distinct(std::vector<std::string> lemmas);

/// Multiset of lemmas produced by a Pipeline for one language.
struct LemmaBag {
    Language lang = Language::en;
    std::vector<std::string> lemmas;

    bool empty() const noexcept { return lemmas.empty(); }
    LemmaSet distinct() const { return text::distinct(lemmas); }
};

/// Splits on every code point that is neither a letter, a digit nor a
/// combining mark, and applies Unicode simple case folding. Accents are kept.
std::vector<std::string> tokenize(std::string_view text);

class StopList {
public:
    StopList() = default;
    explicit StopList(std::vector<std::string> words);

    /// One word per line; blank lines and `#` comments are ignored.
    static StopList load(const std::filesystem::path &path);

    bool contains(std::string_view word) const;
    std::size_t size() const noexcept { return words_.size(); }

private:
    std::unordered_set<std::string> words_;
};

struct StemRule {
    std::string suffix;
    std::string replacement;
    std::size_t min_stem = 3;
};

/// Suffix-stripping stemmer driven by a rule table.
///
/// At each step the longest matching suffix whose remaining stem keeps at
/// least `min_stem` code points is rewritten; steps repeat until a rule leaves
/// the word unchanged or no rule matches. A rule whose replacement equals its
/// suffix therefore protects the ending. Replacements must be shorter than
/// their suffix (or equal to it), so stemming terminates and
/// `stem(stem(w)) == stem(w)` holds for every input.
class Stemmer {
public:
    Stemmer() = default;
    explicit Stemmer(std::vector<StemRule> rules);

    /// Lines formatted `suffix TAB replacement TAB min_stem_len`.
    static Stemmer load(const std::filesystem::path &path);

    std::string stem(std::string_view word) const;
    const std::vector<StemRule> &rules() const noexcept { return rules_; }

private:
    std::vector<StemRule> rules_; // longest suffix first
};

/// The query pipeline: tokenize, drop stop words, stem.
class Pipeline {
public:
    Pipeline(StopList fr_stop, StopList en_stop, Stemmer fr_stem, Stemmer en_stem);

    /// Loads `stopwords_{fr,en}.txt` and `stemrules_{fr,en}.tsv` from `dir`.
    static Pipeline load(const std::filesystem::path &dir);

    std::vector<std::string> tokenize(std::string_view text, Language lang) const;
    std::vector<std::string> filter_stopwords(std::vector<std::string> tokens, Language lang) const;

    /// Stems every token. A stem that lands on a stop word is dropped.
    LemmaBag lemmatize(const std::vector<std::string> &tokens, Language lang) const;

    LemmaBag analyze(std::string_view text, Language lang) const;

    const StopList &stop_list(Language lang) const noexcept { return stop_[index(lang)]; }
    const Stemmer &stemmer(Language lang) const noexcept { return stem_[index(lang)]; }

private:
    static constexpr std::size_t index(Language lang) noexcept { return lang == Language::fr ? 0 : 1; }

    std::array<StopList, 2> stop_;
    std::array<Stemmer, 2> stem_;
};

/// Binary cosine |Q ∩ N| / sqrt(|Q| |N|) over distinct lemma sets; 0 when
/// either side is empty.
double proximity(const LemmaSet &query, const LemmaSet &node_terms) noexcept;
double proximity(const LemmaBag &query, const std::vector<std::string> &node_terms);

std::size_t intersection_size(const LemmaSet &a, const LemmaSet &b) noexcept;

} // namespace glanoir::text
