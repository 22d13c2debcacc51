#include "glanoir/textproc.hpp"

#include "glanoir/error.hpp"
#include "glanoir/strings.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace glanoir::text {

namespace {

bool is_word_char(UChar32 c) {
    return u_isalnum(c) || (U_GET_GC_MASK(c) & U_GC_M_MASK) != 0;
}

std::vector<std::string> read_lines(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

} // namespace

std::string_view code(Language lang) noexcept {
    return lang == Language::fr ? "fr" : "en";
}

std::optional<Language> parse_language(std::string_view c) noexcept {
    if (c == "fr")
        return Language::fr;
    if (c == "en")
        return Language::en;
    return std::nullopt;
}

LemmaSet distinct(std::vector<std::string> lemmas) {
    std::sort(lemmas.begin(), lemmas.end());
    lemmas.erase(std::unique(lemmas.begin(), lemmas.end()), lemmas.end());
    return lemmas;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    const auto *s = reinterpret_cast<const uint8_t *>(text.data());
    const auto length = static_cast<int32_t>(text.size());
    int32_t i = 0;
    while (i < length) {
        UChar32 c;
        U8_NEXT(s, i, length, c);
        if (c >= 0 && is_word_char(c)) {
            const UChar32 folded = u_foldCase(c, U_FOLD_CASE_DEFAULT);
            append_utf8(current, static_cast<char32_t>(folded));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty())
        tokens.push_back(std::move(current));
    return tokens;
}

StopList::StopList(std::vector<std::string> words) {
    for (auto &w : words)
        words_.insert(std::move(w));
}

StopList StopList::load(const std::filesystem::path &path) {
    std::vector<std::string> words;
    for (auto &line : read_lines(path)) {
        const auto word = trim(line);
        if (word.empty() || word.front() == '#')
            continue;
        words.emplace_back(word);
    }
    return StopList(std::move(words));
}

bool StopList::contains(std::string_view word) const {
    return words_.find(std::string(word)) != words_.end();
}

Stemmer::Stemmer(std::vector<StemRule> rules) : rules_(std::move(rules)) {
    for (const auto &r : rules_) {
        if (r.suffix.empty())
            throw Error("stem rule with empty suffix");
        if (r.replacement != r.suffix && r.replacement.size() >= r.suffix.size())
            throw Error("stem rule '" + r.suffix + "' must shorten the word");
    }
    std::stable_sort(rules_.begin(), rules_.end(), [](const StemRule &a, const StemRule &b) {
        return utf8_length(a.suffix) > utf8_length(b.suffix);
    });
}

Stemmer Stemmer::load(const std::filesystem::path &path) {
    std::vector<StemRule> rules;
    std::size_t lineno = 0;
    for (const auto &line : read_lines(path)) {
        ++lineno;
        if (trim(line).empty() || trim(line).front() == '#')
            continue;
        const auto fields = split(line, '\t');
        if (fields.size() != 3)
            throw Error(path.string() + ":" + std::to_string(lineno) + ": expected 3 tab-separated fields");
        StemRule rule{fields[0], fields[1], 0};
        try {
            rule.min_stem = std::stoul(fields[2]);
        } catch (const std::exception &) {
            throw Error(path.string() + ":" + std::to_string(lineno) + ": bad min_stem_len");
        }
        rules.push_back(std::move(rule));
    }
    return Stemmer(std::move(rules));
}

std::string Stemmer::stem(std::string_view word) const {
    std::string current(word);
    for (;;) {
        const StemRule *chosen = nullptr;
        for (const auto &r : rules_) {
            if (!current.ends_with(r.suffix))
                continue;
            const auto stem_len = utf8_length(std::string_view(current).substr(0, current.size() - r.suffix.size()));
            if (stem_len >= r.min_stem) {
                chosen = &r;
                break;
            }
        }
        if (!chosen || chosen->replacement == chosen->suffix)
            return current;
        current.resize(current.size() - chosen->suffix.size());
        current += chosen->replacement;
    }
}

Pipeline::Pipeline(StopList fr_stop, StopList en_stop, Stemmer fr_stem, Stemmer en_stem)
    : stop_{std::move(fr_stop), std::move(en_stop)}, stem_{std::move(fr_stem), std::move(en_stem)} {}

Pipeline Pipeline::load(const std::filesystem::path &dir) {
    return Pipeline(StopList::load(dir / "stopwords_fr.txt"), StopList::load(dir / "stopwords_en.txt"),
                    Stemmer::load(dir / "stemrules_fr.tsv"), Stemmer::load(dir / "stemrules_en.tsv"));
}

std::vector<std::string> Pipeline::tokenize(std::string_view text, Language) const {
    return text::tokenize(text);
}

std::vector<std::string> Pipeline::filter_stopwords(std::vector<std::string> tokens, Language lang) const {
    const auto &stop = stop_list(lang);
    std::erase_if(tokens, [&](const std::string &t) { return stop.contains(t); });
    return tokens;
}

LemmaBag Pipeline::lemmatize(const std::vector<std::string> &tokens, Language lang) const {
    LemmaBag bag{lang, {}};
    const auto &stop = stop_list(lang);
    const auto &stemmer = this->stemmer(lang);
    bag.lemmas.reserve(tokens.size());
    for (const auto &t : tokens) {
        auto lemma = stemmer.stem(t);
        if (!lemma.empty() && !stop.contains(lemma))
            bag.lemmas.push_back(std::move(lemma));
    }
    return bag;
}

LemmaBag Pipeline::analyze(std::string_view text, Language lang) const {
    return lemmatize(filter_stopwords(tokenize(text, lang), lang), lang);
}

std::size_t intersection_size(const LemmaSet &a, const LemmaSet &b) noexcept {
    std::size_t n = 0;
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        const int c = i->compare(*j);
        if (c == 0) {
            ++n;
            ++i;
            ++j;
        } else if (c < 0) {
            ++i;
        } else {
            ++j;
        }
    }
    return n;
}

double proximity(const LemmaSet &query, const LemmaSet &node_terms) noexcept {
    if (query.empty() || node_terms.empty())
        return 0.0;
    const auto common = static_cast<double>(intersection_size(query, node_terms));
    const double denom = std::sqrt(static_cast<double>(query.size()) * static_cast<double>(node_terms.size()));
    return std::min(1.0, common / denom);
}

double proximity(const LemmaBag &query, const std::vector<std::string> &node_terms) {
    return proximity(query.distinct(), distinct(node_terms));
}

} // namespace glanoir::text
