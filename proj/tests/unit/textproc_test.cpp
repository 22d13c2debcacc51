#include "generators.hpp"
#include "oracles.hpp"
#include "glanoir/textproc.hpp"

#include <gtest/gtest.h>

#include <algorithm>

namespace glanoir::text {
namespace {

using Tokens = std::vector<std::string>;

const Pipeline &pipeline() {
    static const Pipeline p = Pipeline::load(oracle::data("textproc"));
    return p;
}

TEST(Tokenize, SplitsOnNonWordCodePoints) {
    EXPECT_TRUE(pipeline().tokenize("", Language::fr).empty());
    EXPECT_EQ(pipeline().tokenize("Recherche d'Informations", Language::fr), (Tokens{"recherche", "d", "informations"}));
    EXPECT_EQ(pipeline().tokenize("Z39.88-2004", Language::en), (Tokens{"z39", "88", "2004"}));
}

TEST(Tokenize, FoldsCaseAndKeepsAccents) {
    EXPECT_EQ(tokenize("ÉLÈVE Ça"), (Tokens{"élève", "ça"}));
    // Simple folding maps one code point to one, so ß survives.
    EXPECT_EQ(tokenize("STRAßE"), (Tokens{"straße"}));
    EXPECT_EQ(tokenize("naïve-café"), (Tokens{"naïve", "café"}));
}

TEST(StopWords, BundledLists) {
    EXPECT_EQ(pipeline().filter_stopwords({"représentation", "de", "données", "et", "métadonnées"}, Language::fr),
              (Tokens{"représentation", "données", "métadonnées"}));
    EXPECT_EQ(pipeline().filter_stopwords({"information", "search", "and", "retrieval"}, Language::en),
              (Tokens{"information", "search", "retrieval"}));
    EXPECT_TRUE(pipeline().filter_stopwords({}, Language::fr).empty());
}

TEST(StopWords, LoadIgnoresCommentsAndBlanks) {
    const auto dir = std::filesystem::temp_directory_path() / "glanoir_stop_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "s.txt");
        out << "# comment\n\nfoo\n  bar  \n";
    }
    const auto s = StopList::load(dir / "s.txt");
    EXPECT_EQ(s.size(), 2u);
    EXPECT_TRUE(s.contains("foo"));
    EXPECT_TRUE(s.contains("bar"));
    EXPECT_FALSE(s.contains("# comment"));
}

TEST(Lemmatize, SpecExamples) {
    EXPECT_EQ(pipeline().lemmatize({"informations"}, Language::fr).lemmas, (Tokens{"information"}));
    EXPECT_EQ(pipeline().lemmatize({"x"}, Language::en).lemmas, (Tokens{"x"}));
    const auto bag = pipeline().lemmatize({"retrieval", "retrieving"}, Language::en);
    ASSERT_EQ(bag.lemmas.size(), 2u);
    EXPECT_EQ(bag.lemmas[0], bag.lemmas[1]);
    EXPECT_EQ(bag.lemmas[0], "retriev");
}

TEST(Lemmatize, EnglishLabelVocabulary) {
    const auto &s = pipeline().stemmer(Language::en);
    EXPECT_EQ(s.stem("information"), "inform");
    EXPECT_EQ(s.stem("systems"), "system");
    EXPECT_EQ(s.stem("processing"), "process");
    EXPECT_EQ(s.stem("storage"), "storage");
    EXPECT_EQ(s.stem("libraries"), "library");
    EXPECT_EQ(s.stem("class"), "class");
}

TEST(Lemmatize, BagLanguageFollowsRequest) {
    EXPECT_EQ(pipeline().analyze("Systèmes d'information", Language::fr).lang, Language::fr);
    EXPECT_EQ(pipeline().analyze("Systèmes d'information", Language::fr).lemmas,
              (Tokens{"système", "information"}));
}

TEST(Stemmer, RuleSemantics) {
    const Stemmer s({{"ies", "y", 2}, {"s", "", 3}, {"ss", "ss", 1}});
    EXPECT_EQ(s.stem("ponies"), "pony");
    EXPECT_EQ(s.stem("cats"), "cat");
    EXPECT_EQ(s.stem("its"), "its"); // stem "it" is below the minimum
    EXPECT_EQ(s.stem("glass"), "glass");
    EXPECT_EQ(s.stem(""), "");
}

TEST(Stemmer, FixpointOverFuzzedWords) {
    gen::Rng rng(3);
    static constexpr std::string_view kLetters = "abcdeilmnorstuvyéè";
    for (const auto lang : kLanguages) {
        const auto &s = pipeline().stemmer(lang);
        for (int i = 0; i < 5000; ++i) {
            std::string w;
            const auto n = gen::uniform(rng, 1, 14);
            for (std::size_t j = 0; j < n; ++j) {
                if (gen::coin(rng, 0.1))
                    w += gen::coin(rng) ? "é" : "è";
                else
                    w += kLetters[gen::uniform(rng, 0, 15)];
            }
            const auto once = s.stem(w);
            ASSERT_EQ(s.stem(once), once) << w;
        }
    }
}

TEST(Pipeline, LemmasAreNeverStopWordsAndAlwaysFixpoints) {
    gen::Rng rng(5);
    for (const auto lang : kLanguages) {
        for (int i = 0; i < 1000; ++i) {
            const auto text = gen::printable(rng, 0, 80);
            const auto bag = pipeline().analyze(text, lang);
            for (const auto &l : bag.lemmas) {
                ASSERT_FALSE(pipeline().stop_list(lang).contains(l)) << text;
                ASSERT_EQ(pipeline().stemmer(lang).stem(l), l) << text;
            }
            for (const auto &t : pipeline().filter_stopwords(pipeline().tokenize(text, lang), lang))
                ASSERT_FALSE(pipeline().stop_list(lang).contains(t));
        }
    }
}

TEST(Proximity, SpecExamples) {
    EXPECT_EQ(proximity(LemmaSet{"a", "b"}, LemmaSet{"a", "b"}), 1.0);
    EXPECT_EQ(proximity(LemmaSet{"a"}, LemmaSet{"b"}), 0.0);
    EXPECT_EQ(proximity(LemmaSet{}, LemmaSet{"b"}), 0.0);
    EXPECT_DOUBLE_EQ(proximity(LemmaSet{"inform", "retriev"}, LemmaSet{"inform", "retriev", "search"}),
                     2.0 / std::sqrt(6.0));
}

TEST(Proximity, BagOverloadUsesDistinctLemmas) {
    LemmaBag q{Language::en, {"inform", "inform", "retriev"}};
    EXPECT_DOUBLE_EQ(proximity(q, {"retriev", "inform", "search", "search"}), 2.0 / std::sqrt(6.0));
}

TEST(Proximity, PropertiesAgainstSetOracle) {
    gen::Rng rng(17);
    static constexpr std::array<std::string_view, 8> kPool{"a", "b", "c", "d", "e", "f", "g", "h"};
    for (int i = 0; i < 3000; ++i) {
        std::set<std::string> a, b;
        for (std::size_t j = gen::uniform(rng, 0, 6); j > 0; --j)
            a.emplace(gen::pick(rng, kPool));
        for (std::size_t j = gen::uniform(rng, 0, 6); j > 0; --j)
            b.emplace(gen::pick(rng, kPool));
        const LemmaSet la(a.begin(), a.end()), lb(b.begin(), b.end());
        const double p = proximity(la, lb);
        ASSERT_EQ(p, proximity(lb, la));
        ASSERT_GE(p, 0.0);
        ASSERT_LE(p, 1.0);
        ASSERT_EQ(p == 1.0, !a.empty() && a == b);
        ASSERT_NEAR(p, oracle::binary_cosine(a, b), 1e-15);
    }
}

TEST(Language, Codes) {
    EXPECT_EQ(code(Language::fr), "fr");
    EXPECT_EQ(parse_language("en"), Language::en);
    EXPECT_EQ(parse_language("de"), std::nullopt);
    EXPECT_EQ(other(Language::fr), Language::en);
}

} // namespace
} // namespace glanoir::text
