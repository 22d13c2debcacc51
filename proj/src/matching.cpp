#include "glanoir/matching.hpp"

#include <algorithm>

namespace glanoir::text {

TaxonomyMatcher::TaxonomyMatcher(const taxonomy::Graph &graph, const Pipeline &pipeline)
    : graph_(graph), pipeline_(pipeline) {
    for (auto lang : kLanguages) {
        auto &sets = sets_[lang == Language::fr ? 0 : 1];
        sets.reserve(graph.nodes().size());
        for (const auto &n : graph.nodes())
            sets.push_back(distinct(taxonomy::node_term_bag(graph, pipeline, n.id, lang)));
    }
}

const LemmaSet &TaxonomyMatcher::term_set(std::size_t node_index, Language lang) const {
    return sets_[lang == Language::fr ? 0 : 1].at(node_index);
}

std::vector<NodeMatch> TaxonomyMatcher::rank(const LemmaBag &query) const {
    std::vector<NodeMatch> out;
    const auto q = query.distinct();
    if (q.empty())
        return out;
    const auto &nodes = graph_.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double score = proximity(q, term_set(i, query.lang));
        if (score > 0.0)
            out.push_back({nodes[i].id, score});
    }
    std::sort(out.begin(), out.end(), [](const NodeMatch &a, const NodeMatch &b) {
        if (a.score != b.score)
            return a.score > b.score;
        return a.node < b.node;
    });
    return out;
}

std::vector<NodeMatch> TaxonomyMatcher::match(std::string_view text, Language lang, std::size_t k,
                                              double threshold) const {
    auto ranked = rank(pipeline_.analyze(text, lang));
    std::erase_if(ranked, [&](const NodeMatch &m) { return m.score < threshold; });
    if (ranked.size() > k)
        ranked.resize(k);
    return ranked;
}

std::vector<NodeMatch> match_query(const Pipeline &pipeline, std::string_view text, Language lang,
                                   const taxonomy::Graph &graph, std::size_t k, double threshold) {
    return TaxonomyMatcher(graph, pipeline).match(text, lang, k, threshold);
}

} // namespace glanoir::text
