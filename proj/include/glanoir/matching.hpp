#pragma once

#include "glanoir/taxonomy.hpp"
#include "glanoir/textproc.hpp"

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace glanoir::text {

struct NodeMatch {
    std::string node;
    double score = 0.0;

    friend bool operator==(const NodeMatch &, const NodeMatch &) = default;
};

inline constexpr std::size_t kDefaultMatchCount = 3;
inline constexpr double kDefaultMatchThreshold = 0.1;

/// Scores queries against every node's subtree term bag. Bags for both
/// languages are computed once at construction; the graph and pipeline must
/// outlive the matcher.
class TaxonomyMatcher {
public:
    TaxonomyMatcher(const taxonomy::Graph &graph, const Pipeline &pipeline);

    /// All nodes with a positive score, sorted by (score desc, id asc).
    std::vector<NodeMatch> rank(const LemmaBag &query) const;

    /// Up to `k` nodes scoring at least `threshold` (and above zero).
    std::vector<NodeMatch> match(std::string_view text, Language lang, std::size_t k = kDefaultMatchCount,
                                 double threshold = kDefaultMatchThreshold) const;

    const LemmaSet &term_set(std::size_t node_index, Language lang) const;
    const taxonomy::Graph &graph() const noexcept { return graph_; }
    const Pipeline &pipeline() const noexcept { return pipeline_; }

private:
    const taxonomy::Graph &graph_;
    const Pipeline &pipeline_;
    std::array<std::vector<LemmaSet>, 2> sets_; // [fr, en][node index]
};

std::vector<NodeMatch> match_query(const Pipeline &pipeline, std::string_view text, Language lang,
                                   const taxonomy::Graph &graph, std::size_t k = kDefaultMatchCount,
                                   double threshold = kDefaultMatchThreshold);

} // namespace glanoir::text
