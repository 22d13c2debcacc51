#pragma once

#include "glanoir/textproc.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace glanoir::taxonomy {

using text::Language;

struct Node {
    std::string id;
    std::map<Language, std::string> labels;
    std::map<Language, std::vector<std::string>> aliases;

    /// The language actually used for `lang`: itself when labelled, else the other one.
    Language effective_language(Language lang) const noexcept;
    const std::string &label(Language lang) const;
    const std::vector<std::string> &alias_list(Language lang) const;

    friend bool operator==(const Node &, const Node &) = default;
};

enum class EdgeKind { Hierarchy, CrossRef };

std::string_view to_string(EdgeKind kind) noexcept;

struct Edge {
    std::string from;
    std::string to;
    EdgeKind kind = EdgeKind::Hierarchy;

    friend bool operator==(const Edge &, const Edge &) = default;
};

/// Immutable, validated concept graph. Hierarchy edges form a single tree;
/// cross-references are directed and may form cycles.
class Graph {
public:
    /// Validates and indexes. Throws MalformedGraph, CyclicHierarchy,
    /// MultipleRoots or NoRoot.
    static Graph build(std::vector<Node> nodes, std::vector<Edge> edges);

    const std::string &root() const noexcept { return nodes_[root_].id; }
    bool contains(std::string_view id) const;
    const Node &node(std::string_view id) const;

    /// Nodes ordered by id.
    const std::vector<Node> &nodes() const noexcept { return nodes_; }
    /// Edges ordered by (kind, from, to).
    const std::vector<Edge> &edges() const noexcept { return edges_; }

    std::vector<std::string> children(std::string_view id) const;
    std::vector<std::string> crossrefs(std::string_view id) const;
    std::vector<std::string> path_to_root(std::string_view id) const;
    std::optional<std::string> parent(std::string_view id) const;

    /// `id` followed by all hierarchy descendants, depth first, children in id order.
    std::vector<std::string> subtree(std::string_view id) const;

    std::size_t hierarchy_edge_count() const noexcept;

    friend bool operator==(const Graph &a, const Graph &b) { return a.nodes_ == b.nodes_ && a.edges_ == b.edges_; }

private:
    std::size_t index_of(std::string_view id) const;

    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::optional<std::size_t>> parent_;
    std::vector<std::vector<std::size_t>> children_;
    std::vector<std::vector<std::size_t>> crossrefs_;
    std::size_t root_ = 0;
};

/// Reads graphML. Node data keys `label_fr`, `label_en`, `alias_fr`, `alias_en`
/// (aliases semicolon separated); edge data key `kind` is `hierarchy`
/// (default) or `crossref`.
Graph load_graph(std::string_view graphml);
Graph load_graph_file(const std::filesystem::path &path);

/// Lemmas of the node's own label and aliases.
std::vector<std::string> node_own_terms(const Graph &g, const text::Pipeline &pipeline, std::string_view id,
                                        Language lang);

/// Lemmas of the node and every hierarchy descendant (multiset).
std::vector<std::string> node_term_bag(const Graph &g, const text::Pipeline &pipeline, std::string_view id,
                                       Language lang);

} // namespace glanoir::taxonomy
