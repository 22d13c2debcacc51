#include "glanoir/taxonomy.hpp"

#include "glanoir/error.hpp"
#include "glanoir/strings.hpp"
#include "glanoir/xml.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <tuple>
#include <sstream>

namespace glanoir::taxonomy {

namespace {

std::vector<std::string> split_aliases(std::string_view raw) {
    std::vector<std::string> out;
    for (const auto &part : split(raw, ';')) {
        const auto a = trim(part);
        if (!a.empty())
            out.emplace_back(a);
    }
    return out;
}

} // namespace

Language Node::effective_language(Language lang) const noexcept {
    return labels.contains(lang) ? lang : text::other(lang);
}

const std::string &Node::label(Language lang) const {
    return labels.at(effective_language(lang));
}

const std::vector<std::string> &Node::alias_list(Language lang) const {
    static const std::vector<std::string> none;
    const auto it = aliases.find(effective_language(lang));
    return it == aliases.end() ? none : it->second;
}

std::string_view to_string(EdgeKind kind) noexcept {
    return kind == EdgeKind::Hierarchy ? "hierarchy" : "crossref";
}

Graph Graph::build(std::vector<Node> nodes, std::vector<Edge> edges) {
    Graph g;
    std::sort(nodes.begin(), nodes.end(), [](const Node &a, const Node &b) { return a.id < b.id; });
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto &n = nodes[i];
        if (n.id.empty())
            throw MalformedGraph("node with empty id");
        if (i > 0 && nodes[i - 1].id == n.id)
            throw MalformedGraph("duplicate node id: " + n.id);
        if (!n.labels.contains(Language::fr) && !n.labels.contains(Language::en))
            throw MalformedGraph("node " + n.id + " has no label in either language");
        g.index_.emplace(n.id, i);
    }
    if (nodes.empty())
        throw NoRoot("graph has no nodes");

    g.nodes_ = std::move(nodes);
    const auto count = g.nodes_.size();
    g.parent_.assign(count, std::nullopt);
    g.children_.assign(count, {});
    g.crossrefs_.assign(count, {});

    std::sort(edges.begin(), edges.end(), [](const Edge &a, const Edge &b) {
        return std::tie(a.kind, a.from, a.to) < std::tie(b.kind, b.from, b.to);
    });
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    for (const auto &e : edges) {
        const auto from = g.index_.find(e.from);
        const auto to = g.index_.find(e.to);
        if (from == g.index_.end())
            throw MalformedGraph("edge references unknown node: " + e.from);
        if (to == g.index_.end())
            throw MalformedGraph("edge references unknown node: " + e.to);
        if (e.kind == EdgeKind::Hierarchy) {
            if (g.parent_[to->second])
                throw MalformedGraph("node " + e.to + " has more than one hierarchy parent");
            g.parent_[to->second] = from->second;
            g.children_[from->second].push_back(to->second);
        } else {
            if (from->second == to->second)
                throw MalformedGraph("cross-reference loops on " + e.from);
            g.crossrefs_[from->second].push_back(to->second);
        }
    }
    g.edges_ = std::move(edges);

    // 0 = unvisited, 1 = on current parent chain, 2 = known to reach a root
    std::vector<char> state(count, 0);
    for (std::size_t start = 0; start < count; ++start) {
        std::vector<std::size_t> chain;
        std::size_t cur = start;
        for (;;) {
            if (state[cur] == 2)
                break;
            if (state[cur] == 1)
                throw CyclicHierarchy("hierarchy cycle through node " + g.nodes_[cur].id);
            state[cur] = 1;
            chain.push_back(cur);
            if (!g.parent_[cur])
                break;
            cur = *g.parent_[cur];
        }
        for (auto i : chain)
            state[i] = 2;
    }

    std::vector<std::size_t> roots;
    for (std::size_t i = 0; i < count; ++i)
        if (!g.parent_[i])
            roots.push_back(i);
    if (roots.empty())
        throw NoRoot("no node without a hierarchy parent");
    if (roots.size() > 1)
        throw MultipleRoots("hierarchy has " + std::to_string(roots.size()) + " roots: " + g.nodes_[roots[0]].id +
                            ", " + g.nodes_[roots[1]].id + ", ...");
    g.root_ = roots.front();

    // Node indices follow id order, so sorting indices sorts by id.
    for (auto &c : g.children_)
        std::sort(c.begin(), c.end());
    for (auto &c : g.crossrefs_)
        std::sort(c.begin(), c.end());
    return g;
}

std::size_t Graph::index_of(std::string_view id) const {
    const auto it = index_.find(std::string(id));
    if (it == index_.end())
        throw UnknownNode(std::string(id));
    return it->second;
}

bool Graph::contains(std::string_view id) const {
    return index_.contains(std::string(id));
}

const Node &Graph::node(std::string_view id) const {
    return nodes_[index_of(id)];
}

std::vector<std::string> Graph::children(std::string_view id) const {
    std::vector<std::string> out;
    for (auto c : children_[index_of(id)])
        out.push_back(nodes_[c].id);
    return out;
}

std::vector<std::string> Graph::crossrefs(std::string_view id) const {
    std::vector<std::string> out;
    for (auto c : crossrefs_[index_of(id)])
        out.push_back(nodes_[c].id);
    return out;
}

std::vector<std::string> Graph::path_to_root(std::string_view id) const {
    std::vector<std::string> out;
    std::optional<std::size_t> cur = index_of(id);
    while (cur) {
        out.push_back(nodes_[*cur].id);
        cur = parent_[*cur];
    }
    return out;
}

std::optional<std::string> Graph::parent(std::string_view id) const {
    const auto p = parent_[index_of(id)];
    if (!p)
        return std::nullopt;
    return nodes_[*p].id;
}

std::vector<std::string> Graph::subtree(std::string_view id) const {
    std::vector<std::string> out;
    std::vector<std::size_t> stack{index_of(id)};
    while (!stack.empty()) {
        const auto cur = stack.back();
        stack.pop_back();
        out.push_back(nodes_[cur].id);
        const auto &kids = children_[cur];
        for (auto it = kids.rbegin(); it != kids.rend(); ++it)
            stack.push_back(*it);
    }
    return out;
}

std::size_t Graph::hierarchy_edge_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(edges_.begin(), edges_.end(), [](const Edge &e) { return e.kind == EdgeKind::Hierarchy; }));
}

Graph load_graph(std::string_view graphml) {
    xml::Element doc;
    try {
        doc = xml::parse(graphml);
    } catch (const MalformedXml &e) {
        throw MalformedGraph(std::string("graphML: ") + e.what());
    }
    if (doc.name != "graphml")
        throw MalformedGraph("root element is <" + doc.name + ">, expected <graphml>");

    std::map<std::string, std::string> key_names;
    for (const auto *key : doc.children_named("key")) {
        const auto *id = key->attribute("id");
        const auto *name = key->attribute("attr.name");
        if (id)
            key_names[*id] = name ? *name : *id;
    }
    const auto data_name = [&](const xml::Element &data) -> std::string {
        const auto *key = data.attribute("key");
        if (!key)
            throw MalformedGraph("<data> element without key attribute");
        const auto it = key_names.find(*key);
        return it == key_names.end() ? *key : it->second;
    };

    const auto *graph = doc.child("graph");
    if (!graph)
        throw MalformedGraph("graphML document has no <graph> element");

    std::vector<Node> nodes;
    std::vector<Edge> edges;
    for (const auto &el : graph->children) {
        if (el.name == "node") {
            Node n;
            if (const auto *id = el.attribute("id"))
                n.id = *id;
            for (const auto *data : el.children_named("data")) {
                const auto name = data_name(*data);
                const auto value = std::string(trim(data->text));
                if (name == "label_fr" && !value.empty())
                    n.labels[Language::fr] = value;
                else if (name == "label_en" && !value.empty())
                    n.labels[Language::en] = value;
                else if (name == "alias_fr")
                    n.aliases[Language::fr] = split_aliases(value);
                else if (name == "alias_en")
                    n.aliases[Language::en] = split_aliases(value);
            }
            std::erase_if(n.aliases, [](const auto &kv) { return kv.second.empty(); });
            nodes.push_back(std::move(n));
        } else if (el.name == "edge") {
            Edge e;
            const auto *source = el.attribute("source");
            const auto *target = el.attribute("target");
            if (!source || !target)
                throw MalformedGraph("edge without source or target");
            e.from = *source;
            e.to = *target;
            for (const auto *data : el.children_named("data")) {
                if (data_name(*data) != "kind")
                    continue;
                const auto kind = trim(data->text);
                if (kind == "hierarchy" || kind.empty())
                    e.kind = EdgeKind::Hierarchy;
                else if (kind == "crossref")
                    e.kind = EdgeKind::CrossRef;
                else
                    throw MalformedGraph("unknown edge kind: " + std::string(kind));
            }
            edges.push_back(std::move(e));
        }
    }
    return Graph::build(std::move(nodes), std::move(edges));
}

Graph load_graph_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw MalformedGraph("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_graph(buf.str());
}

std::vector<std::string> node_own_terms(const Graph &g, const text::Pipeline &pipeline, std::string_view id,
                                        Language lang) {
    const auto &n = g.node(id);
    const auto used = n.effective_language(lang);
    auto bag = pipeline.analyze(n.label(lang), used);
    for (const auto &alias : n.alias_list(lang)) {
        auto more = pipeline.analyze(alias, used);
        bag.lemmas.insert(bag.lemmas.end(), more.lemmas.begin(), more.lemmas.end());
    }
    return std::move(bag.lemmas);
}

std::vector<std::string> node_term_bag(const Graph &g, const text::Pipeline &pipeline, std::string_view id,
                                       Language lang) {
    std::vector<std::string> out;
    for (const auto &member : g.subtree(id)) {
        auto terms = node_own_terms(g, pipeline, member, lang);
        out.insert(out.end(), terms.begin(), terms.end());
    }
    return out;
}

} // namespace glanoir::taxonomy
