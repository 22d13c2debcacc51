#include "glanoir/service.hpp"

#include "glanoir/error.hpp"
#include "glanoir/metafmt.hpp"
#include "glanoir/strings.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>

namespace glanoir::service {

namespace {

using nlohmann::ordered_json;

template <typename T> T parse_number(std::string_view key, std::string_view value) {
    T out{};
    const auto v = trim(value);
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc{} || r.ptr != v.data() + v.size())
        throw ConfigError("invalid value for " + std::string(key) + ": '" + std::string(value) + "'");
    return out;
}

ordered_json record_json(const BibRecord &r) {
    ordered_json j;
    j["id"] = r.id;
    j["type"] = to_string(r.type);
    j["title"] = r.title;
    j["authors"] = r.authors;
    if (r.year)
        j["year"] = *r.year;
    if (r.venue)
        j["venue"] = *r.venue;
    if (r.volume)
        j["volume"] = *r.volume;
    if (r.number)
        j["number"] = *r.number;
    if (r.pages)
        j["pages"] = *r.pages;
    if (r.url)
        j["url"] = *r.url;
    if (!r.extra.empty()) {
        ordered_json extra = ordered_json::object();
        for (const auto &[k, v] : r.extra)
            extra[k] = v;
        j["extra"] = std::move(extra);
    }
    return j;
}

ordered_json facets_json(const bib::FacetCounts &f) {
    const auto counts = [](const std::map<std::string, std::size_t> &m) {
        ordered_json j = ordered_json::object();
        for (const auto &[k, v] : m)
            j[k] = v;
        return j;
    };
    return ordered_json{{"year", counts(f.by_year)}, {"venue", counts(f.by_venue)}, {"type", counts(f.by_type)}};
}

ordered_json labels_json(const taxonomy::Node &n) {
    ordered_json labels = ordered_json::object();
    for (auto lang : text::kLanguages)
        if (auto it = n.labels.find(lang); it != n.labels.end())
            labels[std::string(text::code(lang))] = it->second;
    return labels;
}

ordered_json aliases_json(const taxonomy::Node &n) {
    ordered_json aliases = ordered_json::object();
    for (auto lang : text::kLanguages)
        if (auto it = n.aliases.find(lang); it != n.aliases.end() && !it->second.empty())
            aliases[std::string(text::code(lang))] = it->second;
    return aliases;
}

std::string dump(const ordered_json &j) {
    return j.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

} // namespace

// ---------------------------------------------------------------------------
// Config

void Config::set(std::string_view key, std::string_view raw) {
    const std::string value(trim(raw));
    if (key == "taxonomy_path") {
        taxonomy_path = value;
    } else if (key == "snapshot_path") {
        snapshot_path = value;
    } else if (key == "stoplist_dir") {
        stoplist_dir = value;
    } else if (key == "listen_address") {
        listen_address = value;
    } else if (key == "default_lang") {
        const auto lang = text::parse_language(value);
        if (!lang)
            throw ConfigError("default_lang must be fr or en, got '" + value + "'");
        default_lang = *lang;
    } else if (key == "k") {
        k = parse_number<std::size_t>(key, value);
    } else if (key == "threshold") {
        threshold = parse_number<double>(key, value);
    } else if (key == "result_limit") {
        result_limit = parse_number<std::size_t>(key, value);
    } else {
        throw ConfigError("unknown config key '" + std::string(key) + "'");
    }
}

void Config::apply_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const auto content = trim(line);
        if (content.empty())
            continue;
        const auto eq = content.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
        set(trim(content.substr(0, eq)), content.substr(eq + 1));
    }
}

void Config::apply_env(const std::function<const char *(const char *)> &getenv) {
    for (auto key : kConfigKeys) {
        std::string name = "GLANOIR_";
        for (char c : key)
            name += static_cast<char>(c >= 'a' && c <= 'z' ? c - 'a' + 'A' : c);
        if (const char *v = getenv(name.c_str()))
            set(key, v);
    }
}

std::string Config::host() const {
    const auto colon = listen_address.rfind(':');
    return colon == std::string::npos ? listen_address : listen_address.substr(0, colon);
}

int Config::port() const {
    const auto colon = listen_address.rfind(':');
    if (colon == std::string::npos)
        throw ConfigError("listen_address must be host:port, got '" + listen_address + "'");
    const auto port = parse_number<int>("listen_address", std::string_view(listen_address).substr(colon + 1));
    if (port < 0 || port > 65535)
        throw ConfigError("listen_address port out of range: " + listen_address);
    return port;
}

void Config::validate(bool check_paths) const {
    if (k < 1)
        throw ConfigError("k must be at least 1");
    if (!(threshold >= 0.0 && threshold <= 1.0))
        throw ConfigError("threshold must lie in [0, 1]");
    if (result_limit < 1)
        throw ConfigError("result_limit must be at least 1");
    if (host().empty())
        throw ConfigError("listen_address must be host:port, got '" + listen_address + "'");
    (void)port();
    if (!check_paths)
        return;
    const auto require = [](const std::filesystem::path &p, std::string_view key) {
        if (p.empty())
            throw ConfigError(std::string(key) + " is not set");
        if (!std::filesystem::exists(p))
            throw ConfigError(std::string(key) + " does not exist: " + p.string());
    };
    require(taxonomy_path, "taxonomy_path");
    require(snapshot_path, "snapshot_path");
    require(stoplist_dir, "stoplist_dir");
}

Config load_config(const std::optional<std::filesystem::path> &file,
                   const std::function<const char *(const char *)> &getenv,
                   const std::vector<std::pair<std::string, std::string>> &overrides, bool check_paths) {
    Config c;
    if (file)
        c.apply_file(*file);
    c.apply_env(getenv);
    for (const auto &[k, v] : overrides)
        c.set(k, v);
    c.validate(check_paths);
    return c;
}

Options options_from(const Config &c) {
    return Options{c.k, c.threshold, c.result_limit, c.default_lang};
}

// ---------------------------------------------------------------------------
// Links and items

std::string_view to_string(LinkKind kind) noexcept {
    return kind == LinkKind::direct ? "direct" : "scholar";
}

std::string family_name(std::string_view author) {
    const auto name = trim(author);
    if (const auto comma = name.find(','); comma != std::string_view::npos)
        return std::string(trim(name.substr(0, comma)));
    std::vector<std::string> tokens;
    for (auto &t : split(name, ' '))
        if (!t.empty())
            tokens.push_back(std::move(t));
    while (!tokens.empty()) {
        const auto &last = tokens.back();
        if (last.find_first_not_of("0123456789") != std::string::npos)
            return last;
        tokens.pop_back();
    }
    return {};
}

std::string scholar_url(const BibRecord &r) {
    std::string title;
    for (char c : r.title)
        if (c != '"')
            title += c;
    std::string url = "https://scholar.google.com/scholar?q=%22" + percent_encode(title) + "%22";
    if (!r.authors.empty()) {
        if (const auto family = family_name(r.authors.front()); !family.empty())
            url += "+" + percent_encode(family);
    }
    return url;
}

ResultItem make_result(const bib::Hit &hit) {
    ResultItem item;
    item.record = hit.record;
    item.score = hit.score;
    if (hit.record.url) {
        item.link = *hit.record.url;
        item.link_kind = LinkKind::direct;
    } else {
        item.link = scholar_url(hit.record);
        item.link_kind = LinkKind::scholar;
    }
    item.coins = meta::coins_span(meta::coins_encode(hit.record));
    return item;
}

std::optional<ExportFormat> parse_export_format(std::string_view name) noexcept {
    if (name == "bibtex" || name == "bib")
        return ExportFormat::bibtex;
    if (name == "ris")
        return ExportFormat::ris;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Service

Service::Service(const taxonomy::Graph &graph, const text::Pipeline &pipeline, const bib::Store &store,
                 Options options)
    : graph_(&graph), pipeline_(&pipeline), store_(&store), options_(options), matcher_(graph, pipeline) {}

MatchView Service::view(std::string_view id, double score, bool crossref) const {
    return MatchView{std::string(id), score, crossref, graph_->path_to_root(id)};
}

SearchResponse Service::query(std::string_view q, Language lang, std::optional<std::size_t> limit) const {
    SearchResponse out;
    out.query_echo = std::string(q);
    out.lang = lang;
    const auto bag = pipeline_->analyze(q, lang);
    const auto ranked = matcher_.rank(bag);
    for (const auto &m : ranked) {
        if (out.matches.size() >= options_.k)
            break;
        if (m.score >= options_.threshold)
            out.matches.push_back(view(m.node, m.score, false));
    }
    if (out.matches.empty()) {
        for (std::size_t i = 0; i < ranked.size() && i < options_.k; ++i)
            out.suggestions.push_back(view(ranked[i].node, ranked[i].score, false));
    }
    const auto snapshot = store_->snapshot();
    std::vector<std::string> ids;
    for (const auto &hit : snapshot->search(bag, limit.value_or(options_.result_limit))) {
        ids.push_back(hit.record.id);
        out.results.push_back(make_result(hit));
    }
    out.facets = snapshot->facets(ids);
    return out;
}

SearchResponse Service::node(std::string_view id, Language lang, std::optional<std::size_t> limit) const {
    if (!graph_->contains(id))
        throw UnknownNode(std::string(id));
    SearchResponse out;
    out.query_echo = std::string(id);
    out.lang = lang;
    out.from_node = true;
    out.matches.push_back(view(id, 1.0, false));
    for (const auto &target : graph_->crossrefs(id))
        out.matches.push_back(view(target, 0.0, true));
    const auto snapshot = store_->snapshot();
    std::vector<std::string> ids;
    for (const auto &hit :
         bib::search_node(*snapshot, *graph_, *pipeline_, id, lang, limit.value_or(options_.result_limit))) {
        ids.push_back(hit.record.id);
        out.results.push_back(make_result(hit));
    }
    out.facets = snapshot->facets(ids);
    return out;
}

std::vector<std::string> Service::missing_records(const std::vector<std::string> &ids) const {
    const auto snapshot = store_->snapshot();
    std::vector<std::string> missing;
    for (const auto &id : ids)
        if (!snapshot->find(id))
            missing.push_back(id);
    return missing;
}

std::string Service::export_records(const std::vector<std::string> &ids, ExportFormat format) const {
    const auto snapshot = store_->snapshot();
    std::string out;
    for (const auto &id : ids) {
        const auto &r = snapshot->get_record(id);
        out += format == ExportFormat::bibtex ? meta::bibtex_serialize(r) : meta::ris_serialize(r);
    }
    return out;
}

std::string Service::results_html(const SearchResponse &resp) const {
    const auto lang = resp.lang;
    const auto heading = resp.from_node ? graph_->node(resp.query_echo).label(lang) : resp.query_echo;

    std::string h;
    h += "<!DOCTYPE html>\n<html lang=\"";
    h += text::code(lang);
    h += "\">\n<head>\n<meta charset=\"utf-8\">\n<title>";
    h += html_escape(heading);
    h += "</title>\n<link rel=\"schema.DC\" href=\"http://purl.org/dc/elements/1.1/\">\n";
    for (const auto &item : resp.results)
        h += meta::dc_meta_emit(item.record);
    h += "</head>\n<body>\n<h1>";
    h += html_escape(heading);
    h += "</h1>\n";
    const auto &nodes = resp.matches.empty() ? resp.suggestions : resp.matches;
    if (!nodes.empty()) {
        h += resp.matches.empty() ? "<ul class=\"suggestions\">\n" : "<ul class=\"matches\">\n";
        for (const auto &m : nodes) {
            const auto &node = graph_->node(m.id);
            h += "<li data-node=\"" + html_escape(m.id) + "\"";
            if (m.crossref)
                h += " class=\"crossref\"";
            h += ">" + html_escape(m.id) + " " + html_escape(node.label(lang)) + "</li>\n";
        }
        h += "</ul>\n";
    }
    if (resp.results.empty()) {
        h += "<p class=\"empty\">No records matched.</p>\n";
    } else {
        h += "<ol class=\"results\">\n";
        for (const auto &item : resp.results) {
            const auto &r = item.record;
            h += "<li class=\"result\" id=\"" + html_escape(r.id) + "\">\n";
            h += "<a class=\"" + std::string(to_string(item.link_kind)) + "\" href=\"" + html_escape(item.link) +
                 "\">" + html_escape(r.title) + "</a>\n";
            if (!r.authors.empty())
                h += "<span class=\"authors\">" + html_escape(join(r.authors, ", ")) + "</span>\n";
            if (r.venue || r.year) {
                h += "<span class=\"source\">";
                if (r.venue)
                    h += html_escape(*r.venue);
                if (r.venue && r.year)
                    h += ", ";
                if (r.year)
                    h += std::to_string(*r.year);
                h += "</span>\n";
            }
            h += item.coins;
            h += "\n</li>\n";
        }
        h += "</ol>\n";
    }
    h += "</body>\n</html>\n";
    return h;
}

std::string Service::graph_json() const {
    ordered_json nodes = ordered_json::array();
    for (const auto &n : graph_->nodes()) {
        ordered_json j;
        j["id"] = n.id;
        j["labels"] = labels_json(n);
        j["aliases"] = aliases_json(n);
        nodes.push_back(std::move(j));
    }
    ordered_json edges = ordered_json::array();
    for (const auto &e : graph_->edges())
        edges.push_back(ordered_json{{"from", e.from}, {"to", e.to}, {"kind", ascii_lower(to_string(e.kind))}});
    return dump(ordered_json{{"root", graph_->root()}, {"nodes", std::move(nodes)}, {"edges", std::move(edges)}});
}

std::string Service::response_json(const SearchResponse &resp) const {
    const auto match_list = [&](const std::vector<MatchView> &list) {
        ordered_json arr = ordered_json::array();
        for (const auto &m : list) {
            const auto &node = graph_->node(m.id);
            ordered_json j;
            j["id"] = m.id;
            j["score"] = m.score;
            j["label"] = node.label(resp.lang);
            j["labels"] = labels_json(node);
            j["path"] = m.path;
            j["crossref"] = m.crossref;
            arr.push_back(std::move(j));
        }
        return arr;
    };
    ordered_json results = ordered_json::array();
    for (const auto &item : resp.results) {
        ordered_json j;
        j["record"] = record_json(item.record);
        j["score"] = item.score;
        j["link"] = item.link;
        j["link_kind"] = to_string(item.link_kind);
        j["coins"] = item.coins;
        results.push_back(std::move(j));
    }
    ordered_json j;
    j["query"] = resp.query_echo;
    j["kind"] = resp.from_node ? "node" : "query";
    j["lang"] = text::code(resp.lang);
    j["matches"] = match_list(resp.matches);
    j["suggestions"] = match_list(resp.suggestions);
    j["results"] = std::move(results);
    j["facets"] = facets_json(resp.facets);
    return dump(j);
}

std::string Service::stats_json() const {
    ordered_json requests;
    requests["query"] = stats_.query.load();
    requests["node"] = stats_.node.load();
    requests["export"] = stats_.export_.load();
    requests["graph"] = stats_.graph.load();
    requests["results"] = stats_.results.load();
    requests["stats"] = stats_.stats.load();
    return dump(ordered_json{{"requests", std::move(requests)},
                             {"records", store_->snapshot()->size()},
                             {"nodes", graph_->nodes().size()}});
}

Runtime::Runtime(const Config &config)
    : graph(taxonomy::load_graph_file(config.taxonomy_path)), pipeline(text::Pipeline::load(config.stoplist_dir)),
      store(pipeline, bib::Snapshot::load(config.snapshot_path)), service(graph, pipeline, store, options_from(config)) {}

} // namespace glanoir::service
