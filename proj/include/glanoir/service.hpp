#pragma once

#include "glanoir/bibstore.hpp"
#include "glanoir/matching.hpp"
#include "glanoir/taxonomy.hpp"
#include "glanoir/textproc.hpp"

#include <array>
#include <atomic>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace glanoir::service {

using text::Language;

// ---------------------------------------------------------------------------
// Configuration

struct Config {
    std::filesystem::path taxonomy_path;
    std::filesystem::path snapshot_path;
    std::filesystem::path stoplist_dir;
    std::string listen_address = "127.0.0.1:8080";
    Language default_lang = Language::en;
    std::size_t k = text::kDefaultMatchCount;
    double threshold = text::kDefaultMatchThreshold;
    std::size_t result_limit = 50;

    /// Key names as in the config file. Throws ConfigError on an unknown key
    /// or an unparsable value.
    void set(std::string_view key, std::string_view value);

    /// `key = value` lines; `#` starts a comment.
    void apply_file(const std::filesystem::path &path);

    /// Reads `GLANOIR_<KEY>` (upper-cased key) through `getenv`.
    void apply_env(const std::function<const char *(const char *)> &getenv);

    /// Throws ConfigError when k < 1, threshold is outside [0, 1], the
    /// listen address is not host:port, or (with `check_paths`) a path is
    /// missing.
    void validate(bool check_paths = true) const;

    std::string host() const;
    int port() const;
};

inline constexpr std::array<std::string_view, 8> kConfigKeys{
    "taxonomy_path", "snapshot_path", "stoplist_dir", "listen_address",
    "default_lang",  "k",             "threshold",    "result_limit"};

/// Layers file < environment < explicit overrides, then validates.
Config load_config(const std::optional<std::filesystem::path> &file,
                   const std::function<const char *(const char *)> &getenv,
                   const std::vector<std::pair<std::string, std::string>> &overrides, bool check_paths = true);

// ---------------------------------------------------------------------------
// Responses

enum class LinkKind { direct, scholar };
std::string_view to_string(LinkKind kind) noexcept;

/// Quoted-title search link, plus the first author's family name.
std::string scholar_url(const BibRecord &record);

/// Family name of a display name: text before a comma, else the last token
/// that is not a numeric disambiguator.
std::string family_name(std::string_view author);

struct ResultItem {
    BibRecord record;
    double score = 0.0;
    std::string link;
    LinkKind link_kind = LinkKind::scholar;
    std::string coins;
};

ResultItem make_result(const bib::Hit &hit);

struct MatchView {
    std::string id;
    double score = 0.0;
    bool crossref = false;
    /// Root-most last, the node itself first.
    std::vector<std::string> path;
};

struct SearchResponse {
    /// The query text, or the node id for node requests.
    std::string query_echo;
    bool from_node = false;
    Language lang = Language::en;
    std::vector<MatchView> matches;
    /// Best sub-threshold nodes, filled only when nothing matched.
    std::vector<MatchView> suggestions;
    std::vector<ResultItem> results;
    bib::FacetCounts facets;
};

enum class ExportFormat { bibtex, ris };
std::optional<ExportFormat> parse_export_format(std::string_view name) noexcept;

struct Stats {
    std::atomic<std::size_t> query{0};
    std::atomic<std::size_t> node{0};
    std::atomic<std::size_t> export_{0};
    std::atomic<std::size_t> graph{0};
    std::atomic<std::size_t> results{0};
    std::atomic<std::size_t> stats{0};
};

// ---------------------------------------------------------------------------
// Core

struct Options {
    std::size_t k = text::kDefaultMatchCount;
    double threshold = text::kDefaultMatchThreshold;
    std::size_t result_limit = 50;
    Language default_lang = Language::en;
};

/// Request logic shared by the HTTP API and the CLI. Reads only; every call
/// works on one store snapshot.
class Service {
public:
    /// All three must outlive the service.
    Service(const taxonomy::Graph &graph, const text::Pipeline &pipeline, const bib::Store &store, Options options = {});

    const Options &options() const noexcept { return options_; }
    const taxonomy::Graph &graph() const noexcept { return *graph_; }
    const bib::Store &store() const noexcept { return *store_; }

    SearchResponse query(std::string_view text, Language lang, std::optional<std::size_t> limit = {}) const;
    /// Throws UnknownNode.
    SearchResponse node(std::string_view id, Language lang, std::optional<std::size_t> limit = {}) const;

    std::vector<std::string> missing_records(const std::vector<std::string> &ids) const;
    /// Concatenated serializations in request order. Throws UnknownRecord.
    std::string export_records(const std::vector<std::string> &ids, ExportFormat format) const;

    /// Server-rendered page with one COinS span per record and Dublin Core
    /// metas in the head.
    std::string results_html(const SearchResponse &response) const;

    std::string graph_json() const;
    std::string response_json(const SearchResponse &response) const;
    std::string stats_json() const;

    Stats &stats() const noexcept { return stats_; }

private:
    MatchView view(std::string_view id, double score, bool crossref) const;

    const taxonomy::Graph *graph_;
    const text::Pipeline *pipeline_;
    const bib::Store *store_;
    Options options_;
    text::TaxonomyMatcher matcher_;
    mutable Stats stats_;
};

/// Everything `serve` needs, loaded from a Config.
struct Runtime {
    taxonomy::Graph graph;
    text::Pipeline pipeline;
    bib::Store store;
    Service service;

    explicit Runtime(const Config &config);
    Runtime(const Runtime &) = delete;
    Runtime &operator=(const Runtime &) = delete;
};

Options options_from(const Config &config);

// ---------------------------------------------------------------------------
// HTTP

/// Routes: /api/query, /api/node/{id}, /api/export, /api/graph, /api/stats,
/// /results. Malformed requests get 4xx; handlers never block on network.
class HttpServer {
public:
    explicit HttpServer(const Service &service);
    ~HttpServer();
    HttpServer(const HttpServer &) = delete;
    HttpServer &operator=(const HttpServer &) = delete;

    /// Serves on a background thread; port 0 picks a free port.
    int start(const std::string &host = "127.0.0.1", int port = 0);
    /// Blocks until stop().
    void run(const std::string &host, int port);
    void stop();

private:
    void install_routes();

    const Service *service_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
};

} // namespace glanoir::service
