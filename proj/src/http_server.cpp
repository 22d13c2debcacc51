#include "glanoir/error.hpp"
#include "glanoir/service.hpp"
#include "glanoir/strings.hpp"

#include <httplib.h>
#include <json.hpp>

#include <charconv>

namespace glanoir::service {

namespace {

using nlohmann::ordered_json;

constexpr const char *kJson = "application/json; charset=UTF-8";
constexpr const char *kHtml = "text/html; charset=UTF-8";
constexpr const char *kText = "text/plain; charset=UTF-8";

void json_error(httplib::Response &res, int status, const std::string &message,
                const std::vector<std::string> &missing = {}) {
    ordered_json j{{"error", message}};
    if (!missing.empty())
        j["missing"] = missing;
    res.status = status;
    res.set_content(j.dump(), kJson);
}

void html_error(httplib::Response &res, int status, const std::string &message) {
    res.status = status;
    res.set_content("<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>" + html_escape(message) +
                        "</title>\n</head>\n<body>\n<p class=\"error\">" + html_escape(message) +
                        "</p>\n</body>\n</html>\n",
                    kHtml);
}

struct BadRequest {
    std::string message;
};

Language lang_param(const httplib::Request &req, Language fallback) {
    if (!req.has_param("lang"))
        return fallback;
    const auto value = req.get_param_value("lang");
    const auto lang = text::parse_language(value);
    if (!lang)
        throw BadRequest{"lang must be fr or en"};
    return *lang;
}

std::optional<std::size_t> limit_param(const httplib::Request &req) {
    if (!req.has_param("limit"))
        return std::nullopt;
    const auto value = req.get_param_value("limit");
    std::size_t n = 0;
    const auto r = std::from_chars(value.data(), value.data() + value.size(), n);
    if (r.ec != std::errc{} || r.ptr != value.data() + value.size() || n == 0)
        throw BadRequest{"limit must be a positive integer"};
    return n;
}

std::vector<std::string> id_params(const httplib::Request &req) {
    std::vector<std::string> ids;
    if (req.has_param("ids"))
        for (auto &id : split(req.get_param_value("ids"), ','))
            if (auto t = trim(id); !t.empty())
                ids.emplace_back(t);
    const auto n = req.get_param_value_count("id");
    for (std::size_t i = 0; i < n; ++i) {
        const auto raw = req.get_param_value("id", i);
        if (auto t = trim(raw); !t.empty())
            ids.emplace_back(t);
    }
    return ids;
}

} // namespace

HttpServer::HttpServer(const Service &service) : service_(&service), server_(std::make_unique<httplib::Server>()) {
    install_routes();
}

HttpServer::~HttpServer() {
    stop();
}

void HttpServer::install_routes() {
    auto &srv = *server_;
    const Service &svc = *service_;

    srv.set_default_headers({{"Access-Control-Allow-Origin", "*"}});

    srv.Get("/api/query", [&svc](const httplib::Request &req, httplib::Response &res) {
        ++svc.stats().query;
        try {
            const auto q = std::string(trim(req.get_param_value("q")));
            if (q.empty())
                throw BadRequest{"q must not be empty"};
            const auto lang = lang_param(req, svc.options().default_lang);
            res.set_content(svc.response_json(svc.query(q, lang, limit_param(req))), kJson);
        } catch (const BadRequest &e) {
            json_error(res, 400, e.message);
        }
    });

    srv.Get(R"(/api/node/([^/]+))", [&svc](const httplib::Request &req, httplib::Response &res) {
        ++svc.stats().node;
        try {
            const auto id = percent_decode(req.matches[1].str());
            const auto lang = lang_param(req, svc.options().default_lang);
            res.set_content(svc.response_json(svc.node(id, lang, limit_param(req))), kJson);
        } catch (const BadRequest &e) {
            json_error(res, 400, e.message);
        } catch (const UnknownNode &e) {
            json_error(res, 404, e.what());
        }
    });

    srv.Get("/api/export", [&svc](const httplib::Request &req, httplib::Response &res) {
        ++svc.stats().export_;
        const auto format_name = req.has_param("format") ? req.get_param_value("format") : std::string("bibtex");
        const auto format = parse_export_format(format_name);
        if (!format)
            return json_error(res, 400, "unsupported export format: " + format_name);
        const auto ids = id_params(req);
        if (ids.empty())
            return json_error(res, 400, "no record ids given");
        if (const auto missing = svc.missing_records(ids); !missing.empty())
            return json_error(res, 404, "unknown record: " + join(missing, ", "), missing);
        const bool bib = *format == ExportFormat::bibtex;
        res.set_header("Content-Disposition", bib ? "attachment; filename=\"export.bib\""
                                                  : "attachment; filename=\"export.ris\"");
        res.set_content(svc.export_records(ids, *format), kText);
    });

    srv.Get("/api/graph", [&svc](const httplib::Request &, httplib::Response &res) {
        ++svc.stats().graph;
        res.set_content(svc.graph_json(), kJson);
    });

    srv.Get("/api/stats", [&svc](const httplib::Request &, httplib::Response &res) {
        ++svc.stats().stats;
        res.set_content(svc.stats_json(), kJson);
    });

    srv.Get("/results", [&svc](const httplib::Request &req, httplib::Response &res) {
        ++svc.stats().results;
        try {
            const auto lang = lang_param(req, svc.options().default_lang);
            const auto limit = limit_param(req);
            if (req.has_param("node")) {
                const auto id = req.get_param_value("node");
                if (!svc.graph().contains(id))
                    return html_error(res, 404, "unknown node: " + id);
                return res.set_content(svc.results_html(svc.node(id, lang, limit)), kHtml);
            }
            const auto q = std::string(trim(req.get_param_value("q")));
            if (q.empty())
                throw BadRequest{"q or node is required"};
            res.set_content(svc.results_html(svc.query(q, lang, limit)), kHtml);
        } catch (const BadRequest &e) {
            html_error(res, 400, e.message);
        }
    });
}

int HttpServer::start(const std::string &host, int port) {
    const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (bound < 0)
        throw TransportError("cannot bind " + host + ":" + std::to_string(port));
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return bound;
}

void HttpServer::run(const std::string &host, int port) {
    if (!server_->listen(host, port))
        throw TransportError("cannot listen on " + host + ":" + std::to_string(port));
}

void HttpServer::stop() {
    server_->stop();
    if (thread_.joinable())
        thread_.join();
}

} // namespace glanoir::service
