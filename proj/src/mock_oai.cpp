#include "glanoir/mock_oai.hpp"

#include "glanoir/error.hpp"
#include "glanoir/strings.hpp"

#include <httplib.h>
#include <json.hpp>

#include <fstream>
#include <sstream>

namespace glanoir::oai {

namespace {

using nlohmann::json;

constexpr std::string_view kResponseDate = "2024-01-01T00:00:00Z";

std::string envelope(const std::map<std::string, std::string> &params, const std::string &payload) {
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
                      "<OAI-PMH xmlns=\"http://www.openarchives.org/OAI/2.0/\">\n";
    out += "<responseDate>" + std::string(kResponseDate) + "</responseDate>\n<request";
    for (const auto &[k, v] : params)
        out += " " + k + "=\"" + html_escape(v) + "\"";
    out += ">http://mock.invalid/oai</request>\n";
    out += payload;
    out += "</OAI-PMH>\n";
    return out;
}

std::string error_body(const std::map<std::string, std::string> &params, const std::string &code) {
    return envelope(params, "<error code=\"" + html_escape(code) + "\">" + code + "</error>\n");
}

std::string render_record(const MockFixture::Record &r) {
    std::string out = "<record>\n<header";
    if (r.deleted)
        out += " status=\"deleted\"";
    out += ">\n<identifier>" + html_escape(r.identifier) + "</identifier>\n<datestamp>" + html_escape(r.datestamp) +
           "</datestamp>\n</header>\n";
    if (!r.deleted) {
        out += "<metadata>\n<oai_dc:dc xmlns:oai_dc=\"http://www.openarchives.org/OAI/2.0/oai_dc/\" "
               "xmlns:dc=\"http://purl.org/dc/elements/1.1/\">\n";
        for (const auto &[name, values] : r.dc)
            for (const auto &v : values)
                out += "<dc:" + name + ">" + html_escape(v) + "</dc:" + name + ">\n";
        out += "</oai_dc:dc>\n</metadata>\n";
    }
    out += "</record>\n";
    return out;
}

/// Splits `[0, n)` by the fixture page sizes.
std::vector<std::pair<std::size_t, std::size_t>> paginate(std::size_t n, const std::vector<std::size_t> &sizes) {
    std::vector<std::pair<std::size_t, std::size_t>> pages;
    std::size_t start = 0, i = 0;
    while (start < n) {
        std::size_t size = sizes.empty() ? n : sizes[std::min(i, sizes.size() - 1)];
        if (size == 0)
            size = 1;
        pages.emplace_back(start, std::min(n, start + size));
        start += size;
        ++i;
    }
    return pages;
}

std::optional<std::size_t> token_page(const std::string &token) {
    if (token.size() < 2 || token[0] != 't')
        return std::nullopt;
    std::size_t v = 0;
    for (std::size_t i = 1; i < token.size(); ++i) {
        if (token[i] < '0' || token[i] > '9')
            return std::nullopt;
        v = v * 10 + static_cast<std::size_t>(token[i] - '0');
    }
    return v;
}

} // namespace

MockFixture MockFixture::from_json(std::string_view text) {
    MockFixture f;
    try {
        const auto j = json::parse(text);
        f.repository_name = j.value("repository_name", f.repository_name);
        f.protocol_version = j.value("protocol_version", f.protocol_version);
        f.earliest_datestamp = j.value("earliest_datestamp", f.earliest_datestamp);
        f.page_sizes = j.value("page_sizes", std::vector<std::size_t>{});
        f.sets = j.value("sets", std::vector<std::string>{});
        f.repeat_token = j.value("repeat_token", false);
        for (const auto &r : j.value("records", json::array())) {
            Record rec;
            rec.identifier = r.at("identifier").get<std::string>();
            rec.datestamp = r.value("datestamp", f.earliest_datestamp);
            rec.deleted = r.value("deleted", false);
            const auto dc = r.value("dc", json::object());
            for (const auto &[k, v] : dc.items())
                rec.dc[k] = v.is_array() ? v.get<std::vector<std::string>>() : std::vector{v.get<std::string>()};
            f.records.push_back(std::move(rec));
        }
        const auto page_errors = j.value("page_errors", json::object());
        for (const auto &[k, v] : page_errors.items())
            f.page_errors[std::stoul(k)] = v.get<std::string>();
        for (const auto &e : j.value("failures", json::array())) {
            Failure fail;
            fail.page = e.value("page", std::size_t{0});
            fail.status = e.value("status", 503);
            fail.count = e.value("count", 1);
            if (e.contains("retry_after"))
                fail.retry_after = e.at("retry_after").get<int>();
            f.failures.push_back(fail);
        }
    } catch (const json::exception &e) {
        throw ConfigError(std::string("bad mock OAI fixture: ") + e.what());
    }
    return f;
}

MockFixture MockFixture::load(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open mock OAI fixture " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

MockOaiServer::MockOaiServer(MockFixture fixture)
    : fixture_(std::move(fixture)), server_(std::make_unique<httplib::Server>()) {
    install_routes();
}

MockOaiServer::~MockOaiServer() {
    stop();
}

std::string MockOaiServer::respond(const std::map<std::string, std::string> &params) {
    const auto arg = [&](const char *name) -> const std::string * {
        const auto it = params.find(name);
        return it == params.end() ? nullptr : &it->second;
    };
    const auto *verb = arg("verb");
    if (!verb)
        return error_body(params, "badVerb");
    if (*verb == "Identify") {
        if (params.size() != 1)
            return error_body(params, "badArgument");
        return envelope(params, "<Identify>\n<repositoryName>" + html_escape(fixture_.repository_name) +
                                    "</repositoryName>\n<baseURL>http://mock.invalid/oai</baseURL>\n"
                                    "<protocolVersion>" +
                                    html_escape(fixture_.protocol_version) +
                                    "</protocolVersion>\n<earliestDatestamp>" +
                                    html_escape(fixture_.earliest_datestamp) +
                                    "</earliestDatestamp>\n<deletedRecord>persistent</deletedRecord>\n"
                                    "<granularity>YYYY-MM-DD</granularity>\n</Identify>\n");
    }
    if (*verb != "ListRecords")
        return error_body(params, "badVerb");

    std::size_t page_index = 0;
    if (const auto *token = arg("resumptionToken")) {
        if (params.size() != 2)
            return error_body(params, "badArgument");
        const auto p = token_page(*token);
        if (!p)
            return error_body(params, "badResumptionToken");
        page_index = *p;
    } else {
        for (const auto &[k, v] : params)
            if (k != "verb" && k != "metadataPrefix" && k != "from" && k != "until" && k != "set")
                return error_body(params, "badArgument");
        const auto *prefix = arg("metadataPrefix");
        if (!prefix)
            return error_body(params, "badArgument");
        if (*prefix != "oai_dc")
            return error_body(params, "cannotDisseminateFormat");
        if (arg("set") && fixture_.sets.empty())
            return error_body(params, "noSetHierarchy");
    }

    // Tokens are stateless names, so later pages reuse the initial filter.
    if (!arg("resumptionToken")) {
        active_from_ = arg("from") ? std::optional(*arg("from")) : std::nullopt;
        active_until_ = arg("until") ? std::optional(*arg("until")) : std::nullopt;
    }
    std::vector<const MockFixture::Record *> selected;
    const auto *from = active_from_ ? &*active_from_ : nullptr;
    const auto *until = active_until_ ? &*active_until_ : nullptr;
    for (const auto &r : fixture_.records) {
        const auto day = r.datestamp.substr(0, 10);
        if (from && day < *from)
            continue;
        if (until && day > *until)
            continue;
        selected.push_back(&r);
    }
    if (selected.empty())
        return error_body(params, "noRecordsMatch");
    if (auto it = fixture_.page_errors.find(page_index); it != fixture_.page_errors.end())
        return error_body(params, it->second);

    const auto pages = paginate(selected.size(), fixture_.page_sizes);
    if (page_index >= pages.size())
        return error_body(params, "badResumptionToken");
    const auto [begin, end] = pages[page_index];
    std::string payload = "<ListRecords>\n";
    for (auto i = begin; i < end; ++i)
        payload += render_record(*selected[i]);
    if (page_index + 1 < pages.size()) {
        const auto next = fixture_.repeat_token ? std::size_t{1} : page_index + 1;
        payload += "<resumptionToken completeListSize=\"" + std::to_string(selected.size()) + "\" cursor=\"" +
                   std::to_string(begin) + "\">t" + std::to_string(next) + "</resumptionToken>\n";
    } else if (pages.size() > 1) {
        payload += "<resumptionToken completeListSize=\"" + std::to_string(selected.size()) + "\" cursor=\"" +
                   std::to_string(begin) + "\"/>\n";
    }
    payload += "</ListRecords>\n";
    return envelope(params, payload);
}

void MockOaiServer::install_routes() {
    server_->Get("/oai", [this](const httplib::Request &req, httplib::Response &res) {
        std::map<std::string, std::string> params;
        for (const auto &[k, v] : req.params)
            params.emplace(k, v);

        std::size_t page = 0;
        if (auto it = params.find("resumptionToken"); it != params.end())
            page = token_page(it->second).value_or(0);

        std::lock_guard lock(mutex_);
        int status = 200;
        for (const auto &f : fixture_.failures) {
            if (f.page != page || params.count("verb") == 0 || params.at("verb") != "ListRecords")
                continue;
            auto &served = failures_served_[page];
            if (served < f.count) {
                ++served;
                status = f.status;
                if (f.retry_after)
                    res.set_header("Retry-After", std::to_string(*f.retry_after));
            }
            break;
        }
        log_.push_back({std::chrono::steady_clock::now(), params, status});
        res.status = status;
        if (status != 200) {
            res.set_content("unavailable", "text/plain");
            return;
        }
        res.set_content(respond(params), "text/xml; charset=UTF-8");
    });
}

int MockOaiServer::start(const std::string &host, int port) {
    host_ = host;
    port_ = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (port_ < 0)
        throw TransportError("mock OAI server cannot bind " + host + ":" + std::to_string(port));
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port_;
}

void MockOaiServer::run(const std::string &host, int port) {
    host_ = host;
    port_ = port;
    if (!server_->listen(host, port))
        throw TransportError("mock OAI server cannot listen on " + host + ":" + std::to_string(port));
}

void MockOaiServer::stop() {
    if (server_)
        server_->stop();
    if (thread_.joinable())
        thread_.join();
}

std::string MockOaiServer::base_url() const {
    return "http://" + host_ + ":" + std::to_string(port_) + "/oai";
}

std::vector<RequestLogEntry> MockOaiServer::log() const {
    std::lock_guard lock(mutex_);
    return log_;
}

void MockOaiServer::clear_log() {
    std::lock_guard lock(mutex_);
    log_.clear();
}

} // namespace glanoir::oai
