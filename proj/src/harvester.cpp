#include "glanoir/harvester.hpp"

#include "glanoir/error.hpp"
#include "glanoir/strings.hpp"
#include "glanoir/xml.hpp"

#include <httplib.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <set>
#include <thread>

namespace glanoir::oai {

namespace {

const xml::Element &root_of(const xml::Element &doc) {
    if (doc.name != "OAI-PMH" || doc.ns != kOaiNamespace)
        throw ProtocolError("response root is not an OAI-PMH element");
    return doc;
}

xml::Element parse_response(std::string_view body) {
    try {
        return xml::parse(body);
    } catch (const MalformedXml &e) {
        throw ProtocolError(std::string("malformed OAI-PMH response: ") + e.what());
    }
}

/// OAI error replies other than `tolerated` become OaiError.
bool check_error(const xml::Element &root, std::string_view tolerated = {}) {
    const auto *err = root.child("error", kOaiNamespace);
    if (!err)
        return false;
    const auto *code = err->attribute("code");
    const std::string c = code ? *code : "unknown";
    if (!tolerated.empty() && c == tolerated)
        return true;
    throw OaiError(c, std::string(trim(err->text)));
}

std::optional<std::size_t> parse_size(const std::string *s) {
    if (!s)
        return std::nullopt;
    std::size_t v = 0;
    const auto r = std::from_chars(s->data(), s->data() + s->size(), v);
    if (r.ec != std::errc{} || r.ptr != s->data() + s->size())
        return std::nullopt;
    return v;
}

OaiRecord parse_record(const xml::Element &el) {
    const auto *header = el.child("header", kOaiNamespace);
    if (!header)
        throw ProtocolError("record without header");
    OaiRecord r;
    const auto *id = header->child("identifier", kOaiNamespace);
    if (!id || trim(id->text).empty())
        throw ProtocolError("record header without identifier");
    r.identifier = std::string(trim(id->text));
    const auto *ds = header->child("datestamp", kOaiNamespace);
    if (!ds)
        throw ProtocolError("record " + r.identifier + " has no datestamp");
    r.datestamp = parse_datestamp(trim(ds->text));
    if (const auto *status = header->attribute("status"); status && *status == "deleted") {
        r.deleted = true;
        return r;
    }
    const auto *metadata = el.child("metadata", kOaiNamespace);
    const auto *dc = metadata ? metadata->child("dc", kOaiDcNamespace) : nullptr;
    if (!dc)
        return r;
    for (const auto &field : dc->children) {
        if (field.ns != kDcNamespace)
            continue;
        r.dc[field.name].push_back(collapse_whitespace(field.text));
    }
    return r;
}

int parse_fixed(std::string_view s, std::size_t pos, std::size_t len) {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (s[i] < '0' || s[i] > '9')
            return -1;
        v = v * 10 + (s[i] - '0');
    }
    return v;
}

struct SplitUrl {
    std::string origin;
    std::string target;
};

SplitUrl split_url(const std::string &url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw TransportError("not an absolute URL: " + url);
    const auto path = url.find('/', scheme_end + 3);
    if (path == std::string::npos)
        return {url, "/"};
    return {url.substr(0, path), url.substr(path)};
}

} // namespace

HttpResponse HttplibTransport::get(const std::string &url) {
    const auto parts = split_url(url);
    httplib::Client cli(parts.origin);
    cli.set_connection_timeout(timeout_);
    cli.set_read_timeout(timeout_);
    cli.set_follow_location(true);
    auto res = cli.Get(parts.target);
    if (!res)
        throw TransportError("GET " + url + ": " + httplib::to_string(res.error()));
    HttpResponse out;
    out.status = res->status;
    out.body = std::move(res->body);
    for (const auto &[k, v] : res->headers)
        out.headers.emplace(ascii_lower(k), v);
    return out;
}

void validate(const OaiEndpoint &ep) {
    if (!is_http_url(ep.base_url))
        throw ConfigError("OAI base URL must be absolute http(s): " + ep.base_url);
    if (ep.base_url.find('?') != std::string::npos)
        throw ConfigError("OAI base URL must not carry a query string: " + ep.base_url);
    if (ep.max_retries < 1)
        throw ConfigError("max_retries must be at least 1");
}

Timestamp parse_datestamp(std::string_view s) {
    const bool day = s.size() == 10;
    const bool second = s.size() == 20 && s[10] == 'T' && s[13] == ':' && s[16] == ':' && s[19] == 'Z';
    if ((!day && !second) || s[4] != '-' || s[7] != '-')
        throw ProtocolError("bad datestamp: " + std::string(s));
    const int y = parse_fixed(s, 0, 4), m = parse_fixed(s, 5, 2), d = parse_fixed(s, 8, 2);
    int hh = 0, mm = 0, ss = 0;
    if (second) {
        hh = parse_fixed(s, 11, 2);
        mm = parse_fixed(s, 14, 2);
        ss = parse_fixed(s, 17, 2);
    }
    const std::chrono::year_month_day ymd{std::chrono::year(y), std::chrono::month(static_cast<unsigned>(m)),
                                          std::chrono::day(static_cast<unsigned>(d))};
    if (y < 0 || m < 0 || d < 0 || hh < 0 || mm < 0 || ss < 0 || !ymd.ok() || hh > 23 || mm > 59 || ss > 59)
        throw ProtocolError("bad datestamp: " + std::string(s));
    return std::chrono::sys_days(ymd) + std::chrono::hours(hh) + std::chrono::minutes(mm) + std::chrono::seconds(ss);
}

std::string format_datestamp(Timestamp ts) {
    const auto days = std::chrono::floor<std::chrono::days>(ts);
    const std::chrono::year_month_day ymd(days);
    const std::chrono::hh_mm_ss hms(ts - days);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

ListPage parse_list_records(std::string_view body) {
    const auto doc = parse_response(body);
    const auto &root = root_of(doc);
    ListPage page;
    if (check_error(root, "noRecordsMatch"))
        return page;
    const auto *list = root.child("ListRecords", kOaiNamespace);
    if (!list)
        throw ProtocolError("response lacks ListRecords");
    for (const auto *rec : list->children_named("record", kOaiNamespace))
        page.records.push_back(parse_record(*rec));
    if (const auto *tok = list->child("resumptionToken", kOaiNamespace)) {
        ResumptionToken t;
        t.value = std::string(trim(tok->text));
        t.complete_list_size = parse_size(tok->attribute("completeListSize"));
        t.cursor = parse_size(tok->attribute("cursor"));
        page.token = std::move(t);
    }
    return page;
}

RepositoryInfo parse_identify(std::string_view body) {
    const auto doc = parse_response(body);
    const auto &root = root_of(doc);
    check_error(root);
    const auto *id = root.child("Identify", kOaiNamespace);
    if (!id)
        throw ProtocolError("response lacks Identify");
    const auto field = [&](std::string_view name) {
        const auto *el = id->child(name, kOaiNamespace);
        if (!el)
            throw ProtocolError("Identify lacks " + std::string(name));
        return std::string(trim(el->text));
    };
    RepositoryInfo info{field("repositoryName"), field("protocolVersion"), field("earliestDatestamp")};
    if (info.protocol_version != "2.0")
        throw UnsupportedVersion("OAI-PMH protocol version " + info.protocol_version + " is not supported");
    return info;
}

Client::Client(OaiEndpoint endpoint, HttpTransport &transport)
    : endpoint_(std::move(endpoint)), transport_(&transport) {
    validate(endpoint_);
}

std::string Client::fetch(const std::vector<std::pair<std::string, std::string>> &args) {
    std::string url = endpoint_.base_url;
    char sep = '?';
    for (const auto &[k, v] : args) {
        url += sep;
        url += percent_encode(k);
        url += '=';
        url += percent_encode(v);
        sep = '&';
    }
    std::string last_failure;
    for (int attempt = 0; attempt < endpoint_.max_retries; ++attempt) {
        std::chrono::milliseconds wait = endpoint_.backoff_base * (1LL << attempt);
        try {
            ++requests_;
            auto res = transport_->get(url);
            if (res.status == 200)
                return std::move(res.body);
            if (res.status != 503)
                throw ProtocolError("HTTP " + std::to_string(res.status) + " from " + url);
            last_failure = "HTTP 503";
            if (auto it = res.headers.find("retry-after"); it != res.headers.end()) {
                long long secs = 0;
                const auto &v = it->second;
                const auto r = std::from_chars(v.data(), v.data() + v.size(), secs);
                if (r.ec == std::errc{} && secs >= 0)
                    wait = std::chrono::seconds(std::min<long long>(secs, endpoint_.retry_after_cap.count()));
            }
        } catch (const TransportError &e) {
            last_failure = e.what();
        }
        if (attempt + 1 < endpoint_.max_retries)
            std::this_thread::sleep_for(wait);
    }
    throw TransportError("giving up on " + url + " after " + std::to_string(endpoint_.max_retries) +
                         " attempts: " + last_failure);
}

RepositoryInfo Client::identify() {
    return parse_identify(fetch({{"verb", "Identify"}}));
}

RecordCursor Client::list_records(ListOptions options) {
    return RecordCursor(*this, std::move(options));
}

bool RecordCursor::fetch_page() {
    std::vector<std::pair<std::string, std::string>> args{{"verb", "ListRecords"}};
    if (token_) {
        args.emplace_back("resumptionToken", *token_);
    } else {
        args.emplace_back("metadataPrefix", "oai_dc");
        if (options_.from)
            args.emplace_back("from", *options_.from);
        if (options_.until)
            args.emplace_back("until", *options_.until);
        if (options_.set)
            args.emplace_back("set", *options_.set);
    }
    if (pages_ > 0)
        std::this_thread::sleep_until(last_request_ + client_->endpoint_.politeness_delay);
    // Measured from the end of the previous exchange, so the server sees
    // at least the delay between consecutive arrivals.
    auto body = client_->fetch(args);
    last_request_ = std::chrono::steady_clock::now();
    auto page = parse_list_records(body);
    ++pages_;
    buffer_ = std::move(page.records);
    index_ = 0;
    if (!page.token || page.token->value.empty()) {
        done_ = true;
    } else {
        if (std::find(seen_tokens_.begin(), seen_tokens_.end(), page.token->value) != seen_tokens_.end()) {
            done_ = true;
            throw OaiError("repeatedResumptionToken", "server returned token '" + page.token->value + "' twice");
        }
        seen_tokens_.push_back(page.token->value);
        token_ = page.token->value;
    }
    return !buffer_.empty();
}

std::optional<OaiRecord> RecordCursor::next() {
    while (index_ >= buffer_.size()) {
        if (done_)
            return std::nullopt;
        try {
            fetch_page();
        } catch (...) {
            done_ = true;
            throw;
        }
    }
    return std::move(buffer_[index_++]);
}

std::vector<OaiRecord> Client::harvest_filtered(const text::Pipeline &pipeline, const text::LemmaBag &keywords,
                                                text::Language lang, ListOptions options) {
    const auto wanted = keywords.distinct();
    std::vector<OaiRecord> kept;
    auto cursor = list_records(std::move(options));
    while (auto rec = cursor.next()) {
        if (rec->deleted)
            continue;
        if (!wanted.empty()) {
            std::vector<std::string> lemmas;
            for (const char *field : {"title", "subject", "description"}) {
                const auto it = rec->dc.find(field);
                if (it == rec->dc.end())
                    continue;
                for (const auto &value : it->second) {
                    auto bag = pipeline.analyze(value, lang);
                    lemmas.insert(lemmas.end(), bag.lemmas.begin(), bag.lemmas.end());
                }
            }
            if (text::intersection_size(text::distinct(std::move(lemmas)), wanted) == 0)
                continue;
        }
        kept.push_back(std::move(*rec));
    }
    return kept;
}

BibRecord oai_to_bib(const OaiRecord &rec) {
    const auto values = [&](const char *name) -> const std::vector<std::string> & {
        static const std::vector<std::string> none;
        const auto it = rec.dc.find(name);
        return it == rec.dc.end() ? none : it->second;
    };
    const auto &titles = values("title");
    if (titles.empty() || trim(titles.front()).empty())
        throw MissingTitle("OAI record " + rec.identifier + " has no dc:title");
    BibRecord b;
    b.id = "oai:" + rec.identifier;
    b.title = titles.front();
    b.authors = values("creator");
    for (const auto &date : values("date")) {
        for (std::size_t i = 0; i + 4 <= date.size() && !b.year; ++i) {
            if (auto y = parse_year(std::string_view(date).substr(i, 4)))
                b.year = *y;
        }
        if (b.year)
            break;
    }
    for (const auto &id : values("identifier")) {
        if (is_http_url(id)) {
            b.url = id;
            break;
        }
    }
    b.type = EntryType::misc;
    for (const auto &t : values("type")) {
        if (t == "Article") {
            b.type = EntryType::article;
            break;
        }
        if (t == "Book") {
            b.type = EntryType::book;
            break;
        }
    }
    return b;
}

} // namespace glanoir::oai
