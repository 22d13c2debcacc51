#pragma once

#include "glanoir/bibrecord.hpp"
#include "glanoir/textproc.hpp"

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace glanoir::oai {

inline constexpr std::string_view kOaiNamespace = "http://www.openarchives.org/OAI/2.0/";
inline constexpr std::string_view kOaiDcNamespace = "http://www.openarchives.org/OAI/2.0/oai_dc/";
inline constexpr std::string_view kDcNamespace = "http://purl.org/dc/elements/1.1/";

struct HttpResponse {
    int status = 0;
    std::string body;
    /// Header names lowercased.
    std::map<std::string, std::string> headers;
};

/// Blocking HTTP GET. Throws TransportError when no response arrives.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse get(const std::string &url) = 0;
};

/// cpp-httplib backed transport; https needs TLS support compiled in.
class HttplibTransport final : public HttpTransport {
public:
    explicit HttplibTransport(std::chrono::seconds timeout = std::chrono::seconds(30)) : timeout_(timeout) {}
    HttpResponse get(const std::string &url) override;

private:
    std::chrono::seconds timeout_;
};

struct OaiEndpoint {
    std::string base_url;
    std::chrono::milliseconds politeness_delay{1000};
    /// Total attempts per request, the first included.
    int max_retries = 3;
    /// Wait before retry i (0-based) is backoff_base * 2^i.
    std::chrono::milliseconds backoff_base{1000};
    std::chrono::seconds retry_after_cap{60};
};

/// Throws ConfigError unless base_url is an absolute http(s) URL without a
/// query string.
void validate(const OaiEndpoint &endpoint);

struct RepositoryInfo {
    std::string name;
    std::string protocol_version;
    std::string earliest_datestamp;
};

using Timestamp = std::chrono::sys_seconds;

/// Accepts `YYYY-MM-DD` and `YYYY-MM-DDThh:mm:ssZ`. Throws ProtocolError.
Timestamp parse_datestamp(std::string_view text);
std::string format_datestamp(Timestamp ts);

struct OaiRecord {
    std::string identifier;
    Timestamp datestamp{};
    bool deleted = false;
    /// Dublin Core element local name to values, document order.
    std::map<std::string, std::vector<std::string>> dc;

    friend bool operator==(const OaiRecord &, const OaiRecord &) = default;
};

struct ResumptionToken {
    std::string value;
    std::optional<std::size_t> complete_list_size;
    std::optional<std::size_t> cursor;
};

struct ListPage {
    std::vector<OaiRecord> records;
    /// Absent when the response carries no resumptionToken element.
    std::optional<ResumptionToken> token;
};

/// Parses one ListRecords response. `noRecordsMatch` yields an empty page;
/// other error codes throw OaiError; bad XML throws ProtocolError.
ListPage parse_list_records(std::string_view xml);
RepositoryInfo parse_identify(std::string_view xml);

struct ListOptions {
    std::optional<std::string> from;
    std::optional<std::string> until;
    std::optional<std::string> set;
};

class Client;

/// Pull-based record sequence over ListRecords pages.
class RecordCursor {
public:
    std::optional<OaiRecord> next();
    std::size_t pages_fetched() const noexcept { return pages_; }

private:
    friend class Client;
    RecordCursor(Client &client, ListOptions options) : client_(&client), options_(std::move(options)) {}

    bool fetch_page();

    Client *client_;
    ListOptions options_;
    std::vector<OaiRecord> buffer_;
    std::size_t index_ = 0;
    std::size_t pages_ = 0;
    std::optional<std::string> token_;
    std::vector<std::string> seen_tokens_;
    bool done_ = false;
    std::chrono::steady_clock::time_point last_request_{};
};

class Client {
public:
    /// The transport must outlive the client.
    Client(OaiEndpoint endpoint, HttpTransport &transport);

    RepositoryInfo identify();
    RecordCursor list_records(ListOptions options = {});

    /// Non-deleted records whose title, subject and description lemmas meet
    /// `keywords`. Empty keywords keep every non-deleted record.
    std::vector<OaiRecord> harvest_filtered(const text::Pipeline &pipeline, const text::LemmaBag &keywords,
                                            text::Language lang, ListOptions options = {});

    const OaiEndpoint &endpoint() const noexcept { return endpoint_; }
    std::size_t requests_sent() const noexcept { return requests_; }

private:
    friend class RecordCursor;

    /// GET with retries. Transport failures and 503 are retried; anything
    /// other than 200 afterwards is a ProtocolError.
    std::string fetch(const std::vector<std::pair<std::string, std::string>> &args);

    OaiEndpoint endpoint_;
    HttpTransport *transport_;
    std::size_t requests_ = 0;
};

/// Throws MissingTitle when `dc.title` is empty.
BibRecord oai_to_bib(const OaiRecord &record);

} // namespace glanoir::oai
