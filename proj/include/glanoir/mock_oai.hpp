#pragma once

#include "glanoir/harvester.hpp"

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace glanoir::oai {

/// A scripted OAI-PMH data provider for tests and demos.
struct MockFixture {
    struct Record {
        std::string identifier;
        std::string datestamp;
        bool deleted = false;
        std::map<std::string, std::vector<std::string>> dc;
    };
    /// Answer the given page with an HTTP status `count` times before
    /// serving it normally.
    struct Failure {
        std::size_t page = 0;
        int status = 503;
        int count = 1;
        std::optional<int> retry_after;
    };

    std::string repository_name = "Mock Repo";
    std::string protocol_version = "2.0";
    std::string earliest_datestamp = "2000-01-01";
    /// Records per page; the last size repeats. Empty means a single page.
    std::vector<std::size_t> page_sizes;
    std::vector<Record> records;
    std::vector<std::string> sets;
    /// 0-based page index to OAI error code answered instead of the page.
    std::map<std::size_t, std::string> page_errors;
    std::vector<Failure> failures;
    /// Every non-final page hands out the same token (a broken server).
    bool repeat_token = false;

    static MockFixture from_json(std::string_view json);
    static MockFixture load(const std::filesystem::path &path);
};

struct RequestLogEntry {
    std::chrono::steady_clock::time_point at;
    std::map<std::string, std::string> params;
    int status = 200;
};

class MockOaiServer {
public:
    explicit MockOaiServer(MockFixture fixture);
    ~MockOaiServer();
    MockOaiServer(const MockOaiServer &) = delete;
    MockOaiServer &operator=(const MockOaiServer &) = delete;

    /// Binds and serves on a background thread. Port 0 picks a free port.
    int start(const std::string &host = "127.0.0.1", int port = 0);
    void stop();
    /// Blocks in the calling thread until stop() is called elsewhere.
    void run(const std::string &host, int port);

    std::string base_url() const;
    std::vector<RequestLogEntry> log() const;
    void clear_log();

    /// The response body for a parsed query, without the transport. Not
    /// thread-safe on its own; the HTTP handler serializes calls.
    std::string respond(const std::map<std::string, std::string> &params);

private:
    void install_routes();

    MockFixture fixture_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    std::string host_;
    int port_ = 0;
    mutable std::mutex mutex_;
    std::vector<RequestLogEntry> log_;
    std::map<std::size_t, int> failures_served_;
    std::optional<std::string> active_from_;
    std::optional<std::string> active_until_;
};

} // namespace glanoir::oai
