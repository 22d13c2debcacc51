#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace glanoir {

/// Base class for every failure the library reports.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// taxonomy
class MalformedGraph : public Error { using Error::Error; };
class CyclicHierarchy : public Error { using Error::Error; };
class MultipleRoots : public Error { using Error::Error; };
class NoRoot : public Error { using Error::Error; };

class UnknownNode : public Error {
public:
    explicit UnknownNode(std::string id) : Error("unknown node: " + id), id_(std::move(id)) {}
    const std::string &id() const noexcept { return id_; }

private:
    std::string id_;
};

// bibstore
class UnknownRecord : public Error {
public:
    explicit UnknownRecord(std::string id) : Error("unknown record: " + id), id_(std::move(id)) {}
    const std::string &id() const noexcept { return id_; }

private:
    std::string id_;
};

class MalformedXml : public Error { using Error::Error; };
class SnapshotError : public Error { using Error::Error; };

// metafmt
class BadContextObject : public Error { using Error::Error; };

// harvester
class TransportError : public Error { using Error::Error; };
class ProtocolError : public Error { using Error::Error; };
class UnsupportedVersion : public Error { using Error::Error; };
class MissingTitle : public Error { using Error::Error; };

/// An OAI-PMH `<error code="...">` reply, or a client-side protocol guard.
class OaiError : public Error {
public:
    OaiError(std::string code, const std::string &message)
        : Error("OAI-PMH error " + code + (message.empty() ? "" : ": " + message)), code_(std::move(code)) {}
    const std::string &code() const noexcept { return code_; }

private:
    std::string code_;
};

// service
class ConfigError : public Error { using Error::Error; };

} // namespace glanoir
