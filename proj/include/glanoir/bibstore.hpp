#pragma once

#include "glanoir/bibrecord.hpp"
#include "glanoir/error.hpp"
#include "glanoir/taxonomy.hpp"
#include "glanoir/textproc.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace glanoir::bib {

using text::Language;

inline constexpr std::string_view kUnknownFacet = "unknown";

struct IngestReport {
    std::size_t records_ok = 0;
    std::size_t records_skipped = 0;
    /// Skip reason (`missing_title`, `missing_key`) to count.
    std::map<std::string, std::size_t> reasons;
    /// Field-level problems that did not cost the record (`invalid_year`).
    std::map<std::string, std::size_t> warnings;
    std::size_t entities_resolved = 0;
    std::size_t entities_unknown = 0;
    /// Largest number of field bytes buffered for a single record.
    std::size_t max_record_bytes = 0;
};

/// Thrown when the XML stream is not well formed. Records completed before
/// the error are kept in the store and counted in `report()`.
class IngestAborted : public MalformedXml {
public:
    IngestAborted(const std::string &what, IngestReport report) : MalformedXml(what), report_(std::move(report)) {}
    const IngestReport &report() const noexcept { return report_; }

private:
    IngestReport report_;
};

/// Named character entities beyond XML's built-ins, mapped to UTF-8.
class EntityTable {
public:
    EntityTable() = default;
    explicit EntityTable(const std::map<std::string, std::string> &entries) : entries_(entries.begin(), entries.end()) {}

    /// Lines formatted `entityName TAB codepoint-hex`.
    static EntityTable load(const std::filesystem::path &path);

    const std::string *lookup(std::string_view name) const;
    std::size_t size() const noexcept { return entries_.size(); }

private:
    std::map<std::string, std::string, std::less<>> entries_;
};

struct IngestOptions {
    Language title_lang = Language::en;
};

struct Hit {
    BibRecord record;
    double score = 0.0;

    friend bool operator==(const Hit &, const Hit &) = default;
};

struct FacetCounts {
    std::map<std::string, std::size_t> by_year;
    std::map<std::string, std::size_t> by_venue;
    std::map<std::string, std::size_t> by_type;

    friend bool operator==(const FacetCounts &, const FacetCounts &) = default;
};

/// Sort order for search hits: score desc, year desc (absent last), id asc.
bool hit_order(const Hit &a, const Hit &b) noexcept;

/// An immutable view of the store. Readers keep using the view they
/// obtained even while a writer publishes a newer one.
class Snapshot {
public:
    std::size_t size() const noexcept { return records_.size(); }
    const BibRecord *find(std::string_view id) const;
    const BibRecord &get_record(std::string_view id) const;

    /// Records in insertion order.
    const std::vector<BibRecord> &records() const noexcept { return records_; }
    const text::LemmaSet &title_lemmas(std::string_view id) const;

    /// Indexed search; scores are the binary cosine between the query lemma
    /// set and each candidate's title lemma set.
    std::vector<Hit> search(const text::LemmaSet &query, std::size_t limit) const;
    std::vector<Hit> search(const text::LemmaBag &query, std::size_t limit) const;

    /// Throws UnknownRecord when an id is absent.
    FacetCounts facets(const std::vector<std::string> &ids) const;

    /// Record ids carrying `lemma` in their title, sorted.
    std::vector<std::string> posting(std::string_view lemma) const;
    std::vector<std::string> lemmas() const;

    void save(const std::filesystem::path &path) const;
    void write(std::ostream &out) const;
    static Snapshot read(std::istream &in);
    static Snapshot load(const std::filesystem::path &path);

    /// Same records and same postings, independent of insertion history.
    friend bool operator==(const Snapshot &a, const Snapshot &b);

private:
    friend class Store;

    void upsert(BibRecord record, text::LemmaSet title_lemmas);

    std::vector<BibRecord> records_;
    std::vector<text::LemmaSet> title_lemmas_;
    std::unordered_map<std::string, std::uint32_t> by_id_;
    std::map<std::string, std::vector<std::uint32_t>, std::less<>> postings_;
};

/// Record store with an inverted index over title lemmas.
///
/// Writes go through a Writer, which works on a private copy and publishes
/// it atomically on commit; one writer at a time.
class Store {
public:
    explicit Store(const text::Pipeline &pipeline);
    Store(const text::Pipeline &pipeline, Snapshot initial);

    std::shared_ptr<const Snapshot> snapshot() const;

    class Writer {
    public:
        /// Inserts or replaces by id. Returns false (and leaves the store
        /// untouched) for an invalid record.
        bool upsert(BibRecord record, Language title_lang = Language::en);
        /// Publishes the draft. The writer cannot be used afterwards.
        void commit();
        const Snapshot &pending() const noexcept { return *draft_; }

    private:
        friend class Store;
        explicit Writer(Store &store);

        Store *store_;
        std::unique_lock<std::mutex> lock_;
        std::shared_ptr<Snapshot> draft_;
    };

    Writer begin_write();

    /// Streams DBLP-style XML (plain or gzip). Memory use is bounded by one
    /// record plus the index. Everything parsed is published together when
    /// the stream ends or at the first well-formedness error.
    IngestReport ingest_stream(std::istream &source, const EntityTable &entities, IngestOptions options = {});
    IngestReport ingest_file(const std::filesystem::path &path, const EntityTable &entities,
                             IngestOptions options = {});

    void upsert(BibRecord record, Language title_lang = Language::en);

    const text::Pipeline &pipeline() const noexcept { return *pipeline_; }

private:
    void publish(std::shared_ptr<const Snapshot> next);

    const text::Pipeline *pipeline_;
    mutable std::mutex read_mutex_;
    std::mutex write_mutex_;
    std::shared_ptr<const Snapshot> current_;
};

/// Searches with the node's own label and alias lemmas (not its subtree).
std::vector<Hit> search_node(const Snapshot &store, const taxonomy::Graph &graph, const text::Pipeline &pipeline,
                             std::string_view node_id, Language lang, std::size_t limit);

} // namespace glanoir::bib
