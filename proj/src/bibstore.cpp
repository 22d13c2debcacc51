#include "glanoir/bibstore.hpp"

#include "glanoir/strings.hpp"

#include <expat.h>
#include <zlib.h>

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>

namespace glanoir::bib {

namespace {

constexpr std::string_view kReplacementChar = "\xEF\xBF\xBD";
constexpr std::size_t kChunkSize = 64 * 1024;

// ---------------------------------------------------------------------------
// Byte sources: plain or gzip, detected by magic bytes.

class ByteSource {
public:
    explicit ByteSource(std::istream &in) : in_(in) {
        in_.read(reinterpret_cast<char *>(peek_.data()), 2);
        peeked_ = static_cast<std::size_t>(in_.gcount());
        gzip_ = peeked_ == 2 && peek_[0] == 0x1f && peek_[1] == 0x8b;
        if (gzip_) {
            std::memset(&zs_, 0, sizeof zs_);
            if (inflateInit2(&zs_, 16 + MAX_WBITS) != Z_OK)
                throw MalformedXml("cannot initialise gzip decoder");
            zin_.resize(kChunkSize);
        }
    }
    ~ByteSource() {
        if (gzip_)
            inflateEnd(&zs_);
    }
    ByteSource(const ByteSource &) = delete;
    ByteSource &operator=(const ByteSource &) = delete;

    /// Fills `out` with up to `out.size()` bytes; returns 0 at end of input.
    std::size_t read(std::span<char> out) { return gzip_ ? read_gzip(out) : read_plain(out); }

private:
    std::size_t read_raw(char *dst, std::size_t n) {
        std::size_t got = 0;
        while (peeked_ > 0 && got < n) {
            dst[got++] = static_cast<char>(peek_[2 - peeked_]);
            --peeked_;
        }
        if (got < n && in_) {
            in_.read(dst + got, static_cast<std::streamsize>(n - got));
            got += static_cast<std::size_t>(in_.gcount());
        }
        return got;
    }

    std::size_t read_plain(std::span<char> out) { return read_raw(out.data(), out.size()); }

    std::size_t read_gzip(std::span<char> out) {
        zs_.next_out = reinterpret_cast<Bytef *>(out.data());
        zs_.avail_out = static_cast<uInt>(out.size());
        while (zs_.avail_out == out.size() && !finished_) {
            if (zs_.avail_in == 0) {
                const auto n = read_raw(zin_.data(), zin_.size());
                if (n == 0)
                    throw MalformedXml("truncated gzip stream");
                zs_.next_in = reinterpret_cast<Bytef *>(zin_.data());
                zs_.avail_in = static_cast<uInt>(n);
            }
            const int rc = inflate(&zs_, Z_NO_FLUSH);
            if (rc == Z_STREAM_END)
                finished_ = true;
            else if (rc != Z_OK)
                throw MalformedXml("corrupt gzip stream");
        }
        return out.size() - zs_.avail_out;
    }

    std::istream &in_;
    std::array<unsigned char, 2> peek_{};
    std::size_t peeked_ = 0;
    bool gzip_ = false;
    bool finished_ = false;
    z_stream zs_{};
    std::vector<char> zin_;
};

/// Offset at which a DOCTYPE must be inserted so that expat reports
/// undeclared named entities as skipped instead of failing; npos when the
/// prolog already has one or the chunk cannot be analysed.
std::size_t doctype_insertion_point(std::string_view head) {
    std::size_t i = 0;
    if (head.starts_with("\xEF\xBB\xBF"))
        i = 3;
    for (;;) {
        while (i < head.size() && (head[i] == ' ' || head[i] == '\t' || head[i] == '\r' || head[i] == '\n'))
            ++i;
        if (i >= head.size() || head[i] != '<')
            return std::string_view::npos;
        const auto rest = head.substr(i);
        if (rest.starts_with("<?")) {
            const auto end = rest.find("?>");
            if (end == std::string_view::npos)
                return std::string_view::npos;
            i += end + 2;
        } else if (rest.starts_with("<!--")) {
            const auto end = rest.find("-->");
            if (end == std::string_view::npos)
                return std::string_view::npos;
            i += end + 3;
        } else if (rest.starts_with("<!DOCTYPE")) {
            return std::string_view::npos;
        } else {
            return i;
        }
    }
}

// ---------------------------------------------------------------------------
// Streaming DBLP parser.

struct PendingRecord {
    BibRecord record;
    bool has_key = false;
    bool url_from_ee = false;
    std::size_t bytes = 0;
};

class DblpHandler {
public:
    DblpHandler(Store::Writer &writer, const EntityTable &entities, IngestOptions options, IngestReport &report)
        : writer_(writer), entities_(entities), options_(options), report_(report) {}

    void set_parser(XML_Parser parser) noexcept { parser_ = parser; }

    void start(const XML_Char *name, const XML_Char **atts) {
        ++depth_;
        if (depth_ == 2) {
            pending_.emplace();
            pending_->record.type = map_type(name);
            for (int i = 0; atts[i]; i += 2) {
                if (std::strcmp(atts[i], "key") == 0) {
                    pending_->record.id = std::string(trim(raw_key().value_or(atts[i + 1])));
                    pending_->has_key = !pending_->record.id.empty();
                }
            }
        } else if (depth_ == 3 && pending_) {
            field_.assign(name);
            text_.clear();
        }
    }

    void end() {
        if (depth_ == 3 && pending_) {
            assign_field();
        } else if (depth_ == 2 && pending_) {
            finish_record();
        }
        --depth_;
    }

    void characters(std::string_view s) {
        if (depth_ >= 3 && pending_) {
            text_ += s;
            pending_->bytes += s.size();
            report_.max_record_bytes = std::max(report_.max_record_bytes, pending_->bytes);
        }
    }

    void skipped_entity(const XML_Char *name) {
        if (const auto *value = entities_.lookup(name)) {
            ++report_.entities_resolved;
            characters(*value);
        } else {
            ++report_.entities_unknown;
            characters(kReplacementChar);
        }
    }

private:
    /// Expat silently drops undeclared entities inside attribute values, so
    /// a key containing `&` is re-read from the raw start tag.
    std::optional<std::string> raw_key() {
        if (!parser_)
            return std::nullopt;
        int offset = 0, size = 0;
        const char *ctx = XML_GetInputContext(parser_, &offset, &size);
        const int count = XML_GetCurrentByteCount(parser_);
        if (!ctx || count <= 0 || offset + count > size)
            return std::nullopt;
        const std::string_view tag(ctx + offset, static_cast<std::size_t>(count));
        std::size_t pos = 0;
        while ((pos = tag.find("key", pos)) != std::string_view::npos) {
            const bool boundary = pos > 0 && (tag[pos - 1] == ' ' || tag[pos - 1] == '\t' || tag[pos - 1] == '\n' ||
                                              tag[pos - 1] == '\r');
            auto i = pos + 3;
            pos = i;
            if (!boundary)
                continue;
            while (i < tag.size() && (tag[i] == ' ' || tag[i] == '\t' || tag[i] == '\n' || tag[i] == '\r'))
                ++i;
            if (i >= tag.size() || tag[i] != '=')
                continue;
            ++i;
            while (i < tag.size() && (tag[i] == ' ' || tag[i] == '\t' || tag[i] == '\n' || tag[i] == '\r'))
                ++i;
            if (i >= tag.size() || (tag[i] != '"' && tag[i] != '\''))
                return std::nullopt;
            const auto close = tag.find(tag[i], i + 1);
            if (close == std::string_view::npos)
                return std::nullopt;
            const auto raw = tag.substr(i + 1, close - i - 1);
            if (raw.find('&') == std::string_view::npos)
                return std::nullopt;
            return decode_attribute(raw);
        }
        return std::nullopt;
    }

    std::string decode_attribute(std::string_view raw) {
        std::string out;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            const auto semi = raw[i] == '&' ? raw.find(';', i) : std::string_view::npos;
            if (semi == std::string_view::npos) {
                out += raw[i];
                continue;
            }
            const auto name = std::string(raw.substr(i + 1, semi - i - 1));
            const auto builtin = html_unescape("&" + name + ";");
            if (builtin != "&" + name + ";") {
                out += builtin;
            } else if (const auto *value = entities_.lookup(name)) {
                ++report_.entities_resolved;
                out += *value;
            } else {
                ++report_.entities_unknown;
                out += kReplacementChar;
            }
            i = semi;
        }
        return out;
    }

    static EntryType map_type(std::string_view element) {
        return parse_entry_type(element).value_or(EntryType::misc);
    }

    void assign_field() {
        auto &r = pending_->record;
        auto value = collapse_whitespace(text_);
        if (field_ == "title") {
            r.title = std::move(value);
        } else if (field_ == "author") {
            if (!value.empty())
                r.authors.push_back(std::move(value));
        } else if (field_ == "year") {
            if (auto y = parse_year(value))
                r.year = *y;
            else
                ++report_.warnings["invalid_year"];
        } else if (field_ == "journal" || field_ == "booktitle") {
            if (!r.venue && !value.empty())
                r.venue = std::move(value);
        } else if (field_ == "pages") {
            r.pages = std::move(value);
        } else if (field_ == "volume") {
            r.volume = std::move(value);
        } else if (field_ == "number") {
            r.number = std::move(value);
        } else if (field_ == "ee") {
            if (!pending_->url_from_ee && is_http_url(value)) {
                r.url = std::move(value);
                pending_->url_from_ee = true;
            }
        } else if (field_ == "url") {
            if (!r.url && is_http_url(value))
                r.url = std::move(value);
        } else if (!value.empty()) {
            auto &slot = r.extra[field_];
            if (!slot.empty())
                slot += "; ";
            slot += value;
        }
    }

    void finish_record() {
        auto pending = std::move(*pending_);
        pending_.reset();
        if (!pending.has_key) {
            ++report_.records_skipped;
            ++report_.reasons["missing_key"];
            return;
        }
        if (pending.record.title.empty()) {
            ++report_.records_skipped;
            ++report_.reasons["missing_title"];
            return;
        }
        if (pending.record.venue && pending.record.venue->empty())
            pending.record.venue.reset();
        for (auto *field : {&pending.record.pages, &pending.record.volume, &pending.record.number})
            if (*field && (*field)->empty())
                field->reset();
        writer_.upsert(std::move(pending.record), options_.title_lang);
        ++report_.records_ok;
    }

    XML_Parser parser_ = nullptr;
    Store::Writer &writer_;
    const EntityTable &entities_;
    IngestOptions options_;
    IngestReport &report_;
    int depth_ = 0;
    std::optional<PendingRecord> pending_;
    std::string field_;
    std::string text_;
};

void XMLCALL on_start(void *user, const XML_Char *name, const XML_Char **atts) {
    static_cast<DblpHandler *>(user)->start(name, atts);
}
void XMLCALL on_end(void *user, const XML_Char *) {
    static_cast<DblpHandler *>(user)->end();
}
void XMLCALL on_chars(void *user, const XML_Char *s, int len) {
    static_cast<DblpHandler *>(user)->characters(std::string_view(s, static_cast<std::size_t>(len)));
}
void XMLCALL on_skipped(void *user, const XML_Char *name, int is_parameter_entity) {
    if (!is_parameter_entity)
        static_cast<DblpHandler *>(user)->skipped_entity(name);
}
int XMLCALL on_external_entity(XML_Parser, const XML_Char *, const XML_Char *, const XML_Char *, const XML_Char *) {
    // The DTD is never fetched; its entities come from the EntityTable.
    return XML_STATUS_OK;
}

struct ParserDeleter {
    void operator()(XML_ParserStruct *p) const { XML_ParserFree(p); }
};

// ---------------------------------------------------------------------------
// Snapshot encoding: little-endian integers, u32-length-prefixed strings.

constexpr std::string_view kMagic = "GLNR1";

class Encoder {
public:
    void u8(std::uint8_t v) { buf_ += static_cast<char>(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i)
            buf_ += static_cast<char>((v >> (8 * i)) & 0xFF);
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i)
            buf_ += static_cast<char>((v >> (8 * i)) & 0xFF);
    }
    void str(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        buf_ += s;
    }
    void opt(const std::optional<std::string> &s) {
        u8(s ? 1 : 0);
        if (s)
            str(*s);
    }
    std::string take() { return std::move(buf_); }

private:
    std::string buf_;
};

class Decoder {
public:
    explicit Decoder(std::string_view data) : data_(data) {}
    std::uint8_t u8() { return static_cast<std::uint8_t>(need(1)[0]); }
    std::uint32_t u32() {
        const auto b = need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
        return v;
    }
    std::string str() {
        const auto n = u32();
        return std::string(need(n));
    }
    std::optional<std::string> opt() {
        if (u8() == 0)
            return std::nullopt;
        return str();
    }
    bool done() const noexcept { return pos_ == data_.size(); }

private:
    std::string_view need(std::size_t n) {
        if (data_.size() - pos_ < n)
            throw SnapshotError("snapshot section truncated");
        const auto out = data_.substr(pos_, n);
        pos_ += n;
        return out;
    }

    std::string_view data_;
    std::size_t pos_ = 0;
};

void write_section(std::ostream &out, const std::string &payload) {
    Encoder len;
    len.u64(payload.size());
    const auto prefix = len.take();
    out.write(prefix.data(), static_cast<std::streamsize>(prefix.size()));
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

std::string read_section(std::istream &in) {
    std::array<unsigned char, 8> len{};
    in.read(reinterpret_cast<char *>(len.data()), 8);
    if (in.gcount() != 8)
        throw SnapshotError("snapshot truncated");
    std::uint64_t n = 0;
    for (int i = 0; i < 8; ++i)
        n |= static_cast<std::uint64_t>(len[i]) << (8 * i);
    std::string payload(n, '\0');
    in.read(payload.data(), static_cast<std::streamsize>(n));
    if (static_cast<std::uint64_t>(in.gcount()) != n)
        throw SnapshotError("snapshot truncated");
    return payload;
}

} // namespace

// ---------------------------------------------------------------------------

EntityTable EntityTable::load(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open " + path.string());
    std::map<std::string, std::string> entries;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto t = trim(line);
        if (t.empty() || t.front() == '#')
            continue;
        const auto fields = split(t, '\t');
        if (fields.size() != 2)
            throw Error(path.string() + ":" + std::to_string(lineno) + ": expected name TAB hex");
        unsigned long cp = 0;
        try {
            cp = std::stoul(fields[1], nullptr, 16);
        } catch (const std::exception &) {
            throw Error(path.string() + ":" + std::to_string(lineno) + ": bad code point");
        }
        std::string utf8;
        append_utf8(utf8, static_cast<char32_t>(cp));
        entries.emplace(fields[0], std::move(utf8));
    }
    return EntityTable(std::move(entries));
}

const std::string *EntityTable::lookup(std::string_view name) const {
    const auto it = entries_.find(name);
    return it == entries_.end() ? nullptr : &it->second;
}

bool hit_order(const Hit &a, const Hit &b) noexcept {
    if (a.score != b.score)
        return a.score > b.score;
    if (a.record.year != b.record.year) {
        if (!a.record.year)
            return false;
        if (!b.record.year)
            return true;
        return *a.record.year > *b.record.year;
    }
    return a.record.id < b.record.id;
}

// ---------------------------------------------------------------------------
// Snapshot

const BibRecord *Snapshot::find(std::string_view id) const {
    const auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &records_[it->second];
}

const BibRecord &Snapshot::get_record(std::string_view id) const {
    if (const auto *r = find(id))
        return *r;
    throw UnknownRecord(std::string(id));
}

const text::LemmaSet &Snapshot::title_lemmas(std::string_view id) const {
    const auto it = by_id_.find(std::string(id));
    if (it == by_id_.end())
        throw UnknownRecord(std::string(id));
    return title_lemmas_[it->second];
}

void Snapshot::upsert(BibRecord record, text::LemmaSet lemmas) {
    const auto it = by_id_.find(record.id);
    std::uint32_t doc;
    if (it == by_id_.end()) {
        doc = static_cast<std::uint32_t>(records_.size());
        by_id_.emplace(record.id, doc);
        records_.push_back(std::move(record));
        title_lemmas_.emplace_back();
    } else {
        doc = it->second;
        for (const auto &old : title_lemmas_[doc]) {
            const auto p = postings_.find(old);
            auto &ids = p->second;
            ids.erase(std::lower_bound(ids.begin(), ids.end(), doc));
            if (ids.empty())
                postings_.erase(p);
        }
        records_[doc] = std::move(record);
    }
    for (const auto &lemma : lemmas) {
        auto &ids = postings_[lemma];
        ids.insert(std::lower_bound(ids.begin(), ids.end(), doc), doc);
    }
    title_lemmas_[doc] = std::move(lemmas);
}

std::vector<Hit> Snapshot::search(const text::LemmaSet &query, std::size_t limit) const {
    std::vector<Hit> hits;
    if (query.empty() || limit == 0)
        return hits;
    std::vector<std::uint32_t> candidates;
    for (const auto &lemma : query) {
        const auto p = postings_.find(lemma);
        if (p != postings_.end())
            candidates.insert(candidates.end(), p->second.begin(), p->second.end());
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    struct Scored {
        std::uint32_t doc;
        double score;
    };
    std::vector<Scored> scored;
    scored.reserve(candidates.size());
    for (auto doc : candidates)
        scored.push_back({doc, text::proximity(query, title_lemmas_[doc])});
    const auto order = [&](const Scored &a, const Scored &b) {
        if (a.score != b.score)
            return a.score > b.score;
        const auto &ra = records_[a.doc];
        const auto &rb = records_[b.doc];
        if (ra.year != rb.year) {
            if (!ra.year)
                return false;
            if (!rb.year)
                return true;
            return *ra.year > *rb.year;
        }
        return ra.id < rb.id;
    };
    const auto keep = std::min(limit, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(), order);
    hits.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i)
        hits.push_back({records_[scored[i].doc], scored[i].score});
    return hits;
}

std::vector<Hit> Snapshot::search(const text::LemmaBag &query, std::size_t limit) const {
    return search(query.distinct(), limit);
}

FacetCounts Snapshot::facets(const std::vector<std::string> &ids) const {
    FacetCounts counts;
    const std::string unknown(kUnknownFacet);
    for (const auto &id : ids) {
        const auto &r = get_record(id);
        ++counts.by_year[r.year ? std::to_string(*r.year) : unknown];
        ++counts.by_venue[r.venue ? *r.venue : unknown];
        ++counts.by_type[std::string(to_string(r.type))];
    }
    return counts;
}

std::vector<std::string> Snapshot::posting(std::string_view lemma) const {
    std::vector<std::string> out;
    const auto p = postings_.find(lemma);
    if (p == postings_.end())
        return out;
    for (auto doc : p->second)
        out.push_back(records_[doc].id);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> Snapshot::lemmas() const {
    std::vector<std::string> out;
    out.reserve(postings_.size());
    for (const auto &[lemma, _] : postings_)
        out.push_back(lemma);
    return out;
}

bool operator==(const Snapshot &a, const Snapshot &b) {
    if (a.records_.size() != b.records_.size() || a.postings_.size() != b.postings_.size())
        return false;
    for (std::size_t i = 0; i < a.records_.size(); ++i) {
        const auto *other = b.find(a.records_[i].id);
        if (!other || *other != a.records_[i] || b.title_lemmas(other->id) != a.title_lemmas_[i])
            return false;
    }
    for (const auto &[lemma, _] : a.postings_)
        if (a.posting(lemma) != b.posting(lemma))
            return false;
    return true;
}

void Snapshot::write(std::ostream &out) const {
    Encoder rec;
    rec.u32(static_cast<std::uint32_t>(records_.size()));
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto &r = records_[i];
        rec.str(r.id);
        rec.u8(static_cast<std::uint8_t>(r.type));
        rec.str(r.title);
        rec.u32(static_cast<std::uint32_t>(r.authors.size()));
        for (const auto &a : r.authors)
            rec.str(a);
        rec.u8(r.year ? 1 : 0);
        if (r.year)
            rec.u32(static_cast<std::uint32_t>(*r.year));
        rec.opt(r.venue);
        rec.opt(r.pages);
        rec.opt(r.volume);
        rec.opt(r.number);
        rec.opt(r.url);
        rec.u32(static_cast<std::uint32_t>(r.extra.size()));
        for (const auto &[k, v] : r.extra) {
            rec.str(k);
            rec.str(v);
        }
        rec.u32(static_cast<std::uint32_t>(title_lemmas_[i].size()));
        for (const auto &l : title_lemmas_[i])
            rec.str(l);
    }
    Encoder post;
    post.u32(static_cast<std::uint32_t>(postings_.size()));
    for (const auto &[lemma, docs] : postings_) {
        post.str(lemma);
        post.u32(static_cast<std::uint32_t>(docs.size()));
        for (auto d : docs)
            post.u32(d);
    }
    out.write(kMagic.data(), static_cast<std::streamsize>(kMagic.size()));
    write_section(out, rec.take());
    write_section(out, post.take());
    if (!out)
        throw SnapshotError("failed writing snapshot");
}

Snapshot Snapshot::read(std::istream &in) {
    std::array<char, 5> magic{};
    in.read(magic.data(), 5);
    if (in.gcount() != 5 || std::string_view(magic.data(), 5) != kMagic)
        throw SnapshotError("not a snapshot file (bad magic)");

    Snapshot s;
    const auto rec_payload = read_section(in);
    Decoder rec(rec_payload);
    const auto count = rec.u32();
    s.records_.reserve(count);
    s.title_lemmas_.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        BibRecord r;
        r.id = rec.str();
        const auto type = rec.u8();
        if (type >= kEntryTypes.size())
            throw SnapshotError("bad entry type in snapshot");
        r.type = static_cast<EntryType>(type);
        r.title = rec.str();
        const auto nauthors = rec.u32();
        for (std::uint32_t a = 0; a < nauthors; ++a)
            r.authors.push_back(rec.str());
        if (rec.u8())
            r.year = static_cast<int>(rec.u32());
        r.venue = rec.opt();
        r.pages = rec.opt();
        r.volume = rec.opt();
        r.number = rec.opt();
        r.url = rec.opt();
        const auto nextra = rec.u32();
        for (std::uint32_t e = 0; e < nextra; ++e) {
            auto k = rec.str();
            r.extra.emplace(std::move(k), rec.str());
        }
        text::LemmaSet lemmas;
        const auto nlemmas = rec.u32();
        for (std::uint32_t l = 0; l < nlemmas; ++l)
            lemmas.push_back(rec.str());
        if (!s.by_id_.emplace(r.id, i).second)
            throw SnapshotError("duplicate record id in snapshot: " + r.id);
        s.records_.push_back(std::move(r));
        s.title_lemmas_.push_back(std::move(lemmas));
    }
    if (!rec.done())
        throw SnapshotError("trailing bytes in records section");

    const auto post_payload = read_section(in);
    Decoder post(post_payload);
    const auto nlemmas = post.u32();
    for (std::uint32_t i = 0; i < nlemmas; ++i) {
        auto lemma = post.str();
        const auto n = post.u32();
        std::vector<std::uint32_t> docs;
        docs.reserve(n);
        for (std::uint32_t d = 0; d < n; ++d) {
            const auto doc = post.u32();
            if (doc >= count || (!docs.empty() && doc <= docs.back()))
                throw SnapshotError("corrupt posting list for " + lemma);
            docs.push_back(doc);
        }
        s.postings_.emplace(std::move(lemma), std::move(docs));
    }
    if (!post.done())
        throw SnapshotError("trailing bytes in postings section");
    return s;
}

void Snapshot::save(const std::filesystem::path &path) const {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw SnapshotError("cannot write " + tmp);
        write(out);
    }
    std::filesystem::rename(tmp, path);
}

Snapshot Snapshot::load(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw SnapshotError("cannot open " + path.string());
    return read(in);
}

// ---------------------------------------------------------------------------
// Store

Store::Store(const text::Pipeline &pipeline) : Store(pipeline, Snapshot{}) {}

Store::Store(const text::Pipeline &pipeline, Snapshot initial)
    : pipeline_(&pipeline), current_(std::make_shared<const Snapshot>(std::move(initial))) {}

std::shared_ptr<const Snapshot> Store::snapshot() const {
    std::lock_guard lock(read_mutex_);
    return current_;
}

void Store::publish(std::shared_ptr<const Snapshot> next) {
    std::lock_guard lock(read_mutex_);
    current_ = std::move(next);
}

Store::Writer::Writer(Store &store)
    : store_(&store), lock_(store.write_mutex_), draft_(std::make_shared<Snapshot>(*store.snapshot())) {}

bool Store::Writer::upsert(BibRecord record, Language title_lang) {
    if (!draft_)
        throw Error("writer already committed");
    if (!is_valid(record))
        return false;
    auto lemmas = store_->pipeline_->analyze(record.title, title_lang).distinct();
    draft_->upsert(std::move(record), std::move(lemmas));
    return true;
}

void Store::Writer::commit() {
    if (!draft_)
        throw Error("writer already committed");
    store_->publish(std::move(draft_));
}

Store::Writer Store::begin_write() {
    return Writer(*this);
}

void Store::upsert(BibRecord record, Language title_lang) {
    auto w = begin_write();
    w.upsert(std::move(record), title_lang);
    w.commit();
}

IngestReport Store::ingest_stream(std::istream &source, const EntityTable &entities, IngestOptions options) {
    IngestReport report;
    auto writer = begin_write();
    DblpHandler handler(writer, entities, options, report);

    std::unique_ptr<XML_ParserStruct, ParserDeleter> parser(XML_ParserCreate(nullptr));
    if (!parser)
        throw MalformedXml("cannot allocate XML parser");
    XML_SetUserData(parser.get(), &handler);
    handler.set_parser(parser.get());
    XML_SetElementHandler(parser.get(), on_start, on_end);
    XML_SetCharacterDataHandler(parser.get(), on_chars);
    XML_SetSkippedEntityHandler(parser.get(), on_skipped);
    XML_SetExternalEntityRefHandler(parser.get(), on_external_entity);
    XML_SetParamEntityParsing(parser.get(), XML_PARAM_ENTITY_PARSING_UNLESS_STANDALONE);

    const auto fail = [&](const std::string &what) {
        writer.commit();
        throw IngestAborted(what, report);
    };

    ByteSource bytes(source);
    std::vector<char> chunk(kChunkSize);
    bool first = true;
    for (;;) {
        std::size_t n = 0;
        try {
            n = bytes.read(chunk);
        } catch (const MalformedXml &e) {
            fail(e.what());
        }
        const bool last = n == 0;
        std::string_view data(chunk.data(), n);
        std::string prefixed;
        if (first && !last) {
            first = false;
            const auto at = doctype_insertion_point(data);
            if (at != std::string_view::npos) {
                prefixed.reserve(n + 40);
                prefixed.append(data.substr(0, at));
                prefixed.append("<!DOCTYPE dblp SYSTEM \"dblp.dtd\">");
                prefixed.append(data.substr(at));
                data = prefixed;
            }
        }
        if (XML_Parse(parser.get(), data.data(), static_cast<int>(data.size()), last) == XML_STATUS_ERROR) {
            fail(std::string(XML_ErrorString(XML_GetErrorCode(parser.get()))) + " at line " +
                 std::to_string(XML_GetCurrentLineNumber(parser.get())) + ", column " +
                 std::to_string(XML_GetCurrentColumnNumber(parser.get())));
        }
        if (last)
            break;
    }
    writer.commit();
    return report;
}

IngestReport Store::ingest_file(const std::filesystem::path &path, const EntityTable &entities,
                                IngestOptions options) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open " + path.string());
    return ingest_stream(in, entities, options);
}

std::vector<Hit> search_node(const Snapshot &store, const taxonomy::Graph &graph, const text::Pipeline &pipeline,
                             std::string_view node_id, Language lang, std::size_t limit) {
    const auto terms = taxonomy::node_own_terms(graph, pipeline, node_id, lang);
    return store.search(text::distinct(terms), limit);
}

} // namespace glanoir::bib
