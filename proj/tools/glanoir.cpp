// Command-line front end: ingest, harvest, query, export and serve.

#include "glanoir/bibstore.hpp"
#include "glanoir/error.hpp"
#include "glanoir/harvester.hpp"
#include "glanoir/metafmt.hpp"
#include "glanoir/service.hpp"
#include "glanoir/taxonomy.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <csignal>
#include <filesystem>
#include <iostream>

#ifndef GLANOIR_DATA_DIR
#define GLANOIR_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using namespace glanoir;

namespace {

enum Exit : int { kOk = 0, kDataError = 1, kUsage = 2, kConfigError = 3, kNetworkError = 4, kInputError = 5 };

struct Common {
    std::string config_file;
    std::string snapshot;
    std::string taxonomy;
    std::string stoplists;
    std::string lang;
    std::size_t k = 0;
    double threshold = -1.0;
    std::size_t limit = 0;
    std::string listen;
};

service::Config make_config(const Common &c) {
    service::Config cfg;
    const fs::path data(GLANOIR_DATA_DIR);
    cfg.taxonomy_path = data / "ccs1998.graphml";
    cfg.stoplist_dir = data / "textproc";
    cfg.snapshot_path = "glanoir.snapshot";
    if (!c.config_file.empty())
        cfg.apply_file(c.config_file);
    cfg.apply_env([](const char *name) { return std::getenv(name); });
    if (!c.snapshot.empty())
        cfg.set("snapshot_path", c.snapshot);
    if (!c.taxonomy.empty())
        cfg.set("taxonomy_path", c.taxonomy);
    if (!c.stoplists.empty())
        cfg.set("stoplist_dir", c.stoplists);
    if (!c.lang.empty())
        cfg.set("default_lang", c.lang);
    if (c.k > 0)
        cfg.k = c.k;
    if (c.threshold >= 0.0)
        cfg.threshold = c.threshold;
    if (c.limit > 0)
        cfg.result_limit = c.limit;
    if (!c.listen.empty())
        cfg.set("listen_address", c.listen);
    cfg.validate(false);
    return cfg;
}

bib::Snapshot open_snapshot(const fs::path &path) {
    return fs::exists(path) ? bib::Snapshot::load(path) : bib::Snapshot{};
}

void print_report(const bib::IngestReport &r) {
    std::cout << "ok=" << r.records_ok << " skipped=" << r.records_skipped << "\n";
    for (const auto &[reason, n] : r.reasons)
        std::cout << "  skipped." << reason << "=" << n << "\n";
    for (const auto &[warning, n] : r.warnings)
        std::cout << "  warning." << warning << "=" << n << "\n";
    if (r.entities_unknown > 0)
        std::cout << "  entities.unknown=" << r.entities_unknown << "\n";
}

service::HttpServer *g_server = nullptr;

void on_signal(int) {
    if (g_server)
        g_server->stop();
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Bilingual taxonomy-routed bibliographic search"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--config", common.config_file, "key = value config file")->check(CLI::ExistingFile);
    app.add_option("--snapshot", common.snapshot, "Store snapshot file");
    app.add_option("--taxonomy", common.taxonomy, "Taxonomy graphML file");
    app.add_option("--stoplists", common.stoplists, "Directory with stop lists and stemming rules");

    auto *ingest = app.add_subcommand("ingest", "Load DBLP-style XML (plain or gzip) into the snapshot");
    std::string ingest_path, entities_path = (fs::path(GLANOIR_DATA_DIR) / "dblp_entities.tsv").string();
    std::string title_lang = "en";
    ingest->add_option("xml", ingest_path, "Input file")->required()->check(CLI::ExistingFile);
    ingest->add_option("--entities", entities_path, "Named entity table")->check(CLI::ExistingFile);
    ingest->add_option("--title-lang", title_lang, "Language used to analyze titles")->check(CLI::IsMember({"fr", "en"}));

    auto *harvest = app.add_subcommand("harvest", "Harvest an OAI-PMH endpoint into the snapshot");
    std::string base_url, from, until, set, keywords;
    double delay = 1.0;
    harvest->add_option("base-url", base_url, "OAI-PMH base URL")->required();
    harvest->add_option("--from", from, "YYYY-MM-DD");
    harvest->add_option("--until", until, "YYYY-MM-DD");
    harvest->add_option("--set", set, "OAI set spec");
    harvest->add_option("--keywords", keywords, "Keep only records whose metadata meets these words");
    harvest->add_option("--lang", common.lang, "Keyword language")->check(CLI::IsMember({"fr", "en"}));
    harvest->add_option("--delay", delay, "Seconds between page requests")->check(CLI::NonNegativeNumber);

    auto *query = app.add_subcommand("query", "Match a query against the taxonomy and search the store");
    std::string query_text;
    query->add_option("text", query_text, "Query")->required();
    query->add_option("--lang", common.lang, "Query language")->check(CLI::IsMember({"fr", "en"}));
    query->add_option("--k", common.k, "Number of node matches")->check(CLI::PositiveNumber);
    query->add_option("--threshold", common.threshold, "Minimum match score")->check(CLI::Range(0.0, 1.0));
    query->add_option("--limit", common.limit, "Maximum results")->check(CLI::PositiveNumber);

    auto *exp = app.add_subcommand("export", "Print records as BibTeX or RIS");
    std::vector<std::string> export_ids;
    std::string format = "bibtex";
    exp->add_option("ids", export_ids, "Record ids")->required();
    exp->add_option("--format", format, "bibtex or ris")->check(CLI::IsMember({"bibtex", "ris"}));

    auto *serve = app.add_subcommand("serve", "Run the HTTP API and results pages");
    serve->add_option("--listen", common.listen, "host:port");
    serve->add_option("--lang", common.lang, "Default language")->check(CLI::IsMember({"fr", "en"}));
    serve->add_option("--k", common.k, "Number of node matches")->check(CLI::PositiveNumber);
    serve->add_option("--threshold", common.threshold, "Minimum match score")->check(CLI::Range(0.0, 1.0));
    serve->add_option("--limit", common.limit, "Maximum results")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kUsage;
    }

    try {
        const auto cfg = make_config(common);

        if (*ingest) {
            const auto pipeline = text::Pipeline::load(cfg.stoplist_dir);
            bib::Store store(pipeline, open_snapshot(cfg.snapshot_path));
            const auto entities = bib::EntityTable::load(entities_path);
            bib::IngestOptions opts;
            opts.title_lang = *text::parse_language(title_lang);
            int status = kOk;
            try {
                print_report(store.ingest_file(ingest_path, entities, opts));
            } catch (const bib::IngestAborted &e) {
                print_report(e.report());
                std::cerr << e.what() << "\n";
                status = kInputError;
            }
            store.snapshot()->save(cfg.snapshot_path);
            return status;
        }

        if (*harvest) {
            const auto pipeline = text::Pipeline::load(cfg.stoplist_dir);
            bib::Store store(pipeline, open_snapshot(cfg.snapshot_path));
            oai::HttplibTransport transport;
            oai::OaiEndpoint ep;
            ep.base_url = base_url;
            ep.politeness_delay = std::chrono::milliseconds(static_cast<long long>(delay * 1000));
            oai::Client client(ep, transport);
            oai::ListOptions opts;
            if (!from.empty())
                opts.from = from;
            if (!until.empty())
                opts.until = until;
            if (!set.empty())
                opts.set = set;
            const auto lang = cfg.default_lang;
            const auto records = client.harvest_filtered(pipeline, pipeline.analyze(keywords, lang), lang, opts);
            std::size_t merged = 0, untitled = 0;
            auto writer = store.begin_write();
            for (const auto &rec : records) {
                try {
                    if (writer.upsert(oai::oai_to_bib(rec), lang))
                        ++merged;
                } catch (const MissingTitle &) {
                    ++untitled;
                }
            }
            writer.commit();
            store.snapshot()->save(cfg.snapshot_path);
            std::cout << "harvested=" << records.size() << " merged=" << merged << " untitled=" << untitled
                      << " requests=" << client.requests_sent() << "\n";
            return kOk;
        }

        if (*query) {
            const auto graph = taxonomy::load_graph_file(cfg.taxonomy_path);
            const auto pipeline = text::Pipeline::load(cfg.stoplist_dir);
            bib::Store store(pipeline, open_snapshot(cfg.snapshot_path));
            const service::Service svc(graph, pipeline, store, service::options_from(cfg));
            const auto resp = svc.query(query_text, cfg.default_lang);
            std::printf("matches:\n");
            for (const auto &m : resp.matches)
                std::printf("  %.4f  %s  %s\n", m.score, m.id.c_str(), graph.node(m.id).label(resp.lang).c_str());
            if (resp.matches.empty())
                for (const auto &m : resp.suggestions)
                    std::printf("  (%.4f  %s  %s)\n", m.score, m.id.c_str(),
                                graph.node(m.id).label(resp.lang).c_str());
            std::printf("results:\n");
            for (const auto &item : resp.results)
                std::printf("  %.4f  %s  %s\n", item.score, item.record.id.c_str(), item.record.title.c_str());
            return kOk;
        }

        if (*exp) {
            const auto snapshot = open_snapshot(cfg.snapshot_path);
            std::string out;
            for (const auto &id : export_ids) {
                const auto &r = snapshot.get_record(id);
                out += format == "ris" ? meta::ris_serialize(r) : meta::bibtex_serialize(r);
            }
            std::cout << out;
            return kOk;
        }

        if (*serve) {
            cfg.validate(true);
            service::Runtime runtime(cfg);
            service::HttpServer server(runtime.service);
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "listening on http://" << cfg.listen_address << " (" << runtime.store.snapshot()->size()
                      << " records, " << runtime.graph.nodes().size() << " nodes)\n";
            server.run(cfg.host(), cfg.port());
            return kOk;
        }
    } catch (const UnknownRecord &e) {
        std::cerr << e.what() << "\n";
        return kDataError;
    } catch (const UnknownNode &e) {
        std::cerr << e.what() << "\n";
        return kDataError;
    } catch (const ConfigError &e) {
        std::cerr << "config: " << e.what() << "\n";
        return kConfigError;
    } catch (const TransportError &e) {
        std::cerr << "network: " << e.what() << "\n";
        return kNetworkError;
    } catch (const ProtocolError &e) {
        std::cerr << "protocol: " << e.what() << "\n";
        return kNetworkError;
    } catch (const OaiError &e) {
        std::cerr << e.what() << "\n";
        return kNetworkError;
    } catch (const Error &e) {
        std::cerr << "input: " << e.what() << "\n";
        return kInputError;
    }
    return kUsage;
}
