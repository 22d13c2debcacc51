#include "generators.hpp"
#include "oracles.hpp"
#include "glanoir/error.hpp"
#include "glanoir/metafmt.hpp"
#include "glanoir/service.hpp"

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include <fstream>

namespace glanoir::service {
namespace {

using nlohmann::json;

struct World {
    taxonomy::Graph graph;
    text::Pipeline pipeline;
    bib::Store store;
    Service service;

    explicit World(const std::filesystem::path &graph_file, Options options = {})
        : graph(taxonomy::load_graph_file(graph_file)), pipeline(text::Pipeline::load(oracle::data("textproc"))),
          store(pipeline), service(graph, pipeline, store, options) {
        store.ingest_file(oracle::fixture("dblp3.xml"), bib::EntityTable::load(oracle::data("dblp_entities.tsv")));
    }
};

World &ccs_world() {
    static World w(oracle::data("ccs1998.graphml"));
    return w;
}

BibRecord titled(std::string title) {
    BibRecord r;
    r.id = "x";
    r.title = std::move(title);
    return r;
}

// ------------------------------------------------------------------ config

const char *no_env(const char *) {
    return nullptr;
}

TEST(Config, Defaults) {
    Config c;
    EXPECT_EQ(c.listen_address, "127.0.0.1:8080");
    EXPECT_EQ(c.k, 3u);
    EXPECT_EQ(c.threshold, 0.1);
    EXPECT_EQ(c.default_lang, Language::en);
    EXPECT_EQ(c.host(), "127.0.0.1");
    EXPECT_EQ(c.port(), 8080);
}

TEST(Config, PrecedenceFileEnvFlags) {
    const auto path = std::filesystem::temp_directory_path() / "glanoir_config_test.conf";
    {
        std::ofstream out(path);
        out << "# comment\n\nk = 5\nthreshold=0.3   # trailing\ndefault_lang = fr\nresult_limit = 7\n";
    }
    const auto env = [](const char *name) -> const char * {
        if (std::string_view(name) == "GLANOIR_THRESHOLD")
            return "0.4";
        if (std::string_view(name) == "GLANOIR_DEFAULT_LANG")
            return "en";
        return nullptr;
    };
    const auto c = load_config(path, env, {{"default_lang", "fr"}}, false);
    EXPECT_EQ(c.k, 5u);               // file
    EXPECT_EQ(c.threshold, 0.4);      // env beats file
    EXPECT_EQ(c.default_lang, Language::fr); // flag beats env
    EXPECT_EQ(c.result_limit, 7u);
    std::filesystem::remove(path);
}

TEST(Config, Errors) {
    Config c;
    EXPECT_THROW(c.set("nope", "1"), ConfigError);
    EXPECT_THROW(c.set("k", "abc"), ConfigError);
    EXPECT_THROW(c.set("default_lang", "de"), ConfigError);
    EXPECT_THROW(load_config(std::nullopt, no_env, {{"k", "0"}}, false), ConfigError);
    EXPECT_THROW(load_config(std::nullopt, no_env, {{"threshold", "1.5"}}, false), ConfigError);
    EXPECT_THROW(load_config(std::nullopt, no_env, {{"listen_address", "nohost"}}, false), ConfigError);
    EXPECT_THROW(load_config(std::nullopt, no_env, {{"listen_address", "h:99999"}}, false), ConfigError);
    EXPECT_THROW(load_config(std::filesystem::path("/nonexistent.conf"), no_env, {}, false), ConfigError);
    EXPECT_THROW(load_config(std::nullopt, no_env, {{"taxonomy_path", "/nonexistent"}}, true), ConfigError);
    Config ok;
    ok.taxonomy_path = oracle::data("ccs1998.graphml");
    ok.stoplist_dir = oracle::data("textproc");
    ok.snapshot_path = oracle::fixture("dblp3.xml");
    EXPECT_NO_THROW(ok.validate(true));
}

TEST(Config, EveryKeyIsSettable) {
    Config c;
    for (const auto key : kConfigKeys) {
        const std::string value = key == "listen_address" ? "0.0.0.0:1" : key == "default_lang" ? "fr"
                                  : key == "threshold"    ? "0.5"
                                  : key.ends_with("path") || key.ends_with("dir") ? "/tmp"
                                                                                   : "2";
        EXPECT_NO_THROW(c.set(key, value)) << key;
    }
}

// ----------------------------------------------------------------- scholar

TEST(Scholar, Examples) {
    EXPECT_EQ(scholar_url(titled("Test")), "https://scholar.google.com/scholar?q=%22Test%22");
    EXPECT_EQ(scholar_url(titled("The DBLP computer science bibliography")),
              "https://scholar.google.com/scholar?q=%22The%20DBLP%20computer%20science%20bibliography%22");
    EXPECT_EQ(scholar_url(titled("Say \"what\"")), "https://scholar.google.com/scholar?q=%22Say%20what%22");
    auto r = titled("Test");
    r.authors = {"Hans Müller 0002", "B"};
    EXPECT_EQ(scholar_url(r), "https://scholar.google.com/scholar?q=%22Test%22+M%C3%BCller");
}

TEST(Scholar, FamilyName) {
    EXPECT_EQ(family_name("Doe, J."), "Doe");
    EXPECT_EQ(family_name("Jane Doe"), "Doe");
    EXPECT_EQ(family_name("Wei Wang 0001"), "Wang");
    EXPECT_EQ(family_name("Plato"), "Plato");
}

TEST(MakeResult, LinkKinds) {
    bib::Hit hit{titled("Test"), 1.0};
    auto item = make_result(hit);
    EXPECT_EQ(item.link_kind, LinkKind::scholar);
    EXPECT_EQ(item.link, scholar_url(hit.record));
    hit.record.url = "https://e.org/x";
    item = make_result(hit);
    EXPECT_EQ(item.link_kind, LinkKind::direct);
    EXPECT_EQ(item.link, "https://e.org/x");
    EXPECT_EQ(item.coins, meta::coins_span(meta::coins_encode(hit.record)));
}

// ---------------------------------------------------------------- service

TEST(ServiceQuery, InformationRetrieval) {
    const auto &svc = ccs_world().service;
    const auto r = svc.query("information retrieval", Language::en);
    ASSERT_FALSE(r.matches.empty());
    EXPECT_EQ(r.matches[0].id, "H.3.3");
    EXPECT_EQ(r.matches[0].path, (std::vector<std::string>{"H.3.3", "H.3", "H", ccs_world().graph.root()}));
    ASSERT_EQ(r.results.size(), 1u);
    EXPECT_EQ(r.results[0].record.id, "journals/jasis/MartinDubois03");
    EXPECT_EQ(r.results[0].link_kind, LinkKind::direct);
    const auto kev = meta::extract_coins(r.results[0].coins);
    ASSERT_EQ(kev.size(), 1u);
    EXPECT_EQ(meta::coins_fields(meta::coins_decode(kev[0])), meta::coins_fields(r.results[0].record));
    EXPECT_EQ(r.facets.by_year, (std::map<std::string, std::size_t>{{"2003", 1}}));
    EXPECT_TRUE(r.suggestions.empty());
}

TEST(ServiceQuery, NoMatchGivesSuggestionsNeverFailure) {
    const auto &svc = ccs_world().service;
    const auto none = svc.query("zzzz qqqq", Language::en);
    EXPECT_TRUE(none.matches.empty());
    EXPECT_TRUE(none.results.empty());
    EXPECT_TRUE(none.suggestions.empty());

    World strict(oracle::data("ccs1998.graphml"), Options{.k = 3, .threshold = 0.99});
    const auto near = strict.service.query("information retrieval", Language::en);
    EXPECT_TRUE(near.matches.empty());
    EXPECT_FALSE(near.suggestions.empty());
    EXPECT_LE(near.suggestions.size(), 3u);
    EXPECT_EQ(near.results.size(), 1u); // the store is still searched
}

TEST(ServiceNode, SelfAndCrossrefs) {
    const auto &svc = ccs_world().service;
    const auto r = svc.node("H.3.3", Language::en);
    ASSERT_GE(r.matches.size(), 2u);
    EXPECT_EQ(r.matches[0].id, "H.3.3");
    EXPECT_EQ(r.matches[0].score, 1.0);
    EXPECT_FALSE(r.matches[0].crossref);
    bool found = false;
    for (const auto &m : r.matches)
        if (m.id == "I.7") {
            found = true;
            EXPECT_TRUE(m.crossref);
            EXPECT_EQ(m.score, 0.0);
        }
    EXPECT_TRUE(found);
    ASSERT_EQ(r.results.size(), 1u);
    EXPECT_EQ(r.results[0].record.id, "journals/jasis/MartinDubois03");
    EXPECT_THROW(svc.node("ZZ", Language::en), UnknownNode);
}

TEST(ServiceExport, Delegation) {
    const auto &w = ccs_world();
    const auto snap = w.store.snapshot();
    const std::string a = "conf/gd/Nguyen05", b = "journals/jasis/MartinDubois03";
    EXPECT_EQ(w.service.export_records({a}, ExportFormat::bibtex), meta::bibtex_serialize(snap->get_record(a)));
    const auto ris = w.service.export_records({b, a}, ExportFormat::ris);
    EXPECT_EQ(ris, meta::ris_serialize(snap->get_record(b)) + meta::ris_serialize(snap->get_record(a)));
    EXPECT_THROW(w.service.export_records({"nope"}, ExportFormat::ris), UnknownRecord);
    EXPECT_EQ(w.service.missing_records({a, "nope", "x"}), (std::vector<std::string>{"nope", "x"}));
    EXPECT_EQ(parse_export_format("bib"), ExportFormat::bibtex);
    EXPECT_EQ(parse_export_format("mods"), std::nullopt);
}

TEST(ServiceGraph, FixtureDocument) {
    World w(oracle::fixture("graph4.graphml"));
    const auto doc = json::parse(w.service.graph_json());
    EXPECT_EQ(doc["root"], "H");
    EXPECT_EQ(doc["nodes"].size(), 4u);
    std::size_t hierarchy = 0, crossref = 0;
    for (const auto &e : doc["edges"])
        (e["kind"] == "hierarchy" ? hierarchy : crossref)++;
    EXPECT_EQ(hierarchy, 3u);
    EXPECT_EQ(crossref, 1u);
    EXPECT_EQ(doc["nodes"][0]["labels"]["fr"], "Systèmes d'information");
    EXPECT_EQ(doc["nodes"][0]["labels"]["en"], "Information Systems");
    EXPECT_EQ(w.service.graph_json(), w.service.graph_json());
}

TEST(ServiceHtml, GleanablePage) {
    const auto &svc = ccs_world().service;
    const auto resp = svc.query("graph information", Language::en);
    const auto html = svc.results_html(resp);
    const auto spans = meta::extract_coins(html);
    ASSERT_EQ(spans.size(), resp.results.size());
    ASSERT_GE(spans.size(), 2u);
    for (std::size_t i = 0; i < spans.size(); ++i) {
        std::string why;
        ASSERT_TRUE(oracle::kev_valid(spans[i], &why)) << why;
        EXPECT_EQ(meta::coins_fields(meta::coins_decode(spans[i])), meta::coins_fields(resp.results[i].record));
    }
    EXPECT_NE(html.find("<link rel=\"schema.DC\" href=\"http://purl.org/dc/elements/1.1/\">"), std::string::npos);
    EXPECT_NE(html.find("<meta name=\"DC.title\""), std::string::npos);
    const auto empty = svc.results_html(svc.query("zzzz", Language::en));
    EXPECT_TRUE(meta::extract_coins(empty).empty());
    EXPECT_NE(empty.find("class=\"empty\""), std::string::npos);
}

TEST(ServiceJson, ResponseShape) {
    const auto &svc = ccs_world().service;
    const auto doc = json::parse(svc.response_json(svc.query("information retrieval", Language::fr)));
    EXPECT_EQ(doc["query"], "information retrieval");
    EXPECT_EQ(doc["kind"], "query");
    EXPECT_EQ(doc["lang"], "fr");
    for (const auto *key : {"matches", "suggestions", "results", "facets"})
        EXPECT_TRUE(doc.contains(key)) << key;
    for (const auto &r : doc["results"]) {
        EXPECT_FALSE(r["link"].get<std::string>().empty());
        EXPECT_TRUE(r["link_kind"] == "direct" || r["link_kind"] == "scholar");
    }
}

// ------------------------------------------------------------------- HTTP

class HttpTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        server_ = new HttpServer(ccs_world().service);
        port_ = server_->start("127.0.0.1", 0);
    }
    static void TearDownTestSuite() {
        server_->stop();
        delete server_;
    }
    httplib::Result get(const std::string &path) {
        httplib::Client c("127.0.0.1", port_);
        return c.Get(path);
    }
    static HttpServer *server_;
    static int port_;
};
HttpServer *HttpTest::server_ = nullptr;
int HttpTest::port_ = 0;

TEST_F(HttpTest, QueryEndpoint) {
    auto res = get("/api/query?q=information%20retrieval&lang=en");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
    EXPECT_EQ(res->get_header_value("Content-Type"), "application/json; charset=UTF-8");
    const auto doc = json::parse(res->body);
    EXPECT_EQ(doc["matches"][0]["id"], "H.3.3");
    ASSERT_EQ(doc["results"].size(), 1u);
    const auto coins = doc["results"][0]["coins"].get<std::string>();
    EXPECT_EQ(meta::extract_coins(coins).size(), 1u);

    EXPECT_EQ(get("/api/query?q=")->status, 400);
    EXPECT_EQ(get("/api/query?q=%20%20")->status, 400);
    EXPECT_EQ(get("/api/query")->status, 400);
    EXPECT_EQ(get("/api/query?q=x&lang=de")->status, 400);
    EXPECT_EQ(get("/api/query?q=x&limit=0")->status, 400);
    EXPECT_EQ(get("/api/query?q=x&limit=abc")->status, 400);
    EXPECT_EQ(get("/api/query?q=zzzz")->status, 200);
}

TEST_F(HttpTest, QueryLimit) {
    const auto doc = json::parse(get("/api/query?q=graph%20information%20compilers&limit=1")->body);
    EXPECT_EQ(doc["results"].size(), 1u);
}

TEST_F(HttpTest, NodeEndpoint) {
    auto res = get("/api/node/H.3.3?lang=fr");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    const auto doc = json::parse(res->body);
    EXPECT_EQ(doc["kind"], "node");
    EXPECT_EQ(doc["matches"][0]["id"], "H.3.3");
    bool crossref = false;
    for (const auto &m : doc["matches"])
        crossref |= m["id"] == "I.7" && m["crossref"] == true;
    EXPECT_TRUE(crossref);
    EXPECT_EQ(get("/api/node/NOPE")->status, 404);
    EXPECT_EQ(get("/api/node/H.3.3?lang=xx")->status, 400);
}

TEST_F(HttpTest, ExportEndpoint) {
    const std::string a = "conf/gd/Nguyen05", b = "journals/jasis/MartinDubois03";
    const auto snap = ccs_world().store.snapshot();
    auto res = get("/api/export?ids=" + httplib::detail::encode_query_param(a) + "&format=bibtex");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(res->body, meta::bibtex_serialize(snap->get_record(a)));
    EXPECT_EQ(res->get_header_value("Content-Type"), "text/plain; charset=UTF-8");
    EXPECT_NE(res->get_header_value("Content-Disposition").find("export.bib"), std::string::npos);

    res = get("/api/export?id=" + httplib::detail::encode_query_param(b) + "&id=" +
              httplib::detail::encode_query_param(a) + "&format=ris");
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(res->body, meta::ris_serialize(snap->get_record(b)) + meta::ris_serialize(snap->get_record(a)));
    EXPECT_NE(res->get_header_value("Content-Disposition").find("export.ris"), std::string::npos);
    std::size_t blocks = 0;
    for (auto p = res->body.find("ER  - \r\n"); p != std::string::npos; p = res->body.find("ER  - \r\n", p + 1))
        ++blocks;
    EXPECT_EQ(blocks, 2u);

    EXPECT_EQ(get("/api/export?ids=" + httplib::detail::encode_query_param(a) + "&format=mods")->status, 400);
    EXPECT_EQ(get("/api/export?format=ris")->status, 400);
    res = get("/api/export?ids=k1,k2");
    EXPECT_EQ(res->status, 404);
    EXPECT_EQ(json::parse(res->body)["missing"], (json::array({"k1", "k2"})));
}

TEST_F(HttpTest, GraphAndStats) {
    auto g1 = get("/api/graph");
    auto g2 = get("/api/graph");
    EXPECT_EQ(g1->status, 200);
    EXPECT_EQ(g1->body, g2->body);
    const auto before = json::parse(get("/api/stats")->body);
    get("/api/query?q=x");
    const auto after = json::parse(get("/api/stats")->body);
    EXPECT_EQ(after["requests"]["query"].get<int>(), before["requests"]["query"].get<int>() + 1);
    EXPECT_EQ(after["records"], 3);
    EXPECT_EQ(after["nodes"], ccs_world().graph.nodes().size());
}

TEST_F(HttpTest, ResultsPage) {
    auto res = get("/results?q=information%20retrieval");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(res->get_header_value("Content-Type"), "text/html; charset=UTF-8");
    EXPECT_EQ(meta::extract_coins(res->body).size(), 1u);
    EXPECT_EQ(get("/results?node=H.3.3")->status, 200);
    EXPECT_EQ(get("/results?node=NOPE")->status, 404);
    EXPECT_EQ(get("/results")->status, 400);
}

TEST_F(HttpTest, Determinism) {
    for (const auto *path : {"/api/query?q=information%20retrieval", "/api/node/H.3", "/results?q=graph",
                             "/api/graph"})
        EXPECT_EQ(get(path)->body, get(path)->body) << path;
}

TEST_F(HttpTest, QueryNeverReturns5xx) {
    gen::Rng rng(1234);
    for (int i = 0; i < 300; ++i) {
        const auto q = gen::printable(rng, 0, 40);
        std::string path = "/api/query?q=" + httplib::detail::encode_query_param(q);
        if (gen::coin(rng, 0.3))
            path += std::string("&lang=") + (gen::coin(rng) ? "fr" : "en");
        if (gen::coin(rng, 0.2))
            path += "&limit=" + std::to_string(gen::uniform(rng, 1, 100));
        const auto res = get(path);
        ASSERT_TRUE(res) << path;
        ASSERT_LT(res->status, 500) << path;
        ASSERT_TRUE(res->status == 200 || res->status == 400) << path;
    }
}

} // namespace
} // namespace glanoir::service
