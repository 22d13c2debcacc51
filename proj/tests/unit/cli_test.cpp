#include "oracles.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <sys/wait.h>

namespace {

namespace fs = std::filesystem;

struct Run {
    int status;
    std::string out;
};

Run run(const std::string &args) {
    const std::string cmd = std::string(GLANOIR_CLI_PATH) + " " + args + " 2>&1";
    FILE *pipe = popen(cmd.c_str(), "r");
    std::string out;
    std::array<char, 4096> buf{};
    while (const auto n = fread(buf.data(), 1, buf.size(), pipe))
        out.append(buf.data(), n);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("glanoir_cli_" + std::to_string(::getpid()));
        fs::create_directories(dir_);
        snapshot_ = "--snapshot " + (dir_ / "store.snap").string();
    }
    void TearDown() override { fs::remove_all(dir_); }
    fs::path dir_;
    std::string snapshot_;
};

TEST_F(CliTest, IngestPrintsReport) {
    const auto r = run(snapshot_ + " ingest " + oracle::fixture("dblp3.xml").string());
    EXPECT_EQ(r.status, 0) << r.out;
    EXPECT_EQ(r.out.rfind("ok=3 skipped=0\n", 0), 0u) << r.out;
    EXPECT_TRUE(fs::exists(dir_ / "store.snap"));
}

TEST_F(CliTest, QueryPrintsMatchesThenTitles) {
    run(snapshot_ + " ingest " + oracle::fixture("dblp3.xml").string());
    const auto r = run(snapshot_ + " query \"information retrieval\" --lang en");
    EXPECT_EQ(r.status, 0) << r.out;
    const auto m = r.out.find("matches:\n");
    const auto first = r.out.find("H.3.3");
    const auto res = r.out.find("results:\n");
    const auto title = r.out.find("Information retrieval with taxonomies.");
    ASSERT_NE(m, std::string::npos) << r.out;
    EXPECT_LT(m, first);
    EXPECT_LT(first, res);
    EXPECT_LT(res, title);
    EXPECT_EQ(r.out.find("Layered drawing"), std::string::npos);
}

TEST_F(CliTest, ExportUnknownOnEmptyStore) {
    const auto r = run(snapshot_ + " export k1 --format ris");
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.out.find("unknown record: k1"), std::string::npos) << r.out;
}

TEST_F(CliTest, ExportKnownRecord) {
    run(snapshot_ + " ingest " + oracle::fixture("dblp3.xml").string());
    const auto r = run(snapshot_ + " export conf/gd/Nguyen05 --format bibtex");
    EXPECT_EQ(r.status, 0);
    EXPECT_EQ(r.out.rfind("@inproceedings{conf/gd/Nguyen05,\n", 0), 0u) << r.out;
}

TEST_F(CliTest, ExitCodes) {
    EXPECT_EQ(run("").status, 2);
    EXPECT_EQ(run("frobnicate").status, 2);
    EXPECT_EQ(run(snapshot_ + " query x --k 0").status, 2);
    const auto bad_cfg = run(snapshot_ + " --taxonomy /nonexistent/x.graphml query x");
    EXPECT_NE(bad_cfg.status, 0);
    {
        std::ofstream(dir_ / "bad.xml") << "<dblp><article key=\"a\"><title>t</title></article><oops";
    }
    const auto bad_xml = run(snapshot_ + " ingest " + (dir_ / "bad.xml").string());
    EXPECT_EQ(bad_xml.status, 5) << bad_xml.out;
    EXPECT_NE(bad_xml.out.find("ok=1"), std::string::npos);
    const auto net = run(snapshot_ + " harvest http://127.0.0.1:1/oai --delay 0");
    EXPECT_EQ(net.status, 4) << net.out;
    {
        std::ofstream(dir_ / "bad.conf") << "k = many\n";
    }
    EXPECT_EQ(run("--config " + (dir_ / "bad.conf").string() + " " + snapshot_ + " query x").status, 3);
}

} // namespace
