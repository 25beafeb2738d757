#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ringtrace/cli.hpp"
#include "support/fixtures.hpp"

using namespace ringtrace;
namespace fs = std::filesystem;

namespace {

struct CaptureStreams {
    std::ostringstream out, err;
    std::streambuf* old_out;
    std::streambuf* old_err;
    CaptureStreams() : old_out(std::cout.rdbuf(out.rdbuf())), old_err(std::cerr.rdbuf(err.rdbuf())) {}
    ~CaptureStreams() {
        std::cout.rdbuf(old_out);
        std::cerr.rdbuf(old_err);
    }
};

fs::path fixture_dir() {
    fs::path dir = fs::temp_directory_path() / "ringtrace_cli_fixture";
    fs::create_directories(dir);
    auto buffers = ringtrace::testing::fork_fixture_buffers();
    for (const auto& b : buffers) {
        std::ofstream os(dir / (b.name + ".jsonl"), std::ios::binary);
        os << b.content;
    }
    std::ofstream spec(dir / "forkspec.json", std::ios::binary);
    spec << R"({"branches":[{"name":"main","file":"main.jsonl","parent":null,"fork_height":null},)"
         << R"({"name":"fork","file":"fork.jsonl","parent":"main","fork_height":2}]})";
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("analyze then report reproduces the fixture counts") {
    fs::path dir = fixture_dir();
    fs::path out = dir / "analysis";
    {
        CaptureStreams cap;
        CHECK(run_cli({"analyze", "--spec", (dir / "forkspec.json").string(), "--out",
                       out.string()}) == 0);
    }
    CHECK(fs::exists(out / "rings.jsonl"));
    CHECK(fs::exists(out / "spent_main.jsonl"));
    CHECK(fs::exists(out / "spent_fork.jsonl"));
    CHECK(fs::exists(out / "validation.csv"));

    std::string spent_main = slurp(out / "spent_main.jsonl");
    // a attributed to ki 02, b and c unattributed, x attributed to ki 04.
    CHECK(spent_main.find(R"({"amount":0,"index":0,"key_image":"02"})") != std::string::npos);
    CHECK(spent_main.find(R"({"amount":0,"index":1,"key_image":null})") != std::string::npos);
    CHECK(spent_main.find(R"({"amount":0,"index":2,"key_image":null})") != std::string::npos);
    CHECK(spent_main.find(R"({"amount":0,"index":6,"key_image":"04"})") != std::string::npos);

    fs::path rep = dir / "report";
    {
        CaptureStreams cap;
        CHECK(run_cli({"report", "--spec", (dir / "forkspec.json").string(), "--monthly",
                       "--out", rep.string()}) == 0);
    }
    std::string monthly = slurp(rep / "monthly.csv");
    // 2 traced of 5 nontrivial rings on the main branch.
    CHECK(monthly.find("2018-04,main,5,2,") != std::string::npos);
    std::string delta = slurp(rep / "delta.csv");
    CHECK(delta.find("2018-04,main,2,1,") != std::string::npos);
}

TEST_CASE("report output is byte-identical across runs and thread counts") {
    fs::path dir = fixture_dir();
    fs::path rep1 = dir / "rep1", rep2 = dir / "rep2";
    {
        CaptureStreams cap;
        REQUIRE(run_cli({"--threads", "1", "report", "--spec",
                         (dir / "forkspec.json").string(), "--out", rep1.string()}) == 0);
        REQUIRE(run_cli({"--threads", "8", "report", "--spec",
                         (dir / "forkspec.json").string(), "--out", rep2.string()}) == 0);
    }
    CHECK(slurp(rep1 / "monthly.csv") == slurp(rep2 / "monthly.csv"));
    CHECK(slurp(rep1 / "delta.csv") == slurp(rep2 / "delta.csv"));
}

TEST_CASE("analyze honours rule subsets") {
    fs::path dir = fixture_dir();
    fs::path out = dir / "zmr_only";
    CaptureStreams cap;
    CHECK(run_cli({"analyze", "--spec", (dir / "forkspec.json").string(), "--rules", "zmr",
                   "--out", out.string()}) == 0);
    // No singleton rings exist up front, so nothing resolves under zmr alone.
    CHECK(cap.out.str().find("0 key images resolved") != std::string::npos);
    CHECK(run_cli({"analyze", "--spec", (dir / "forkspec.json").string(), "--rules", "bogus",
                   "--out", out.string()}) == 2);
    CHECK(run_cli({"evaluate", "--spec", (dir / "forkspec.json").string(), "--heuristic",
                   "gnh", "--truth", "ground", "--out", out.string()}) == 2);
}

TEST_CASE("usage errors exit with 2") {
    CaptureStreams cap;
    CHECK(run_cli({"--bogus-flag"}) == 2);
    CHECK(run_cli({"analyze"}) == 2);                               // missing required
    CHECK(run_cli({"frobnicate", "--spec", "x"}) == 2);             // unknown subcommand
    CHECK(run_cli({"evaluate", "--spec", "x", "--heuristic", "zzz",
                   "--out", "y"}) == 2);                            // bad enum value
}

TEST_CASE("validation failures exit with 1") {
    fs::path dir = fixture_dir();
    // Corrupt the fork file: duplicate key image on one branch.
    std::string fork = slurp(dir / "fork.jsonl");
    auto pos = fork.find("\"key_image\":\"04\"");
    REQUIRE(pos != std::string::npos);
    std::string corrupted = fork;
    corrupted.replace(pos, std::string("\"key_image\":\"04\"").size(), "\"key_image\":\"03\"");
    fs::path bad_dir = dir / "bad";
    fs::create_directories(bad_dir);
    {
        std::ofstream os(bad_dir / "fork.jsonl", std::ios::binary);
        os << corrupted;
    }
    fs::copy_file(dir / "main.jsonl", bad_dir / "main.jsonl",
                  fs::copy_options::overwrite_existing);
    {
        std::ofstream os(bad_dir / "forkspec.json", std::ios::binary);
        os << R"({"branches":[{"name":"main","file":"main.jsonl","parent":null,"fork_height":null},)"
           << R"({"name":"fork","file":"fork.jsonl","parent":"main","fork_height":2}]})";
    }
    CaptureStreams cap;
    CHECK(run_cli({"analyze", "--spec", (bad_dir / "forkspec.json").string(), "--out",
                   (bad_dir / "out").string()}) == 1);
    CHECK(run_cli({"analyze", "--spec", "/nonexistent/forkspec.json", "--out",
                   (bad_dir / "out").string()}) == 1);
}

TEST_CASE("oracle subcommand prints forced assignments") {
    fs::path dir = fixture_dir();
    CaptureStreams cap;
    CHECK(run_cli({"oracle", "--spec", (dir / "forkspec.json").string()}) == 0);
    std::string out = cap.out.str();
    CHECK(out.find("assignments: 4") != std::string::npos);
    CHECK(out.find("[traced]") != std::string::npos);
}
