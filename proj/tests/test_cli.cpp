// End-to-end checks of the command-line surface via the built binary.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "bline/io.hpp"
#include "doctest.h"

namespace fs = std::filesystem;
using namespace bline;

namespace {

fs::path work_dir() {
    const fs::path dir = fs::current_path() / "cli_test_tmp";
    fs::create_directories(dir);
    return dir;
}

int cli(const std::string& args, const fs::path& stdout_to = {}) {
    std::string command = std::string(BLINE_CLI_PATH) + " " + args;
    if (!stdout_to.empty()) command += " > " + stdout_to.string();
    command += " 2> /dev/null";
    const int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_opinion_file(const fs::path& path, const std::string& body) {
    std::ofstream out(path);
    out << body;
}

const std::string kTwoCases =
    R"({"case_id":"c1","annotator_id":"a","timestamp":1,"split":"test","lines":[[10,20,10,100],[60,25,60,100]]}
{"case_id":"c2","annotator_id":"a","timestamp":2,"split":"test","lines":[]}
)";

}  // namespace

TEST_CASE("diceh self-comparison scores 1.0 everywhere") {
    const fs::path dir = work_dir();
    write_opinion_file(dir / "self.jsonl", kTwoCases);
    const fs::path out = dir / "diceh.csv";
    REQUIRE(cli("diceh " + (dir / "self.jsonl").string() + " " + (dir / "self.jsonl").string(),
                out) == 0);
    CHECK(slurp(out) == "case_id,dice_h\nc1,1\nc2,1\n");
}

TEST_CASE("consensus of a single annotator is that annotator's lines") {
    const fs::path dir = work_dir();
    write_opinion_file(dir / "solo.jsonl", kTwoCases);
    const fs::path out = dir / "solo_consensus.jsonl";
    REQUIRE(cli("consensus " + (dir / "solo.jsonl").string() + " --out " + out.string()) == 0);

    std::ifstream in(out);
    const auto parsed = io::parse_consensus(in);
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0].case_id == "c1");
    CHECK(parsed[0].lines.size() == 2);
    CHECK(parsed[0].contributing_annotators == 1);
    CHECK(parsed[1].lines.empty());
}

TEST_CASE("qscore dump replays training scores") {
    const fs::path dir = work_dir();
    // two training opinions against a one-line reference
    write_opinion_file(
        dir / "train.jsonl",
        R"({"case_id":"c1","annotator_id":"u","timestamp":10,"split":"train","lines":[[10,20,10,100]]}
{"case_id":"c1","annotator_id":"u","timestamp":20,"split":"train","lines":[[14,20,14,100]]}
)");
    write_opinion_file(
        dir / "truth.jsonl",
        R"({"case_id":"c1","annotator_id":"truth","timestamp":0,"split":"train","lines":[[10,20,10,100]]}
)");
    const fs::path out = dir / "ledger.csv";
    REQUIRE(cli("qscore " + (dir / "train.jsonl").string() + " --truth " +
                    (dir / "truth.jsonl").string(),
                out) == 0);
    // first opinion exact (1.0); second is 4 units off at cutoff 10 (0.6),
    // trailing mean 0.8
    CHECK(slurp(out) ==
          "annotator_id,timestamp,case_id,dice_h,qscore_after\n"
          "u,10,c1,1,1\n"
          "u,20,c1,0.6,0.8\n");
}

TEST_CASE("validation failures exit with code 1") {
    const fs::path dir = work_dir();
    write_opinion_file(dir / "bad.jsonl",
                       R"({"case_id":"c1","annotator_id":"a","timestamp":1,"split":"test","lines":[[101,0,5,5]]}
)");
    CHECK(cli("diceh " + (dir / "bad.jsonl").string() + " " + (dir / "bad.jsonl").string()) == 1);
    CHECK(cli("diceh /no/such/file.jsonl /no/such/file.jsonl") == 1);
    CHECK(cli("consensus") == 1);  // missing required argument

    // unknown fields pass by default, fail under --strict
    write_opinion_file(dir / "extra.jsonl",
                       R"({"case_id":"c1","annotator_id":"a","timestamp":1,"split":"test","lines":[],"x":1}
)");
    CHECK(cli("diceh " + (dir / "extra.jsonl").string() + " " + (dir / "extra.jsonl").string()) ==
          0);
    CHECK(cli("--strict diceh " + (dir / "extra.jsonl").string() + " " +
              (dir / "extra.jsonl").string()) == 1);
}
