#include <cstdlib>
#include <sstream>

#include "bline/io.hpp"
#include "doctest.h"

using namespace bline;

namespace {

Opinion sample_opinion(std::string annotator, std::int64_t ts, Split split,
                       std::vector<LineSegment> lines) {
    Opinion op;
    op.case_id = "case_7";
    op.annotator_id = std::move(annotator);
    op.timestamp_ms = ts;
    op.split = split;
    op.lines = std::move(lines);
    return op;
}

}  // namespace

TEST_CASE("opinion round trip") {
    std::vector<Opinion> opinions{
        sample_opinion("u1", 1000, Split::train,
                       {{{12.5, 20.25}, {13.0, 100.0}}, {{80.0, 30.0}, {79.0, 99.5}}}),
        sample_opinion("u2", 2000, Split::test, {}),
        sample_opinion("u3", 3000, Split::test, {{{0.0, 0.0}, {100.0, 100.0}}}),
    };

    std::stringstream buffer;
    io::write_opinions(buffer, opinions);
    const auto parsed = io::parse_opinions(buffer);
    REQUIRE(parsed.size() == opinions.size());
    for (std::size_t i = 0; i < opinions.size(); ++i) {
        CHECK(parsed[i].case_id == opinions[i].case_id);
        CHECK(parsed[i].annotator_id == opinions[i].annotator_id);
        CHECK(parsed[i].timestamp_ms == opinions[i].timestamp_ms);
        CHECK(parsed[i].split == opinions[i].split);
        CHECK(parsed[i].lines == opinions[i].lines);
    }
}

TEST_CASE("parse_opinions diagnostics") {
    // empty stream is fine
    std::stringstream empty;
    CHECK(io::parse_opinions(empty).empty());

    // out-of-range coordinate names the line
    std::stringstream bad_coord(
        R"({"case_id":"c","annotator_id":"a","timestamp":1,"split":"train","lines":[[101,0,5,5]]})");
    try {
        io::parse_opinions(bad_coord);
        FAIL("expected ParseError");
    } catch (const io::ParseError& e) {
        CHECK(e.line_no == 1);
        CHECK(e.field == "lines");
    }

    std::stringstream malformed("this is not json\n");
    CHECK_THROWS_AS(io::parse_opinions(malformed), io::ParseError);

    std::stringstream missing(R"({"case_id":"c","timestamp":1,"split":"train","lines":[]})");
    try {
        io::parse_opinions(missing);
        FAIL("expected ParseError");
    } catch (const io::ParseError& e) {
        CHECK(e.field == "annotator_id");
    }

    std::stringstream bad_split(
        R"({"case_id":"c","annotator_id":"a","timestamp":1,"split":"soon","lines":[]})");
    CHECK_THROWS_AS(io::parse_opinions(bad_split), io::ParseError);

    std::stringstream degenerate(
        R"({"case_id":"c","annotator_id":"a","timestamp":1,"split":"train","lines":[[5,5,5,5]]})");
    CHECK_THROWS_AS(io::parse_opinions(degenerate), io::ParseError);

    // second line carries the failure: line number must say so
    std::stringstream second_bad;
    second_bad << R"({"case_id":"c","annotator_id":"a","timestamp":1,"split":"train","lines":[]})"
               << "\n"
               << R"({"case_id":"c","annotator_id":"a","timestamp":"x","split":"train","lines":[]})"
               << "\n";
    try {
        io::parse_opinions(second_bad);
        FAIL("expected ParseError");
    } catch (const io::ParseError& e) {
        CHECK(e.line_no == 2);
        CHECK(e.field == "timestamp");
    }
}

TEST_CASE("unknown fields: warn by default, reject in strict mode") {
    const std::string record =
        R"({"case_id":"c","annotator_id":"a","timestamp":1,"split":"train","lines":[],"extra":1})";

    std::stringstream lenient(record);
    io::Diagnostics diagnostics;
    const auto parsed = io::parse_opinions(lenient, {false}, &diagnostics);
    CHECK(parsed.size() == 1);
    REQUIRE(diagnostics.warnings.size() == 1);
    CHECK(diagnostics.warnings[0].find("extra") != std::string::npos);

    std::stringstream strict(record);
    CHECK_THROWS_AS(io::parse_opinions(strict, {true}), io::ParseError);
}

TEST_CASE("consensus round trip and reference sniffing") {
    std::vector<ConsensusAnnotation> annotations{
        {"case_1", {{{10.0, 20.0}, {10.0, 100.0}}}, 5},
        {"case_2", {}, 4},
    };
    std::stringstream buffer;
    io::write_consensus(buffer, annotations);
    const auto parsed = io::parse_consensus(buffer);
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0].case_id == "case_1");
    CHECK(parsed[0].contributing_annotators == 5);
    CHECK(parsed[0].lines == annotations[0].lines);
    CHECK(parsed[1].lines.empty());
}

TEST_CASE("config parsing") {
    std::stringstream text(R"(
# full schema exercise
metric.eval_cutoff = 4.0
metric.ingame_cutoff = 8.0
consensus.merge_cutoff = 9.0
consensus.majority_fraction = 0.6
consensus.linkage = "average"
selection.k = 3
selection.window = 12
selection.min_training_opinions = 4
bootstrap.replicates = 2000
bootstrap.alpha = 0.1
bootstrap.seed = 77
sim.n_train_cases = 10
sim.n_test_cases = 20
sim.train_ratio = 1
sim.test_ratio = 3
sim.n_experts = 4
sim.n_crowd = 9
sim.opinions_per_crowd_user = 33.5
sim.master_seed = 123
eval.learning_bin_width = 10
)");
    const RunConfig config = io::parse_config(text);
    CHECK(config.metric.eval_cutoff == 4.0);
    CHECK(config.metric.ingame_cutoff == 8.0);
    CHECK(config.consensus.merge_cutoff == 9.0);
    CHECK(config.consensus.majority_fraction == 0.6);
    CHECK(config.consensus.linkage == Linkage::average);
    CHECK(config.selection.k == 3);
    CHECK(config.selection.window == 12);
    CHECK(config.selection.min_training_opinions == 4);
    CHECK(config.bootstrap.replicates == 2000);
    CHECK(config.bootstrap.alpha == 0.1);
    CHECK(config.bootstrap.seed == 77);
    CHECK(config.sim.n_train_cases == 10);
    CHECK(config.sim.n_test_cases == 20);
    CHECK(config.sim.train_test_ratio.first == 1);
    CHECK(config.sim.train_test_ratio.second == 3);
    CHECK(config.sim.n_experts == 4);
    CHECK(config.sim.n_crowd == 9);
    CHECK(config.sim.opinions_per_crowd_user == 33.5);
    CHECK(config.sim.master_seed == 123);
    CHECK(config.eval.learning_bin_width == 10);

    std::stringstream window_all("selection.window = all\n");
    CHECK(io::parse_config(window_all).selection.window == 0);

    std::stringstream defaults("");
    const RunConfig def = io::parse_config(defaults);
    CHECK(def.metric.eval_cutoff == 5.0);
    CHECK(def.metric.ingame_cutoff == 10.0);
    CHECK(def.consensus.merge_cutoff == 10.0);
    CHECK(def.consensus.majority_fraction == 0.5);
    CHECK(def.selection.k == 5);

    std::stringstream unknown("no.such.key = 1\n");
    io::Diagnostics diagnostics;
    io::parse_config(unknown, {false}, &diagnostics);
    CHECK(diagnostics.warnings.size() == 1);
    std::stringstream unknown2("no.such.key = 1\n");
    CHECK_THROWS_AS(io::parse_config(unknown2, {true}), io::ParseError);

    std::stringstream bad_linkage("consensus.linkage = centroid\n");
    CHECK_THROWS_AS(io::parse_config(bad_linkage), io::ParseError);

    std::stringstream bad_alpha("bootstrap.alpha = 1.5\n");
    CHECK_THROWS_AS(io::parse_config(bad_alpha), std::invalid_argument);

    std::stringstream not_kv("just some words\n");
    CHECK_THROWS_AS(io::parse_config(not_kv), io::ParseError);
}

TEST_CASE("environment seed override") {
    ::setenv("BLINE_SEED", "4242", 1);
    std::stringstream empty("");
    const RunConfig from_env = io::parse_config(empty);
    CHECK(from_env.sim.master_seed == 4242);
    CHECK(from_env.bootstrap.seed == 4242);

    // explicit config wins over the environment
    std::stringstream explicit_seed("sim.master_seed = 1\nbootstrap.seed = 2\n");
    const RunConfig overridden = io::parse_config(explicit_seed);
    CHECK(overridden.sim.master_seed == 1);
    CHECK(overridden.bootstrap.seed == 2);

    ::unsetenv("BLINE_SEED");
}

TEST_CASE("format_double round trips") {
    for (const double v : {0.0, 1.0, 0.1, 2.0 / 3.0, 1e-9, 123456.789, -0.25}) {
        const std::string text = io::format_double(v);
        CHECK(std::stod(text) == v);
    }
}
