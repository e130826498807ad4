#include <gtest/gtest.h>

#include <string>

#include "mixsem/io.hpp"

using namespace mixsem;
using mixsem::io::json;

namespace {

std::string error_of(auto&& fn) {
    try {
        fn();
    } catch (const ParseError& e) {
        return e.what();
    }
    return {};
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST(GraphJson, RoundTrip) {
    MixedGraph g(4, {{1, 2}, {3, 1}}, {{2, 4}});
    EXPECT_EQ(io::graph_from_json(io::to_json(g)), g);
    auto text = io::dump(io::to_json(g));
    EXPECT_EQ(io::graph_from_json(json::parse(text)), g);
    EXPECT_LT(text.find("\"bidirected\""), text.find("\"directed\""));
}

TEST(GraphJson, Diagnostics) {
    EXPECT_TRUE(contains(error_of([] { io::graph_from_json(json::parse(R"({"directed": []})")); }), "\"p\""));
    EXPECT_TRUE(contains(error_of([] { io::graph_from_json(json::parse(R"({"p": 3, "directed": [[2, 2]]})")); }),
                         "self-loop (2,2)"));
    EXPECT_TRUE(contains(error_of([] { io::graph_from_json(json::parse(R"({"p": 3, "directed": [[1, 4]]})")); }),
                         "out of range"));
    EXPECT_TRUE(contains(
        error_of([] { io::graph_from_json(json::parse(R"({"p": 3, "directed": [[1, 2], [1, 2]]})")); }),
        "directed[1]: duplicate edge (1,2)"));
    const auto bow = json::parse(R"({"p": 2, "directed": [[1, 2]], "bidirected": [[2, 1]]})");
    EXPECT_TRUE(contains(error_of([&] { io::graph_from_json(bow); }), "bidirected[0]: conflicting"));
    EXPECT_EQ(io::graph_from_json(bow, true).edge_count(), 2u);
    EXPECT_TRUE(contains(error_of([] { io::graph_from_json(json::parse(R"({"p": 3, "directed": [[1]]})")); }),
                         "pair of integers"));
    EXPECT_TRUE(contains(error_of([] { io::parse_json("{\n  \"p\": 3,\n  oops\n}", "g.json"); }), "line 3"));
}

TEST(ParamsJson, RoundTripAndSupport) {
    MixedGraph g(3, {{1, 2}}, {{2, 3}});
    Params P{Matrix::Zero(3, 3), Matrix::Identity(3, 3)};
    P.lambda(0, 1) = 0.25;
    P.omega(1, 2) = P.omega(2, 1) = -0.5;
    auto back = io::params_from_json(io::to_json(g, P));
    EXPECT_EQ(back.graph, g);
    EXPECT_EQ(back.params.lambda, P.lambda);
    EXPECT_EQ(back.params.omega, P.omega);

    auto j = io::to_json(g, P);
    j["lambda"][2][0] = 0.1;
    EXPECT_TRUE(contains(error_of([&] { io::params_from_json(j); }), "lambda(3,1)"));
    auto short_rows = io::to_json(g, P);
    short_rows["omega"][1] = json::array({1, 0});
    EXPECT_TRUE(contains(error_of([&] { io::params_from_json(short_rows); }), "omega: row 2"));
}

TEST(Csv, ParsesWithAndWithoutHeader) {
    auto d = io::parse_csv("a,b\n1,2\n3.5, -4e-1\n", true);
    EXPECT_EQ(d.names, (std::vector<std::string>{"a", "b"}));
    ASSERT_EQ(d.n(), 2);
    EXPECT_EQ(d.x(1, 1), -0.4);
    auto e = io::parse_csv("1,2\n3,4\n\n5,6\n", false);
    EXPECT_EQ(e.n(), 3);
    EXPECT_TRUE(e.names.empty());
    auto again = io::parse_csv(io::to_csv(d), true);
    EXPECT_EQ(again.x, d.x);
}

TEST(Csv, Diagnostics) {
    EXPECT_TRUE(contains(error_of([] { io::parse_csv("1,2\n3\n", false, "d.csv"); }), "d.csv:2: expected 2 fields"));
    EXPECT_TRUE(contains(error_of([] { io::parse_csv("1,2\n3,NA\n", false, "d.csv"); }), "d.csv:2: field 2"));
    EXPECT_TRUE(contains(error_of([] { io::parse_csv("1,2\n3,\n", false, "d.csv"); }), "field 2"));
    EXPECT_TRUE(contains(error_of([] { io::parse_csv("x,y\n1,2\n", true, "d.csv"); }), "at least 2"));
}

TEST(Dump, RoundsToTwelveDigits) {
    json j = {{"b", 1.0 / 3.0}, {"a", 2}};
    EXPECT_EQ(io::dump(j), "{\n  \"a\": 2,\n  \"b\": 0.333333333333\n}\n");
}

TEST(Trace, CsvHasStartRowAndMoves) {
    SearchTrace t;
    t.start_score = -1.5;
    t.steps.push_back({1, "add 1->2", -1.25, 0.001});
    auto csv = io::trace_csv(t);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "iteration,elapsed_s,score,move");
    EXPECT_TRUE(contains(csv, "0,0,-1.5,start\n"));
    EXPECT_TRUE(contains(csv, "1,0.001000,-1.25,add 1->2\n"));
}

TEST(BenchConfig, ParsesAndRejectsUnknown) {
    auto c = io::bench_config_from_json(
        json::parse(R"({"p": 4, "replicates": 2, "sample_sizes": [100], "modes": ["TG"], "penalty": "increased"})"));
    EXPECT_EQ(c.p, 4);
    EXPECT_EQ(c.modes, std::vector<StartMode>{StartMode::TrueGraph});
    EXPECT_EQ(c.penalty, PenaltyKind::Increased);
    EXPECT_TRUE(contains(error_of([] { io::bench_config_from_json(json::parse(R"({"reps": 2})")); }), "\"reps\""));
    EXPECT_TRUE(contains(error_of([] { io::bench_config_from_json(json::parse(R"({"modes": ["X"]})")); }), "\"X\""));
    EXPECT_TRUE(contains(error_of([] { io::bench_config_from_json(json::parse(R"({"p": "five"})")); }), "bench"));
}

TEST(Report, Schema) {
    ExperimentReport r;
    r.config.sample_sizes = {100};
    r.config.modes = {StartMode::TrueGraph};
    ReplicateRecord rec;
    rec.n = 100;
    rec.mode = StartMode::TrueGraph;
    rec.truth = rec.estimate = MixedGraph(3);
    rec.metrics = recovery_metrics(rec.estimate, rec.truth);
    r.records.push_back(rec);
    aggregate(r);
    auto j = io::to_json(r);
    ASSERT_EQ(j["aggregate"].size(), 1u);
    std::vector<std::string> keys;
    for (auto it = j["aggregate"][0].begin(); it != j["aggregate"][0].end(); ++it) keys.push_back(it.key());
    EXPECT_EQ(keys, (std::vector<std::string>{"Dim", "SHDstar", "Skel", "SkelColl", "count", "n", "start"}));
    std::vector<std::string> bins;
    for (auto it = j["dimension_difference"][0]["counts"].begin(); it != j["dimension_difference"][0]["counts"].end();
         ++it)
        bins.push_back(it.key());
    EXPECT_EQ(bins.size(), 6u);
    EXPECT_EQ(j["dimension_difference"][0]["counts"]["0"], 1);
    auto csv = io::replicate_csv(r);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "replicate,n,start,Dim,Skel,SkelColl,SHDstar,dim_diff");
    EXPECT_TRUE(contains(io::aggregate_table(r), "SkelColl"));
}
