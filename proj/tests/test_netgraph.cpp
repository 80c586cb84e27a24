#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "mitig/netgraph.hpp"
#include "mitig/rng.hpp"

using namespace mitig;

TEST_CASE("inverse indegree assigns 1/indeg to every in-edge") {
    NetGraph g = parse_edge_list("0 1\n2 1\n", true, ProbMode::InverseIndegree);
    REQUIRE(g.num_nodes() == 3);
    REQUIRE(g.num_edges() == 2);
    for (const Edge& e : g.edges()) CHECK(e.p == doctest::Approx(0.5));
}

TEST_CASE("in-edge probabilities sum to one per node under inverse indegree") {
    std::string text;
    Rng rng(77);
    for (int i = 0; i < 200; i++) {
        int u = (int)rng.below(40), v = (int)rng.below(40);
        if (u == v) continue;
        text += std::to_string(u) + " " + std::to_string(v) + "\n";
    }
    NetGraph g = parse_edge_list(text, true, ProbMode::InverseIndegree);
    for (NodeId v = 0; v < g.num_nodes(); v++) {
        if (g.in_degree(v) == 0) continue;
        double sum = 0;
        for (EdgeId e : g.in_edges(v)) sum += g.edge(e).p;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("fixed probability mode") {
    NetGraph g = parse_edge_list("0 1\n", true, ProbMode::Fixed, 0.1);
    CHECK(g.edge(0).p == doctest::Approx(0.1));
}

TEST_CASE("explicit probabilities round-trip through save") {
    NetGraph g = parse_edge_list("0 1 0.25\n1 2 0.75\n2 0 1.0\n", true, ProbMode::Explicit);
    std::string path = std::filesystem::temp_directory_path() / "mitig_roundtrip.txt";
    save_edge_list(g, path);
    NetGraph g2 = load_edge_list(path, true, ProbMode::Explicit);
    REQUIRE(g2.num_edges() == g.num_edges());
    for (EdgeId e = 0; e < g.num_edges(); e++) {
        CHECK(g2.edge(e).src == g.edge(e).src);
        CHECK(g2.edge(e).dst == g.edge(e).dst);
        CHECK(g2.edge(e).p == g.edge(e).p);
    }
    std::filesystem::remove(path);
}

TEST_CASE("loading is deterministic") {
    const char* text = "3 1\n0 1\n1 3\n0 2\n";
    NetGraph a = parse_edge_list(text, false, ProbMode::InverseIndegree);
    NetGraph b = parse_edge_list(text, false, ProbMode::InverseIndegree);
    REQUIRE(a.num_edges() == b.num_edges());
    for (EdgeId e = 0; e < a.num_edges(); e++) {
        CHECK(a.edge(e).src == b.edge(e).src);
        CHECK(a.edge(e).dst == b.edge(e).dst);
        CHECK(a.edge(e).p == b.edge(e).p);
    }
}

TEST_CASE("undirected input expands to antiparallel pairs before assignment") {
    NetGraph g = parse_edge_list("0 1\n1 2\n", false, ProbMode::InverseIndegree);
    CHECK(g.num_edges() == 4);
    // node 1 has in-degree 2 after expansion
    for (EdgeId e : g.in_edges(1)) CHECK(g.edge(e).p == doctest::Approx(0.5));
}

TEST_CASE("self-loops are dropped and duplicates merged with max probability") {
    LoadReport report;
    NetGraph g = parse_edge_list("0 0 0.5\n0 1 0.2\n0 1 0.6\n", true, ProbMode::Explicit, 0.1,
                                 &report);
    CHECK(report.dropped_self_loops == 1);
    CHECK(report.merged_duplicates == 1);
    REQUIRE(g.num_edges() == 1);
    CHECK(g.edge(0).p == doctest::Approx(0.6));
}

TEST_CASE("parse errors carry line numbers") {
    CHECK_THROWS_WITH_AS(parse_edge_list("0 1\nbroken\n", true, ProbMode::InverseIndegree),
                         doctest::Contains("line 2"), std::runtime_error);
    CHECK_THROWS_AS(parse_edge_list("0 1 1.5\n", true, ProbMode::Explicit), std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_edge_list("0 1 0.5\n1 2\n", true, ProbMode::Explicit),
                         doctest::Contains("line 2"), std::runtime_error);
}

TEST_CASE("id remapping writes dense ids plus a sidecar") {
    namespace fs = std::filesystem;
    std::string in = fs::temp_directory_path() / "mitig_sparse.txt";
    std::string out = fs::temp_directory_path() / "mitig_dense.txt";
    {
        FILE* f = fopen(in.c_str(), "w");
        fputs("1000000 42\n42 7\n", f);
        fclose(f);
    }
    auto map = remap_edge_list(in, out);
    REQUIRE(map.size() == 3);
    CHECK(map[0].first == 7);
    CHECK(map[0].second == 0);
    NetGraph g = load_edge_list(out, true, ProbMode::InverseIndegree);
    CHECK(g.num_nodes() == 3);
    fs::remove(in);
    fs::remove(out);
}

TEST_CASE("meeting probabilities: global constant") {
    NetGraph g = parse_edge_list("0 1\n1 2\n2 0\n", true, ProbMode::InverseIndegree);
    ModelParams params;
    auto m = assign_meeting_probs(g, params);
    for (double x : m) CHECK(x == doctest::Approx(1.0 / 6));
}

TEST_CASE("meeting probabilities: ego-centric") {
    // node 0 has out-degree 1, node 1 out-degree 2
    NetGraph g = parse_edge_list("0 1\n1 2\n1 0\n", true, ProbMode::InverseIndegree);
    ModelParams params;
    params.meeting_mode = MeetingMode::EgoCentric;

    params.ego_c = 1.0;
    auto m = assign_meeting_probs(g, params);
    for (EdgeId e = 0; e < g.num_edges(); e++)
        if (g.edge(e).src == 0) CHECK(m[e] == doctest::Approx(0.5));

    // c = d_out gives exactly one half
    params.ego_c = 2.0;
    m = assign_meeting_probs(g, params);
    for (EdgeId e = 0; e < g.num_edges(); e++)
        if (g.edge(e).src == 1) CHECK(m[e] == doctest::Approx(0.5));

    params.ego_c = -1.0;
    CHECK_THROWS_AS(assign_meeting_probs(g, params), std::invalid_argument);
}

TEST_CASE("ego-centric assignment is constant per source and decreasing in out-degree") {
    std::string text;
    Rng rng(5);
    for (int i = 0; i < 120; i++)
        text += std::to_string(rng.below(25)) + " " + std::to_string(rng.below(25)) + "\n";
    // strip self loops via the loader
    NetGraph g = parse_edge_list(text, true, ProbMode::InverseIndegree);
    ModelParams params;
    params.meeting_mode = MeetingMode::EgoCentric;
    params.ego_c = 3.0;
    auto m = assign_meeting_probs(g, params);
    std::vector<double> per_source(g.num_nodes(), -1.0);
    for (EdgeId e = 0; e < g.num_edges(); e++) {
        NodeId u = g.edge(e).src;
        if (per_source[u] < 0) per_source[u] = m[e];
        CHECK(m[e] == doctest::Approx(per_source[u]));
    }
    for (NodeId a = 0; a < g.num_nodes(); a++)
        for (NodeId b = 0; b < g.num_nodes(); b++)
            if (per_source[a] > 0 && per_source[b] > 0 && g.out_degree(a) < g.out_degree(b))
                CHECK(per_source[a] > per_source[b]);
}

TEST_CASE("graph stats dump") {
    NetGraph g = parse_edge_list("0 1\n1 2\n", true, ProbMode::InverseIndegree);
    std::string s = graph_stats(g, "tiny");
    CHECK(s.find("nodes=3") != std::string::npos);
    CHECK(s.find("edges=2") != std::string::npos);
}
