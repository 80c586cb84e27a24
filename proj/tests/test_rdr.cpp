#include <doctest.h>

#include <algorithm>
#include <map>

#include "mitig/oracle.hpp"
#include "mitig/rdr.hpp"
#include "mitig/sim_impl.hpp"

using namespace mitig;

namespace {

MaterializedWorld single_world(const EnumerableInstance& inst) {
    MaterializedWorld out;
    REQUIRE(inst.world_count() == 1);
    inst.for_each_world([&](double, const MaterializedWorld& w) { out = w; });
    return out;
}

} // namespace

TEST_CASE("phase1 on the running example: reach and delayed distance") {
    auto inst = running_instance();
    MaterializedWorld w = single_world(inst);
    Phase1State p1 = phase1_forward(inst.g(), w, {0});
    // reached: v1, v2, v3, v4 (the dead edges stop everything else)
    CHECK(p1.reach_count == 4);
    for (NodeId v : {1, 2, 3, 4}) CHECK(p1.f_touch[v] == 1);
    for (NodeId v : {5, 6, 7, 8}) CHECK(p1.f_touch[v] == 0);
    CHECK(p1.f_touch[0] == 2);
    CHECK(f_delayed_distance(inst.g(), w, {0}, 4) == 3);
}

TEST_CASE("phase1 with every edge blocked reaches nothing") {
    NetGraph g = parse_edge_list("0 1\n1 2\n", true, ProbMode::Fixed, 0.5);
    ModelParams params;
    WorldModel model = WorldModel::from_params(g, params);
    EnumerableInstance blocked = parse_instance("nodes 3\nedge 0 1 live=0\nedge 1 2 live=0\n");
    MaterializedWorld w = single_world(blocked);
    Phase1State p1 = phase1_forward(blocked.g(), w, {0});
    CHECK(p1.reach_count == 0);
    (void)model;
}

TEST_CASE("delayed distance counts hops plus interior windows") {
    // line 0 -> 1 -> 2 with tau_1 = 2: d(0, 2) = 2 hops + 2
    auto inst = parse_instance("nodes 3\nedge 0 1\nedge 1 2\ntau 1 2\n");
    MaterializedWorld w = single_world(inst);
    CHECK(f_delayed_distance(inst.g(), w, {0}, 2) == 4);
    CHECK(f_delayed_distance(inst.g(), w, {0}, 1) == 1);
    CHECK(f_delayed_distance(inst.g(), w, {2}, 0) == kNever);
}

TEST_CASE("phase2 on the running example matches the worked table") {
    auto inst = running_instance();
    MaterializedWorld w = single_world(inst);
    Phase1State p1 = phase1_forward(inst.g(), w, {0});
    Phase2State p2;
    phase2_backward(inst.g(), w, 4, p1.f_touch, p2);

    const std::map<NodeId, std::pair<Step, int>> expected = {
        {1, {5, 0}}, {3, {2, 0}}, {6, {3, 1}}, {7, {1, 0}}, {8, {4, 0}}};
    for (auto& [v, cell] : expected) {
        CHECK(p2.dd_of(v) == cell.first);
        CHECK((int)p2.overlaps(v) == cell.second);
    }
    // neighbour base case: dd equals the meeting length of the last edge
    CHECK(p2.dd_of(7) == w.hop_m(6));
    CHECK(!p2.is_reached(2)); // its only edge to the root is dead
    CHECK(!p2.is_reached(5));
}

TEST_CASE("weight classification on the running example with a zero-window root") {
    // Same world with tau_root = 0: v7 scores 2 by distance, v8 and v1 are
    // pruned, v6 and the F-touched v3/v1 resolve through the tie-break
    // program (v3 earns 2 because seeding it cuts F's fast route).
    auto inst = running_instance();
    inst.model.aw[4] = AwDist{AwDist::Fixed, 0, {}};
    MaterializedWorld w = single_world(inst);
    Phase1State p1 = phase1_forward(inst.g(), w, {0});
    RdrSet lower = build_rdr_at(inst.g(), w, {0}, 4, BoundVariant::Lower, p1);
    std::vector<std::pair<NodeId, uint8_t>> expected = {{3, 2}, {6, 2}, {7, 2}};
    CHECK(lower.entries == expected);
    CHECK(lower.weight_of(4) == 2); // implicit root self-entry
    CHECK(lower.weight_of(8) == 0);
    CHECK(lower.weight_of(1) == 0);
}

TEST_CASE("phase3 on the running example matches the worked coloring") {
    auto inst = running_instance();
    MaterializedWorld w = single_world(inst);
    Phase1State p1 = phase1_forward(inst.g(), w, {0});
    Phase2State p2;
    phase2_backward(inst.g(), w, 4, p1.f_touch, p2);
    std::vector<uint8_t> sub(inst.g().num_nodes(), 0);
    for (NodeId v : p2.reached) sub[v] = 1;
    sub[4] = 1;
    sub[0] = 1;
    TieBreakResult tb = phase3_tiebreak(inst.g(), w, {0}, 6, sub, 4);
    for (NodeId v : {0, 1}) CHECK(tb.adopt_of(v) == Adopt::F);
    for (NodeId v : {3, 4, 6, 7}) CHECK(tb.adopt_of(v) == Adopt::M);
    for (NodeId v : {2, 5, 8}) CHECK(tb.adopt_of(v) == Adopt::None);
    CHECK(tb.m_delivered);
    CHECK(tb.f_delivered);
}

TEST_CASE("phase3 rejects candidates outside the union subgraph") {
    auto inst = running_instance();
    MaterializedWorld w = single_world(inst);
    std::vector<uint8_t> sub(inst.g().num_nodes(), 0);
    sub[4] = 1;
    CHECK_THROWS_AS(phase3_tiebreak(inst.g(), w, {0}, 6, sub, 4), std::logic_error);
}

TEST_CASE("a single path disjoint from F always delivers the mitigation") {
    // root 3 is only fed by the candidate's path; no tie-break can occur
    auto inst = parse_instance("nodes 5\nedge 0 4\nedge 1 2 hm=3\nedge 2 3 hm=2\n");
    MaterializedWorld w = single_world(inst);
    std::vector<uint8_t> sub(5, 1);
    TieBreakResult tb = phase3_tiebreak(inst.g(), w, {0}, 1, sub, 3);
    CHECK(tb.adopt_of(2) == Adopt::M);
    CHECK(tb.adopt_of(3) == Adopt::M);
    CHECK(tb.m_delivered);
    CHECK(!tb.f_delivered);
}

TEST_CASE("walkthrough RDR set for root v3 is exactly the worked answer") {
    auto inst = intro_instance();
    MaterializedWorld w = single_world(inst);
    Phase1State p1 = phase1_forward(inst.g(), w, {0});
    RdrSet r = build_rdr_at(inst.g(), w, {0}, 3, BoundVariant::Lower, p1);
    std::vector<std::pair<NodeId, uint8_t>> expected = {{2, 1}, {10, 1}, {14, 1}};
    CHECK(r.entries == expected);
}

TEST_CASE("instantly-won root with no window yields an empty entry list") {
    // F reaches the root in one hop; the only reverse-reachable candidate
    // arrives too late for a zero-length window.
    auto inst = parse_instance("nodes 3\nedge 0 1\nedge 2 1 hm=5\nperm 1 0 2\n");
    MaterializedWorld w = single_world(inst);
    Phase1State p1 = phase1_forward(inst.g(), w, {0});
    RdrSet r = build_rdr_at(inst.g(), w, {0}, 1, BoundVariant::Lower, p1);
    CHECK(r.entries.empty());
}

TEST_CASE("choose_root: IS picks uniformly from the reached set, RS from everyone") {
    std::vector<uint8_t> touch = {2, 1, 0, 1}; // node 0 seed, nodes 1 and 3 reached
    Rng rng(3);
    std::map<NodeId, int> hist;
    for (int i = 0; i < 20000; i++) {
        auto root = choose_root(touch, 4, RdrMode::IS, rng);
        REQUIRE(root.has_value());
        CHECK(touch[*root] == 1);
        hist[*root]++;
    }
    CHECK(hist[1] + hist[3] == 20000);
    CHECK(std::abs(hist[1] - 10000) < 3 * 71); // 3 SE of Binomial(20000, 1/2)

    int empty = 0;
    for (int i = 0; i < 20000; i++)
        if (!choose_root(touch, 4, RdrMode::RS, rng)) empty++;
    double rate = empty / 20000.0;
    CHECK(std::abs(rate - 0.5) < 3 * std::sqrt(0.25 / 20000));

    std::vector<uint8_t> none = {2, 0, 0, 0};
    CHECK_THROWS_AS(choose_root(none, 4, RdrMode::IS, rng), std::runtime_error);
}

TEST_CASE("RS empty rate matches one minus the reach fraction") {
    // star: seed 0 with four always-live leaves out of 16 nodes
    std::string text = "nodes 16\n";
    for (int v = 1; v <= 4; v++) text += "edge 0 " + std::to_string(v) + "\n";
    auto inst = parse_instance(text);
    int64_t empty = 0;
    const int64_t draws = 20000;
    for (int64_t i = 0; i < draws; i++)
        empty += build_rdr(inst.model, {0}, BoundVariant::Lower, RdrMode::RS, 7, (uint64_t)i)
                     .empty_sample;
    double expect = 12.0 / 16.0;
    double se = std::sqrt(expect * (1 - expect) / draws);
    CHECK(std::abs((double)empty / draws - expect) <= 3 * se);

    // IS never returns an empty sample
    for (int64_t i = 0; i < 200; i++) {
        RdrSet r = build_rdr(inst.model, {0}, BoundVariant::Lower, RdrMode::IS, 7, (uint64_t)i);
        CHECK(!r.empty_sample);
        CHECK(r.root >= 1);
        CHECK(r.root <= 4);
    }
}

TEST_CASE("phase3 agrees with forward simulation for every permutation") {
    // Exhaustive over worlds (including all tie-break permutations) on small
    // random instances: the tie-break program's root adoption must equal the
    // full simulator run with the candidate as the only mitigation seed.
    for (uint64_t seed : {11ULL, 12ULL, 13ULL, 14ULL}) {
        auto inst = make_random_instance(seed, 6, 4, 2, 2, 1);
        const NetGraph& g = inst.g();
        std::vector<NodeId> sf{0};
        inst.for_each_world([&](double, const MaterializedWorld& w) {
            Phase1State p1 = phase1_forward(g, w, sf);
            for (NodeId root = 0; root < g.num_nodes(); root++) {
                if (p1.f_touch[root] != 1) continue;
                Phase2State p2;
                phase2_backward(g, w, root, p1.f_touch, p2);
                std::vector<uint8_t> sub(g.num_nodes(), 0);
                for (NodeId v : p2.reached) sub[v] = 1;
                sub[root] = 1;
                for (NodeId s : sf) sub[s] = sub[s] || p2.is_reached(s);
                for (NodeId u : p2.reached) {
                    if (p1.f_touch[u] == 2 || u == root) continue;
                    TieBreakResult tb = phase3_tiebreak(g, w, sf, u, sub, root);
                    CascadeTrace tr = simulate(g, w, sf, {u});
                    CHECK(tb.adopt_of(root) == tr.adopt[root]);
                    bool m_deliv = tr.t_m[root] < kNever;
                    bool f_deliv = tr.t_f[root] < kNever;
                    CHECK(tb.m_delivered == m_deliv);
                    CHECK(tb.f_delivered == f_deliv);
                }
            }
        });
    }
}

TEST_CASE("phase2 weights and the deferred set never overlap") {
    for (uint64_t seed : {21ULL, 22ULL}) {
        auto inst = make_random_instance(seed, 7, 5, 3, 2, 2);
        const NetGraph& g = inst.g();
        inst.for_each_world([&](double, const MaterializedWorld& w) {
            Phase1State p1 = phase1_forward(g, w, {0});
            for (NodeId root = 0; root < g.num_nodes(); root++) {
                if (p1.f_touch[root] != 1) continue;
                RdrSet r = build_rdr_at(g, w, {0}, root, BoundVariant::Lower, p1);
                std::map<NodeId, int> seen;
                for (auto [u, wt] : r.entries) {
                    CHECK(wt >= 1);
                    CHECK(wt <= 2);
                    CHECK(++seen[u] == 1); // each candidate at most once
                    CHECK(u != root);
                }
            }
        });
    }
}

TEST_CASE("collection dump format") {
    RdrSet a;
    a.root = 3;
    a.entries = {{1, 2}, {5, 1}};
    RdrSet b;
    b.root = 0;
    std::string s = dump_rdr_collection({a, b});
    CHECK(s == "3|1:2,5:1\n0|\n");
}

TEST_CASE("collections extend deterministically") {
    auto inst = make_random_instance(31, 6, 4, 3, 2, 2);
    auto c1 = build_rdr_collection(inst.model, {0}, BoundVariant::Lower, RdrMode::IS, 5, 1, 0, 40);
    auto c2 = build_rdr_collection(inst.model, {0}, BoundVariant::Lower, RdrMode::IS, 5, 1, 0, 20);
    c2 = build_rdr_collection(inst.model, {0}, BoundVariant::Lower, RdrMode::IS, 5, 1, 20, 40,
                              std::move(c2));
    CHECK(dump_rdr_collection(c1) == dump_rdr_collection(c2));
}
