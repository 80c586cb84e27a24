#pragma once

#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "mitig/sim.hpp"
#include "mitig/world.hpp"

namespace mitig {

enum class RdrMode { IS, RS };
enum class BoundVariant { Lower, Upper };

// Weighted reverse sample rooted at one node: candidate mitigation seeds that
// can deliver campaign M to the root, with the reward each would achieve.
struct RdrSet {
    NodeId root = -1;
    std::vector<std::pair<NodeId, uint8_t>> entries; // sorted by node id
    RdrMode mode = RdrMode::IS;
    BoundVariant variant = BoundVariant::Lower;
    bool empty_sample = false; // RS draw whose root was not F-reachable

    // generation stats
    int32_t phase1_nodes = 0;
    int32_t phase2_nodes = 0;
    int32_t phase2_edges = 0;
    int32_t phase3_runs = 0;

    // Entry weight for one candidate. The root itself never appears in the
    // stored entries: as its own mitigation seed it always scores 2 (it meets
    // M at step 0), so that self-entry stays implicit in coverage.
    uint8_t weight_of(NodeId u) const {
        if (u == root && !empty_sample) return 2;
        for (auto [node, w] : entries)
            if (node == u) return w;
        return 0;
    }
};

// Phase I output: which nodes F touches (2 = seed, 1 = reached, 0 = no) and
// the reached count.
struct Phase1State {
    std::vector<uint8_t> f_touch;
    int64_t reach_count = 0;
};

template <class W>
Phase1State phase1_forward(const NetGraph& g, const W& w, const std::vector<NodeId>& seeds_f) {
    Phase1State st;
    st.f_touch = f_reach(g, w, seeds_f);
    for (uint8_t m : st.f_touch) st.reach_count += m == 1;
    return st;
}

// Delayed distance of campaign F from its seeds to target: hops plus interior
// window lengths along the cheapest live path; kNever if unreachable. An
// optional node filter restricts the search; passing the target's
// reverse-reachable set keeps the answer exact, since every seed-to-target
// path stays inside it.
template <class W>
Step f_delayed_distance(const NetGraph& g, const W& w, const std::vector<NodeId>& seeds_f,
                        NodeId target, const std::vector<NodeId>* within = nullptr) {
    static thread_local StampedArray<Step> arrive;
    static thread_local StampedArray<int8_t> seed_mark;
    static thread_local StampedArray<int8_t> allowed;
    arrive.reset(g.num_nodes(), kNever);
    seed_mark.reset(g.num_nodes(), 0);
    if (within) {
        allowed.reset(g.num_nodes(), 0);
        for (NodeId v : *within) allowed.set(v, 1);
        allowed.set(target, 1);
    }
    using Entry = std::pair<Step, NodeId>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> queue;
    for (NodeId s : seeds_f) {
        if (within && !allowed.get(s)) continue;
        seed_mark.set(s, 1);
        arrive.set(s, 0);
        queue.push({0, s});
    }
    while (!queue.empty()) {
        auto [a, v] = queue.top();
        queue.pop();
        if (a != arrive.get(v)) continue;
        if (v == target) return a;
        Step depart = a + (seed_mark.get(v) ? 0 : world_tau(w, v));
        for (EdgeId e : g.out_edges(v)) {
            NodeId x = g.edge(e).dst;
            if (seed_mark.get(x) || (within && !allowed.get(x)) || !w.edge_live(e)) continue;
            Step cand = depart + w.hop_f(e);
            if (cand < arrive.get(x)) {
                arrive.set(x, cand);
                queue.push({cand, x});
            }
        }
    }
    return arrive.get(target);
}

// Backward liveness walk from a prospective root: reports whether any fake
// seed can reach it and collects the reverse-reachable set (which the
// candidate phases operate on anyway). Much cheaper than a forward spread
// when most samples are rejected.
template <class W>
bool f_reaches_target(const NetGraph& g, const W& w, const std::vector<NodeId>& seeds_f,
                      NodeId target, std::vector<NodeId>& coreach) {
    static thread_local StampedArray<int8_t> seen;
    static thread_local StampedArray<int8_t> is_seed;
    seen.reset(g.num_nodes(), 0);
    is_seed.reset(g.num_nodes(), 0);
    for (NodeId s : seeds_f) is_seed.set(s, 1);
    if (is_seed.get(target)) return false; // seeds are never roots
    coreach.clear();
    std::vector<NodeId> stack{target};
    seen.set(target, 1);
    bool found = false;
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        for (EdgeId e : g.in_edges(v)) {
            NodeId u = g.edge(e).src;
            if (seen.get(u) || !w.edge_live(e)) continue;
            seen.set(u, 1);
            coreach.push_back(u);
            found = found || is_seed.get(u);
            stack.push_back(u);
        }
    }
    return found;
}

// Root selection. IS picks uniformly from the F-reached set and never returns
// an empty sample; RS picks uniformly from all nodes and signals emptiness.
// (The IS sampling loop in build_rdr redraws the world together with the root
// so that accepted (world, root) pairs are uniform over F-reached pairs.)
std::optional<NodeId> choose_root(const std::vector<uint8_t>& f_touch, NodeId n, RdrMode mode,
                                  Rng& rng);

// Phase II output: reverse-reachable candidates with delayed distances and
// overlap indicators, plus the deferred tie-break set. Reusable across
// samples; query through the accessors.
struct Phase2State {
    std::vector<NodeId> reached; // nodes with a live path to the root (root excluded)
    StampedArray<Step> dd;       // delayed distance to the root
    StampedArray<int8_t> reached_mask;
    StampedArray<int8_t> overlap;
    std::vector<NodeId> s_ol;
    int32_t edges_touched = 0;

    Step dd_of(NodeId v) const { return dd.get(v); }
    bool is_reached(NodeId v) const { return reached_mask.get(v) != 0; }
    bool overlaps(NodeId v) const { return overlap.get(v) != 0; }
};

// Backwards delayed-distance Dijkstra from the root, plus overlap flags: a
// candidate w overlaps when some live w -> root path carries an F-touched
// interior node. With the F-touched set closed under live out-edges, that
// reduces to "w reaches, without passing the root, an F-touched live
// in-neighbour x != w of the root"; a backward 2-label pass answers it for
// every candidate at once.
template <class W>
void phase2_backward(const NetGraph& g, const W& w, NodeId root,
                     const std::vector<uint8_t>& f_touch, Phase2State& st) {
    st.reached.clear();
    st.s_ol.clear();
    st.edges_touched = 0;
    st.dd.reset(g.num_nodes(), kNever);
    st.reached_mask.reset(g.num_nodes(), 0);
    st.overlap.reset(g.num_nodes(), 0);

    using Entry = std::pair<Step, NodeId>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> queue;
    static thread_local StampedArray<int8_t> done;
    done.reset(g.num_nodes(), 0);
    done.set(root, 1); // backward walks never pass through the root
    for (EdgeId e : g.in_edges(root)) {
        st.edges_touched++;
        if (!w.edge_live(e)) continue;
        NodeId u = g.edge(e).src;
        Step cand = w.hop_m(e);
        if (cand < st.dd.get(u)) {
            st.dd.set(u, cand);
            queue.push({cand, u});
        }
    }
    while (!queue.empty()) {
        auto [d, v] = queue.top();
        queue.pop();
        if (done.get(v) || d != st.dd.get(v)) continue;
        done.set(v, 1);
        st.reached_mask.set(v, 1);
        st.reached.push_back(v);
        Step through = d + world_tau(w, v);
        for (EdgeId e : g.in_edges(v)) {
            st.edges_touched++;
            if (!w.edge_live(e)) continue;
            NodeId u = g.edge(e).src;
            if (done.get(u)) continue;
            Step cand = through + w.hop_m(e);
            if (cand < st.dd.get(u)) {
                st.dd.set(u, cand);
                queue.push({cand, u});
            }
        }
    }

    std::vector<NodeId> sources;
    for (EdgeId e : g.in_edges(root))
        if (w.edge_live(e) && f_touch[g.edge(e).src]) sources.push_back(g.edge(e).src);
    if (!sources.empty()) {
        constexpr NodeId kNone = -1;
        static thread_local StampedArray<NodeId> label1, label2;
        label1.reset(g.num_nodes(), kNone);
        label2.reset(g.num_nodes(), kNone);
        std::vector<NodeId> work;
        auto offer = [&](NodeId v, NodeId src) {
            if (label1.get(v) == src || label2.get(v) == src) return;
            if (label1.get(v) == kNone) label1.set(v, src);
            else if (label2.get(v) == kNone) label2.set(v, src);
            else return;
            work.push_back(v);
        };
        for (NodeId x : sources)
            for (EdgeId e : g.in_edges(x))
                if (w.edge_live(e) && st.is_reached(g.edge(e).src)) offer(g.edge(e).src, x);
        while (!work.empty()) {
            NodeId y = work.back();
            work.pop_back();
            NodeId a = label1.get(y);
            NodeId b = label2.get(y) != kNone ? label2.get(y) : a;
            for (EdgeId e : g.in_edges(y)) {
                if (!w.edge_live(e)) continue;
                NodeId u = g.edge(e).src;
                if (!st.is_reached(u)) continue;
                offer(u, a);
                if (b != a) offer(u, b);
            }
        }
        for (NodeId v : st.reached)
            if (label1.get(v) != kNone && (label1.get(v) != v || label2.get(v) != kNone))
                st.overlap.set(v, 1);
    }
}

// Tie-break dynamic program (the forward pass of Phase III): runs the cascade
// of S_F against the single candidate u on the reverse-reachable subgraph and
// reports adoption flags, close times and the in-window deliveries at root.
struct TieBreakResult {
    StampedArray<int8_t> adopt; // Adopt values; None outside the subgraph
    StampedArray<Step> close;
    bool m_delivered = false; // campaign M met the root within its window
    bool f_delivered = false;

    Adopt adopt_of(NodeId v) const { return (Adopt)adopt.get(v); }
    Step close_of(NodeId v) const { return close.get(v); }
};

template <class W, class SubFn>
void phase3_tiebreak(const NetGraph& g, const W& w, const std::vector<NodeId>& seeds_f, NodeId u,
                     SubFn in_subgraph, NodeId root, TieBreakResult& res) {
    if (!in_subgraph(u)) throw std::logic_error("phase3 candidate outside the union subgraph");
    res.adopt.reset(g.num_nodes(), (int8_t)Adopt::None);
    res.close.reset(g.num_nodes(), kNever);
    res.m_delivered = res.f_delivered = false;

    static thread_local StampedArray<Step> priority;
    static thread_local StampedArray<int8_t> closed;
    priority.reset(g.num_nodes(), kNever);
    closed.reset(g.num_nodes(), 0);
    using Entry = std::pair<Step, NodeId>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> queue;

    res.adopt.set(u, (int8_t)Adopt::M);
    res.close.set(u, 0);
    closed.set(u, 1);
    for (NodeId s : seeds_f) {
        if (!in_subgraph(s)) continue;
        res.adopt.set(s, (int8_t)Adopt::F);
        res.close.set(s, 0);
        closed.set(s, 1);
    }
    auto push_out = [&](NodeId v) {
        bool is_m = res.adopt_of(v) == Adopt::M;
        for (EdgeId e : g.out_edges(v)) {
            NodeId x = g.edge(e).dst;
            if (!in_subgraph(x) || closed.get(x) || !w.edge_live(e)) continue;
            Step t = res.close_of(v) + (is_m ? w.hop_m(e) : w.hop_f(e)) + world_tau(w, x);
            if (t < priority.get(x)) {
                priority.set(x, t);
                queue.push({t, x});
            }
        }
    };
    push_out(u);
    for (NodeId s : seeds_f)
        if (in_subgraph(s) && s != u) push_out(s);

    while (!queue.empty()) {
        auto [t, v] = queue.top();
        queue.pop();
        if (closed.get(v) || t != priority.get(v)) continue;
        closed.set(v, 1);
        res.close.set(v, t);
        const auto& in = g.in_edges(v);
        const auto& pi = world_perm(w, v);
        for (size_t i = 0; i < in.size(); i++) {
            EdgeId e = in[pi[i]];
            NodeId z = g.edge(e).src;
            if (res.adopt_of(z) == Adopt::None || res.close_of(z) >= t || !w.edge_live(e)) continue;
            bool from_m = res.adopt_of(z) == Adopt::M;
            Step arrival = res.close_of(z) + (from_m ? w.hop_m(e) : w.hop_f(e));
            if (arrival > t) continue;
            res.adopt.set(v, (int8_t)(from_m ? Adopt::M : Adopt::F));
            break;
        }
        if (res.adopt_of(v) != Adopt::None) push_out(v);
    }

    Step root_close = res.close_of(root);
    if (root_close < kNever) {
        for (EdgeId e : g.in_edges(root)) {
            NodeId z = g.edge(e).src;
            if (res.adopt_of(z) == Adopt::None || res.close_of(z) >= root_close ||
                !w.edge_live(e))
                continue;
            bool from_m = res.adopt_of(z) == Adopt::M;
            Step arrival = res.close_of(z) + (from_m ? w.hop_m(e) : w.hop_f(e));
            if (arrival > root_close) continue;
            (from_m ? res.m_delivered : res.f_delivered) = true;
        }
    }
}

template <class W>
TieBreakResult phase3_tiebreak(const NetGraph& g, const W& w, const std::vector<NodeId>& seeds_f,
                               NodeId u, const std::vector<uint8_t>& subgraph, NodeId root) {
    TieBreakResult res;
    phase3_tiebreak(
        g, w, seeds_f, u, [&](NodeId v) { return subgraph[v] != 0; }, root, res);
    return res;
}

// Builds the RDR set for a fixed root in a fixed world. The upper variant
// works in the modified world (h^M = 1 on critical edges) and lifts rewards
// for overlap and F-touched candidates.
template <class W>
RdrSet build_rdr_at(const NetGraph& g, const W& w, const std::vector<NodeId>& seeds_f, NodeId root,
                    BoundVariant variant, const Phase1State& p1,
                    const std::vector<NodeId>* coreach = nullptr) {
    RdrSet r;
    r.root = root;
    r.variant = variant;
    r.phase1_nodes = (int32_t)p1.reach_count;

    auto run = [&](const auto& world) {
        Step d = f_delayed_distance(g, world, seeds_f, root, coreach);
        Step tau_root = world_tau(world, root);
        static thread_local Phase2State p2;
        phase2_backward(g, world, root, p1.f_touch, p2);
        r.phase2_nodes = (int32_t)p2.reached.size();
        r.phase2_edges = p2.edges_touched;

        auto in_subgraph = [&](NodeId v) { return v == root || p2.is_reached(v); };
        static thread_local TieBreakResult tb;
        for (NodeId v : p2.reached) {
            if (p1.f_touch[v] == 2 || v == root) continue; // F seeds are not candidates
            // The distance shortcut is only exact for candidates whose routes
            // cannot interact with F: no overlap, and the candidate itself
            // untouched (seeding an F-touched node removes one of F's routes,
            // which static distances cannot see). Everything else goes
            // through the tie-break program.
            if (!p2.overlaps(v) && !p1.f_touch[v]) {
                Step dd = p2.dd_of(v);
                if (dd < d - tau_root) {
                    r.entries.push_back({v, 2});
                } else if (dd <= d + tau_root) {
                    r.entries.push_back({v, 1});
                }
                continue;
            }
            r.phase3_runs++;
            phase3_tiebreak(g, world, seeds_f, v, in_subgraph, root, tb);
            if (!tb.m_delivered) continue;
            // The upper variant lifts overlap candidates and F-touched
            // candidates alike: seeding an F-touched node cuts one of F's own
            // routes, a coordination the plain per-candidate rule undercounts.
            if (variant == BoundVariant::Upper && (p2.overlaps(v) || p1.f_touch[v])) {
                r.entries.push_back({v, 2});
            } else {
                r.entries.push_back({v, tb.f_delivered ? uint8_t(1) : uint8_t(2)});
            }
        }
    };

    if (variant == BoundVariant::Upper) {
        auto crit = critical_edges(g, w, p1.f_touch);
        run(CriticalOverlay<W>(w, crit));
    } else {
        run(w);
    }
    std::sort(r.entries.begin(), r.entries.end());
    return r;
}

// Random RDR set for sample `index`. IS redraws (world, root) together until
// the root lands in the F-reached set, keeping accepted pairs uniform; RS
// keeps the draw and marks it empty instead.
RdrSet build_rdr(const WorldModel& model, const std::vector<NodeId>& seeds_f, BoundVariant variant,
                 RdrMode mode, uint64_t seed, uint64_t index);

// Collections are grown sample-by-sample so a doubled collection strictly
// extends the previous one.
std::vector<RdrSet> build_rdr_collection(const WorldModel& model,
                                         const std::vector<NodeId>& seeds_f, BoundVariant variant,
                                         RdrMode mode, uint64_t seed, uint64_t stream,
                                         int64_t from, int64_t to,
                                         std::vector<RdrSet> existing = {}, int workers = 0);

// "root|u:w,u:w,..." per line, for fixtures and cross-implementation diffs.
std::string dump_rdr_collection(const std::vector<RdrSet>& sets);

} // namespace mitig
