#pragma once

#include <queue>
#include <stdexcept>
#include <vector>

#include "mitig/domtree.hpp"
#include "mitig/netgraph.hpp"
#include "mitig/world.hpp"

namespace mitig {

enum class Adopt : int8_t { None = 0, F = 1, M = 2 };

// Outcome of one two-campaign run in a fixed possible world. Meeting times
// are first successful meetings over live edges; a meeting scheduled after
// the node has adopted never happens and stays at kNever.
struct CascadeTrace {
    std::vector<Adopt> adopt;
    std::vector<Step> close;  // awareness + window; kNever if never aware
    std::vector<Step> t_f;    // first meeting with campaign F
    std::vector<Step> t_m;    // first meeting with campaign M
    Step termination = 0;

    Step open(NodeId v, Step tau) const { return close[v] == kNever ? kNever : close[v] - tau; }
};

// Reward at v per the delay step function: 2 when the truth arrives before
// the misinformation's window opens (or blocks it entirely), 1 when both
// arrive in-window, 0 when the truth is too late or v is not F-reachable.
inline int reward(bool in_r_f, Step t_f, Step t_m, Step tau) {
    if (!in_r_f) return 0;
    if (t_m >= kNever) return 0;
    if (t_f >= kNever) return 2;
    if (t_m < t_f - tau) return 2;
    Step delta = t_m > t_f ? t_m - t_f : t_f - t_m;
    if (delta <= tau) return 1;
    return 0;
}

inline int reward(const CascadeTrace& trace, NodeId v, bool in_r_f, Step tau) {
    return reward(in_r_f, trace.t_f[v], trace.t_m[v], tau);
}

// Lifted reward for the upper bound: awareness in-window counts in full.
inline int reward_lifted(bool in_r_f, Step t_f, Step t_m, Step tau) {
    if (!in_r_f) return 0;
    if (t_m >= kNever) return 0;
    if (t_f >= kNever) return 2;
    return t_m <= t_f + tau ? 2 : 0;
}

// Discrete-step cascade of the two campaigns. Seeds adopt at step 0; a node
// opens its window at the first meeting, collects meetings for tau steps and
// adopts the campaign of the first in-neighbour in pi order whose meeting
// arrived in-window. Implemented as a Dijkstra over window-close times: close
// values only grow along edges, so nodes can be finalized in close order.
template <class W>
CascadeTrace simulate(const NetGraph& g, const W& w, const std::vector<NodeId>& seeds_f,
                      const std::vector<NodeId>& seeds_m) {
    const NodeId n = g.num_nodes();
    CascadeTrace tr;
    tr.adopt.assign(n, Adopt::None);
    tr.close.assign(n, kNever);
    tr.t_f.assign(n, kNever);
    tr.t_m.assign(n, kNever);

    std::vector<Step> best(n, kNever);
    std::vector<int8_t> done(n, 0);
    using Entry = std::pair<Step, NodeId>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> queue;

    auto seed = [&](const std::vector<NodeId>& seeds, Adopt side) {
        for (NodeId s : seeds) {
            if (s < 0 || s >= n) throw std::invalid_argument("seed out of range");
            if (tr.adopt[s] != Adopt::None && tr.adopt[s] != side)
                throw std::invalid_argument("overlapping seed sets");
            tr.adopt[s] = side;
            tr.close[s] = 0;
            (side == Adopt::F ? tr.t_f : tr.t_m)[s] = 0;
            done[s] = 1;
        }
    };
    seed(seeds_f, Adopt::F);
    seed(seeds_m, Adopt::M);

    auto relax_out = [&](NodeId v) {
        Step t = tr.close[v];
        bool is_m = tr.adopt[v] == Adopt::M;
        for (EdgeId e : g.out_edges(v)) {
            NodeId x = g.edge(e).dst;
            if (done[x] || !w.edge_live(e)) continue;
            Step arrival = t + (is_m ? w.hop_m(e) : w.hop_f(e));
            Step cand = arrival + world_tau(w, x);
            if (cand < best[x]) {
                best[x] = cand;
                queue.push({cand, x});
            }
        }
    };
    for (NodeId s : seeds_f) relax_out(s);
    for (NodeId s : seeds_m)
        if (tr.adopt[s] == Adopt::M) relax_out(s);

    while (!queue.empty()) {
        auto [t, v] = queue.top();
        queue.pop();
        if (done[v] || t != best[v]) continue;
        done[v] = 1;
        tr.close[v] = t;
        tr.termination = t;

        // First-meeting times from every in-neighbour that delivered in-window.
        const auto& in = g.in_edges(v);
        for (EdgeId e : in) {
            NodeId u = g.edge(e).src;
            if (tr.adopt[u] == Adopt::None || tr.close[u] >= t) continue;
            bool from_m = tr.adopt[u] == Adopt::M;
            if (!w.edge_live(e)) continue;
            Step arrival = tr.close[u] + (from_m ? w.hop_m(e) : w.hop_f(e));
            if (arrival > t) continue;
            Step& slot = from_m ? tr.t_m[v] : tr.t_f[v];
            if (arrival < slot) slot = arrival;
        }
        // Adoption: first in-window deliverer in pi order.
        const auto& pi = world_perm(w, v);
        for (size_t i = 0; i < in.size(); i++) {
            EdgeId e = in[pi[i]];
            NodeId u = g.edge(e).src;
            if (tr.adopt[u] == Adopt::None || tr.close[u] >= t || !w.edge_live(e)) continue;
            bool from_m = tr.adopt[u] == Adopt::M;
            Step arrival = tr.close[u] + (from_m ? w.hop_m(e) : w.hop_f(e));
            if (arrival > t) continue;
            tr.adopt[v] = from_m ? Adopt::M : Adopt::F;
            break;
        }
        if (tr.adopt[v] != Adopt::None) relax_out(v);
    }
    return tr;
}

// Nodes campaign F reaches over live edges when unopposed; excludes the seeds.
template <class W>
std::vector<uint8_t> f_reach(const NetGraph& g, const W& w, const std::vector<NodeId>& seeds_f) {
    std::vector<uint8_t> seen(g.num_nodes(), 0);
    std::vector<NodeId> stack;
    for (NodeId s : seeds_f)
        if (!seen[s]) {
            seen[s] = 1;
            stack.push_back(s);
        }
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        for (EdgeId e : g.out_edges(v)) {
            NodeId x = g.edge(e).dst;
            if (!seen[x] && w.edge_live(e)) {
                seen[x] = 1;
                stack.push_back(x);
            }
        }
    }
    for (NodeId s : seeds_f) seen[s] = 2; // mark seeds so callers can exclude them
    return seen;
}

enum class Objective { Mu, MuLower, MuUpper };

struct MitigationEstimate {
    double mean = 0.0;
    double se = 0.0;
    int64_t sims = 0;
    int64_t reward2_events = 0;
    int64_t reward1_events = 0;

    double reward2_frac() const {
        double total = 2.0 * reward2_events + reward1_events;
        return total > 0 ? 2.0 * reward2_events / total : 0.0;
    }
    double reward1_frac() const {
        double total = 2.0 * reward2_events + reward1_events;
        return total > 0 ? reward1_events / total : 0.0;
    }
};

// Monte-Carlo estimate of mu, the singleton lower bound, or the critical-edge
// upper bound over num_sims independent worlds.
MitigationEstimate estimate_mitigation(const WorldModel& model, const std::vector<NodeId>& seeds_f,
                                       const std::vector<NodeId>& seeds_m, Objective objective,
                                       int64_t num_sims, uint64_t seed, int workers = 0);

// One world's objective value; exposed for the oracle and tests.
template <class W>
double objective_in_world(const NetGraph& g, const W& w, const std::vector<NodeId>& seeds_f,
                          const std::vector<NodeId>& seeds_m, Objective objective,
                          int* count2 = nullptr, int* count1 = nullptr);

struct InfluenceEstimate {
    double value = 0.0;
    int64_t sims = 0;
    bool exceeded_half_n = false; // boundary condition ^INF_F <= n/2 violated
    bool hit_sample_cap = false;
};

// Sequential (eps, delta)-relative approximation of INF_F, the expected
// number of non-seed nodes activated by campaign F alone. Uses an empirical
// Bernstein stopping rule checked on a doubling schedule.
InfluenceEstimate estimate_inf_f(const WorldModel& model, const std::vector<NodeId>& seeds_f,
                                 double eps, double delta, uint64_t seed, int workers = 0,
                                 int64_t max_sims = 20'000'000);

// Upper-bound machinery shared by the estimator, the RDR builder and the
// oracle: critical edges are the live out-edges of nodes F touches.
template <class W>
std::vector<uint8_t> critical_edges(const NetGraph& g, const W& w,
                                    const std::vector<uint8_t>& f_touch) {
    std::vector<uint8_t> crit(g.num_edges(), 0);
    for (NodeId v = 0; v < g.num_nodes(); v++) {
        if (!f_touch[v]) continue;
        for (EdgeId e : g.out_edges(v))
            if (w.edge_live(e)) crit[e] = 1;
    }
    return crit;
}

// Overlap indicator line for candidate u. A mitigation route from u to v can
// interact with campaign F exactly when some u -> v path carries an F-touched
// interior node; since the F-touched set is closed under live out-edges, that
// holds iff v has a live F-touched in-neighbour x != u that u can reach
// without passing through v. The avoidance test is a dominator query.
template <class W>
std::vector<uint8_t> overlap_targets(const NetGraph& g, const W& w, NodeId u,
                                     const std::vector<uint8_t>& f_touch) {
    DomTree dom(g, w, u);
    std::vector<uint8_t> hit(g.num_nodes(), 0);
    for (NodeId v = 0; v < g.num_nodes(); v++) {
        for (EdgeId e : g.in_edges(v)) {
            NodeId x = g.edge(e).src;
            if (x != u && f_touch[x] && dom.reachable(x) && !dom.dominates(v, x) &&
                w.edge_live(e)) {
                hit[v] = 1;
                break;
            }
        }
    }
    return hit;
}

std::string trace_dump(const NetGraph& g, const CascadeTrace& trace);
std::string estimate_csv_row(const char* objective, const MitigationEstimate& est);

} // namespace mitig
