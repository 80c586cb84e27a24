#pragma once

// Shared objective evaluation in one fixed world; included by the Monte-Carlo
// estimator and the exact oracle so both sides fold rewards identically.

#include "mitig/sim.hpp"

namespace mitig {

// Lower/upper bound folds take the per-node max over singleton runs; a chosen
// seed u that F would have reached counts its own full reward (t^M = 0).
template <class W>
double objective_in_world(const NetGraph& g, const W& w, const std::vector<NodeId>& seeds_f,
                          const std::vector<NodeId>& seeds_m, Objective objective, int* count2,
                          int* count1) {
    const NodeId n = g.num_nodes();
    std::vector<uint8_t> reach = f_reach(g, w, seeds_f);
    auto in_r_f = [&](NodeId v) { return reach[v] == 1; };

    std::vector<int> best;
    if (objective == Objective::Mu) {
        CascadeTrace tr = simulate(g, w, seeds_f, seeds_m);
        best.assign(n, 0);
        for (NodeId v = 0; v < n; v++)
            best[v] = reward(tr, v, in_r_f(v), world_tau(w, v));
    } else if (objective == Objective::MuLower) {
        best.assign(n, 0);
        std::vector<NodeId> single(1);
        for (NodeId u : seeds_m) {
            single[0] = u;
            CascadeTrace tr = simulate(g, w, seeds_f, single);
            for (NodeId v = 0; v < n; v++) {
                int r = reward(tr, v, in_r_f(v), world_tau(w, v));
                if (r > best[v]) best[v] = r;
            }
        }
    } else {
        std::vector<uint8_t> f_touch(n, 0);
        for (NodeId v = 0; v < n; v++) f_touch[v] = reach[v] != 0;
        auto crit = critical_edges(g, w, f_touch);
        CriticalOverlay<W> prime(w, crit);
        best.assign(n, 0);
        std::vector<NodeId> single(1);
        for (NodeId u : seeds_m) {
            single[0] = u;
            CascadeTrace tr = simulate(g, prime, seeds_f, single);
            auto overlap = overlap_targets(g, prime, u, f_touch);
            bool lift_all = f_touch[u] != 0; // the candidate sits on F's own routes
            for (NodeId v = 0; v < n; v++) {
                Step tau = world_tau(w, v);
                int r = overlap[v] || lift_all
                            ? reward_lifted(in_r_f(v), tr.t_f[v], tr.t_m[v], tau)
                            : reward(tr, v, in_r_f(v), tau);
                if (r > best[v]) best[v] = r;
            }
        }
    }
    double total = 0.0;
    for (NodeId v = 0; v < n; v++) {
        total += best[v];
        if (best[v] == 2 && count2) (*count2)++;
        if (best[v] == 1 && count1) (*count1)++;
    }
    return total;
}

} // namespace mitig
