#pragma once

#include <cstdint>
#include <vector>

#include "mitig/netgraph.hpp"

namespace mitig {

// Dominator tree over the live subgraph from a single source (iterative
// Cooper-Harvey-Kennedy). Used to answer "is there a source-to-x walk that
// avoids v": yes iff x is reachable and v does not dominate x.
class DomTree {
public:
    template <class W>
    DomTree(const NetGraph& g, const W& w, NodeId source) {
        const NodeId n = g.num_nodes();
        idom_.assign(n, -1);
        rpo_index_.assign(n, -1);
        tin_.assign(n, 0);
        tout_.assign(n, 0);

        // Reverse post-order over live out-edges.
        std::vector<NodeId> order;
        order.reserve(64);
        {
            std::vector<int8_t> seen(n, 0);
            std::vector<std::pair<NodeId, size_t>> stack{{source, 0}};
            seen[source] = 1;
            while (!stack.empty()) {
                auto [v, i] = stack.back();
                const auto& out = g.out_edges(v);
                bool descended = false;
                while (i < out.size()) {
                    EdgeId e = out[i++];
                    NodeId x = g.edge(e).dst;
                    if (!seen[x] && w.edge_live(e)) {
                        seen[x] = 1;
                        stack.back().second = i;
                        stack.push_back({x, 0});
                        descended = true;
                        break;
                    }
                }
                if (!descended) {
                    order.push_back(v);
                    stack.pop_back();
                }
            }
            std::reverse(order.begin(), order.end());
        }
        for (size_t i = 0; i < order.size(); i++) rpo_index_[order[i]] = (NodeId)i;
        idom_[source] = source;

        bool changed = true;
        while (changed) {
            changed = false;
            for (NodeId x : order) {
                if (x == source) continue;
                NodeId best = -1;
                for (EdgeId e : g.in_edges(x)) {
                    NodeId p = g.edge(e).src;
                    if (rpo_index_[p] < 0 || idom_[p] < 0 || !w.edge_live(e)) continue;
                    best = best < 0 ? p : intersect(best, p);
                }
                if (best >= 0 && idom_[x] != best) {
                    idom_[x] = best;
                    changed = true;
                }
            }
        }

        // Euler intervals for O(1) ancestor tests.
        std::vector<std::vector<NodeId>> children(n);
        for (NodeId v : order)
            if (v != source && idom_[v] >= 0) children[idom_[v]].push_back(v);
        int clock = 0;
        std::vector<std::pair<NodeId, size_t>> stack{{source, 0}};
        tin_[source] = ++clock;
        while (!stack.empty()) {
            auto& [v, i] = stack.back();
            if (i < children[v].size()) {
                NodeId c = children[v][i++];
                tin_[c] = ++clock;
                stack.push_back({c, 0});
            } else {
                tout_[v] = ++clock;
                stack.pop_back();
            }
        }
    }

    bool reachable(NodeId x) const { return rpo_index_[x] >= 0; }

    // True when every source-to-x walk passes through v.
    bool dominates(NodeId v, NodeId x) const {
        if (!reachable(x) || !reachable(v)) return false;
        return tin_[v] <= tin_[x] && tout_[x] <= tout_[v];
    }

private:
    NodeId intersect(NodeId a, NodeId b) const {
        while (a != b) {
            while (rpo_index_[a] > rpo_index_[b]) a = idom_[a];
            while (rpo_index_[b] > rpo_index_[a]) b = idom_[b];
        }
        return a;
    }

    std::vector<NodeId> idom_;
    std::vector<NodeId> rpo_index_;
    std::vector<int> tin_, tout_;
};

} // namespace mitig
