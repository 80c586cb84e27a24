#include "mitig/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mitig/parallel.hpp"

namespace mitig {

std::vector<NodeId> plain_rr_set(const NetGraph& g, uint64_t seed, uint64_t index) {
    Rng rng(seed, index, 31, 0);
    NodeId root = (NodeId)rng.below((uint64_t)g.num_nodes());
    std::vector<NodeId> out;
    std::vector<uint8_t> seen(g.num_nodes(), 0);
    std::vector<NodeId> stack{root};
    seen[root] = 1;
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        out.push_back(v);
        for (EdgeId e : g.in_edges(v)) {
            NodeId u = g.edge(e).src;
            if (seen[u]) continue;
            double p = g.edge(e).p;
            if (p < 1.0 && !rng.bernoulli(p)) continue;
            seen[u] = 1;
            stack.push_back(u);
        }
    }
    return out;
}

std::vector<NodeId> rank_by_rr_frequency(const NetGraph& g, int64_t budget, uint64_t seed,
                                         int workers) {
    std::vector<std::vector<NodeId>> sets(budget);
    parallel_for(
        budget, [&](int64_t i) { sets[i] = plain_rr_set(g, seed, (uint64_t)i); }, workers);
    std::vector<int64_t> count(g.num_nodes(), 0);
    for (const auto& s : sets)
        for (NodeId v : s) count[v]++;
    std::vector<NodeId> order(g.num_nodes());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
        return count[a] != count[b] ? count[a] > count[b] : a < b;
    });
    return order;
}

namespace {

std::vector<RdrSet> rr_collection(const NetGraph& g, uint64_t seed, uint64_t stream, int64_t from,
                                  int64_t to, std::vector<RdrSet> existing, int workers) {
    existing.resize(to);
    parallel_for(
        to - from,
        [&](int64_t i) {
            uint64_t idx = mix_key(stream, (uint64_t)(from + i));
            auto nodes = plain_rr_set(g, seed, idx);
            RdrSet r;
            r.root = nodes.front();
            r.entries.reserve(nodes.size());
            for (NodeId v : nodes) r.entries.push_back({v, 1});
            std::sort(r.entries.begin(), r.entries.end());
            existing[from + i] = std::move(r);
        },
        workers);
    return existing;
}

// OPIM-style loop on unweighted RR sets; LB = k is valid for plain influence
// maximization since every selected seed activates itself.
std::vector<NodeId> im_rr_select(const NetGraph& g, const std::vector<NodeId>& seeds_f,
                                 const BaselineSpec& spec) {
    const NodeId n = g.num_nodes();
    double eps = spec.eps;
    double delta = spec.delta > 0 ? spec.delta : 1.0 / n;
    int64_t n_max = compute_n_max(n, spec.k, eps, 0.0, delta, (double)spec.k);
    int64_t n0 = std::clamp<int64_t>(
        (int64_t)std::ceil((double)n_max * eps * eps * spec.k / n), 1, n_max);
    int i_max = std::max(1, (int)std::ceil(std::log2((double)n_max / (double)n0)));
    double d12 = delta / (3.0 * i_max);
    double target = 1.0 - 1.0 / std::exp(1.0) - eps;

    int64_t theta = n0;
    auto r1 = rr_collection(g, spec.seed, 51, 0, theta, {}, spec.workers);
    auto r2 = rr_collection(g, spec.seed, 52, 0, theta, {}, spec.workers);
    std::vector<NodeId> seeds;
    for (int i = 1;; i++) {
        GreedyResult greedy = greedy_weighted_cover(r1, spec.k, n, seeds_f);
        seeds = greedy.seeds;
        double lam1 = greedy.covered_weight;
        double lam2 = coverage_weight(r2, seeds);
        double sl = sigma_lower(lam2, (double)theta, d12, 0.0, n);
        double su = sigma_upper(lam1, (double)theta, d12, 0.0, n);
        double alpha = su > 0 ? sl / su : 0.0;
        if (alpha >= target || i >= i_max) break;
        int64_t next = theta * 2;
        r1 = rr_collection(g, spec.seed, 51, theta, next, std::move(r1), spec.workers);
        r2 = rr_collection(g, spec.seed, 52, theta, next, std::move(r2), spec.workers);
        theta = next;
    }
    return seeds;
}

} // namespace

std::vector<NodeId> select_baseline(const NetGraph& g, const std::vector<NodeId>& seeds_f,
                                    const BaselineSpec& spec) {
    if (spec.k < 1) throw std::invalid_argument("k must be >= 1");
    const NodeId n = g.num_nodes();
    std::vector<uint8_t> is_fake(n, 0);
    for (NodeId s : seeds_f) is_fake[s] = 1;

    switch (spec.method) {
    case BaselineMethod::ImRr:
        return im_rr_select(g, seeds_f, spec);

    case BaselineMethod::Influential: {
        auto order = rank_by_rr_frequency(g, spec.budget, spec.seed, spec.workers);
        std::vector<NodeId> out;
        for (NodeId v : order) {
            if (is_fake[v]) continue;
            out.push_back(v);
            if ((int)out.size() == spec.k) break;
        }
        return out;
    }

    case BaselineMethod::Proximity: {
        // 1-hop out-neighbours ranked by the best incoming edge probability,
        // then 2-hop neighbours, then random padding.
        std::vector<double> score(n, 0.0);
        std::vector<uint8_t> hop1(n, 0);
        for (NodeId s : seeds_f)
            for (EdgeId e : g.out_edges(s)) {
                NodeId v = g.edge(e).dst;
                if (is_fake[v]) continue;
                hop1[v] = 1;
                score[v] = std::max(score[v], g.edge(e).p);
            }
        auto ranked = [&](const std::vector<uint8_t>& mask) {
            std::vector<NodeId> out;
            for (NodeId v = 0; v < n; v++)
                if (mask[v]) out.push_back(v);
            std::stable_sort(out.begin(), out.end(), [&](NodeId a, NodeId b) {
                return score[a] != score[b] ? score[a] > score[b] : a < b;
            });
            return out;
        };
        std::vector<NodeId> out = ranked(hop1);
        if ((int)out.size() < spec.k) {
            std::vector<uint8_t> hop2(n, 0);
            std::vector<double> score2(n, 0.0);
            for (NodeId u = 0; u < n; u++) {
                if (!hop1[u]) continue;
                for (EdgeId e : g.out_edges(u)) {
                    NodeId v = g.edge(e).dst;
                    if (is_fake[v] || hop1[v]) continue;
                    hop2[v] = 1;
                    score2[v] = std::max(score2[v], g.edge(e).p);
                }
            }
            score = score2;
            for (NodeId v : ranked(hop2)) {
                if ((int)out.size() >= spec.k) break;
                out.push_back(v);
            }
        }
        if ((int)out.size() < spec.k) {
            std::fprintf(stderr, "warning: proximity found only %zu eligible nodes; padding "
                                 "randomly\n",
                         out.size());
            std::vector<uint8_t> used = is_fake;
            for (NodeId v : out) used[v] = 1;
            Rng rng(spec.seed, 0, 33, 0);
            std::vector<NodeId> pool;
            for (NodeId v = 0; v < n; v++)
                if (!used[v]) pool.push_back(v);
            while ((int)out.size() < spec.k && !pool.empty()) {
                size_t j = (size_t)rng.below(pool.size());
                out.push_back(pool[j]);
                pool.erase(pool.begin() + j);
            }
        }
        if ((int)out.size() > spec.k) out.resize(spec.k);
        return out;
    }

    case BaselineMethod::Random: {
        std::vector<NodeId> pool;
        for (NodeId v = 0; v < n; v++)
            if (!is_fake[v]) pool.push_back(v);
        Rng rng(spec.seed, 0, 34, 0);
        std::vector<NodeId> out;
        for (int i = 0; i < spec.k && !pool.empty(); i++) {
            size_t j = (size_t)rng.below(pool.size());
            out.push_back(pool[j]);
            pool[j] = pool.back();
            pool.pop_back();
        }
        return out;
    }
    }
    throw std::logic_error("unknown baseline method");
}

} // namespace mitig
