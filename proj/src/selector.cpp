#include "mitig/selector.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace mitig {

namespace {
constexpr double kOneMinusInvE = 1.0 - 1.0 / 2.718281828459045235360287471352662498;
enum : uint64_t { kStreamR1 = 101, kStreamR2 = 102, kStreamInf = 103 };

double now_ms() {
    using namespace std::chrono;
    return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}
} // namespace

GreedyResult greedy_weighted_cover(const std::vector<RdrSet>& collection, int k, NodeId n,
                                   const std::vector<NodeId>& exclude) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    std::vector<uint8_t> excluded(n, 0);
    for (NodeId v : exclude) excluded[v] = 1;

    // Postings: node -> (set index, weight). The root of a non-empty set
    // carries its implicit weight-2 self entry.
    std::unordered_map<NodeId, std::vector<std::pair<int64_t, uint8_t>>> postings;
    for (int64_t i = 0; i < (int64_t)collection.size(); i++) {
        const RdrSet& r = collection[i];
        if (!r.empty_sample && r.root >= 0 && !excluded[r.root])
            postings[r.root].push_back({i, 2});
        for (auto [u, wgt] : r.entries)
            if (!excluded[u]) postings[u].push_back({i, wgt});
    }

    std::vector<uint8_t> covered(collection.size(), 0);
    auto gain_of = [&](NodeId u) {
        double gain = 0.0;
        auto it = postings.find(u);
        if (it == postings.end()) return 0.0;
        for (auto [set, wgt] : it->second)
            if (wgt > covered[set]) gain += wgt - covered[set];
        return gain;
    };

    // Lazy greedy; gains only shrink, so stale heap entries are safe to
    // recompute on pop. Ties resolve to the smaller node id.
    struct HeapEntry {
        double gain;
        NodeId node;
        int64_t stamp;
        bool operator<(const HeapEntry& o) const {
            if (gain != o.gain) return gain < o.gain;
            return node > o.node;
        }
    };
    std::priority_queue<HeapEntry> heap;
    for (NodeId u = 0; u < n; u++)
        if (!excluded[u]) heap.push({gain_of(u), u, 0});

    GreedyResult res;
    std::vector<uint8_t> chosen(n, 0);
    int64_t round = 0;
    while ((int)res.seeds.size() < k && !heap.empty()) {
        HeapEntry top = heap.top();
        heap.pop();
        if (chosen[top.node]) continue;
        if (top.stamp != round) {
            top.gain = gain_of(top.node);
            top.stamp = round;
            heap.push(top);
            continue;
        }
        chosen[top.node] = 1;
        res.seeds.push_back(top.node);
        res.covered_weight += top.gain;
        round++;
        auto it = postings.find(top.node);
        if (it != postings.end())
            for (auto [set, wgt] : it->second)
                if (wgt > covered[set]) covered[set] = wgt;
    }
    return res;
}

double coverage_weight(const std::vector<RdrSet>& collection, const std::vector<NodeId>& seeds) {
    std::vector<uint8_t> in_set;
    NodeId max_id = -1;
    for (NodeId v : seeds) max_id = std::max(max_id, v);
    in_set.assign(max_id + 1, 0);
    for (NodeId v : seeds) in_set[v] = 1;
    double total = 0.0;
    for (const RdrSet& r : collection) {
        uint8_t best = 0;
        if (!r.empty_sample && r.root <= max_id && in_set[r.root]) best = 2;
        for (auto [u, wgt] : r.entries)
            if (u <= max_id && in_set[u] && wgt > best) best = wgt;
        total += best;
    }
    return total;
}

double compute_lb_mia(const NetGraph& g, const std::vector<NodeId>& seeds_f, int k, bool* floored) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    std::vector<uint8_t> is_seed(g.num_nodes(), 0);
    for (NodeId s : seeds_f) is_seed[s] = 1;
    // ap(v) = 1 - prod over seed edges into v of (1 - p).
    std::unordered_map<NodeId, double> miss;
    for (NodeId s : seeds_f)
        for (EdgeId e : g.out_edges(s)) {
            NodeId v = g.edge(e).dst;
            if (is_seed[v]) continue;
            auto [it, fresh] = miss.try_emplace(v, 1.0);
            it->second *= 1.0 - g.edge(e).p;
        }
    std::vector<double> ap;
    ap.reserve(miss.size());
    for (auto& [v, m] : miss) ap.push_back(1.0 - m);
    std::sort(ap.begin(), ap.end(), std::greater<>());
    double lb = 0.0;
    for (int i = 0; i < (int)ap.size() && i < k; i++) lb += ap[i];
    if (floored) *floored = false;
    if (lb <= 0.0) {
        lb = 2e-6 * k; // keep N_max finite when no depth-1 mass exists
        if (floored) *floored = true;
        std::fprintf(stderr,
                     "warning: MIA lower bound is zero (fake seeds have no usable out-edges); "
                     "falling back to %.3g\n",
                     lb);
    }
    return lb;
}

int64_t compute_n_max(NodeId n, int k, double eps, double eps_prime, double big_delta, double lb) {
    if (!(lb > 0.0)) throw std::invalid_argument("LB must be positive");
    double bracket = eps * (1.0 + eps_prime) - 2.0 * eps_prime * kOneMinusInvE;
    if (!(bracket > 0.0)) throw std::invalid_argument("eps(1+eps') must exceed 2 eps'(1-1/e)");
    double ln_choose = std::lgamma((double)n + 1.0) - std::lgamma((double)k + 1.0) -
                       std::lgamma((double)(n - k) + 1.0);
    double numer = 8.0 * n * (3.0 + eps_prime) * kOneMinusInvE *
                   (std::log(27.0 / (4.0 * big_delta)) + ln_choose);
    double denom = 3.0 * lb * bracket * bracket;
    return (int64_t)std::ceil(numer / denom);
}

double sigma_lower(double lambda2, double theta2, double delta2, double eps_prime, NodeId n) {
    if (theta2 < 1.0) throw std::invalid_argument("theta2 must be >= 1");
    if (lambda2 <= 0.0) return 0.0; // the formula cancels exactly at zero coverage
    double a = std::log(1.0 / delta2);
    double s = std::sqrt(lambda2 + 25.0 * a / 36.0) - std::sqrt(a);
    double val = (s * s - a / 36.0) * n / (theta2 * (1.0 + eps_prime));
    return std::max(0.0, val);
}

double sigma_upper(double lambda1, double theta1, double delta1, double eps_prime, NodeId n) {
    if (theta1 < 1.0) throw std::invalid_argument("theta1 must be >= 1");
    if (!(eps_prime < 1.0)) throw std::invalid_argument("eps' must be < 1");
    double a = std::log(1.0 / delta1);
    double s = std::sqrt(std::max(0.0, lambda1) / kOneMinusInvE + a) + std::sqrt(a);
    return s * s * n / (theta1 * (1.0 - eps_prime));
}

namespace {

BoundParams make_bounds(const NetGraph& g, const std::vector<NodeId>& seeds_f, int k, double eps,
                        double delta, RdrMode mode) {
    BoundParams b;
    b.eps = eps;
    b.delta = delta;
    b.k = k;
    if (mode == RdrMode::IS) {
        b.eps_prime = eps / 2.0;
        b.delta_prime = delta / 9.0;
    } else {
        // RS needs no influence estimate, so no error budget is spent on one.
        b.eps_prime = 0.0;
        b.delta_prime = 0.0;
    }
    b.big_delta = delta - b.delta_prime;
    b.gamma_lo = 1.0 - b.eps_prime;
    b.gamma_hi = 1.0 + b.eps_prime;
    b.lb = compute_lb_mia(g, seeds_f, k);
    b.n_max = compute_n_max(g.num_nodes(), k, eps, b.eps_prime, b.big_delta, b.lb);
    int64_t n0 = (int64_t)std::ceil((double)b.n_max * eps * eps * b.lb / g.num_nodes());
    b.n0 = std::clamp<int64_t>(n0, 1, b.n_max);
    b.i_max = std::max(1, (int)std::ceil(std::log2((double)b.n_max / (double)b.n0)));
    return b;
}

struct LoopState {
    std::vector<RdrSet> r1, r2;
    int64_t theta = 0;
};

// One nominate/assess evaluation on the current collections.
IterationRecord evaluate_round(const NetGraph& g, const LoopState& st, int k,
                               const std::vector<NodeId>& seeds_f, double norm,
                               const BoundParams& b, std::vector<NodeId>* seeds_out) {
    GreedyResult greedy = greedy_weighted_cover(st.r1, k, g.num_nodes(), seeds_f);
    IterationRecord rec;
    rec.size1 = (int64_t)st.r1.size();
    rec.size2 = (int64_t)st.r2.size();
    rec.lambda1 = norm * greedy.covered_weight;
    rec.lambda2 = norm * coverage_weight(st.r2, greedy.seeds);
    rec.sigma_l = sigma_lower(rec.lambda2, (double)rec.size2, b.delta2, b.eps_prime, g.num_nodes());
    rec.sigma_u = sigma_upper(rec.lambda1, (double)rec.size1, b.delta1, b.eps_prime, g.num_nodes());
    rec.alpha = rec.sigma_u > 0.0 ? rec.sigma_l / rec.sigma_u : 0.0;
    *seeds_out = std::move(greedy.seeds);
    return rec;
}

int64_t count_empty(const std::vector<RdrSet>& sets) {
    int64_t c = 0;
    for (const RdrSet& r : sets) c += r.empty_sample;
    return c;
}

} // namespace

SelectionResult namm(const WorldModel& model, const std::vector<NodeId>& seeds_f,
                     BoundVariant variant, int k, double eps, double delta, RdrMode mode,
                     uint64_t seed, const NammOptions& opts) {
    if (seeds_f.empty()) throw std::invalid_argument("fake seed set must be non-empty");
    const NetGraph& g = *model.g;
    double start = now_ms();

    SelectionResult res;
    res.variant = variant;
    res.mode = mode;
    res.bounds = make_bounds(g, seeds_f, k, eps, delta, mode);
    BoundParams& b = res.bounds;

    double norm = 1.0;
    if (mode == RdrMode::IS) {
        auto inf = estimate_inf_f(model, seeds_f, b.eps_prime, b.delta_prime,
                                  mix_key(seed, kStreamInf), opts.workers);
        res.inf_f_hat = inf.value;
        res.inf_f_sims = inf.sims;
        if (!(inf.value > 0.0))
            throw std::runtime_error("misinformation cannot spread: estimated F influence is zero");
        norm = inf.value / g.num_nodes();
    }

    int iters = opts.max_iterations > 0 ? opts.max_iterations : b.i_max;
    if (opts.anytime_deltas) {
        b.delta1 = b.delta2 = delta / 2.0;
    } else {
        b.delta1 = b.delta2 = b.big_delta / (3.0 * b.i_max);
    }
    double target = opts.alpha_target >= 0.0 ? opts.alpha_target : kOneMinusInvE - eps;

    uint64_t s1 = mix_key(seed, kStreamR1, (uint64_t)variant);
    uint64_t s2 = mix_key(seed, kStreamR2, (uint64_t)variant);
    LoopState st;
    st.theta = b.n0;
    st.r1 = build_rdr_collection(model, seeds_f, variant, mode, seed, s1, 0, st.theta, {},
                                 opts.workers);
    st.r2 = build_rdr_collection(model, seeds_f, variant, mode, seed, s2, 0, st.theta, {},
                                 opts.workers);

    for (int i = 1;; i++) {
        IterationRecord rec = evaluate_round(g, st, k, seeds_f, norm, b, &res.seeds);
        res.iterations.push_back(rec);
        res.alpha = rec.alpha;
        res.alpha_reached = rec.alpha >= target;
        res.total_samples = 2 * st.theta;
        res.empty_samples = count_empty(st.r1) + count_empty(st.r2);
        res.wall_ms = now_ms() - start;
        if (opts.on_iteration) opts.on_iteration(res);
        if (res.alpha_reached || i >= iters) break;
        if (opts.stop && opts.stop()) break;
        int64_t next = st.theta * 2;
        st.r1 = build_rdr_collection(model, seeds_f, variant, mode, seed, s1, st.theta, next,
                                     std::move(st.r1), opts.workers);
        st.r2 = build_rdr_collection(model, seeds_f, variant, mode, seed, s2, st.theta, next,
                                     std::move(st.r2), opts.workers);
        st.theta = next;
    }
    return res;
}

SelectionResult sandwich(const WorldModel& model, const std::vector<NodeId>& seeds_f, int k,
                         double eps, double delta, RdrMode mode, uint64_t seed, int64_t eval_sims,
                         const NammOptions& opts) {
    double start = now_ms();
    SelectionResult lower = namm(model, seeds_f, BoundVariant::Lower, k, eps, delta, mode,
                                 mix_key(seed, 1), opts);
    SelectionResult upper = namm(model, seeds_f, BoundVariant::Upper, k, eps, delta, mode,
                                 mix_key(seed, 2), opts);

    auto mu_l = estimate_mitigation(model, seeds_f, lower.seeds, Objective::Mu, eval_sims,
                                    mix_key(seed, 3), opts.workers);
    auto mu_u = estimate_mitigation(model, seeds_f, upper.seeds, Objective::Mu, eval_sims,
                                    mix_key(seed, 4), opts.workers);
    auto mu_bar_u = estimate_mitigation(model, seeds_f, upper.seeds, Objective::MuUpper, eval_sims,
                                        mix_key(seed, 5), opts.workers);

    bool pick_upper = mu_u.mean > mu_l.mean;
    SelectionResult res = pick_upper ? upper : lower;
    res.chosen_label = lower.seeds == upper.seeds ? "S^L=S^U" : (pick_upper ? "S^U" : "S^L");
    const MitigationEstimate& picked = pick_upper ? mu_u : mu_l;
    res.mitigation_mean = picked.mean;
    res.mitigation_se = picked.se;
    if (mu_bar_u.mean > 0.0) {
        res.beta = mu_u.mean / mu_bar_u.mean;
        double rel_num = mu_u.mean > 0 ? mu_u.se / mu_u.mean : 0.0;
        double rel_den = mu_bar_u.se / mu_bar_u.mean;
        res.beta_se = res.beta * std::sqrt(rel_num * rel_num + rel_den * rel_den);
    }
    res.total_samples = lower.total_samples + upper.total_samples;
    res.empty_samples = lower.empty_samples + upper.empty_samples;
    res.wall_ms = now_ms() - start;
    return res;
}

std::vector<AnytimeEmission> namm_anytime(const WorldModel& model,
                                          const std::vector<NodeId>& seeds_f, int k, double eps,
                                          double delta, RdrMode mode, uint64_t seed,
                                          const NammOptions& opts) {
    if (seeds_f.empty()) throw std::invalid_argument("fake seed set must be non-empty");
    const NetGraph& g = *model.g;

    BoundParams base = make_bounds(g, seeds_f, k, eps, delta, mode);
    base.delta1 = base.delta2 = delta / 2.0;
    double norm_l = 1.0, norm_u = 1.0;
    double inf_hat = 0.0;
    int64_t inf_sims = 0;
    if (mode == RdrMode::IS) {
        // The two variants share one influence estimate per run.
        auto inf = estimate_inf_f(model, seeds_f, base.eps_prime, base.delta_prime,
                                  mix_key(mix_key(seed, 1), kStreamInf), opts.workers);
        auto inf2 = estimate_inf_f(model, seeds_f, base.eps_prime, base.delta_prime,
                                   mix_key(mix_key(seed, 2), kStreamInf), opts.workers);
        if (!(inf.value > 0.0))
            throw std::runtime_error("misinformation cannot spread: estimated F influence is zero");
        norm_l = inf.value / g.num_nodes();
        norm_u = inf2.value / g.num_nodes();
        inf_hat = inf.value;
        inf_sims = inf.sims + inf2.sims;
    }

    auto make_state = [&](BoundVariant variant, uint64_t vseed, LoopState& st) {
        st.theta = base.n0;
        st.r1 = build_rdr_collection(model, seeds_f, variant, mode, vseed,
                                     mix_key(vseed, kStreamR1, (uint64_t)variant), 0, st.theta, {},
                                     opts.workers);
        st.r2 = build_rdr_collection(model, seeds_f, variant, mode, vseed,
                                     mix_key(vseed, kStreamR2, (uint64_t)variant), 0, st.theta, {},
                                     opts.workers);
    };
    LoopState lower_st, upper_st;
    uint64_t seed_l = mix_key(seed, 1), seed_u = mix_key(seed, 2);
    make_state(BoundVariant::Lower, seed_l, lower_st);
    make_state(BoundVariant::Upper, seed_u, upper_st);

    std::vector<AnytimeEmission> emissions;
    for (int i = 1;; i++) {
        AnytimeEmission em;
        em.samples_per_collection = lower_st.theta;
        auto finish = [&](SelectionResult& out, BoundVariant variant, LoopState& st, double norm) {
            out.variant = variant;
            out.mode = mode;
            out.bounds = base;
            out.inf_f_hat = inf_hat;
            out.inf_f_sims = inf_sims;
            IterationRecord rec = evaluate_round(g, st, k, seeds_f, norm, base, &out.seeds);
            out.iterations.push_back(rec);
            out.alpha = rec.alpha;
            out.alpha_reached = rec.alpha >= kOneMinusInvE - eps;
            out.total_samples = 2 * st.theta;
            out.empty_samples = count_empty(st.r1) + count_empty(st.r2);
        };
        finish(em.lower, BoundVariant::Lower, lower_st, norm_l);
        finish(em.upper, BoundVariant::Upper, upper_st, norm_u);
        emissions.push_back(std::move(em));
        if (i >= base.i_max) break;
        if (opts.stop && opts.stop()) break;
        auto grow = [&](LoopState& st, BoundVariant variant, uint64_t vseed) {
            int64_t next = st.theta * 2;
            st.r1 = build_rdr_collection(model, seeds_f, variant, mode, vseed,
                                         mix_key(vseed, kStreamR1, (uint64_t)variant), st.theta,
                                         next, std::move(st.r1), opts.workers);
            st.r2 = build_rdr_collection(model, seeds_f, variant, mode, vseed,
                                         mix_key(vseed, kStreamR2, (uint64_t)variant), st.theta,
                                         next, std::move(st.r2), opts.workers);
            st.theta = next;
        };
        grow(lower_st, BoundVariant::Lower, seed_l);
        grow(upper_st, BoundVariant::Upper, seed_u);
    }
    return emissions;
}

std::string selection_report(const SelectionResult& res) {
    std::ostringstream os;
    os << "variant=" << (res.variant == BoundVariant::Lower ? "lower" : "upper")
       << " mode=" << (res.mode == RdrMode::IS ? "IS" : "RS") << " k=" << res.bounds.k << '\n';
    os << "seeds:";
    for (NodeId v : res.seeds) os << ' ' << v;
    os << '\n';
    os << "alpha=" << res.alpha << (res.alpha_reached ? " (target reached)" : " (iteration cap)")
       << " samples=" << res.total_samples << " empty=" << res.empty_samples
       << " inf_f=" << res.inf_f_hat << '\n';
    os << "bounds: LB=" << res.bounds.lb << " N_max=" << res.bounds.n_max
       << " N_0=" << res.bounds.n0 << " i_max=" << res.bounds.i_max << '\n';
    for (size_t i = 0; i < res.iterations.size(); i++) {
        const IterationRecord& r = res.iterations[i];
        char line[192];
        std::snprintf(line, sizeof line,
                      "iter %zu: |R1|=%lld |R2|=%lld L1=%.4f L2=%.4f sigma_l=%.4f sigma_u=%.4f "
                      "alpha=%.4f\n",
                      i + 1, (long long)r.size1, (long long)r.size2, r.lambda1, r.lambda2,
                      r.sigma_l, r.sigma_u, r.alpha);
        os << line;
    }
    if (!res.chosen_label.empty())
        os << "sandwich: chose " << res.chosen_label << " mitigation=" << res.mitigation_mean
           << "+-" << res.mitigation_se << " beta=" << res.beta << "+-" << res.beta_se << '\n';
    return os.str();
}

std::string selection_csv_row(const SelectionResult& res) {
    std::ostringstream seeds;
    for (size_t i = 0; i < res.seeds.size(); i++) {
        if (i) seeds << ' ';
        seeds << res.seeds[i];
    }
    char buf[320];
    std::snprintf(buf, sizeof buf, "%s,%s,%d,%.6f,%d,%lld,%lld,%.6f,%.6f,%.1f,%s",
                  res.variant == BoundVariant::Lower ? "lower" : "upper",
                  res.mode == RdrMode::IS ? "IS" : "RS", res.bounds.k, res.alpha,
                  res.alpha_reached ? 1 : 0, (long long)res.total_samples,
                  (long long)res.empty_samples, res.beta, res.beta_se, res.wall_ms,
                  seeds.str().c_str());
    return buf;
}

} // namespace mitig
