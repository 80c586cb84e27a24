#include "mitig/sim.hpp"
#include "mitig/sim_impl.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "mitig/parallel.hpp"

namespace mitig {

MitigationEstimate estimate_mitigation(const WorldModel& model, const std::vector<NodeId>& seeds_f,
                                       const std::vector<NodeId>& seeds_m, Objective objective,
                                       int64_t num_sims, uint64_t seed, int workers) {
    if (num_sims < 1) throw std::invalid_argument("num_sims must be >= 1");
    const NetGraph& g = *model.g;
    std::vector<double> totals(num_sims);
    std::vector<int> c2(num_sims, 0), c1(num_sims, 0);
    parallel_for(
        num_sims,
        [&](int64_t i) {
            World w(model, seed, (uint64_t)i);
            totals[i] = objective_in_world(g, w, seeds_f, seeds_m, objective, &c2[i], &c1[i]);
        },
        workers);

    MitigationEstimate est;
    est.sims = num_sims;
    double sum = 0.0, sq = 0.0;
    for (int64_t i = 0; i < num_sims; i++) {
        sum += totals[i];
        est.reward2_events += c2[i];
        est.reward1_events += c1[i];
    }
    est.mean = sum / num_sims;
    for (int64_t i = 0; i < num_sims; i++) sq += (totals[i] - est.mean) * (totals[i] - est.mean);
    if (num_sims > 1) est.se = std::sqrt(sq / (num_sims - 1) / num_sims);
    return est;
}

namespace {

// |R_F^X| for one fresh world; liveness is flipped on demand, each edge once.
int64_t f_spread_count(const NetGraph& g, const std::vector<NodeId>& seeds_f, uint64_t seed,
                       uint64_t sim) {
    std::vector<uint8_t> seen(g.num_nodes(), 0);
    std::vector<NodeId> stack;
    for (NodeId s : seeds_f)
        if (!seen[s]) {
            seen[s] = 1;
            stack.push_back(s);
        }
    int64_t count = 0;
    Rng rng(seed, sim, 7, 0);
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        for (EdgeId e : g.out_edges(v)) {
            NodeId x = g.edge(e).dst;
            if (seen[x]) continue;
            double p = g.edge(e).p;
            if (p < 1.0 && !rng.bernoulli(p)) continue;
            seen[x] = 1;
            count++;
            stack.push_back(x);
        }
    }
    return count;
}

} // namespace

InfluenceEstimate estimate_inf_f(const WorldModel& model, const std::vector<NodeId>& seeds_f,
                                 double eps, double delta, uint64_t seed, int workers,
                                 int64_t max_sims) {
    if (!(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("eps and delta must lie in (0,1)");
    const NetGraph& g = *model.g;
    const double n = g.num_nodes();

    InfluenceEstimate est;
    bool any_out = false;
    for (NodeId s : seeds_f)
        if (g.out_degree(s) > 0) any_out = true;
    if (!any_out) return est; // INF_F = 0 exactly, no sampling needed

    // Values in [0,1]; empirical Bernstein radius checked on a doubling
    // schedule with confidence split delta_j = delta / (j (j+1)).
    double sum = 0.0, sumsq = 0.0;
    int64_t t = 0;
    int64_t batch = 256;
    std::vector<double> vals;
    for (int check = 1;; check++) {
        int64_t target = std::min(max_sims, t + batch);
        vals.resize(target - t);
        parallel_for(
            target - t,
            [&](int64_t i) {
                vals[i] = f_spread_count(g, seeds_f, seed, (uint64_t)(t + i)) / n;
            },
            workers);
        for (double v : vals) {
            sum += v;
            sumsq += v * v;
        }
        t = target;
        double mean = sum / t;
        double var = t > 1 ? std::max(0.0, (sumsq - sum * mean) / (t - 1)) : 0.25;
        double dj = delta / ((double)check * (check + 1));
        double L = std::log(3.0 / dj);
        double radius = std::sqrt(2.0 * var * L / t) + 3.0 * L / t;
        if (radius <= eps / (1.0 + eps) * mean) {
            est.value = mean * n;
            break;
        }
        if (t >= max_sims) {
            std::fprintf(stderr,
                         "warning: influence estimator hit the %lld-sample cap before convergence\n",
                         (long long)max_sims);
            est.value = mean * n;
            est.hit_sample_cap = true;
            break;
        }
        batch = std::min<int64_t>(batch * 2, 1 << 20);
    }
    est.sims = t;
    if (est.value > n / 2.0) {
        est.exceeded_half_n = true;
        std::fprintf(stderr, "warning: estimated F influence %.1f exceeds n/2 = %.1f\n", est.value,
                     n / 2.0);
    }
    return est;
}

std::string trace_dump(const NetGraph& g, const CascadeTrace& trace) {
    std::ostringstream os;
    auto step = [](Step s) { return s >= kNever ? std::string("inf") : std::to_string(s); };
    for (NodeId v = 0; v < g.num_nodes(); v++) {
        const char* a = trace.adopt[v] == Adopt::F   ? "F"
                        : trace.adopt[v] == Adopt::M ? "M"
                                                     : "-";
        os << "node " << v << " adopt=" << a << " close=" << step(trace.close[v])
           << " tF=" << step(trace.t_f[v]) << " tM=" << step(trace.t_m[v]) << '\n';
    }
    os << "termination " << trace.termination << '\n';
    return os.str();
}

std::string estimate_csv_row(const char* objective, const MitigationEstimate& est) {
    char buf[192];
    std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%lld,%.6f,%.6f", objective, est.mean, est.se,
                  (long long)est.sims, est.reward2_frac(), est.reward1_frac());
    return buf;
}

} // namespace mitig
