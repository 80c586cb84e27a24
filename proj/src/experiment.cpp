#include "mitig/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <chrono>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mitig {

NetGraph make_scale_free(NodeId n, int attach, uint64_t seed) {
    if (n < attach + 1) throw std::invalid_argument("testbed needs more nodes than attachments");
    Rng rng(mix_key(seed, 77));
    std::vector<Edge> edges;
    std::vector<NodeId> stubs; // degree-proportional sampling pool
    for (NodeId v = 0; v <= attach; v++)
        for (NodeId u = 0; u <= attach; u++)
            if (u < v) {
                edges.push_back({u, v, 1.0});
                stubs.push_back(u);
                stubs.push_back(v);
            }
    for (NodeId v = attach + 1; v < n; v++) {
        std::set<NodeId> targets;
        while ((int)targets.size() < attach) {
            NodeId t = stubs[rng.below(stubs.size())];
            if (t != v) targets.insert(t);
        }
        for (NodeId t : targets) {
            edges.push_back({v, t, 1.0});
            stubs.push_back(v);
            stubs.push_back(t);
        }
    }
    // Antiparallel expansion with inverse-indegree probabilities.
    std::vector<Edge> expanded;
    expanded.reserve(edges.size() * 2);
    for (const Edge& e : edges) {
        expanded.push_back({e.src, e.dst, 1.0});
        expanded.push_back({e.dst, e.src, 1.0});
    }
    std::vector<int> indeg(n, 0);
    for (const Edge& e : expanded) indeg[e.dst]++;
    for (Edge& e : expanded) e.p = 1.0 / indeg[e.dst];
    return NetGraph(n, std::move(expanded));
}

// ---------------------------------------------------------------------------
// Config

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, sep))
        if (!tok.empty()) out.push_back(tok);
    return out;
}

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace

RunConfig RunConfig::from_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        lineno++;
        size_t pos = line.find_first_not_of(" \t\r");
        if (pos == std::string::npos || line[pos] == '#') continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key=value");
        std::string key = line.substr(pos, eq - pos);
        std::string val = line.substr(eq + 1);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        while (!val.empty() && (val.back() == ' ' || val.back() == '\t' || val.back() == '\r'))
            val.pop_back();
        while (!val.empty() && (val.front() == ' ' || val.front() == '\t')) val.erase(0, 1);

        if (key == "dataset") cfg.dataset = val;
        else if (key == "graph") cfg.graph_path = val;
        else if (key == "gen_nodes") cfg.gen_nodes = std::stoi(val);
        else if (key == "gen_attach") cfg.gen_attach = std::stoi(val);
        else if (key == "directed") cfg.directed = val == "1" || val == "true";
        else if (key == "prob_mode") {
            if (val == "explicit") cfg.prob_mode = ProbMode::Explicit;
            else if (val == "inverse-indegree") cfg.prob_mode = ProbMode::InverseIndegree;
            else if (val == "fixed") cfg.prob_mode = ProbMode::Fixed;
            else throw std::runtime_error("unknown prob_mode " + val);
        } else if (key == "fixed_p") cfg.fixed_p = std::stod(val);
        else if (key == "meeting_prob") cfg.params.meeting_global = std::stod(val);
        else if (key == "meeting_mode") {
            if (val == "global") cfg.params.meeting_mode = MeetingMode::GlobalConstant;
            else if (val == "ego") cfg.params.meeting_mode = MeetingMode::EgoCentric;
            else throw std::runtime_error("unknown meeting_mode " + val);
        } else if (key == "ego_c") cfg.params.ego_c = std::stod(val);
        else if (key == "meeting_prob_f") cfg.params.meeting_prob_f = std::stod(val);
        else if (key == "aw_mode") {
            if (val == "learned-single") cfg.params.aw_mode = AwMode::LearnedSingle;
            else if (val == "mixture-raw") cfg.params.aw_mode = AwMode::MixtureRaw;
            else if (val == "constant") cfg.params.aw_mode = AwMode::Constant;
            else if (val == "uniform") cfg.params.aw_mode = AwMode::Uniform;
            else throw std::runtime_error("unknown aw_mode " + val);
        } else if (key == "aw_zero_prob") cfg.params.aw_zero_probability = std::stod(val);
        else if (key == "aw_seconds") cfg.params.aw_rate_seconds = 1.0 / std::stod(val);
        else if (key == "aw_constant_hops") cfg.params.aw_constant_hops = std::stoll(val);
        else if (key == "aw_uniform_max") cfg.params.aw_uniform_max = std::stoll(val);
        else if (key == "base_hop_seconds") cfg.params.base_hop_seconds = std::stod(val);
        else if (key == "fake_mode") {
            if (val == "top") cfg.fake_mode = FakeSeedMode::TopInfluential;
            else if (val == "random") cfg.fake_mode = FakeSeedMode::Random;
            else if (val == "explicit") cfg.fake_mode = FakeSeedMode::Explicit;
            else throw std::runtime_error("unknown fake_mode " + val);
        } else if (key == "fake_count") cfg.fake_count = std::stoi(val);
        else if (key == "fake_seeds") {
            cfg.fake_explicit.clear();
            for (const std::string& tok : split(val, ' ')) cfg.fake_explicit.push_back(std::stoi(tok));
        } else if (key == "methods") cfg.methods = split(val, ',');
        else if (key == "k") {
            cfg.k_list.clear();
            for (const std::string& tok : split(val, ',')) cfg.k_list.push_back(std::stoi(tok));
        } else if (key == "eps") cfg.eps = std::stod(val);
        else if (key == "delta") cfg.delta = std::stod(val);
        else if (key == "mode") {
            if (val == "IS") cfg.mode = RdrMode::IS;
            else if (val == "RS") cfg.mode = RdrMode::RS;
            else throw std::runtime_error("unknown mode " + val);
        } else if (key == "eval_sims") cfg.eval_sims = std::stoll(val);
        else if (key == "baseline_budget") cfg.baseline_budget = std::stoll(val);
        else if (key == "seed") cfg.seed = std::stoull(val);
        else if (key == "outdir") cfg.outdir = val;
        else if (key == "workers") cfg.workers = std::stoi(val);
        else throw std::runtime_error("unknown config key " + key);
    }
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config: " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return from_text(buf.str());
}

std::string RunConfig::canonical() const {
    std::ostringstream os;
    char buf[256];
    auto put = [&](const char* key, const std::string& val) { os << key << '=' << val << '\n'; };
    auto putf = [&](const char* key, double v) {
        std::snprintf(buf, sizeof buf, "%.12g", v);
        put(key, buf);
    };
    put("dataset", dataset);
    put("graph", graph_path);
    put("gen_nodes", std::to_string(gen_nodes));
    put("gen_attach", std::to_string(gen_attach));
    put("directed", directed ? "1" : "0");
    put("prob_mode", prob_mode == ProbMode::Explicit          ? "explicit"
                     : prob_mode == ProbMode::InverseIndegree ? "inverse-indegree"
                                                              : "fixed");
    putf("fixed_p", fixed_p);
    putf("meeting_prob", params.meeting_global);
    put("meeting_mode", params.meeting_mode == MeetingMode::EgoCentric ? "ego" : "global");
    putf("ego_c", params.ego_c);
    putf("meeting_prob_f", params.meeting_prob_f);
    put("aw_mode", params.aw_mode == AwMode::LearnedSingle ? "learned-single"
                   : params.aw_mode == AwMode::MixtureRaw  ? "mixture-raw"
                   : params.aw_mode == AwMode::Constant    ? "constant"
                                                           : "uniform");
    putf("aw_zero_prob", params.aw_zero_probability);
    putf("aw_seconds", 1.0 / params.aw_rate_seconds);
    put("aw_constant_hops", std::to_string(params.aw_constant_hops));
    put("aw_uniform_max", std::to_string(params.aw_uniform_max));
    putf("base_hop_seconds", params.base_hop_seconds);
    put("fake_mode", fake_mode == FakeSeedMode::TopInfluential ? "top"
                     : fake_mode == FakeSeedMode::Random       ? "random"
                                                               : "explicit");
    put("fake_count", std::to_string(fake_count));
    {
        std::ostringstream fs;
        for (size_t i = 0; i < fake_explicit.size(); i++) {
            if (i) fs << ' ';
            fs << fake_explicit[i];
        }
        put("fake_seeds", fs.str());
    }
    {
        std::ostringstream ms;
        for (size_t i = 0; i < methods.size(); i++) {
            if (i) ms << ',';
            ms << methods[i];
        }
        put("methods", ms.str());
    }
    {
        std::ostringstream ks;
        for (size_t i = 0; i < k_list.size(); i++) {
            if (i) ks << ',';
            ks << k_list[i];
        }
        put("k", ks.str());
    }
    putf("eps", eps);
    putf("delta", delta);
    put("mode", mode == RdrMode::IS ? "IS" : "RS");
    put("eval_sims", std::to_string(eval_sims));
    put("baseline_budget", std::to_string(baseline_budget));
    put("seed", std::to_string(seed));
    return os.str();
}

uint64_t RunConfig::hash() const { return fnv1a(canonical()); }

// ---------------------------------------------------------------------------
// Rows and harness

// Wall-clock time stays out of the replayable CSV; it lands in the timing
// sidecar instead so identical configs produce byte-identical outputs.
std::string ExperimentRow::csv_header() {
    return "dataset,method,k,mitigation,se,reward2_frac,reward1_frac,beta,beta_se,alpha,"
           "samples,config_hash,error";
}

std::string ExperimentRow::csv() const {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%s,%s,%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%lld,%016llx,%s",
                  dataset.c_str(), method.c_str(), k, mitigation, se, reward2_frac, reward1_frac,
                  beta, beta_se, alpha, (long long)samples, (unsigned long long)config_hash,
                  error.c_str());
    return buf;
}

NetGraph load_or_generate_graph(const RunConfig& cfg) {
    if (!cfg.graph_path.empty())
        return load_edge_list(cfg.graph_path, cfg.directed, cfg.prob_mode, cfg.fixed_p);
    NetGraph g = make_scale_free(cfg.gen_nodes, cfg.gen_attach, cfg.seed);
    if (cfg.prob_mode == ProbMode::Fixed) {
        std::vector<Edge> edges = g.edges();
        for (Edge& e : edges) e.p = cfg.fixed_p;
        return NetGraph(g.num_nodes(), std::move(edges));
    }
    return g;
}

std::vector<NodeId> make_fake_seeds(const RunConfig& cfg, const NetGraph& g) {
    switch (cfg.fake_mode) {
    case FakeSeedMode::Explicit:
        return cfg.fake_explicit;
    case FakeSeedMode::Random: {
        Rng rng(mix_key(cfg.seed, 201));
        std::vector<NodeId> pool(g.num_nodes());
        for (NodeId v = 0; v < g.num_nodes(); v++) pool[v] = v;
        std::vector<NodeId> out;
        for (int i = 0; i < cfg.fake_count && !pool.empty(); i++) {
            size_t j = (size_t)rng.below(pool.size());
            out.push_back(pool[j]);
            pool[j] = pool.back();
            pool.pop_back();
        }
        std::sort(out.begin(), out.end());
        return out;
    }
    case FakeSeedMode::TopInfluential: {
        auto order =
            rank_by_rr_frequency(g, cfg.baseline_budget, mix_key(cfg.seed, 202), cfg.workers);
        order.resize(std::min<size_t>(order.size(), cfg.fake_count));
        std::sort(order.begin(), order.end());
        return order;
    }
    }
    throw std::logic_error("unknown fake seed mode");
}

double jaccard(const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
    std::set<NodeId> sa(a.begin(), a.end()), su(a.begin(), a.end());
    int inter = 0;
    for (NodeId v : b) {
        if (sa.count(v)) inter++;
        su.insert(v);
    }
    return su.empty() ? 1.0 : (double)inter / su.size();
}

void write_file(const std::string& path, const std::string& content) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << content;
}

namespace {

struct MethodRun {
    std::vector<NodeId> seeds;
    double alpha = 0.0;
    double beta = 0.0, beta_se = 0.0;
    int64_t samples = 0;
};

MethodRun run_method(const std::string& method, const RunConfig& cfg, const WorldModel& model,
                     const std::vector<NodeId>& fake, int k, uint64_t seed) {
    const NetGraph& g = *model.g;
    double delta = cfg.delta > 0 ? cfg.delta : 1.0 / g.num_nodes();
    MethodRun out;
    NammOptions opts;
    opts.workers = cfg.workers;
    if (method == "namm") {
        SelectionResult res =
            sandwich(model, fake, k, cfg.eps, delta, cfg.mode, seed, cfg.eval_sims, opts);
        out.seeds = res.seeds;
        out.alpha = res.alpha;
        out.beta = res.beta;
        out.beta_se = res.beta_se;
        out.samples = res.total_samples;
    } else if (method == "namm-lower" || method == "namm-upper") {
        SelectionResult res =
            namm(model, fake, method == "namm-lower" ? BoundVariant::Lower : BoundVariant::Upper,
                 k, cfg.eps, delta, cfg.mode, seed, opts);
        out.seeds = res.seeds;
        out.alpha = res.alpha;
        out.samples = res.total_samples;
    } else {
        BaselineSpec spec;
        spec.k = k;
        spec.budget = cfg.baseline_budget;
        spec.eps = cfg.eps;
        spec.delta = delta;
        spec.seed = seed;
        spec.workers = cfg.workers;
        if (method == "im-rr") spec.method = BaselineMethod::ImRr;
        else if (method == "influential") spec.method = BaselineMethod::Influential;
        else if (method == "proximity") spec.method = BaselineMethod::Proximity;
        else if (method == "random") spec.method = BaselineMethod::Random;
        else throw std::runtime_error("unknown method " + method);
        out.seeds = select_baseline(g, fake, spec);
    }
    return out;
}

} // namespace

ExperimentOutput run_experiment(const RunConfig& cfg) {
    NetGraph g = load_or_generate_graph(cfg);
    WorldModel model = WorldModel::from_params(g, cfg.params);
    ExperimentOutput out;
    out.fake_seeds = make_fake_seeds(cfg, g);
    uint64_t chash = cfg.hash();

    std::ostringstream csv;
    csv << ExperimentRow::csv_header() << '\n';
    for (const std::string& method : cfg.methods) {
        for (int k : cfg.k_list) {
            ExperimentRow row;
            row.dataset = cfg.dataset;
            row.method = method;
            row.k = k;
            row.config_hash = chash;
            auto t0 = std::chrono::steady_clock::now();
            try {
                uint64_t mseed = mix_key(cfg.seed, fnv1a(method), (uint64_t)k);
                MethodRun run = run_method(method, cfg, model, out.fake_seeds, k, mseed);
                MitigationEstimate est =
                    estimate_mitigation(model, out.fake_seeds, run.seeds, Objective::Mu,
                                        cfg.eval_sims, mix_key(cfg.seed, 301, (uint64_t)k),
                                        cfg.workers);
                row.mitigation = est.mean;
                row.se = est.se;
                row.reward2_frac = est.reward2_frac();
                row.reward1_frac = est.reward1_frac();
                row.alpha = run.alpha;
                row.beta = run.beta;
                row.beta_se = run.beta_se;
                row.samples = run.samples;
                out.selections[method + "/" + std::to_string(k)] = run.seeds;
            } catch (const std::exception& ex) {
                row.error = ex.what();
                std::fprintf(stderr, "row %s k=%d failed: %s\n", method.c_str(), k, ex.what());
            }
            row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                                    t0)
                              .count();
            out.rows.push_back(row);
            csv << out.rows.back().csv() << '\n';
        }
    }

    if (!cfg.outdir.empty()) {
        write_file(cfg.outdir + "/experiment.csv", csv.str());
        std::ostringstream timing;
        timing << "dataset,method,k,wall_ms\n";
        for (const ExperimentRow& r : out.rows) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%s,%s,%d,%.1f\n", r.dataset.c_str(), r.method.c_str(),
                          r.k, r.wall_ms);
            timing << buf;
        }
        write_file(cfg.outdir + "/timings.csv", timing.str());
        // Plot-ready table: one k column, one mitigation column per method.
        std::ostringstream plot;
        plot << "k";
        for (const std::string& m : cfg.methods) plot << ',' << m;
        plot << '\n';
        for (int k : cfg.k_list) {
            plot << k;
            for (const std::string& m : cfg.methods) {
                double val = 0.0;
                for (const ExperimentRow& r : out.rows)
                    if (r.method == m && r.k == k) val = r.mitigation;
                char buf[32];
                std::snprintf(buf, sizeof buf, ",%.6f", val);
                plot << buf;
            }
            plot << '\n';
        }
        write_file(cfg.outdir + "/plot_mitigation.csv", plot.str());
        write_file(cfg.outdir + "/config.txt", cfg.canonical());
    }
    return out;
}

std::vector<SweepRow> sweep_parameter(const RunConfig& cfg, SweepAxis axis,
                                      const std::vector<double>& values,
                                      const std::vector<std::string>& methods) {
    NetGraph g = load_or_generate_graph(cfg);
    int k = cfg.k_list.empty() ? 10 : cfg.k_list.front();
    std::vector<SweepRow> rows;

    double base_value = axis == SweepAxis::MeetingLength ? 1.0 / cfg.params.meeting_global
                        : axis == SweepAxis::AwSeconds   ? 1.0 / cfg.params.aw_rate_seconds
                                                         : 1.0 - cfg.params.aw_zero_probability;
    for (const std::string& method : methods) {
        double base_mit = 0.0, base_se = 0.0;
        for (double value : values) {
            RunConfig sub = cfg;
            if (axis == SweepAxis::MeetingLength) sub.params.meeting_global = 1.0 / value;
            else if (axis == SweepAxis::AwSeconds) sub.params.aw_rate_seconds = 1.0 / value;
            else sub.params.aw_zero_probability = 1.0 - value;

            WorldModel model = WorldModel::from_params(g, sub.params);
            std::vector<NodeId> fake = make_fake_seeds(sub, g);
            // Seeds keyed by (method, k) only, so the base row replays the
            // unswept configuration exactly.
            uint64_t mseed = mix_key(cfg.seed, fnv1a(method), (uint64_t)k);
            MethodRun run = run_method(method, sub, model, fake, k, mseed);
            MitigationEstimate est =
                estimate_mitigation(model, fake, run.seeds, Objective::Mu, cfg.eval_sims,
                                    mix_key(cfg.seed, 301, (uint64_t)k), cfg.workers);
            SweepRow row;
            row.method = method;
            row.axis_value = value;
            row.mitigation = est.mean;
            row.se = est.se;
            row.is_base = value == base_value;
            if (row.is_base) {
                base_mit = est.mean;
                base_se = est.se;
            }
            rows.push_back(row);
        }
        for (SweepRow& row : rows)
            if (row.method == method && !row.is_base) {
                row.delta_vs_base = row.mitigation - base_mit;
                row.delta_se = std::sqrt(row.se * row.se + base_se * base_se);
            }
    }
    return rows;
}

std::vector<JaccardRow> robustness_jaccard(const RunConfig& cfg,
                                           const std::vector<std::string>& perturbations) {
    NetGraph g = load_or_generate_graph(cfg);
    std::vector<NodeId> fake;
    {
        WorldModel model = WorldModel::from_params(g, cfg.params);
        fake = make_fake_seeds(cfg, g);
    }
    auto select_under = [&](const ModelParams& params, int k) {
        WorldModel model = WorldModel::from_params(g, params);
        uint64_t mseed = mix_key(cfg.seed, fnv1a("namm-lower"), (uint64_t)k);
        NammOptions opts;
        opts.workers = cfg.workers;
        double delta = cfg.delta > 0 ? cfg.delta : 1.0 / g.num_nodes();
        SelectionResult res =
            namm(model, fake, BoundVariant::Lower, k, cfg.eps, delta, cfg.mode, mseed, opts);
        std::vector<NodeId> s = res.seeds;
        std::sort(s.begin(), s.end());
        return s;
    };

    std::vector<JaccardRow> rows;
    for (int k : cfg.k_list) {
        std::vector<NodeId> truth = select_under(cfg.params, k);
        for (const std::string& pert : perturbations) {
            ModelParams p = cfg.params;
            if (pert == "CIC") {
                p.meeting_global = 1.0;       // all meeting lengths 1
                p.aw_zero_probability = 1.0;  // all window lengths 0
            } else {
                double sigma = pert == "P5" ? 0.05 : 0.10;
                Rng rng(mix_key(cfg.seed, fnv1a(pert), (uint64_t)k));
                auto gauss = [&]() {
                    double u1 = std::max(rng.u01(), 1e-12), u2 = rng.u01();
                    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
                };
                auto jitter = [&](double v, double lo, double hi) {
                    return std::clamp(v * (1.0 + sigma * gauss()), lo, hi);
                };
                p.meeting_global = jitter(p.meeting_global, 1e-6, 1.0);
                p.aw_rate_seconds = jitter(p.aw_rate_seconds, 1e-6, 1.0);
                p.aw_zero_probability = jitter(p.aw_zero_probability, 0.0, 1.0);
                p.base_hop_seconds = jitter(p.base_hop_seconds, 1.0, 1e9);
            }
            JaccardRow row;
            row.perturbation = pert;
            row.k = k;
            row.jaccard = jaccard(truth, select_under(p, k));
            rows.push_back(row);
        }
    }
    return rows;
}

std::vector<BenchRow> bench_sampling(const RunConfig& cfg, const std::vector<RdrMode>& modes,
                                     const std::vector<double>& alpha_targets) {
    NetGraph g = load_or_generate_graph(cfg);
    WorldModel model = WorldModel::from_params(g, cfg.params);
    std::vector<NodeId> fake = make_fake_seeds(cfg, g);
    double delta = cfg.delta > 0 ? cfg.delta : 1.0 / g.num_nodes();

    std::vector<BenchRow> rows;
    std::vector<double> targets = alpha_targets;
    if (targets.empty()) targets.push_back(-1.0); // default 1 - 1/e - eps
    for (RdrMode mode : modes) {
        for (int k : cfg.k_list) {
            for (double target : targets) {
                NammOptions opts;
                opts.workers = cfg.workers;
                opts.alpha_target = target;
                uint64_t mseed = mix_key(cfg.seed, fnv1a("bench"), (uint64_t)k);
                SelectionResult res = namm(model, fake, BoundVariant::Lower, k, cfg.eps, delta,
                                           mode, mseed, opts);
                BenchRow row;
                row.mode = mode == RdrMode::IS ? "IS" : "RS";
                row.k = k;
                row.alpha_target = target < 0 ? 1.0 - 1.0 / std::exp(1.0) - cfg.eps : target;
                row.alpha = res.alpha;
                row.wall_ms = res.wall_ms;
                row.samples = res.total_samples;
                row.empty_samples = res.empty_samples;
                row.empty_rate = res.total_samples ? (double)res.empty_samples / res.total_samples
                                                   : 0.0;
                rows.push_back(row);
            }
        }
    }
    return rows;
}

} // namespace mitig
