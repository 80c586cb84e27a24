// Command-line front end: dataset statistics, seed selection, evaluation, and
// the experiment protocols (curves, sweeps, robustness, sampling benchmarks).

#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mitig/experiment.hpp"
#include "mitig/oracle.hpp"

using namespace mitig;

namespace {

struct CommonArgs {
    std::vector<std::string> overrides;
    std::string config;
    std::string graph;
    std::string outdir;
    std::string methods;
    std::string klist;
    std::string fake_mode;
    std::string fake_seeds;
    std::string mode;
    int fake_count = -1;
    double eps = -1.0;
    double delta = -1.0;
    long long eval_sims = -1;
    long long seed = -1;
    int workers = -1;
    int gen_nodes = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config, "run configuration file (key=value lines)");
    cmd->add_option("--set", args.overrides,
                    "override any config key, e.g. --set meeting_prob=0.25 (repeatable)");
    cmd->add_option("--graph", args.graph, "edge list path (overrides config)");
    cmd->add_option("--out", args.outdir, "output directory");
    cmd->add_option("--methods", args.methods, "comma-separated method list");
    cmd->add_option("--k", args.klist, "comma-separated k values");
    cmd->add_option("--fake-mode", args.fake_mode, "fake seed mode: top|random|explicit");
    cmd->add_option("--fake-count", args.fake_count, "number of fake seeds");
    cmd->add_option("--fake-seeds", args.fake_seeds, "space-separated explicit fake seeds");
    cmd->add_option("--mode", args.mode, "sampling mode: IS|RS");
    cmd->add_option("--eps", args.eps, "approximation epsilon");
    cmd->add_option("--delta", args.delta, "failure probability (default 1/n)");
    cmd->add_option("--eval-sims", args.eval_sims, "Monte Carlo evaluation simulations");
    cmd->add_option("--seed", args.seed, "global random seed");
    cmd->add_option("--workers", args.workers, "worker cap (default MITIG_WORKERS or cores)");
    cmd->add_option("--gen-nodes", args.gen_nodes, "testbed size when no graph is given");
}

RunConfig resolve(const CommonArgs& args) {
    RunConfig cfg = args.config.empty() ? RunConfig{} : RunConfig::from_file(args.config);
    if (!args.overrides.empty()) {
        std::string text = cfg.canonical();
        for (const std::string& kv : args.overrides) text += kv + "\n";
        std::string outdir = cfg.outdir; // canonical() does not carry run-local fields
        int workers = cfg.workers;
        cfg = RunConfig::from_text(text);
        cfg.outdir = outdir;
        cfg.workers = workers;
    }
    if (!args.graph.empty()) cfg.graph_path = args.graph;
    if (!args.outdir.empty()) cfg.outdir = args.outdir;
    if (!args.methods.empty()) {
        cfg.methods.clear();
        std::istringstream is(args.methods);
        std::string tok;
        while (std::getline(is, tok, ',')) cfg.methods.push_back(tok);
    }
    if (!args.klist.empty()) {
        cfg.k_list.clear();
        std::istringstream is(args.klist);
        std::string tok;
        while (std::getline(is, tok, ',')) cfg.k_list.push_back(std::stoi(tok));
    }
    if (!args.fake_mode.empty()) {
        cfg.fake_mode = args.fake_mode == "top"      ? FakeSeedMode::TopInfluential
                        : args.fake_mode == "random" ? FakeSeedMode::Random
                                                     : FakeSeedMode::Explicit;
    }
    if (args.fake_count >= 0) cfg.fake_count = args.fake_count;
    if (!args.fake_seeds.empty()) {
        cfg.fake_mode = FakeSeedMode::Explicit;
        cfg.fake_explicit.clear();
        std::istringstream is(args.fake_seeds);
        int v;
        while (is >> v) cfg.fake_explicit.push_back(v);
    }
    if (!args.mode.empty()) cfg.mode = args.mode == "RS" ? RdrMode::RS : RdrMode::IS;
    if (args.eps > 0) cfg.eps = args.eps;
    if (args.delta > 0) cfg.delta = args.delta;
    if (args.eval_sims > 0) cfg.eval_sims = args.eval_sims;
    if (args.seed >= 0) cfg.seed = (uint64_t)args.seed;
    if (args.workers >= 0) cfg.workers = args.workers;
    if (args.gen_nodes > 0) cfg.gen_nodes = args.gen_nodes;
    return cfg;
}

std::vector<NodeId> parse_ids(const std::string& s) {
    std::vector<NodeId> out;
    std::istringstream is(s);
    int v;
    while (is >> v) out.push_back(v);
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"time-critical misinformation mitigation toolkit"};
    app.require_subcommand(1);

    CommonArgs args;

    auto* stats = app.add_subcommand("load-stats", "load a graph and print its statistics");
    add_common(stats, args);
    bool stats_undirected = false;
    stats->add_flag("--undirected", stats_undirected, "expand to antiparallel edge pairs");

    auto* remap = app.add_subcommand("remap", "densify sparse node ids, writing an id-map sidecar");
    std::string remap_in, remap_out;
    remap->add_option("input", remap_in)->required();
    remap->add_option("output", remap_out)->required();

    auto* gen = app.add_subcommand("gen", "generate the synthetic scale-free testbed");
    add_common(gen, args);
    std::string gen_out = "testbed.txt";
    gen->add_option("--graph-out", gen_out, "edge list destination");

    auto* select = app.add_subcommand("select", "select mitigation seeds with one method");
    add_common(select, args);
    std::string select_method = "namm";
    select->add_option("--method", select_method,
                       "namm|namm-lower|namm-upper|namm-anytime|im-rr|influential|proximity|random");
    double anytime_budget_ms = 0.0;
    select->add_option("--budget-ms", anytime_budget_ms,
                       "wall-clock budget for namm-anytime (0 = run to the iteration cap)");

    auto* evaluate = app.add_subcommand("evaluate", "Monte Carlo mitigation of a given seed set");
    add_common(evaluate, args);
    std::string eval_seeds, eval_objective = "mu";
    evaluate->add_option("--seeds", eval_seeds, "space-separated mitigation seeds")->required();
    evaluate->add_option("--objective", eval_objective, "mu|mu-lower|mu-upper");

    auto* experiment = app.add_subcommand("experiment", "mitigation curves for every method and k");
    add_common(experiment, args);

    auto* sweep = app.add_subcommand("sweep", "re-run selection while varying one model parameter");
    add_common(sweep, args);
    std::string sweep_axis = "meeting_length", sweep_values;
    sweep->add_option("--axis", sweep_axis, "meeting_length|aw_seconds|read_prob");
    sweep->add_option("--values", sweep_values, "comma-separated axis values");

    auto* robust = app.add_subcommand("robustness", "seed-set Jaccard under perturbed parameters");
    add_common(robust, args);

    auto* bench = app.add_subcommand("bench", "IS-vs-RS running time and sample accounting");
    add_common(bench, args);
    std::string bench_alphas;
    bench->add_option("--alphas", bench_alphas, "comma-separated alpha targets");

    auto* verify = app.add_subcommand("oracle-verify", "exact checks on an enumerable instance");
    std::string inst_path, inst_sf = "0", inst_sm;
    verify->add_option("instance", inst_path, "instance file")->required();
    verify->add_option("--fake-seeds", inst_sf, "space-separated fake seeds");
    verify->add_option("--seeds", inst_sm, "space-separated mitigation seeds");

    CLI11_PARSE(app, argc, argv);

    try {
        if (stats->parsed()) {
            RunConfig cfg = resolve(args);
            if (stats_undirected) cfg.directed = false;
            NetGraph g = load_or_generate_graph(cfg);
            std::cout << graph_stats(g, cfg.graph_path.empty() ? "testbed" : cfg.graph_path);
            return 0;
        }
        if (remap->parsed()) {
            auto map = remap_edge_list(remap_in, remap_out);
            save_id_map(map, remap_out + ".idmap");
            std::printf("remapped %zu ids -> %s (+.idmap)\n", map.size(), remap_out.c_str());
            return 0;
        }
        if (gen->parsed()) {
            RunConfig cfg = resolve(args);
            NetGraph g = make_scale_free(cfg.gen_nodes, cfg.gen_attach, cfg.seed);
            save_edge_list(g, gen_out);
            std::cout << graph_stats(g, gen_out);
            return 0;
        }
        if (select->parsed()) {
            RunConfig cfg = resolve(args);
            cfg.methods = {select_method};
            if (cfg.k_list.size() != 1) cfg.k_list = {cfg.k_list.empty() ? 10 : cfg.k_list[0]};
            NetGraph g = load_or_generate_graph(cfg);
            WorldModel model = WorldModel::from_params(g, cfg.params);
            std::vector<NodeId> fake = make_fake_seeds(cfg, g);
            double delta = cfg.delta > 0 ? cfg.delta : 1.0 / g.num_nodes();
            NammOptions opts;
            opts.workers = cfg.workers;
            if (select_method == "namm") {
                SelectionResult res = sandwich(model, fake, cfg.k_list[0], cfg.eps, delta, cfg.mode,
                                               cfg.seed, cfg.eval_sims, opts);
                std::cout << selection_report(res);
            } else if (select_method == "namm-anytime") {
                auto begin = std::chrono::steady_clock::now();
                if (anytime_budget_ms > 0)
                    opts.stop = [&]() {
                        return std::chrono::duration<double, std::milli>(
                                   std::chrono::steady_clock::now() - begin)
                                   .count() >= anytime_budget_ms;
                    };
                auto emissions = namm_anytime(model, fake, cfg.k_list[0], cfg.eps, delta, cfg.mode,
                                              cfg.seed, opts);
                for (size_t i = 0; i < emissions.size(); i++) {
                    std::cout << "emission " << i + 1 << " ("
                              << emissions[i].samples_per_collection << " samples/collection)\n";
                    std::cout << selection_report(emissions[i].lower);
                    std::cout << selection_report(emissions[i].upper);
                }
            } else if (select_method == "namm-lower" || select_method == "namm-upper") {
                SelectionResult res = namm(model, fake,
                                           select_method == "namm-lower" ? BoundVariant::Lower
                                                                         : BoundVariant::Upper,
                                           cfg.k_list[0], cfg.eps, delta, cfg.mode, cfg.seed, opts);
                std::cout << selection_report(res);
            } else {
                BaselineSpec spec;
                spec.k = cfg.k_list[0];
                spec.budget = cfg.baseline_budget;
                spec.eps = cfg.eps;
                spec.delta = delta;
                spec.seed = cfg.seed;
                spec.workers = cfg.workers;
                spec.method = select_method == "im-rr"         ? BaselineMethod::ImRr
                              : select_method == "influential" ? BaselineMethod::Influential
                              : select_method == "proximity"   ? BaselineMethod::Proximity
                                                               : BaselineMethod::Random;
                std::cout << "seeds:";
                for (NodeId v : select_baseline(g, fake, spec)) std::cout << ' ' << v;
                std::cout << '\n';
            }
            return 0;
        }
        if (evaluate->parsed()) {
            RunConfig cfg = resolve(args);
            NetGraph g = load_or_generate_graph(cfg);
            WorldModel model = WorldModel::from_params(g, cfg.params);
            std::vector<NodeId> fake = make_fake_seeds(cfg, g);
            Objective obj = eval_objective == "mu-lower"   ? Objective::MuLower
                            : eval_objective == "mu-upper" ? Objective::MuUpper
                                                           : Objective::Mu;
            auto est = estimate_mitigation(model, fake, parse_ids(eval_seeds), obj, cfg.eval_sims,
                                           cfg.seed, cfg.workers);
            std::cout << "objective,mean,se,sims,reward2_frac,reward1_frac\n"
                      << estimate_csv_row(eval_objective.c_str(), est) << '\n';
            return 0;
        }
        if (experiment->parsed()) {
            RunConfig cfg = resolve(args);
            ExperimentOutput out = run_experiment(cfg);
            std::cout << ExperimentRow::csv_header() << '\n';
            for (const ExperimentRow& row : out.rows) std::cout << row.csv() << '\n';
            return 0;
        }
        if (sweep->parsed()) {
            RunConfig cfg = resolve(args);
            SweepAxis axis = sweep_axis == "aw_seconds"  ? SweepAxis::AwSeconds
                             : sweep_axis == "read_prob" ? SweepAxis::ReadProb
                                                         : SweepAxis::MeetingLength;
            std::vector<double> values;
            if (!sweep_values.empty()) {
                std::istringstream is(sweep_values);
                std::string tok;
                while (std::getline(is, tok, ',')) values.push_back(std::stod(tok));
            } else if (axis == SweepAxis::MeetingLength) {
                values = {6, 5, 4, 3, 2, 1};
            } else if (axis == SweepAxis::AwSeconds) {
                values = {30, 60, 120, 240, 480};
            } else {
                values = {0.2, 0.4, 0.6, 0.8, 1.0};
            }
            auto rows = sweep_parameter(cfg, axis, values, cfg.methods);
            std::cout << "method,value,mitigation,se,delta_vs_base,delta_se,base\n";
            for (const SweepRow& r : rows)
                std::printf("%s,%.4g,%.4f,%.4f,%+.4f,%.4f,%d\n", r.method.c_str(), r.axis_value,
                            r.mitigation, r.se, r.delta_vs_base, r.delta_se, r.is_base ? 1 : 0);
            return 0;
        }
        if (robust->parsed()) {
            RunConfig cfg = resolve(args);
            auto rows = robustness_jaccard(cfg);
            std::cout << "perturbation,k,jaccard\n";
            for (const JaccardRow& r : rows)
                std::printf("%s,%d,%.4f\n", r.perturbation.c_str(), r.k, r.jaccard);
            return 0;
        }
        if (bench->parsed()) {
            RunConfig cfg = resolve(args);
            std::vector<double> alphas;
            if (!bench_alphas.empty()) {
                std::istringstream is(bench_alphas);
                std::string tok;
                while (std::getline(is, tok, ',')) alphas.push_back(std::stod(tok));
            }
            auto rows = bench_sampling(cfg, {RdrMode::IS, RdrMode::RS}, alphas);
            std::cout << "mode,k,alpha_target,alpha,wall_ms,samples,empty_samples,empty_rate\n";
            for (const BenchRow& r : rows)
                std::printf("%s,%d,%.4f,%.4f,%.1f,%lld,%lld,%.4f\n", r.mode.c_str(), r.k,
                            r.alpha_target, r.alpha, r.wall_ms, (long long)r.samples,
                            (long long)r.empty_samples, r.empty_rate);
            return 0;
        }
        if (verify->parsed()) {
            EnumerableInstance inst = load_instance(inst_path);
            std::vector<NodeId> sf = parse_ids(inst_sf);
            std::vector<NodeId> sm = parse_ids(inst_sm);
            if (sm.empty())
                for (NodeId v = 0; v < inst.g().num_nodes() && (int)sm.size() < 2; v++)
                    if (std::find(sf.begin(), sf.end(), v) == sf.end()) sm.push_back(v);
            std::printf("worlds: %lld\n", (long long)inst.world_count());
            double lo = enumerate_exact(inst, sf, Objective::MuLower, sm);
            double mu = enumerate_exact(inst, sf, Objective::Mu, sm);
            double up = enumerate_exact(inst, sf, Objective::MuUpper, sm);
            double rdr_lo = exact_rdr_expectation(inst, sf, BoundVariant::Lower, sm);
            double rdr_up = exact_rdr_expectation(inst, sf, BoundVariant::Upper, sm);
            std::printf("mu_lower=%.12f mu=%.12f mu_upper=%.12f\n", lo, mu, up);
            std::printf("rdr_expectation lower=%.12f upper=%.12f\n", rdr_lo, rdr_up);
            std::printf("reward equivalence: lower %s, upper %s\n",
                        std::abs(rdr_lo - lo) <= 1e-9 ? "OK" : "MISMATCH",
                        std::abs(rdr_up - up) <= 1e-9 ? "OK" : "MISMATCH");
            std::printf("bound order (lower <= mu <= upper): %s\n",
                        lo <= mu + 1e-9 && mu <= up + 1e-9 ? "OK" : "VIOLATED");
            return 0;
        }
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }
    return 0;
}
