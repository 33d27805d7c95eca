#include "covertime/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "covertime/parallel.hpp"
#include "covertime/spectral.hpp"
#include "covertime/structure.hpp"

namespace covertime {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_number(const std::string& text, const std::string& key) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        throw UsageError("invalid value for " + key + ": " + text);
    }
    if (used != text.size() || !std::isfinite(value)) throw UsageError("invalid value for " + key + ": " + text);
    return value;
}

std::uint64_t parse_count(const std::string& text, const std::string& key) {
    const double v = parse_number(text, key);
    if (v < 0 || v != std::floor(v) || v > 1e18) throw UsageError("invalid value for " + key + ": " + text);
    return static_cast<std::uint64_t>(v);
}

bool parse_bool(const std::string& text, const std::string& key) {
    if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
    if (text == "0" || text == "false" || text == "no" || text == "off") return false;
    throw UsageError("invalid value for " + key + ": " + text);
}

std::uint64_t kind_key(WalkKind kind) { return static_cast<std::uint64_t>(kind) + 1; }

void require_single(const std::vector<std::uint32_t>& values, const char* key, const char* command) {
    if (values.size() != 1) throw UsageError(std::string(command) + " takes a single " + key + " value");
}

std::vector<Vertex> red_vertices(const Multigraph& g, const Trajectory& traj) {
    std::vector<char> mark(g.vertex_count(), 0);
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        if (traj.edge_uses[e] != 0) continue;
        auto [u, v] = g.endpoints(e);
        mark[u] = mark[v] = 1;
    }
    std::vector<Vertex> out;
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        if (mark[v]) out.push_back(v);
    }
    return out;
}

}  // namespace

ConfigMap read_config(std::istream& in) {
    ConfigMap out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError("config line " + std::to_string(number) + ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        std::ranges::replace(key, '_', '-');
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

std::vector<std::uint32_t> parse_count_list(const std::string& text, const std::string& key) {
    std::vector<std::uint32_t> out;
    for (const auto& item : split(text, ',')) {
        const std::uint64_t v = parse_count(item, key);
        if (v > 0xffffffffULL) throw UsageError("value too large for " + key + ": " + item);
        out.push_back(static_cast<std::uint32_t>(v));
    }
    if (out.empty()) throw UsageError("empty list for " + key);
    return out;
}

std::vector<double> parse_checkpoints(const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split(text, ',')) {
        const double v = parse_number(item, "checkpoints");
        if (!(v > 0.0) || (v > 1.0 && v != std::floor(v))) throw UsageError("invalid checkpoint: " + item);
        out.push_back(v);
    }
    if (out.empty()) throw UsageError("empty list for checkpoints");
    return out;
}

std::vector<WalkKind> parse_kind_list(const std::string& text) {
    std::vector<WalkKind> out;
    for (const auto& item : split(text, ',')) {
        auto kind = parse_walk_kind(item);
        if (!kind) throw UsageError("invalid value for kind: " + item);
        out.push_back(*kind);
    }
    if (out.empty()) throw UsageError("empty list for kind");
    return out;
}

void apply_config(ExperimentPlan& plan, const ConfigMap& config) {
    for (const auto& [key, value] : config) {
        if (key == "command") plan.command = value;
        else if (key == "n") plan.n = parse_count_list(value, key);
        else if (key == "d") plan.d = parse_count_list(value, key);
        else if (key == "kind") plan.kinds = parse_kind_list(value);
        else if (key == "trials") plan.trials = parse_count(value, key);
        else if (key == "seed") plan.seed = parse_count(value, key);
        else if (key == "checkpoints") plan.checkpoints = parse_checkpoints(value);
        else if (key == "out") plan.out = value;
        else if (key == "summary") plan.summary = value;
        else if (key == "threads") plan.threads = static_cast<unsigned>(parse_count(value, key));
        else if (key == "quick") plan.quick = parse_bool(value, key);
        else if (key == "resample-disconnected") plan.resample_disconnected = parse_bool(value, key);
        else if (key == "emit-plot-script") plan.emit_plot_script = parse_bool(value, key);
        else if (key == "decimation") plan.decimation = static_cast<std::uint32_t>(parse_count(value, key));
        else if (key == "sets") plan.set_sizes = parse_count_list(value, key);
        else if (key == "null") plan.null_model = parse_bool(value, key);
        else throw UsageError("unknown config key: " + key);
    }
}

void validate_plan(const ExperimentPlan& plan) {
    if (plan.trials < 1) throw UsageError("trials must be >= 1");
    if (plan.decimation < 1) throw UsageError("decimation must be >= 1");
    for (std::uint32_t n : plan.n) {
        if (n < 2) throw UsageError("n must be >= 2");
        for (std::uint32_t d : plan.d) {
            if (d < 1) throw UsageError("d must be >= 1");
            if ((static_cast<std::uint64_t>(n) * d) % 2 != 0) throw UsageError("d*n must be even");
        }
    }
    for (std::uint32_t k : plan.set_sizes) {
        if (k < 1) throw UsageError("set sizes must be >= 1");
    }
    for (double c : plan.checkpoints) {
        if (!(c > 0.0) || (c > 1.0 && c != std::floor(c))) throw UsageError("invalid checkpoint");
    }
}

std::vector<std::uint32_t> checkpoint_times(const std::vector<double>& checkpoints, std::uint64_t edges) {
    std::vector<std::uint32_t> out;
    for (double c : checkpoints) {
        if (c <= 1.0) {
            out.push_back(static_cast<std::uint32_t>(std::llround((1.0 - c) * static_cast<double>(edges))));
        } else {
            if (c > static_cast<double>(edges)) throw UsageError("checkpoint t exceeds the edge count");
            out.push_back(static_cast<std::uint32_t>(c));
        }
    }
    std::ranges::sort(out);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

SampledGraph plan_graph(const ExperimentPlan& plan, std::uint32_t n, std::uint32_t d, std::uint64_t trial) {
    Rng rng(derive_seed(plan.seed, n, d, trial));
    return sample_regular_multigraph(n, d, rng,
                                     plan.resample_disconnected ? DisconnectedPolicy::Resample : DisconnectedPolicy::Flag);
}

CoverResult run_cover(const ExperimentPlan& plan, std::ostream* per_trial) {
    validate_plan(plan);
    CoverResult result;
    if (per_trial) write_cover_summary_header(*per_trial);
    for (std::uint32_t n : plan.n) {
        for (std::uint32_t d : plan.d) {
            const std::size_t kinds = plan.kinds.size();
            std::vector<std::optional<Trajectory>> slots(plan.trials * kinds);
            std::vector<std::uint64_t> seeds(plan.trials * kinds);
            parallel_for(plan.trials, plan.threads, [&](std::size_t i) {
                const SampledGraph sg = plan_graph(plan, n, d, i);
                if (!sg.connected) return;
                for (std::size_t k = 0; k < kinds; ++k) {
                    const std::uint64_t seed = derive_seed(plan.seed, n, d, i, kind_key(plan.kinds[k]));
                    Rng rng(seed);
                    WalkOptions opts;
                    opts.record_series = false;
                    seeds[i * kinds + k] = seed;
                    slots[i * kinds + k] = run_walk(sg.graph, plan.kinds[k], rng, opts);
                }
            });
            const double ln = std::log(static_cast<double>(n));
            for (std::size_t k = 0; k < kinds; ++k) {
                CoverRow cv_n{n, d, plan.kinds[k], "CV_over_n", {}};
                CoverRow cv_nlnn{n, d, plan.kinds[k], "CV_over_nlnn", {}};
                CoverRow ce_nlnn{n, d, plan.kinds[k], "CE_over_nlnn", {}};
                CoverRow ce_half{n, d, plan.kinds[k], "CE_over_half_dn_lnn", {}};
                for (std::uint64_t i = 0; i < plan.trials; ++i) {
                    const auto& traj = slots[i * kinds + k];
                    if (!traj) continue;
                    if (per_trial) write_cover_summary_row(*per_trial, seeds[i * kinds + k], *traj);
                    const double cv = static_cast<double>(traj->vertex_steps.back());
                    const double ce = static_cast<double>(traj->edge_steps.back());
                    cv_n.values.add(cv / n);
                    cv_nlnn.values.add(cv / (n * ln));
                    ce_nlnn.values.add(ce / (n * ln));
                    ce_half.values.add(ce / (0.5 * d * n * ln));
                }
                for (auto* row : {&cv_n, &cv_nlnn, &ce_nlnn, &ce_half}) result.rows.push_back(std::move(*row));
            }
            for (std::uint64_t i = 0; i < plan.trials; ++i) result.disconnected += !slots[i * kinds].has_value();
        }
    }
    return result;
}

void write_cover_rows(std::ostream& out, const std::vector<CoverRow>& rows) {
    out << kSchemaLine << '\n';
    out << "n,d,kind,metric,mean,sd,min,max,count\n";
    for (const auto& r : rows) {
        out << r.n << ',' << r.d << ',' << to_string(r.kind) << ',' << r.metric << ',';
        if (r.values.count() == 0) {
            out << "NA,NA,NA,NA,0\n";
            continue;
        }
        out << r.values.mean() << ',' << r.values.sd() << ',' << r.values.min() << ',' << r.values.max() << ','
            << r.values.count() << '\n';
    }
}

int cmd_gen(const ExperimentPlan& plan, std::ostream& out, std::ostream& log) {
    validate_plan(plan);
    require_single(plan.n, "n", "gen");
    require_single(plan.d, "d", "gen");
    const SampledGraph sg = plan_graph(plan, plan.n[0], plan.d[0], 0);
    write_edge_list(out, sg.graph);
    const auto diag = diagnostics(sg.graph, 4);
    log << "n=" << plan.n[0] << " d=" << plan.d[0] << " connected=" << diag.connected << " simple=" << diag.simple
        << " loops=" << diag.loop_count << " parallel_pairs=" << diag.parallel_pairs << " attempts=" << sg.attempts << '\n';
    return 0;
}

int cmd_cover(const ExperimentPlan& plan, std::ostream& out, std::ostream& log) {
    std::ofstream summary;
    if (!plan.summary.empty()) {
        summary.open(plan.summary);
        if (!summary) throw UsageError("cannot open summary file: " + plan.summary);
    }
    const CoverResult result = run_cover(plan, plan.summary.empty() ? nullptr : &summary);
    write_cover_rows(out, result.rows);
    if (result.disconnected > 0) {
        log << result.disconnected << " sampled graphs were disconnected and skipped"
            << " (use --resample-disconnected to redraw them)\n";
    }
    return 0;
}

int cmd_trajectory(const ExperimentPlan& plan, std::ostream& out, std::ostream& log) {
    validate_plan(plan);
    require_single(plan.d, "d", "trajectory");
    const std::uint32_t d = plan.d[0];
    const std::vector<double> checkpoints = plan.checkpoints.empty() ? std::vector<double>{1.0, 0.5, 0.1, 0.01} : plan.checkpoints;
    out << kSchemaLine << '\n';
    out << "n,d,kind,trial,t,delta,steps";
    for (std::uint32_t i = 0; i <= d; ++i) out << ",X" << i;
    out << ",Phi,pred_X3,pred_X1,Phi_lower\n";
    std::uint64_t skipped = 0;
    for (std::uint32_t n : plan.n) {
        const std::uint64_t edges = static_cast<std::uint64_t>(n) * d / 2;
        const auto times = checkpoint_times(checkpoints, edges);
        const double delta0 = 1.0 / std::log(std::log(static_cast<double>(n)));
        for (WalkKind kind : plan.kinds) {
            std::vector<std::optional<Trajectory>> slots(plan.trials);
            parallel_for(plan.trials, plan.threads, [&](std::size_t i) {
                const SampledGraph sg = plan_graph(plan, n, d, i);
                if (!sg.connected) return;
                Rng rng(derive_seed(plan.seed, n, d, i, kind_key(kind)));
                WalkOptions opts;
                opts.stop = StopRule::edge_count(std::max<std::uint32_t>(times.back(), 1));
                slots[i] = run_walk(sg.graph, kind, rng, opts);
            });
            for (std::uint64_t i = 0; i < plan.trials; ++i) {
                const auto& traj = slots[i];
                if (!traj) {
                    ++skipped;
                    continue;
                }
                for (std::uint32_t t : times) {
                    const auto row = traj->row_at(t);
                    if (!row) continue;
                    const double delta = traj->delta(t);
                    out << n << ',' << d << ',' << to_string(kind) << ',' << i << ',' << t << ',' << delta << ','
                        << (t == 0 ? 0 : traj->edge_steps[t - 1]);
                    for (std::uint32_t k = 0; k <= d; ++k) out << ',' << traj->x(*row, k);
                    out << ',' << traj->phi[*row];
                    if (d == 3) {
                        out << ',' << n * std::pow(delta, 1.5) << ',' << (3.0 * n - 2.0 * t) * (1.0 - std::sqrt(delta)) << ','
                            << std::sqrt(delta0 * delta) * n << '\n';
                    } else {
                        out << ",NA,NA,NA\n";
                    }
                }
            }
        }
    }
    if (skipped) log << skipped << " disconnected graphs skipped\n";
    return 0;
}

int cmd_spectra(const ExperimentPlan& plan, std::ostream& out, std::ostream& log) {
    validate_plan(plan);
    out << kSchemaLine << '\n';
    out << "n,d,seed,lambda,method,iterations\n";
    for (std::uint32_t n : plan.n) {
        for (std::uint32_t d : plan.d) {
            std::vector<std::optional<SpectralReport>> slots(plan.trials);
            parallel_for(plan.trials, plan.threads, [&](std::size_t i) {
                const SampledGraph sg = plan_graph(plan, n, d, i);
                if (sg.connected) slots[i] = second_eigenvalue(sg.graph);
            });
            Summary lambdas;
            for (std::uint64_t i = 0; i < plan.trials; ++i) {
                if (!slots[i]) continue;
                const auto& r = *slots[i];
                out << n << ',' << d << ',' << derive_seed(plan.seed, n, d, i) << ',' << r.lambda << ','
                    << to_string(r.method) << ',' << r.iterations << '\n';
                lambdas.add(r.lambda);
                if (!r.converged) log << "warning: eigenvalue for n=" << n << " trial " << i << " did not converge\n";
            }
            if (lambdas.count()) {
                log << "n=" << n << " d=" << d << " lambda median " << lambdas.median() << " max " << lambdas.max()
                    << " (Ramanujan bound " << 2.0 * std::sqrt(d - 1.0) / d << ")\n";
            }
        }
    }
    return 0;
}

int cmd_hitting(const ExperimentPlan& plan, std::ostream& out, std::ostream& log) {
    validate_plan(plan);
    out << kSchemaLine << '\n';
    out << "|S|,method,value,error,target_3n_over_S\n";
    const std::uint64_t mc_trials = plan.quick ? 2000 : 10000;
    for (std::uint32_t n : plan.n) {
        for (std::uint32_t d : plan.d) {
            for (std::uint64_t i = 0; i < plan.trials; ++i) {
                const SampledGraph sg = plan_graph(plan, n, d, i);
                if (!sg.connected) {
                    log << "graph " << i << " disconnected, skipped\n";
                    continue;
                }
                for (std::uint32_t k : plan.set_sizes) {
                    if (k >= n) throw UsageError("set size must be below n");
                    Rng rng(derive_seed(plan.seed, n, d, i, k, 11));
                    std::vector<Vertex> all(n);
                    for (Vertex v = 0; v < n; ++v) all[v] = v;
                    std::ranges::shuffle(all, rng);
                    std::vector<Vertex> set(all.begin(), all.begin() + k);
                    const double target = static_cast<double>(d) * n / k;
                    std::vector<HittingEstimate> estimates;
                    if (n - k <= kExactSolveLimit) estimates.push_back(hitting_time_exact(sg.graph, set));
                    estimates.push_back(hitting_time_zseries(sg.graph, set));
                    MonteCarloOptions mc;
                    mc.threads = plan.threads;
                    estimates.push_back(hitting_time_mc(sg.graph, set, mc_trials, derive_seed(plan.seed, n, d, i, k, 12), mc));
                    for (const auto& e : estimates) {
                        out << k << ',' << to_string(e.method) << ',' << e.value << ',' << e.error << ',' << target << '\n';
                        if (!e.note.empty()) log << to_string(e.method) << ": " << e.note << '\n';
                    }
                }
            }
        }
    }
    return 0;
}

int cmd_rootset(const ExperimentPlan& plan, std::ostream& out, std::ostream& log) {
    validate_plan(plan);
    require_single(plan.d, "d", "rootset");
    const std::uint32_t d = plan.d[0];
    const std::vector<double> checkpoints = plan.checkpoints.empty() ? std::vector<double>{0.01} : plan.checkpoints;
    write_rootset_header(out);
    for (std::uint32_t n : plan.n) {
        const std::uint64_t edges = static_cast<std::uint64_t>(n) * d / 2;
        const auto times = checkpoint_times(checkpoints, edges);
        for (std::uint32_t t : times) {
            const double delta = 1.0 - static_cast<double>(t) / static_cast<double>(edges);
            if (!(delta > 0.0)) throw UsageError("rootset needs checkpoints with unvisited edges left");
            const double omega = std::log(-std::log(delta));
            if (!(omega > 1.0)) throw UsageError("rootset needs delta below exp(-e) so that the order exceeds 1");
            std::vector<std::optional<RootSetReport>> slots(plan.trials);
            parallel_for(plan.trials, plan.threads, [&](std::size_t i) {
                const SampledGraph sg = plan_graph(plan, n, d, i);
                if (!sg.connected) return;
                Rng rng(derive_seed(plan.seed, n, d, i, 21));
                WalkOptions opts;
                opts.stop = StopRule::edge_count(std::max<std::uint32_t>(t, 1));
                opts.record_series = false;
                const Trajectory traj = run_walk(sg.graph, WalkKind::BiasedEdgeProcess, rng, opts);
                const auto set = red_vertices(sg.graph, traj);
                slots[i] = is_root_set(sg.graph, set, omega);
            });
            std::uint64_t hits = 0, total = 0;
            for (const auto& r : slots) {
                if (!r) continue;
                write_rootset_row(out, t, delta, *r);
                ++total;
                hits += r->verdict;
            }
            log << "n=" << n << " delta=" << delta << " order=" << omega << " root-set rate " << hits << "/" << total << '\n';
        }
    }
    return 0;
}

int cmd_urntest(const ExperimentPlan& plan, std::ostream& out, std::ostream& log) {
    validate_plan(plan);
    require_single(plan.n, "n", "urn-test");
    require_single(plan.d, "d", "urn-test");
    UrnWalkOptions opts;
    opts.n = plan.n[0];
    opts.d = plan.d[0];
    opts.trials = plan.trials;
    opts.seed = plan.seed;
    opts.threads = plan.threads;
    if (!plan.checkpoints.empty()) {
        if (plan.checkpoints.size() != 1 || plan.checkpoints[0] > 1.0) throw UsageError("urn-test takes one delta checkpoint");
        opts.delta = plan.checkpoints[0];
    }
    auto samples = sample_bridges(opts);
    if (plan.null_model) samples = sample_urn_null(samples, derive_seed(plan.seed, 31));
    const auto report = urn_bridge_test(samples, opts.min_bucket);
    write_urn_csv(out, report);
    for (const auto& note : report.notices) log << note << '\n';
    log << "buckets passing at 0.01: " << report.passing(0.01) << "/" << report.retained() << '\n';
    if (plan.null_model) {
        std::vector<double> ps;
        for (const auto& b : report.buckets) {
            if (!b.degenerate) ps.push_back(b.p_value);
        }
        if (!ps.empty()) {
            const auto ks = ks_uniform(ps);
            log << "null calibration: KS statistic " << ks.statistic << " p " << ks.p_value << '\n';
        }
    }
    return 0;
}

int cmd_sweep(const ExperimentPlan& plan, std::ostream& out, std::ostream& log) {
    ExperimentPlan grid = plan;
    if (grid.command.empty() || grid.command == "sweep" || grid.command == "cover") return cmd_cover(grid, out, log);
    if (grid.command == "trajectory") return cmd_trajectory(grid, out, log);
    if (grid.command == "spectra") return cmd_spectra(grid, out, log);
    if (grid.command == "hitting") return cmd_hitting(grid, out, log);
    if (grid.command == "rootset") return cmd_rootset(grid, out, log);
    throw UsageError("sweep: unsupported command " + grid.command);
}

void write_plot_script(std::ostream& out, const std::string& command, const std::string& csv_path) {
    out << "# gnuplot script for " << csv_path << "\n";
    out << "set datafile separator ','\n";
    out << "set datafile commentschars '#'\n";
    out << "set key left top\n";
    if (command == "cover" || command == "sweep") {
        out << "set logscale x\n";
        out << "set xlabel 'n'\nset ylabel 'C_V / (n ln n)'\n";
        out << "plot for [k in \"biased simple nonbacktracking\"] '" << csv_path
            << "' using 1:((strcol(3) eq k && strcol(4) eq 'CV_over_nlnn') ? $5 : 1/0) with linespoints title k\n";
    } else if (command == "trajectory") {
        out << "set logscale x\n";
        out << "set xlabel 'delta'\nset ylabel 'count'\n";
        out << "plot '" << csv_path << "' using 6:11 with points title 'X3', '' using 6:13 with points title 'n delta^{3/2}', \\\n"
            << "     '' using 6:9 with points title 'X1', '' using 6:14 with points title '(3n-2t)(1-delta^{1/2})'\n";
    } else if (command == "spectra") {
        out << "set xlabel 'trial'\nset ylabel 'lambda'\n";
        out << "plot '" << csv_path << "' using 0:4 with points title 'lambda', 2*sqrt(2)/3 title 'Ramanujan bound'\n";
    } else if (command == "rootset") {
        out << "set xlabel 'trial'\nset ylabel 'size'\n";
        out << "plot '" << csv_path << "' using 0:3 with points title '|S|'\n";
    } else if (command == "urn-test") {
        out << "set xlabel 'bucket'\nset ylabel 'p'\nset yrange [0:1]\n";
        out << "plot '" << csv_path << "' using 0:4 with points title 'p-value', 0.01 title 'alpha'\n";
    } else {
        out << "plot '" << csv_path << "' using 0:2 with points\n";
    }
}

}  // namespace covertime
