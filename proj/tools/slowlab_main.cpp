// Command-line front end: structure checks, single runs, epsilon sweeps and
// guiding-center comparisons driven by a JSON config.
//
// Exit codes: 0 ok, 1 assertion failure, 2 config error, 3 runtime error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "slowlab/harness.hpp"

using namespace slowlab;
namespace fs = std::filesystem;

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_dir = "out";
    std::string format = "csv";
    std::string schemas_dir = "schemas";
};

json try_load_schema(const CliOptions& cli, const std::string& name) {
    const fs::path p = fs::path(cli.schemas_dir) / name;
    if (fs::exists(p)) return load_json_file(p.string());
    return json::object(); // validate-nothing fallback when not co-located
}

int cmd_check(const CliOptions& cli) {
    const RunConfig cfg = load_config(cli.config_path);
    const CheckReport rep = run_check(cfg);
    json checks = json::array();
    for (const CheckResult& c : rep.checks) {
        std::printf("[%s] %s: %s\n", c.pass ? "ok" : "FAIL", c.name.c_str(), c.detail.c_str());
        checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    }
    const json out = {{"system", cfg.system}, {"seed", cfg.seed},
                      {"checks", checks},     {"pass", rep.all_pass}};
    fs::create_directories(cli.out_dir);
    write_json_checked((fs::path(cli.out_dir) / "check.json").string(), out,
                       try_load_schema(cli, "check.schema.json"));
    std::printf("%s\n", rep.all_pass ? "all checks passed" : "CHECK FAILURES");
    return rep.all_pass ? 0 : 1;
}

int cmd_simulate(const CliOptions& cli) {
    const RunConfig cfg = load_config(cli.config_path);
    if (cfg.epsilon.size() != 1)
        throw ConfigError("simulate expects a single epsilon");
    const SimulateResult res = run_simulate(cfg, cfg.epsilon.front());
    fs::create_directories(cli.out_dir);
    if (cli.format == "csv")
        write_trajectory_csv((fs::path(cli.out_dir) / "trajectory.csv").string(),
                             res.record, res.state_names);
    write_json_checked((fs::path(cli.out_dir) / "summary.json").string(), res.summary,
                       try_load_schema(cli, "summary.schema.json"));
    std::printf("simulate: %zu steps, energy drift %.3e, mu2 drift %.3e%s\n",
                res.record.steps_taken,
                res.summary["energy"]["max_rel_drift"].get<double>(),
                res.summary["mu2"]["max_abs_drift"].get<double>(),
                res.record.exit_event ? " (domain exit)" : "");
    return 0;
}

int cmd_sweep(const CliOptions& cli) {
    const RunConfig cfg = load_config(cli.config_path);
    const SweepReport rep = run_sweep(cfg);
    fs::create_directories(cli.out_dir);
    if (cli.format == "csv") {
        std::vector<std::string> header = {"epsilon", "normal_distance", "mu2_drift",
                                           "gc_error", "noise_floor", "exited"};
        std::vector<std::vector<double>> rows;
        for (const auto& r : rep.rows)
            rows.push_back({r.epsilon, r.normal_distance, r.mu2_drift, r.gc_error,
                            r.noise_floor, r.exited ? 1.0 : 0.0});
        write_csv((fs::path(cli.out_dir) / "sweep.csv").string(), header, rows);
    }
    write_json_checked((fs::path(cli.out_dir) / "sweep.json").string(), rep.to_json(cfg),
                       try_load_schema(cli, "sweep.schema.json"));
    for (const MetricReport& m : rep.metrics) {
        if (m.fit)
            std::printf("[%s] %s: exponent %.3f (predicted %.2f%s), r^2 %.4f\n",
                        m.pass ? "ok" : "FAIL", m.name.c_str(), m.fit->exponent,
                        m.predicted_exponent, m.one_sided ? ", one-sided" : "",
                        m.fit->r_squared);
        else
            std::printf("[%s] %s: %s\n", m.pass ? "ok" : "FAIL", m.name.c_str(),
                        m.status.c_str());
    }
    return rep.all_pass ? 0 : 1;
}

int cmd_compare_gc(const CliOptions& cli) {
    const RunConfig cfg = load_config(cli.config_path);
    const CompareGcReport rep = run_compare_gc(cfg);
    fs::create_directories(cli.out_dir);
    if (cli.format == "csv") {
        std::vector<std::string> header = {"epsilon", "sup_x_err", "sup_u_err",
                                           "drift_speed_measured", "drift_speed_predicted"};
        std::vector<std::vector<double>> rows;
        for (const auto& r : rep.rows)
            rows.push_back({r.epsilon, r.sup_x_err, r.sup_u_err, r.drift_speed_measured,
                            r.drift_speed_predicted});
        write_csv((fs::path(cli.out_dir) / "compare_gc.csv").string(), header, rows);
    }
    write_json_checked((fs::path(cli.out_dir) / "compare_gc.json").string(),
                       rep.to_json(cfg), try_load_schema(cli, "compare_gc.schema.json"));
    for (const auto& r : rep.rows)
        std::printf("eps %.4g: sup|x| %.3e, sup|u| %.3e, drift %.3e vs %.3e\n", r.epsilon,
                    r.sup_x_err, r.sup_u_err, r.drift_speed_measured,
                    r.drift_speed_predicted);
    if (rep.fit)
        std::printf("tracking-error exponent %.3f (r^2 %.4f)\n", rep.fit->exponent,
                    rep.fit->r_squared);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"slowlab: slow-manifold embeddings of guiding-center dynamics"};
    app.require_subcommand(1);
    CliOptions cli;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", cli.config_path, "JSON run configuration")->required();
        sub->add_option("--out-dir", cli.out_dir, "output directory");
        sub->add_option("--format", cli.format, "tabular output format")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--schemas-dir", cli.schemas_dir, "directory with JSON schemas");
    };
    CLI::App* c_check = app.add_subcommand("check", "run structure identity checks");
    CLI::App* c_sim = app.add_subcommand("simulate", "integrate one trajectory");
    CLI::App* c_sweep = app.add_subcommand("sweep", "epsilon sweep with exponent fits");
    CLI::App* c_cmp = app.add_subcommand("compare-gc", "full orbit vs guiding center");
    for (CLI::App* sub : {c_check, c_sim, c_sweep, c_cmp}) add_common(sub);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(c_check)) return cmd_check(cli);
        if (app.got_subcommand(c_sim)) return cmd_simulate(cli);
        if (app.got_subcommand(c_sweep)) return cmd_sweep(cli);
        if (app.got_subcommand(c_cmp)) return cmd_compare_gc(cli);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 2;
}
