// zonectl command-line interface.
//
// Exit codes: 0 success, 2 configuration error, 3 numeric failure, 1 other.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "zonectl/bench.hpp"
#include "zonectl/error.hpp"

namespace fs = std::filesystem;
using namespace zonectl;

namespace {

struct Common {
    std::string config_file;
    std::optional<std::uint64_t> seed;
    std::string out = "out";
    bool desk = false;
    bool full = false;
    std::string data;
    std::string pcnn;
    std::optional<std::size_t> threads;
};

void add_common(CLI::App* app, Common& c, bool with_inputs) {
    app->add_option("--config", c.config_file, "key = value configuration file")->check(CLI::ExistingFile);
    app->add_option("--seed", c.seed, "Seed for this command");
    app->add_option("--out", c.out, "Output directory");
    auto* desk = app->add_flag("--desk-scale", c.desk, "Desk-scale defaults (default)");
    auto* full = app->add_flag("--full-scale", c.full, "Full-scale defaults");
    desk->excludes(full);
    app->add_option("--threads", c.threads, "Worker threads");
    if (with_inputs) {
        app->add_option("--data", c.data, "Measurement CSV (generated from the config when omitted)");
        app->add_option("--pcnn", c.pcnn, "PCNN checkpoint (trained from the config when omitted)");
    }
}

bench::BenchConfig resolve(const Common& c) {
    bench::BenchConfig cfg = c.full ? bench::BenchConfig::full_scale() : bench::BenchConfig::desk_scale();
    if (!c.config_file.empty()) cfg = bench::bench_config_from(env::KeyValueConfig::load(c.config_file), cfg);
    if (c.threads) cfg.threads = *c.threads;
    return cfg;
}

bench::Inputs inputs_of(const Common& c) {
    bench::Inputs in;
    if (!c.data.empty()) in.data_csv = c.data;
    if (!c.pcnn.empty()) in.pcnn_model = c.pcnn;
    return in;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Zone temperature control benchmark: PCNN model, TD3 agent, baselines, clairvoyant LP oracle"};
    app.require_subcommand(1);

    Common gen_c, pcnn_c, agent_c, eval_c, seeds_c, lambda_c, oracle_c;

    auto* gen = app.add_subcommand("generate-data", "Write a synthetic measurement CSV");
    add_common(gen, gen_c, false);
    std::optional<int> days;
    gen->add_option("--days", days, "Number of days");

    auto* tp = app.add_subcommand("train-pcnn", "Train the zone model");
    add_common(tp, pcnn_c, true);

    auto* ta = app.add_subcommand("train-agent", "Train one TD3 agent");
    add_common(ta, agent_c, true);

    auto* ev = app.add_subcommand("evaluate", "Evaluate oracle, baselines and optionally an agent");
    add_common(ev, eval_c, true);
    std::string agent_path;
    ev->add_option("--agent", agent_path, "TD3 checkpoint");

    auto* ss = app.add_subcommand("seed-sweep", "Train agents over several seeds");
    add_common(ss, seeds_c, true);
    std::optional<std::size_t> n_seeds;
    ss->add_option("--seeds", n_seeds, "Number of seeds, starting at --seed (default 1)");

    auto* ls = app.add_subcommand("lambda-sweep", "Energy/comfort trade-off over lambda factors");
    add_common(ls, lambda_c, true);
    bool oracle_only = false;
    ls->add_flag("--oracle-only", oracle_only, "Skip agent training; oracle frontier only");

    auto* orc = app.add_subcommand("oracle", "Solve the clairvoyant LP for one evaluation trajectory");
    add_common(orc, oracle_c, true);
    std::size_t trajectory = 0;
    bool dump_lp = false;
    orc->add_option("--trajectory", trajectory, "Index into the evaluation list");
    orc->add_flag("--dump-lp", dump_lp, "Also write the LP in CPLEX LP format");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) {
            auto cfg = resolve(gen_c);
            if (days) cfg.days = *days;
            if (gen_c.seed) cfg.data_seed = *gen_c.seed;
            cfg.validate();
            const fs::path out = fs::path(gen_c.out) / "data.csv";
            bench::cmd_generate_data(cfg, out);
            std::cout << out.string() << '\n';
        } else if (tp->parsed()) {
            auto cfg = resolve(pcnn_c);
            if (pcnn_c.seed) cfg.pcnn.seed = *pcnn_c.seed;
            bench::cmd_train_pcnn(cfg, inputs_of(pcnn_c), pcnn_c.out);
        } else if (ta->parsed()) {
            const auto cfg = resolve(agent_c);
            bench::cmd_train_agent(cfg, inputs_of(agent_c), agent_c.seed.value_or(1), agent_c.out);
        } else if (ev->parsed()) {
            auto cfg = resolve(eval_c);
            if (eval_c.seed) cfg.eval_seed = *eval_c.seed;
            auto in = inputs_of(eval_c);
            if (!agent_path.empty()) in.agent = agent_path;
            const auto report = bench::cmd_evaluate(cfg, in, eval_c.out);
            for (const auto& m : report.metrics) {
                std::printf("%-10s mean %.4f  median %.4f  energy %.3f kWh  comfort %.3f Kh  gap %.4f\n",
                            bench::to_string(m.controller).c_str(), m.mean_reward, m.median_reward, m.energy_kwh,
                            m.comfort_kh, m.gap_to_optimal);
            }
        } else if (ss->parsed()) {
            auto cfg = resolve(seeds_c);
            if (n_seeds || seeds_c.seed) {
                const std::uint64_t first = seeds_c.seed.value_or(1);
                const std::size_t n = n_seeds.value_or(cfg.seeds.size());
                cfg.seeds.clear();
                for (std::size_t i = 0; i < n; ++i) cfg.seeds.push_back(first + i);
            }
            const auto res = bench::cmd_seed_sweep(cfg, inputs_of(seeds_c), seeds_c.out);
            for (const auto& run : res.runs) {
                std::printf("seed %llu  best epoch %zu  best reward %.4f\n",
                            static_cast<unsigned long long>(run.seed), run.result.best_epoch, run.result.best_reward);
            }
        } else if (ls->parsed()) {
            const auto cfg = resolve(lambda_c);
            bench::LambdaSweepOptions opt;
            opt.train_agents = !oracle_only;
            opt.agent_seed = lambda_c.seed.value_or(1);
            const auto res = bench::cmd_lambda_sweep(cfg, inputs_of(lambda_c), lambda_c.out, opt);
            for (const auto& p : res.points) {
                std::printf("factor %-7g %-7s energy %.3f kWh  comfort %.3f Kh\n", p.factor,
                            bench::to_string(p.controller).c_str(), p.energy_kwh, p.comfort_kh);
            }
            std::printf("oracle frontier monotone: %s\n", res.oracle_monotone ? "yes" : "no");
        } else if (orc->parsed()) {
            auto cfg = resolve(oracle_c);
            if (oracle_c.seed) cfg.eval_seed = *oracle_c.seed;
            bench::cmd_oracle(cfg, inputs_of(oracle_c), trajectory, oracle_c.out, dump_lp);
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
