/**
 * @file preferrec_cli.cpp
 * @brief Command-line front end for the re-ranking engine.
 *
 * Exit codes: 0 success, 1 configuration error, 2 data error,
 * 3 numerical or internal failure.
 */

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include <preferrec/commands.hpp>

int main(int argc, char** argv) {
    CLI::App app{"preferrec: multi-objective re-ranking with cross-user preference transfer"};
    app.set_version_flag("--version", "preferrec 1.0.0");
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::string lists_path;
    std::uint64_t seed = 0;
    int threads = 0;

    CLI::Option* seed_opt = nullptr;
    auto add_common = [&](CLI::App* sub, bool with_threads) {
        sub->add_option("--config", config_path, "configuration file (INI)")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory")->capture_default_str();
        CLI::Option* s = sub->add_option("--seed", seed, "override the configured seed");
        if (seed_opt == nullptr) seed_opt = s;
        if (with_threads)
            sub->add_option("--threads", threads,
                            "worker threads (0 = hardware concurrency)")
                ->capture_default_str();
        return s;
    };

    CLI::App* prepare = app.add_subcommand("prepare", "build dataset artifacts and manifest");
    CLI::Option* prepare_seed = add_common(prepare, false);
    CLI::App* run = app.add_subcommand("run", "evolve, transfer, select, and evaluate");
    CLI::Option* run_seed = add_common(run, true);
    CLI::App* baseline = app.add_subcommand("baseline", "score-ordered and diversity-greedy rankers");
    CLI::Option* baseline_seed = add_common(baseline, true);
    CLI::App* ablate = app.add_subcommand("ablate", "compare runs with and without transfer");
    CLI::Option* ablate_seed = add_common(ablate, true);
    CLI::App* eval = app.add_subcommand("eval", "recompute metrics for written final lists");
    CLI::Option* eval_seed = add_common(eval, false);
    eval->add_option("--lists", lists_path, "final lists file to evaluate")
        ->required()
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1; // usage problems are configuration errors
    }

    const bool seed_overridden = prepare_seed->count() || run_seed->count() ||
                                 baseline_seed->count() || ablate_seed->count() ||
                                 eval_seed->count();
    try {
        preferrec::RunConfig config = preferrec::load_config(config_path);
        if (seed_overridden) config.evolution.seed = seed;
        config.validate();
        if (prepare->parsed()) return preferrec::cmd_prepare(config, out_dir);
        if (run->parsed()) return preferrec::cmd_run(config, out_dir, threads);
        if (baseline->parsed()) return preferrec::cmd_baseline(config, out_dir, threads);
        if (ablate->parsed()) return preferrec::cmd_ablate(config, out_dir, threads);
        if (eval->parsed()) return preferrec::cmd_eval(config, lists_path, out_dir);
        std::fprintf(stderr, "error: no command selected\n");
        return 1;
    } catch (const preferrec::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const preferrec::numeric_error& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const preferrec::error& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
