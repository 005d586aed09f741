#include <chrono>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "centershift/errors.hpp"
#include "centershift/experiment.hpp"
#include "centershift/format.hpp"
#include "centershift/gradcheck.hpp"
#include "centershift/trainer.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct CommonArgs {
    std::string config_path;
    std::string mode;
    std::int64_t seed = -1;
    std::int64_t repeat = -1;
    std::string out_dir;
    bool force = false;
    bool csv_header = false;
    std::size_t threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment configuration file");
    cmd->add_option("--mode", args.mode, "override the training mode");
    cmd->add_option("--seed", args.seed, "override the base seed");
    cmd->add_option("--repeat", args.repeat, "override the number of seeds");
    cmd->add_option("--out", args.out_dir, "override the output directory");
    cmd->add_flag("--force", args.force, "reuse a non-empty output directory");
    cmd->add_flag("--csv-header", args.csv_header, "skip one header line when loading CSVs");
    cmd->add_option("--threads", args.threads,
                    "worker count for parallel seeds (capped by CENTERSHIFT_THREADS)");
}

centershift::ExperimentSpec load_spec(const CommonArgs& args) {
    centershift::ExperimentSpec spec = args.config_path.empty()
                                           ? centershift::default_experiment()
                                           : centershift::parse_experiment_file(args.config_path);
    if (!args.mode.empty()) spec.train.mode = centershift::mode_from_string(args.mode);
    if (args.seed >= 0) spec.train.seed = static_cast<std::uint64_t>(args.seed);
    if (args.repeat >= 0) {
        if (args.repeat < 1) throw centershift::config_error("--repeat must be >= 1");
        spec.output.repeat = static_cast<std::size_t>(args.repeat);
    }
    if (!args.out_dir.empty()) spec.output.dir = args.out_dir;
    return spec;
}

centershift::RunOptions make_options(const CommonArgs& args) {
    centershift::RunOptions options;
    options.force = args.force;
    options.csv_header = args.csv_header;
    options.threads = args.threads;
    return options;
}

int run_command(const CommonArgs& args) {
    const auto spec = load_spec(args);
    const auto outcomes = centershift::run_experiment(spec, make_options(args));
    for (const auto& o : outcomes) {
        std::printf("seed %llu: accuracy %s, dist_a %s (%.1fs)\n",
                    static_cast<unsigned long long>(o.seed),
                    centershift::format_double(o.final_accuracy).c_str(),
                    centershift::format_double(o.a_distance.dist_a).c_str(), o.wall_seconds);
    }
    std::printf("wrote %zu seed output set(s) to %s\n", outcomes.size(),
                spec.output.dir.string().c_str());
    return kExitOk;
}

int ablate_command(const CommonArgs& args, const std::vector<std::string>& mode_names) {
    const auto spec = load_spec(args);
    std::vector<centershift::Mode> modes;
    if (mode_names.empty()) {
        modes = centershift::all_modes();
    } else {
        for (const auto& name : mode_names) modes.push_back(centershift::mode_from_string(name));
    }
    centershift::ablate_experiment(spec, modes, make_options(args));
    std::printf("wrote %s\n", (spec.output.dir / "ablation.csv").string().c_str());
    return kExitOk;
}

int gradcheck_command(std::size_t instances, double eps, double perturbation) {
    const auto started = std::chrono::steady_clock::now();
    const auto reports = centershift::run_gradient_checks(instances, eps, perturbation);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    bool ok = true;
    for (const auto& report : reports) {
        const bool pass = report.max_rel_error < centershift::kGradCheckTolerance;
        ok = ok && pass;
        std::printf("%-36s max rel error %-12.3e %s\n", report.name.c_str(),
                    report.max_rel_error, pass ? "ok" : "FAIL");
    }
    std::printf("%zu checks, %zu instances each, %.2fs\n", reports.size(), instances, elapsed);
    if (!ok) {
        std::printf("gradient check FAILED (tolerance %g)\n", centershift::kGradCheckTolerance);
        return kExitCheckFailed;
    }
    std::printf("all gradients within %g of central differences\n",
                centershift::kGradCheckTolerance);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"centershift: domain adaptation by shared class centers, with ablations"};
    app.require_subcommand(1);

    CommonArgs run_args;
    CLI::App* run_cmd = app.add_subcommand("run", "train and evaluate one experiment");
    add_common(run_cmd, run_args);

    CommonArgs ablate_args;
    std::vector<std::string> ablate_modes;
    CLI::App* ablate_cmd =
        app.add_subcommand("ablate", "run several modes on identical data and seeds");
    add_common(ablate_cmd, ablate_args);
    ablate_cmd->add_option("--modes", ablate_modes, "modes to compare (default: all)")
        ->delimiter(',');

    std::size_t gc_instances = 10;
    double gc_eps = 1e-4;
    double gc_perturbation = 0.0;
    CLI::App* gradcheck_cmd =
        app.add_subcommand("gradcheck", "compare analytic gradients with finite differences");
    gradcheck_cmd->add_option("--instances", gc_instances, "random instances per check");
    gradcheck_cmd->add_option("--eps", gc_eps, "finite difference step");
    gradcheck_cmd->add_option("--perturb", gc_perturbation,
                              "bias added to analytic gradients (checker self-test)");

    try {
        app.parse(argc, argv);
        if (run_cmd->parsed()) return run_command(run_args);
        if (ablate_cmd->parsed()) return ablate_command(ablate_args, ablate_modes);
        if (gradcheck_cmd->parsed()) {
            return gradcheck_command(gc_instances, gc_eps, gc_perturbation);
        }
        return kExitConfig;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    } catch (const centershift::config_error& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return kExitConfig;
    } catch (const centershift::io_error& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitCheckFailed;
    }
}
