#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "centershift/errors.hpp"
#include "centershift/experiment.hpp"

using namespace centershift;
namespace fs = std::filesystem;

namespace {

fs::path write_config(const char* name, const std::string& body) {
    const fs::path path = fs::temp_directory_path() / name;
    std::ofstream out(path);
    out << body;
    return path;
}

const char* kTinyBody = R"(# tiny experiment
[dataset]
generator = blobs
classes = 3
per_class = 24
input_dim = 4
spread = 1.0

[shift]
rotation_deg = 30
translate = 1, -0.5
scale = 1.1

[train]
mode = sda_tcl
iterations = 60
pseudo_start = 15
batch_size = 12
embedding_dim = 6
generator_hidden = 8
discriminator_hidden = 8
seed = 2

[output]
repeat = 2
)";

}  // namespace

TEST_CASE("parse_experiment_file fills defaults and applies overrides") {
    const fs::path path = write_config("centershift_test_parse.cfg", kTinyBody);
    const ExperimentSpec spec = parse_experiment_file(path);
    CHECK(spec.dataset.class_count == 3);
    CHECK(spec.dataset.per_class == 24);
    CHECK(spec.train.mode == Mode::sda_tcl);
    CHECK(spec.train.iterations == 60);
    CHECK(spec.train.batch_size == 12);
    // untouched keys keep the stock values
    CHECK(spec.train.refresh_every == 15);
    CHECK(spec.train.margins.alpha == 0.2);
    CHECK(spec.train.margins.beta == 1.2);
    CHECK(spec.train.target_weight == 5.0);
    CHECK(spec.train.lr_net == 1e-4);
    CHECK(spec.train.lr_centers == 1e-2);
    CHECK(spec.shift.scale == 1.1);
    CHECK(spec.shift.translation == std::vector<double>{1.0, -0.5});
    CHECK(spec.output.repeat == 2);
    fs::remove(path);
}

TEST_CASE("parse_experiment_file rejects unknown keys and sections") {
    const fs::path bad_key = write_config("centershift_test_badkey.cfg",
                                          "[train]\nmode = sda_tcl\nbogus_key = 1\n");
    CHECK_THROWS_WITH_AS(parse_experiment_file(bad_key), doctest::Contains("bogus_key"),
                         config_error);
    fs::remove(bad_key);

    const fs::path bad_section =
        write_config("centershift_test_badsection.cfg", "[surprise]\nx = 1\n");
    CHECK_THROWS_AS(parse_experiment_file(bad_section), config_error);
    fs::remove(bad_section);

    const fs::path bad_value =
        write_config("centershift_test_badvalue.cfg", "[train]\niterations = soon\n");
    CHECK_THROWS_AS(parse_experiment_file(bad_value), config_error);
    fs::remove(bad_value);
}

TEST_CASE("the default experiment matches the stock task") {
    const ExperimentSpec spec = default_experiment();
    CHECK(spec.dataset.class_count == 5);
    CHECK(spec.dataset.per_class == 200);
    CHECK(spec.dataset.input_dim == 10);
    CHECK(spec.dataset.spread == 0.5);
    CHECK(std::abs(spec.shift.rotation) == doctest::Approx(50.0 * 3.14159265358979 / 180.0));
    CHECK(spec.shift.translation == std::vector<double>{2.0, -1.0});
    CHECK(spec.shift.scale == 1.2);
    CHECK(spec.train.mode == Mode::sda_tcl);
    CHECK(spec.train.iterations == 3000);
}

TEST_CASE("build_datasets pairs identical data for identical seeds") {
    const ExperimentSpec spec = parse_experiment_file(
        write_config("centershift_test_build.cfg", kTinyBody));
    auto [sa, ta] = build_datasets(spec, 77, false);
    auto [sb, tb] = build_datasets(spec, 77, false);
    CHECK(sa.features().data == sb.features().data);
    CHECK(ta.features().data == tb.features().data);
    CHECK(sa.training_labels() == sb.training_labels());
    auto [sc, tc] = build_datasets(spec, 78, false);
    CHECK(sa.features().data != sc.features().data);
    fs::remove(fs::temp_directory_path() / "centershift_test_build.cfg");
}

TEST_CASE("run_experiment writes per-seed outputs and refuses dirty directories") {
    const fs::path path = write_config("centershift_test_run.cfg", kTinyBody);
    ExperimentSpec spec = parse_experiment_file(path);
    const fs::path out = fs::temp_directory_path() / "centershift_test_run_out";
    fs::remove_all(out);
    spec.output.dir = out;

    RunOptions options;
    options.threads = 1;
    const auto outcomes = run_experiment(spec, options);
    REQUIRE(outcomes.size() == 2);
    for (const auto& o : outcomes) {
        const std::string suffix = "_seed" + std::to_string(o.seed);
        CHECK(fs::exists(out / ("metrics" + suffix + ".csv")));
        CHECK(fs::exists(out / ("summary" + suffix + ".json")));
        CHECK(fs::exists(out / ("checkpoint" + suffix + ".json")));
        CHECK(o.final_accuracy >= 0.0);
        CHECK(o.final_accuracy <= 1.0);
    }
    CHECK(outcomes[0].seed + 1 == outcomes[1].seed);

    // existing non-empty directory without force
    CHECK_THROWS_AS(run_experiment(spec, options), config_error);
    options.force = true;
    CHECK_NOTHROW(run_experiment(spec, options));
    fs::remove_all(out);
    fs::remove(path);
}

TEST_CASE("determinism: two runs of the same seed produce byte-identical metrics") {
    const fs::path path = write_config("centershift_test_det.cfg", kTinyBody);
    ExperimentSpec spec = parse_experiment_file(path);
    spec.output.repeat = 1;

    auto read_file = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    };

    const fs::path out_a = fs::temp_directory_path() / "centershift_test_det_a";
    const fs::path out_b = fs::temp_directory_path() / "centershift_test_det_b";
    fs::remove_all(out_a);
    fs::remove_all(out_b);
    RunOptions options;
    options.threads = 1;
    spec.output.dir = out_a;
    run_experiment(spec, options);
    spec.output.dir = out_b;
    run_experiment(spec, options);

    const std::string csv_a = read_file(out_a / "metrics_seed2.csv");
    const std::string csv_b = read_file(out_b / "metrics_seed2.csv");
    CHECK(!csv_a.empty());
    CHECK(csv_a == csv_b);
    fs::remove_all(out_a);
    fs::remove_all(out_b);
    fs::remove(path);
}

TEST_CASE("ablate_experiment pairs seeds across modes and writes the table") {
    const fs::path path = write_config("centershift_test_ablate.cfg", kTinyBody);
    ExperimentSpec spec = parse_experiment_file(path);
    spec.output.repeat = 1;
    spec.train.iterations = 40;
    spec.train.pseudo_start = 10;
    const fs::path out = fs::temp_directory_path() / "centershift_test_ablate_out";
    fs::remove_all(out);
    spec.output.dir = out;

    RunOptions options;
    options.threads = 1;
    ablate_experiment(spec, {Mode::source_only, Mode::sda_tcl}, options);
    CHECK(fs::exists(out / "ablation.csv"));
    CHECK(fs::exists(out / "source_only" / "metrics_seed2.csv"));
    CHECK(fs::exists(out / "sda_tcl" / "metrics_seed2.csv"));

    std::ifstream table(out / "ablation.csv");
    std::string header, row1, row2;
    std::getline(table, header);
    std::getline(table, row1);
    std::getline(table, row2);
    CHECK(header == "mode,seeds,mean_accuracy,std_accuracy,mean_dist_a,std_dist_a");
    CHECK(row1.substr(0, 11) == "source_only");
    CHECK(row2.substr(0, 7) == "sda_tcl");
    fs::remove_all(out);
    fs::remove(path);
}

TEST_CASE("pseudo snapshot dumps and periodic checkpoints are written on request") {
    const fs::path path = write_config("centershift_test_dump.cfg", kTinyBody);
    ExperimentSpec spec = parse_experiment_file(path);
    spec.output.repeat = 1;
    spec.output.dump_pseudo = true;
    spec.output.checkpoint_every = 30;
    const fs::path out = fs::temp_directory_path() / "centershift_test_dump_out";
    fs::remove_all(out);
    spec.output.dir = out;

    RunOptions options;
    options.threads = 1;
    run_experiment(spec, options);
    REQUIRE(fs::exists(out / "pseudo_seed2.csv"));
    REQUIRE(fs::exists(out / "pseudo_accuracy_seed2.csv"));
    CHECK(fs::exists(out / "checkpoint_seed2_iter30.json"));

    std::ifstream in(out / "pseudo_seed2.csv");
    std::string header, first;
    std::getline(in, header);
    std::getline(in, first);
    CHECK(header == "iteration,sample_id,label,weight");
    CHECK(first.substr(0, 4) == "0,0,");

    std::ifstream acc(out / "pseudo_accuracy_seed2.csv");
    std::getline(acc, header);
    CHECK(header == "iteration,pseudo_accuracy");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(acc, line)) ++rows;
    CHECK(rows == 60 / 15);  // one refresh per cadence over the run
    fs::remove_all(out);
    fs::remove(path);
}

TEST_CASE("resolve_worker_count honors the environment cap") {
    unsetenv("CENTERSHIFT_THREADS");
    CHECK(resolve_worker_count(4, 8) == 4);
    CHECK(resolve_worker_count(4, 2) == 2);
    setenv("CENTERSHIFT_THREADS", "1", 1);
    CHECK(resolve_worker_count(4, 8) == 1);
    setenv("CENTERSHIFT_THREADS", "junk", 1);
    CHECK(resolve_worker_count(3, 8) == 3);
    unsetenv("CENTERSHIFT_THREADS");
}
