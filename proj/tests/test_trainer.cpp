#include "doctest.h"

#include <cmath>

#include "centershift/errors.hpp"
#include "centershift/trainer.hpp"

using namespace centershift;

namespace {

struct TinyTask {
    DomainDataset source;
    DomainDataset target;
};

TinyTask make_task(std::uint64_t seed, std::size_t classes = 3, std::size_t per_class = 30) {
    Rng root(seed);
    Rng source_rng = root.fork();
    Rng target_rng = root.fork();
    Rng shift_rng = root.fork();
    DomainDataset source = gen_blobs(classes, per_class, 4, 1.0, source_rng);
    DomainDataset base = gen_blobs(classes, per_class, 4, 1.0, target_rng);
    ShiftSpec shift;
    shift.rotation = 0.6;
    shift.translation = {1.0, -0.5};
    shift.scale = 1.1;
    return {std::move(source), apply_shift(base, shift, shift_rng)};
}

TrainConfig tiny_config(Mode mode, std::size_t iterations = 120) {
    TrainConfig config;
    config.mode = mode;
    config.iterations = iterations;
    config.pseudo_start = iterations / 4;
    config.batch_size = 16;
    config.embedding_dim = 8;
    config.generator_hidden = {16};
    config.discriminator_hidden = {16};
    config.seed = 3;
    return config;
}

}  // namespace

TEST_CASE("mode_losses descriptors match the ablation table") {
    const ModeDescriptor sda_tcl = mode_losses(Mode::sda_tcl);
    CHECK(sda_tcl.center_loss);
    CHECK(sda_tcl.discriminator);
    CHECK(sda_tcl.target_loss);
    CHECK_FALSE(sda_tcl.alignment);
    CHECK(sda_tcl.shared_centers);

    const ModeDescriptor source_only = mode_losses(Mode::source_only);
    CHECK_FALSE(source_only.discriminator);
    CHECK_FALSE(source_only.target_loss);

    const ModeDescriptor tcl_ours = mode_losses(Mode::tcl_ours);
    CHECK_FALSE(tcl_ours.shared_centers);
    CHECK(tcl_ours.target_loss);

    const ModeDescriptor linear = mode_losses(Mode::linear_combination);
    CHECK_FALSE(linear.center_loss);
    CHECK(linear.target_loss);
    CHECK(linear.alignment);

    const ModeDescriptor sda_origin = mode_losses(Mode::sda_origin);
    CHECK(sda_origin.alignment);
    CHECK_FALSE(sda_origin.target_loss);
}

TEST_CASE("mode round-trips through names and rejects unknowns") {
    for (Mode mode : all_modes()) CHECK(mode_from_string(to_string(mode)) == mode);
    CHECK_THROWS_AS(mode_from_string("bogus"), config_error);
}

TEST_CASE("validate_config rejects lambda_c outside alignment modes") {
    TinyTask task = make_task(100);
    TrainConfig config = tiny_config(Mode::sda_tcl);
    config.lambda_c = 0.5;
    CHECK_THROWS_AS(validate_config(config, task.source, task.target), config_error);
    config.mode = Mode::linear_combination;
    CHECK_NOTHROW(validate_config(config, task.source, task.target));
}

TEST_CASE("validate_config rejects oversized batches and bad margins") {
    TinyTask task = make_task(101);
    TrainConfig config = tiny_config(Mode::sda_tcl);
    config.batch_size = 10000;
    CHECK_THROWS_AS(validate_config(config, task.source, task.target), config_error);
    config = tiny_config(Mode::sda_tcl);
    config.margins = {1.2, 0.2};
    CHECK_THROWS_AS(validate_config(config, task.source, task.target), config_error);
}

TEST_CASE("training is deterministic given config and seed") {
    TinyTask task = make_task(102);
    const TrainConfig config = tiny_config(Mode::sda_tcl);
    const TrainResult a = train(config, task.source, task.target);
    const TrainResult b = train(config, task.source, task.target);
    CHECK(trajectory_hash(a) == trajectory_hash(b));
    CHECK(flatten(a.generator) == flatten(b.generator));
    REQUIRE(a.metrics.rows.size() == b.metrics.rows.size());
    for (std::size_t i = 0; i < a.metrics.rows.size(); ++i) {
        CHECK(a.metrics.rows[i].loss_generator == b.metrics.rows[i].loss_generator);
        CHECK(a.metrics.rows[i].target_accuracy == b.metrics.rows[i].target_accuracy);
    }
}

TEST_CASE("source_only ignores the discriminator and trains only on source") {
    TinyTask task = make_task(103);
    const TrainResult result = train(tiny_config(Mode::source_only), task.source, task.target);
    CHECK_FALSE(result.discriminator.has_value());
    CHECK(result.centers.has_value());
    for (const MetricsRow& row : result.metrics.rows) {
        CHECK(row.loss_domain == 0.0);
        CHECK(row.loss_target == 0.0);
    }
}

TEST_CASE("sda_tcl logs an exactly zero alignment column at every row") {
    TinyTask task = make_task(104);
    const TrainResult result = train(tiny_config(Mode::sda_tcl), task.source, task.target);
    CHECK(result.metrics.rows.size() > 0);
    for (const MetricsRow& row : result.metrics.rows) {
        CHECK(row.loss_align == 0.0);
    }
    CHECK(result.centers->shared);
    CHECK(result.centers->target_centers.empty());
}

TEST_CASE("tcl_ours trains a separate target center set that drifts apart") {
    TinyTask task = make_task(105);
    const TrainResult result = train(tiny_config(Mode::tcl_ours, 200), task.source, task.target);
    REQUIRE(result.centers.has_value());
    CHECK_FALSE(result.centers->shared);
    CHECK(result.centers->target_centers.rows == result.centers->centers.rows);
    // separate Adam trajectories: the two sets should no longer be identical
    CHECK(result.centers->centers.data != result.centers->target_centers.data);
}

TEST_CASE("origin modes train a softmax head instead of centers") {
    TinyTask task = make_task(106);
    const TrainResult result = train(tiny_config(Mode::tcl_origin), task.source, task.target);
    CHECK_FALSE(result.centers.has_value());
    REQUIRE(result.head.has_value());
    CHECK(result.head->output_dim() == task.source.class_count());
    const auto predictions = predict_target(result, task.target.features());
    CHECK(predictions.size() == task.target.size());
}

TEST_CASE("the discriminator phase does not touch generator or centers and vice versa") {
    TinyTask task = make_task(107);
    Trainer trainer(tiny_config(Mode::sda_tcl), task.source, task.target);
    trainer.maybe_refresh();
    const auto batches = trainer.draw_batches();

    const auto gen_before = flatten(trainer.generator());
    const auto centers_before = trainer.centers()->centers.data;
    trainer.discriminator_phase(batches);
    CHECK(flatten(trainer.generator()) == gen_before);
    CHECK(trainer.centers()->centers.data == centers_before);

    const auto disc_before = flatten(*trainer.discriminator());
    trainer.generator_phase(batches);
    CHECK(flatten(*trainer.discriminator()) == disc_before);
    CHECK(flatten(trainer.generator()) != gen_before);
}

TEST_CASE("predict matches nearest centers and agrees with refresh labels") {
    TinyTask task = make_task(108);
    const TrainResult result = train(tiny_config(Mode::sda_tcl), task.source, task.target);
    const auto predictions = predict(result.generator, *result.centers, task.target.features());
    const PseudoState fresh = refresh(result.generator, *result.centers, task.target, 0);
    CHECK(predictions == fresh.labels);

    // features equal to the centers themselves decode to 0..C-1
    const std::size_t C = result.centers->class_count();
    Matrix2D logits = result.centers->centers;
    std::vector<std::size_t> direct(C);
    for (std::size_t j = 0; j < C; ++j) {
        direct[j] = nearest_center(logits.row(j), *result.centers).index;
    }
    for (std::size_t j = 0; j < C; ++j) CHECK(direct[j] == j);
}

TEST_CASE("corrupting held-out target labels changes evaluation but not the trajectory") {
    TinyTask task = make_task(109);
    const TrainConfig config = tiny_config(Mode::sda_tcl);
    const TrainResult honest = train(config, task.source, task.target);

    // garbage truth: every label cyclically wrong
    const auto& truth = task.target.evaluation_labels();
    std::vector<std::size_t> garbage(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        garbage[i] = (truth[i] + 1) % task.target.class_count();
    }
    const DomainDataset corrupted(task.target.features(), garbage, Domain::target,
                                  task.target.class_count());
    const TrainResult poisoned = train(config, task.source, corrupted);

    CHECK(trajectory_hash(honest) == trajectory_hash(poisoned));
    std::vector<double> honest_acc, poisoned_acc;
    for (const auto& row : honest.metrics.rows) honest_acc.push_back(row.target_accuracy);
    for (const auto& row : poisoned.metrics.rows) poisoned_acc.push_back(row.target_accuracy);
    CHECK(honest_acc != poisoned_acc);
    CHECK(honest.metrics.a_distance.dist_a == poisoned.metrics.a_distance.dist_a);
}

TEST_CASE("one source-only generator step with a small lr mostly descends the source loss") {
    TinyTask task = make_task(110);
    TrainConfig config = tiny_config(Mode::source_only, 200);
    config.lr_net = 1e-5;
    config.lr_centers = 1e-4;
    Trainer trainer(config, task.source, task.target);

    std::size_t descended = 0;
    const std::size_t steps = 150;
    for (std::size_t s = 0; s < steps; ++s) {
        trainer.maybe_refresh();
        const auto batches = trainer.draw_batches();
        auto loss_now = [&] {
            const Matrix2D feats = forward(trainer.generator(), batches.source.features);
            return source_dcl(feats, batches.source.labels, trainer.centers()->source_view(),
                              config.margins)
                .value;
        };
        const double before = loss_now();
        trainer.discriminator_phase(batches);
        trainer.generator_phase(batches);
        const double after = loss_now();
        if (after <= before + 1e-12) ++descended;
    }
    CHECK(static_cast<double>(descended) / steps >= 0.95);
}

TEST_CASE("metrics rows carry monotone iteration stamps on the log cadence") {
    TinyTask task = make_task(111);
    TrainConfig config = tiny_config(Mode::revgrad);
    config.log_every = 7;
    const TrainResult result = train(config, task.source, task.target);
    REQUIRE(!result.metrics.rows.empty());
    for (std::size_t i = 0; i < result.metrics.rows.size(); ++i) {
        CHECK(result.metrics.rows[i].iteration == 7 * i);
    }
    CHECK(std::isfinite(result.metrics.final_accuracy));
    CHECK(result.metrics.a_distance.dist_a >= 0.0);
    CHECK(result.metrics.wall_seconds > 0.0);
}
