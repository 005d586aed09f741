#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "centershift/data.hpp"
#include "centershift/trainer.hpp"

namespace centershift {

struct DatasetSpec {
    enum class Kind { blobs, moons, csv };
    Kind kind = Kind::blobs;
    std::size_t class_count = 5;
    std::size_t per_class = 200;
    std::size_t input_dim = 10;
    double spread = 0.5;        // blobs
    double noise_sigma = 0.1;   // moons
    std::filesystem::path source_csv;
    std::filesystem::path target_csv;
    bool target_labels = true;  // csv target carries held-out truth
};

struct OutputSpec {
    std::filesystem::path dir = "out";
    std::size_t repeat = 1;
    std::size_t checkpoint_every = 0;  // 0 = final checkpoint only
    bool dump_pseudo = false;          // per-refresh pseudo-label snapshots
};

struct ExperimentSpec {
    DatasetSpec dataset;
    ShiftSpec shift;  // synthetic generators only
    TrainConfig train;
    OutputSpec output;
};

/// The stock blobs task: 5 classes, 200 samples each, 10 dims (2 informative),
/// target shifted by a 50 degree clockwise rotation, translation (2, -1) and
/// scale 1.2.
ExperimentSpec default_experiment();

/// Flat `key = value` file with [dataset], [shift], [train] and [output]
/// sections; omitted keys keep their defaults, unknown keys are rejected.
ExperimentSpec parse_experiment_file(const std::filesystem::path& path);

/// Source and target datasets for one seed. Synthetic targets are an
/// independent draw of the source distribution pushed through the shift.
std::pair<DomainDataset, DomainDataset> build_datasets(const ExperimentSpec& spec,
                                                       std::uint64_t seed, bool csv_header);

struct SeedOutcome {
    std::uint64_t seed = 0;
    double final_accuracy = 0.0;
    ADistanceReport a_distance;
    double pseudo_first_ramp = 0.0;  // pseudo accuracy at the first refresh >= pseudo_start
    double pseudo_final = 0.0;       // pseudo accuracy at the last refresh
    double wall_seconds = 0.0;
    std::uint64_t trajectory = 0;
};

struct RunOptions {
    bool force = false;
    bool csv_header = false;
    std::size_t threads = 0;  // 0 = hardware concurrency, capped by repeat
};

/// Trains every seed of the experiment (base seed, base seed + 1, ...) and
/// writes metrics_seed<N>.csv, summary_seed<N>.json and checkpoint_seed<N>.json
/// into the output directory. Seeds may run on parallel workers; outputs are
/// per-seed, so workers share nothing.
std::vector<SeedOutcome> run_experiment(const ExperimentSpec& spec, const RunOptions& options);

/// Runs every requested mode on identical per-seed datasets and writes a
/// paired comparison table (ablation.csv) plus per-mode output directories.
void ablate_experiment(const ExperimentSpec& spec, const std::vector<Mode>& modes,
                       const RunOptions& options);

void write_metrics_csv(const std::filesystem::path& path, const RunMetrics& metrics);

/// Worker count: explicit request, else hardware concurrency, capped by the
/// CENTERSHIFT_THREADS environment variable and the number of seeds.
std::size_t resolve_worker_count(std::size_t requested, std::size_t seeds);

}  // namespace centershift
