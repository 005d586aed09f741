#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "centershift/centers.hpp"
#include "centershift/data.hpp"
#include "centershift/evaluate.hpp"
#include "centershift/losses.hpp"
#include "centershift/mlp.hpp"
#include "centershift/pseudo.hpp"

namespace centershift {

enum class Mode {
    source_only,
    revgrad,
    sda_ours,
    tcl_ours,
    sda_tcl,
    tcl_origin,
    sda_origin,
    linear_combination,
};

Mode mode_from_string(const std::string& name);
std::string to_string(Mode mode);
const std::vector<Mode>& all_modes();

/// Which loss terms a mode activates.
struct ModeDescriptor {
    bool center_loss = true;      // discriminative center losses (vs softmax head)
    bool discriminator = false;   // adversarial domain term
    bool target_loss = false;     // pseudo-labeled target term
    bool alignment = false;       // explicit lambda_c alignment term
    bool shared_centers = true;   // single center set for both domains
};

ModeDescriptor mode_losses(Mode mode);

struct TrainConfig {
    Mode mode = Mode::sda_tcl;
    std::size_t iterations = 3000;
    std::size_t refresh_every = 15;
    Margins margins{0.2, 1.2};
    double target_weight = 5.0;      // lambda_t = target_weight * lambda_d
    std::size_t pseudo_start = 200;  // iterations before pseudo-labels carry weight
    double lr_net = 1e-4;
    double lr_centers = 1e-2;
    std::size_t batch_size = 32;  // per domain
    std::size_t embedding_dim = 32;
    std::vector<std::size_t> generator_hidden{64, 64};
    std::vector<std::size_t> discriminator_hidden{64, 64};
    std::optional<double> lambda_c;  // alignment modes only
    std::uint64_t seed = 1;
    std::size_t log_every = 10;
};

/// Rejects inconsistent settings before any training state is built.
void validate_config(const TrainConfig& config, const DomainDataset& source,
                     const DomainDataset& target);

struct MetricsRow {
    std::size_t iteration = 0;
    double loss_source = 0.0;
    double loss_target = 0.0;
    double loss_domain = 0.0;
    double loss_align = 0.0;
    double loss_generator = 0.0;
    double lambda_d = 0.0;
    double lambda_t = 0.0;
    // Evaluation columns; NaN when target truth labels are absent.
    double target_accuracy = std::numeric_limits<double>::quiet_NaN();
    double pseudo_accuracy = std::numeric_limits<double>::quiet_NaN();
};

struct RefreshPoint {
    std::size_t iteration = 0;
    double pseudo_accuracy = std::numeric_limits<double>::quiet_NaN();
};

struct RunMetrics {
    std::vector<MetricsRow> rows;
    std::vector<RefreshPoint> refresh_points;
    double final_accuracy = std::numeric_limits<double>::quiet_NaN();
    ADistanceReport a_distance;
    double wall_seconds = 0.0;
};

struct TrainResult {
    TrainConfig config;
    MLPParams generator;
    std::optional<MLPParams> discriminator;
    std::optional<CenterSet> centers;
    std::optional<MLPParams> head;
    PseudoState pseudo;
    RunMetrics metrics;
};

/// Runs the training loop: per iteration, draw one minibatch per domain,
/// refresh pseudo-labels on cadence, take one Adam step on the discriminator,
/// then one on the generator (and centers or head) under the mode's
/// composition of the generator objective. The discriminator is untouched
/// during the generator phase and vice versa.
class Trainer {
public:
    Trainer(TrainConfig config, const DomainDataset& source, const DomainDataset& target);

    struct StepBatches {
        Batch source;
        Batch target;
    };

    StepBatches draw_batches();
    void maybe_refresh();
    void discriminator_phase(const StepBatches& batches);
    void generator_phase(const StepBatches& batches);

    /// One full iteration; logs a metrics row on the log cadence.
    void step();

    /// End-of-run evaluation: final accuracy, proxy A-distance, wall clock.
    void finalize_metrics();

    /// All remaining iterations plus finalize_metrics().
    void run();

    std::size_t iteration() const { return iteration_; }
    const MLPParams& generator() const { return generator_; }
    const MLPParams* discriminator() const {
        return discriminator_ ? &*discriminator_ : nullptr;
    }
    const CenterSet* centers() const { return centers_ ? &*centers_ : nullptr; }
    const MLPParams* head() const { return head_ ? &*head_ : nullptr; }
    const PseudoState& pseudo() const { return pseudo_; }
    const RunMetrics& metrics() const { return metrics_; }

    /// Harvests the trained state; call after run().
    TrainResult finish();

private:
    void log_row();
    std::vector<std::size_t> predict_current(const Matrix2D& inputs) const;

    TrainConfig config_;
    ModeDescriptor desc_;
    const DomainDataset* source_;
    const DomainDataset* target_;
    Schedule schedule_;
    double lambda_c_value_ = 0.0;

    MLPParams generator_;
    std::optional<MLPParams> discriminator_;
    std::optional<MLPParams> head_;
    std::optional<CenterSet> centers_;
    AdamState generator_state_;
    AdamState discriminator_state_;
    AdamState head_state_;
    AdamState center_state_;
    AdamState target_center_state_;

    PseudoState pseudo_;
    BatchSampler source_sampler_;
    BatchSampler target_sampler_;
    std::uint64_t eval_seed_ = 0;

    std::size_t iteration_ = 0;
    RunMetrics metrics_;
    double last_loss_source_ = 0.0;
    double last_loss_target_ = 0.0;
    double last_loss_domain_ = 0.0;
    double last_loss_align_ = 0.0;
    double last_loss_generator_ = 0.0;
    LambdaPair last_lambdas_;
    std::chrono::steady_clock::time_point started_;
};

TrainResult train(const TrainConfig& config, const DomainDataset& source,
                  const DomainDataset& target);

/// Nearest-center classification of generator embeddings.
std::vector<std::size_t> predict(const MLPParams& generator, const CenterSet& centers,
                                 const Matrix2D& inputs);

/// Softmax-head classification for the origin ablations.
std::vector<std::size_t> predict_with_head(const MLPParams& generator, const MLPParams& head,
                                           const Matrix2D& inputs);

/// Classification with whatever classifier the result's mode trained.
std::vector<std::size_t> predict_target(const TrainResult& result, const Matrix2D& inputs);

/// FNV-1a hash over the training-path outputs: logged loss/lambda columns and
/// every trained parameter. Evaluation columns (accuracies, A-distance) are
/// excluded, so the hash is invariant to the held-out target labels.
std::uint64_t trajectory_hash(const TrainResult& result);

}  // namespace centershift
