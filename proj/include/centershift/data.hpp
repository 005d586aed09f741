#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "centershift/matrix.hpp"
#include "centershift/rng.hpp"

namespace centershift {

enum class Domain { source, target };

/// Feature matrix plus labels. Target-domain labels are held out: the training
/// path reads training_labels(), which refuses to serve a target dataset, and
/// only evaluation code reads evaluation_labels().
class DomainDataset {
public:
    DomainDataset() = default;
    DomainDataset(Matrix2D features, std::vector<std::size_t> labels, Domain tag,
                  std::size_t class_count);

    const Matrix2D& features() const { return features_; }
    Domain domain_tag() const { return tag_; }
    std::size_t size() const { return features_.rows; }
    std::size_t input_dim() const { return features_.cols; }
    std::size_t class_count() const { return class_count_; }
    bool has_labels() const { return !labels_.empty(); }

    /// Labels available to the training path; throws for target datasets.
    const std::vector<std::size_t>& training_labels() const;

    /// Held-out ground truth; evaluation and diagnostics only.
    const std::vector<std::size_t>& evaluation_labels() const;

private:
    Matrix2D features_;
    std::vector<std::size_t> labels_;
    Domain tag_ = Domain::source;
    std::size_t class_count_ = 0;
};

/// Perturbation applied to a source draw to make the target domain: rotate the
/// first two coordinates, scale everything, translate, add Gaussian jitter.
struct ShiftSpec {
    double rotation = 0.0;            // radians, acts on the first two coordinates
    std::vector<double> translation;  // zero-padded to input_dim
    double scale = 1.0;
    double noise_sigma = 0.0;
};

/// Balanced Gaussian blobs: class means evenly spaced on a circle of radius
/// 4 * spread in the first two coordinates, isotropic noise sigma = spread on
/// every coordinate. Labels run 0..class_count-1 in generation order.
DomainDataset gen_blobs(std::size_t class_count, std::size_t per_class, std::size_t input_dim,
                        double spread, Rng& rng);

/// Two interleaved unit half-circles (2 classes, 2 dims) with Gaussian noise.
DomainDataset gen_moons(std::size_t per_class, double noise_sigma, Rng& rng);

/// x -> scale * R(rotation) * x + translation + Normal(0, noise_sigma^2).
/// Labels ride along; the result is tagged target.
DomainDataset apply_shift(const DomainDataset& ds, const ShiftSpec& spec, Rng& rng);

/// Comma-separated numeric rows, one sample per row, optional final integer
/// label column. The class count is inferred as max label + 1.
DomainDataset load_csv(const std::filesystem::path& path, bool has_labels, Domain tag,
                       bool skip_header = false);

void write_csv(const std::filesystem::path& path, const DomainDataset& ds, bool include_labels);

/// Epoch-shuffled minibatch stream: a fresh permutation each epoch, batches cut
/// consecutively, with an epoch's tail wrapping into the next shuffle so every
/// draw returns exactly batch_size indices and no index is skipped.
class BatchSampler {
public:
    BatchSampler(std::size_t dataset_size, std::size_t batch_size, Rng rng);
    const std::vector<std::size_t>& next();

private:
    void reshuffle();

    std::vector<std::size_t> order_;
    std::vector<std::size_t> current_;
    std::size_t pos_ = 0;
    std::size_t batch_size_;
    Rng rng_;
};

struct Batch {
    std::vector<std::size_t> indices;
    Matrix2D features;
    std::vector<std::size_t> labels;  // empty for target batches
};

/// Next minibatch; labels are filled only for source datasets.
Batch draw_batch(const DomainDataset& ds, BatchSampler& sampler);

Matrix2D gather_rows(const Matrix2D& m, std::span<const std::size_t> indices);

}  // namespace centershift
