#include "centershift/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include "centershift/errors.hpp"
#include "centershift/format.hpp"

namespace centershift {

namespace {

void require(bool condition, const std::string& message) {
    if (!condition) throw config_error(message);
}

}  // namespace

DomainDataset::DomainDataset(Matrix2D features, std::vector<std::size_t> labels, Domain tag,
                             std::size_t class_count)
    : features_(std::move(features)), labels_(std::move(labels)), tag_(tag),
      class_count_(class_count) {
    require(features_.rows >= 1, "DomainDataset: empty dataset");
    if (!labels_.empty()) {
        require(labels_.size() == features_.rows, "DomainDataset: label count mismatch");
        for (std::size_t y : labels_) {
            require(y < class_count_, "DomainDataset: label out of range");
        }
    }
}

const std::vector<std::size_t>& DomainDataset::training_labels() const {
    if (tag_ == Domain::target) {
        throw config_error("target labels are held out; the training path may not read them");
    }
    require(has_labels(), "training_labels: dataset is unlabeled");
    return labels_;
}

const std::vector<std::size_t>& DomainDataset::evaluation_labels() const {
    require(has_labels(), "evaluation_labels: dataset has no held-out labels");
    return labels_;
}

DomainDataset gen_blobs(std::size_t class_count, std::size_t per_class, std::size_t input_dim,
                        double spread, Rng& rng) {
    require(class_count >= 2, "gen_blobs: need at least 2 classes");
    require(input_dim >= 2, "gen_blobs: need at least 2 dims");
    require(per_class >= 1, "gen_blobs: need at least 1 sample per class");
    require(spread > 0.0, "gen_blobs: spread must be positive");

    const double radius = 4.0 * spread;
    Matrix2D features(class_count * per_class, input_dim);
    std::vector<std::size_t> labels(class_count * per_class);
    std::size_t row = 0;
    for (std::size_t j = 0; j < class_count; ++j) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) /
                             static_cast<double>(class_count);
        const double mx = radius * std::cos(angle);
        const double my = radius * std::sin(angle);
        for (std::size_t s = 0; s < per_class; ++s, ++row) {
            double* out = features.data.data() + row * input_dim;
            for (std::size_t k = 0; k < input_dim; ++k) out[k] = rng.normal(0.0, spread);
            out[0] += mx;
            out[1] += my;
            labels[row] = j;
        }
    }
    return DomainDataset(std::move(features), std::move(labels), Domain::source, class_count);
}

DomainDataset gen_moons(std::size_t per_class, double noise_sigma, Rng& rng) {
    require(per_class >= 1, "gen_moons: need at least 1 sample per class");
    require(noise_sigma >= 0.0, "gen_moons: noise must be non-negative");

    Matrix2D features(2 * per_class, 2);
    std::vector<std::size_t> labels(2 * per_class);
    for (std::size_t s = 0; s < per_class; ++s) {
        const double t = per_class == 1
                             ? 0.5 * std::numbers::pi
                             : std::numbers::pi * static_cast<double>(s) /
                                   static_cast<double>(per_class - 1);
        // outer moon
        features(s, 0) = std::cos(t) + rng.normal(0.0, noise_sigma);
        features(s, 1) = std::sin(t) + rng.normal(0.0, noise_sigma);
        labels[s] = 0;
        // inner moon, flipped and offset
        const std::size_t i = per_class + s;
        features(i, 0) = 1.0 - std::cos(t) + rng.normal(0.0, noise_sigma);
        features(i, 1) = 0.5 - std::sin(t) + rng.normal(0.0, noise_sigma);
        labels[i] = 1;
    }
    return DomainDataset(std::move(features), std::move(labels), Domain::source, 2);
}

DomainDataset apply_shift(const DomainDataset& ds, const ShiftSpec& spec, Rng& rng) {
    require(ds.input_dim() >= 2, "apply_shift: rotation needs at least 2 dims");
    require(spec.scale > 0.0, "apply_shift: scale must be positive");
    require(spec.translation.size() <= ds.input_dim(),
            "apply_shift: translation longer than input dim");
    require(spec.noise_sigma >= 0.0, "apply_shift: noise must be non-negative");

    const double c = std::cos(spec.rotation);
    const double s = std::sin(spec.rotation);
    const std::size_t dim = ds.input_dim();
    Matrix2D features = ds.features();
    for (std::size_t i = 0; i < features.rows; ++i) {
        double* row = features.data.data() + i * dim;
        const double x = row[0];
        const double y = row[1];
        row[0] = c * x - s * y;
        row[1] = s * x + c * y;
        for (std::size_t k = 0; k < dim; ++k) row[k] *= spec.scale;
        for (std::size_t k = 0; k < spec.translation.size(); ++k) row[k] += spec.translation[k];
        if (spec.noise_sigma > 0.0) {
            for (std::size_t k = 0; k < dim; ++k) row[k] += rng.normal(0.0, spec.noise_sigma);
        }
    }
    std::vector<std::size_t> labels = ds.has_labels() ? ds.evaluation_labels()
                                                      : std::vector<std::size_t>{};
    return DomainDataset(std::move(features), std::move(labels), Domain::target,
                         ds.class_count());
}

namespace {

double parse_cell(std::string_view cell, const std::filesystem::path& path, std::size_t line_no) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw io_error(path.string() + ":" + std::to_string(line_no) + ": non-numeric cell '" +
                       std::string(cell) + "'");
    }
    return value;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

}  // namespace

DomainDataset load_csv(const std::filesystem::path& path, bool has_labels, Domain tag,
                       bool skip_header) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path.string());

    std::vector<double> values;
    std::vector<std::size_t> labels;
    std::size_t cols = 0;
    std::size_t rows = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (skip_header && line_no == 1) continue;
        std::string_view rest = trim(line);
        if (rest.empty()) continue;

        std::vector<std::string_view> cells;
        while (true) {
            const std::size_t comma = rest.find(',');
            cells.push_back(trim(rest.substr(0, comma)));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        const std::size_t feature_cells = cells.size() - (has_labels ? 1 : 0);
        if (has_labels && cells.size() < 2) {
            throw io_error(path.string() + ":" + std::to_string(line_no) +
                           ": expected features plus a label column");
        }
        if (cols == 0) {
            cols = feature_cells;
        } else if (feature_cells != cols) {
            throw io_error(path.string() + ":" + std::to_string(line_no) + ": ragged row (" +
                           std::to_string(feature_cells) + " cells, expected " +
                           std::to_string(cols) + ")");
        }
        for (std::size_t k = 0; k < feature_cells; ++k) {
            values.push_back(parse_cell(cells[k], path, line_no));
        }
        if (has_labels) {
            const std::string_view cell = cells.back();
            long y = -1;
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), y);
            if (ec != std::errc() || ptr != cell.data() + cell.size() || y < 0) {
                throw io_error(path.string() + ":" + std::to_string(line_no) +
                               ": bad label '" + std::string(cell) + "'");
            }
            labels.push_back(static_cast<std::size_t>(y));
        }
        ++rows;
    }
    if (rows == 0) throw io_error(path.string() + ": no data rows");

    Matrix2D features(rows, cols);
    features.data = std::move(values);
    const std::size_t class_count =
        labels.empty() ? 0 : 1 + *std::max_element(labels.begin(), labels.end());
    return DomainDataset(std::move(features), std::move(labels), tag, class_count);
}

void write_csv(const std::filesystem::path& path, const DomainDataset& ds, bool include_labels) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path.string());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto row = ds.features().row(i);
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (k) out << ',';
            out << format_double(row[k]);
        }
        if (include_labels && ds.has_labels()) {
            out << ',' << ds.evaluation_labels()[i];
        }
        out << '\n';
    }
    if (!out) throw io_error("failed writing " + path.string());
}

BatchSampler::BatchSampler(std::size_t dataset_size, std::size_t batch_size, Rng rng)
    : batch_size_(batch_size), rng_(rng) {
    require(dataset_size >= 1, "BatchSampler: empty dataset");
    require(batch_size >= 1 && batch_size <= dataset_size,
            "BatchSampler: batch_size must be in [1, dataset size]");
    order_.resize(dataset_size);
    for (std::size_t i = 0; i < dataset_size; ++i) order_[i] = i;
    reshuffle();
}

void BatchSampler::reshuffle() {
    for (std::size_t i = order_.size(); i > 1; --i) {
        std::swap(order_[i - 1], order_[rng_.index(i)]);
    }
    pos_ = 0;
}

const std::vector<std::size_t>& BatchSampler::next() {
    current_.clear();
    while (current_.size() < batch_size_) {
        if (pos_ == order_.size()) reshuffle();
        current_.push_back(order_[pos_++]);
    }
    return current_;
}

Batch draw_batch(const DomainDataset& ds, BatchSampler& sampler) {
    Batch batch;
    batch.indices = sampler.next();
    batch.features = gather_rows(ds.features(), batch.indices);
    if (ds.domain_tag() == Domain::source && ds.has_labels()) {
        const auto& labels = ds.training_labels();
        batch.labels.reserve(batch.indices.size());
        for (std::size_t i : batch.indices) batch.labels.push_back(labels[i]);
    }
    return batch;
}

Matrix2D gather_rows(const Matrix2D& m, std::span<const std::size_t> indices) {
    Matrix2D out(indices.size(), m.cols);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        require(indices[i] < m.rows, "gather_rows: index out of range");
        const auto src = m.row(indices[i]);
        std::copy(src.begin(), src.end(), out.data.begin() + i * m.cols);
    }
    return out;
}

}  // namespace centershift
