#include "centershift/pseudo.hpp"

#include <algorithm>

#include "centershift/errors.hpp"
#include "centershift/losses.hpp"

namespace centershift {

bool should_refresh(std::size_t iteration, std::size_t refresh_every) {
    if (refresh_every == 0) throw config_error("should_refresh: refresh_every must be >= 1");
    return iteration % refresh_every == 0;
}

PseudoState refresh(const MLPParams& generator, const CenterSet& cs, const DomainDataset& target,
                    std::size_t iteration) {
    const Matrix2D features = forward(generator, target.features());
    const Matrix2D& centers = cs.target_view();

    PseudoState state;
    state.last_refresh_iteration = iteration;
    state.labels.resize(features.rows);
    std::vector<double> raw(features.rows);
    for (std::size_t i = 0; i < features.rows; ++i) {
        const auto feature = features.row(i);
        const NearestCenter nearest = nearest_center(feature, centers);
        state.labels[i] = nearest.index;
        raw[i] = sample_weight(feature, centers, nearest.index);
        // The assignment is the argmin, so the pre-scale weight cannot be
        // negative unless two centers have collapsed within the distance floor.
        if (raw[i] < 0.0 && nearest.distance >= 1e-12) {
            throw numeric_error("refresh: negative confidence for a nearest-center assignment");
        }
    }
    state.weights = scale_weights_per_class(raw, state.labels);
    return state;
}

PseudoState refresh_with_head(const MLPParams& generator, const MLPParams& head,
                              const DomainDataset& target, std::size_t iteration) {
    const Matrix2D logits = forward(head, forward(generator, target.features()));
    PseudoState state;
    state.last_refresh_iteration = iteration;
    state.labels.resize(logits.rows);
    state.weights.assign(logits.rows, 1.0);
    for (std::size_t i = 0; i < logits.rows; ++i) {
        const auto row = logits.row(i);
        state.labels[i] = static_cast<std::size_t>(
            std::max_element(row.begin(), row.end()) - row.begin());
    }
    return state;
}

PseudoState random_pseudo_state(std::size_t sample_count, std::size_t class_count, Rng& rng) {
    if (class_count == 0) throw config_error("random_pseudo_state: class_count must be positive");
    PseudoState state;
    state.labels.resize(sample_count);
    state.weights.assign(sample_count, 1.0);
    for (std::size_t i = 0; i < sample_count; ++i) state.labels[i] = rng.index(class_count);
    return state;
}

}  // namespace centershift
