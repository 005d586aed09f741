#pragma once

#include <cstddef>
#include <vector>

#include "centershift/centers.hpp"
#include "centershift/data.hpp"
#include "centershift/mlp.hpp"

namespace centershift {

/// Per-target-sample pseudo-label and confidence weight, refreshed every
/// refresh_every iterations over the full target set.
struct PseudoState {
    std::vector<std::size_t> labels;
    std::vector<double> weights;  // in [0, 1]
    std::size_t last_refresh_iteration = 0;
};

/// True on the refresh cadence, iteration % refresh_every == 0.
bool should_refresh(std::size_t iteration, std::size_t refresh_every);

/// Nearest-center assignment plus per-class min-max scaled confidence weights.
/// Pure in (generator, centers, data): identical inputs give identical states.
PseudoState refresh(const MLPParams& generator, const CenterSet& cs, const DomainDataset& target,
                    std::size_t iteration);

/// Softmax-head assignment for the origin ablations; all weights are 1.
PseudoState refresh_with_head(const MLPParams& generator, const MLPParams& head,
                              const DomainDataset& target, std::size_t iteration);

/// Random initial labels with unit weights. Inert in practice: the first
/// refresh at iteration 0 replaces them before any loss can consume them.
PseudoState random_pseudo_state(std::size_t sample_count, std::size_t class_count, Rng& rng);

}  // namespace centershift
