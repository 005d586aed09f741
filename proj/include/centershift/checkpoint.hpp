#pragma once

#include <filesystem>

#include "centershift/trainer.hpp"

namespace centershift {

/// Single JSON document: schema version, config echo, layer dims and flattened
/// parameter arrays for every trained network, and the center set. Metrics are
/// not part of the checkpoint.
void save_checkpoint(const std::filesystem::path& path, const TrainResult& result);

/// Inverse of save_checkpoint; the returned result carries empty metrics.
TrainResult load_checkpoint(const std::filesystem::path& path);

inline constexpr int kCheckpointSchemaVersion = 1;

}  // namespace centershift
