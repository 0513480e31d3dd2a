#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "poseidon/network.hpp"
#include "poseidon/optim.hpp"

namespace poseidon {

/// Everything a checkpoint records besides the parameters themselves.
struct CheckpointMeta {
    int epoch = 0;
    std::string euler_convention;
    std::array<double, 3> norm_scales{1.0, 1.0, 1.0};
    OptimizerConfig optimizer;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> extra; // free-form, e.g. crop geometry
};

struct Checkpoint {
    NetworkSpec spec;
    ModelState state;
    CheckpointMeta meta;
};

// Self-describing container: magic string, format version, JSON header
// (layer list, hyperparameters, epoch, normalization, optimizer), then the
// parameter and optimizer-slot tensors as row-major 64-bit little-endian.
// Writing the same model twice produces byte-identical files.
void save_checkpoint(const std::filesystem::path& path, const NetworkSpec& spec,
                     const ModelState& state, const CheckpointMeta& meta);

Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace poseidon
