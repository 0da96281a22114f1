#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nepembed/model.hpp"

namespace nepembed {

inline constexpr std::int32_t kCheckpointFormatVersion = 1;

// Row-major float32 tensor as stored on disk.
struct NamedTensor {
    std::string name;
    std::uint64_t rows = 0;
    std::uint64_t cols = 0;
    std::vector<float> data;

    bool operator==(const NamedTensor&) const = default;
};

// Serializable model state. Weights are float32; training compute widens
// them to double and truncates on conversion back.
struct Checkpoint {
    ModelConfig config;
    std::uint64_t step = 0;
    std::int32_t format_version = kCheckpointFormatVersion;
    std::vector<NamedTensor> weights;
    std::vector<NamedTensor> optimizer_state;  // may be empty

    bool operator==(const Checkpoint&) const = default;
};

// Seeded random initialization in checkpoint form, step 0.
Checkpoint init_checkpoint(const ModelConfig& cfg, std::uint64_t seed);

// Weight tensors in registry order, values truncated to float32.
Checkpoint checkpoint_from_model(const Model& model, std::uint64_t step = 0);
// Validates names, order, and shapes against cfg; errors name the offending
// tensor.
Model model_from_checkpoint(const Checkpoint& ckpt);

// Container layout: magic, little-endian u32 header length, JSON header
// (format_version, config, step, tensor tables), float32 LE payload in
// header order. Deterministic bytes for a given checkpoint.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace nepembed
