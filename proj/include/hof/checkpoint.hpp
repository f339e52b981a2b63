#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hof/encoder.hpp"

namespace hof {

struct TrainConfig;

uint32_t parameter_checksum(const Parameter& parameter);
// One CRC-32 per parameter block (embeddings, each layer, head).
std::vector<uint32_t> block_checksums(const ClassifierModel& model);
uint32_t frozen_checksum(const ClassifierModel& model);

// A checkpoint directory holds manifest.txt (plain key=value lines) and
// weights.bin (the trainable tensors, little-endian doubles). Frozen
// weights are not stored; they are re-read from the backbone and verified
// against the recorded frozen checksum on load.
void save_checkpoint(const ClassifierModel& model,
                     const std::filesystem::path& dir,
                     const TrainConfig* config = nullptr);

ClassifierModel load_checkpoint(
    const std::filesystem::path& dir, const BackboneRegistry& registry,
    const std::optional<ModelSpec>& expected = std::nullopt);

using Manifest = std::vector<std::pair<std::string, std::string>>;
Manifest read_manifest(const std::filesystem::path& file);

}  // namespace hof
