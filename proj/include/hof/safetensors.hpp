#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace hof {

struct TensorData {
  std::vector<int64_t> shape;
  std::vector<double> values;  // row-major

  int64_t element_count() const;
};

// Reads F64/F32/F16/BF16 tensors from a .safetensors file, widening to
// double. Throws CheckpointUnavailable on malformed files.
std::map<std::string, TensorData> read_safetensors(
    const std::filesystem::path& path);

// Writes every tensor as F32 (the dtype transformer checkpoints ship in).
void write_safetensors(const std::filesystem::path& path,
                       const std::map<std::string, TensorData>& tensors);

}  // namespace hof
