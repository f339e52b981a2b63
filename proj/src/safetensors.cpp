#include "hof/safetensors.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <fstream>

#include <json.hpp>

#include "hof/delimited.hpp"
#include "hof/error.hpp"

namespace hof {

static_assert(std::endian::native == std::endian::little,
              "safetensors payloads are little-endian");

int64_t TensorData::element_count() const {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

namespace {

double half_to_double(uint16_t h) {
  const uint32_t sign = (h >> 15) & 1u;
  const uint32_t exponent = (h >> 10) & 0x1Fu;
  const uint32_t mantissa = h & 0x3FFu;
  double value;
  if (exponent == 0) {
    value = std::ldexp(static_cast<double>(mantissa), -24);
  } else if (exponent == 31) {
    value = mantissa ? std::numeric_limits<double>::quiet_NaN()
                     : std::numeric_limits<double>::infinity();
  } else {
    value = std::ldexp(static_cast<double>(mantissa | 0x400u),
                       static_cast<int>(exponent) - 25);
  }
  return sign ? -value : value;
}

[[noreturn]] void malformed(const std::filesystem::path& path,
                            const std::string& why) {
  throw Error(ErrorCode::CheckpointUnavailable,
              path.string() + ": malformed safetensors (" + why + ")");
}

}  // namespace

std::map<std::string, TensorData> read_safetensors(
    const std::filesystem::path& path) {
  std::string blob;
  try {
    blob = read_file(path);
  } catch (const Error&) {
    throw Error(ErrorCode::CheckpointUnavailable,
                "cannot read " + path.string());
  }
  if (blob.size() < 8) malformed(path, "truncated header");
  uint64_t header_size;
  std::memcpy(&header_size, blob.data(), 8);
  if (header_size > blob.size() - 8) malformed(path, "header overruns file");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(blob.substr(8, header_size));
  } catch (const nlohmann::json::exception& e) {
    malformed(path, e.what());
  }
  const char* payload = blob.data() + 8 + header_size;
  const size_t payload_size = blob.size() - 8 - header_size;

  std::map<std::string, TensorData> tensors;
  for (const auto& [name, info] : header.items()) {
    if (name == "__metadata__") continue;
    TensorData t;
    t.shape = info.at("shape").get<std::vector<int64_t>>();
    const auto offsets = info.at("data_offsets").get<std::vector<uint64_t>>();
    const std::string dtype = info.at("dtype").get<std::string>();
    if (offsets.size() != 2 || offsets[1] < offsets[0] ||
        offsets[1] > payload_size) {
      malformed(path, "bad offsets for " + name);
    }
    const int64_t count = t.element_count();
    const char* data = payload + offsets[0];
    const size_t bytes = offsets[1] - offsets[0];
    size_t width = 0;
    if (dtype == "F64") width = 8;
    else if (dtype == "F32") width = 4;
    else if (dtype == "F16" || dtype == "BF16") width = 2;
    else malformed(path, "unsupported dtype " + dtype + " for " + name);
    if (bytes != static_cast<size_t>(count) * width) {
      malformed(path, "size mismatch for " + name);
    }
    t.values.resize(static_cast<size_t>(count));
    for (int64_t i = 0; i < count; ++i) {
      const char* p = data + i * static_cast<int64_t>(width);
      if (dtype == "F64") {
        double v;
        std::memcpy(&v, p, 8);
        t.values[i] = v;
      } else if (dtype == "F32") {
        float v;
        std::memcpy(&v, p, 4);
        t.values[i] = v;
      } else if (dtype == "F16") {
        uint16_t v;
        std::memcpy(&v, p, 2);
        t.values[i] = half_to_double(v);
      } else {
        uint16_t v;
        std::memcpy(&v, p, 2);
        const uint32_t bits = static_cast<uint32_t>(v) << 16;
        t.values[i] = std::bit_cast<float>(bits);
      }
    }
    tensors.emplace(name, std::move(t));
  }
  return tensors;
}

void write_safetensors(const std::filesystem::path& path,
                       const std::map<std::string, TensorData>& tensors) {
  nlohmann::json header = nlohmann::json::object();
  uint64_t offset = 0;
  for (const auto& [name, t] : tensors) {
    const uint64_t bytes = static_cast<uint64_t>(t.values.size()) * 4;
    header[name] = {{"dtype", "F32"},
                    {"shape", t.shape},
                    {"data_offsets", {offset, offset + bytes}}};
    offset += bytes;
  }
  std::string text = header.dump();
  while ((text.size() + 8) % 8 != 0) text.push_back(' ');
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  const uint64_t header_size = text.size();
  out.write(reinterpret_cast<const char*>(&header_size), 8);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, t] : tensors) {
    for (double v : t.values) {
      const float f = static_cast<float>(v);
      out.write(reinterpret_cast<const char*>(&f), 4);
    }
  }
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

}  // namespace hof
