#include "hof/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "hof/checksum.hpp"
#include "hof/delimited.hpp"
#include "hof/error.hpp"
#include "hof/train.hpp"

namespace hof {

namespace {

constexpr std::string_view kFormat = "hof-checkpoint/1";

std::span<const std::byte> bytes_of(const Matrix& m) {
  return std::as_bytes(std::span<const double>(m.data(), static_cast<size_t>(m.size())));
}

std::string lookup(const Manifest& manifest, const std::string& key) {
  for (const auto& [k, v] : manifest) {
    if (k == key) return v;
  }
  throw Error(ErrorCode::SpecMismatch, "checkpoint manifest lacks '" + key + "'");
}

size_t lookup_size(const Manifest& manifest, const std::string& key) {
  const std::string v = lookup(manifest, key);
  try {
    return static_cast<size_t>(std::stoull(v));
  } catch (const std::exception&) {
    throw Error(ErrorCode::SpecMismatch, "manifest value for " + key + " is not a number");
  }
}

bool lookup_bool(const Manifest& manifest, const std::string& key) {
  return lookup(manifest, key) == "true";
}

}  // namespace

uint32_t parameter_checksum(const Parameter& parameter) {
  return crc32(bytes_of(parameter.value));
}

std::vector<uint32_t> block_checksums(const ClassifierModel& model) {
  std::vector<uint32_t> out;
  for (size_t block = 0; block <= model.head_block(); ++block) {
    boost::crc_32_type crc;
    for (const Parameter& p : model.parameters()) {
      if (p.block != block) continue;
      const auto b = bytes_of(p.value);
      crc.process_bytes(b.data(), b.size());
    }
    out.push_back(crc.checksum());
  }
  return out;
}

uint32_t frozen_checksum(const ClassifierModel& model) {
  boost::crc_32_type crc;
  for (const Parameter& p : model.parameters()) {
    if (p.trainable) continue;
    const auto b = bytes_of(p.value);
    crc.process_bytes(b.data(), b.size());
  }
  return crc.checksum();
}

Manifest read_manifest(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + file.string());
  Manifest manifest;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ChecksumMismatch,
                  file.string() + ": malformed manifest line '" + line + "'");
    }
    manifest.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return manifest;
}

void save_checkpoint(const ClassifierModel& model,
                     const std::filesystem::path& dir,
                     const TrainConfig* config) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
  }
  const ModelSpec& spec = model.spec();
  const EncoderConfig& enc = model.config();

  std::ostringstream manifest;
  manifest << "format=" << kFormat << '\n'
           << "backbone=" << spec.backbone << '\n'
           << "backbone_locator=" << model.backbone().locator << '\n'
           << "pooling=" << pooling_name(spec.pooling) << '\n'
           << "freeze_layers=" << spec.freeze_layers << '\n'
           << "freeze_embeddings=" << (spec.freeze_embeddings ? "true" : "false") << '\n'
           << "num_classes=" << spec.num_classes << '\n'
           << "max_sequence_length=" << spec.max_sequence_length << '\n'
           << "truncate=" << (spec.truncate ? "true" : "false") << '\n'
           << "encoder.vocab_size=" << enc.vocab_size << '\n'
           << "encoder.hidden=" << enc.hidden << '\n'
           << "encoder.layers=" << enc.layers << '\n'
           << "encoder.heads=" << enc.heads << '\n'
           << "encoder.intermediate=" << enc.intermediate << '\n'
           << "encoder.max_positions=" << enc.max_positions << '\n'
           << "encoder.type_vocab=" << enc.type_vocab << '\n'
           << "frozen_checksum=" << hex32(frozen_checksum(model)) << '\n';
  if (config) {
    for (const auto& [k, v] : to_key_values(*config)) {
      manifest << "train." << k << '=' << v << '\n';
    }
  }

  const auto weights_path = dir / "weights.bin";
  std::ofstream weights(weights_path, std::ios::binary | std::ios::trunc);
  if (!weights) throw Error(ErrorCode::IoFailure, "cannot write " + weights_path.string());
  boost::crc_32_type whole;
  size_t offset = 0;
  for (const Parameter& p : model.parameters()) {
    if (!p.trainable) continue;
    const auto b = bytes_of(p.value);
    weights.write(reinterpret_cast<const char*>(b.data()),
                  static_cast<std::streamsize>(b.size()));
    whole.process_bytes(b.data(), b.size());
    manifest << "tensor=" << p.name << ' ' << p.value.rows() << ' '
             << p.value.cols() << ' ' << offset << ' '
             << hex32(crc32(b)) << '\n';
    offset += b.size();
  }
  weights.close();
  if (!weights) throw Error(ErrorCode::IoFailure, "write failed for " + weights_path.string());
  manifest << "weights_bytes=" << offset << '\n'
           << "weights_checksum=" << hex32(whole.checksum()) << '\n';

  std::ofstream out(dir / "manifest.txt", std::ios::trunc);
  out << manifest.str();
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write manifest in " + dir.string());
}

ClassifierModel load_checkpoint(const std::filesystem::path& dir,
                                const BackboneRegistry& registry,
                                const std::optional<ModelSpec>& expected) {
  const auto manifest_path = dir / "manifest.txt";
  if (!std::filesystem::exists(manifest_path)) {
    throw Error(ErrorCode::IoFailure, "no checkpoint manifest at " + manifest_path.string());
  }
  const Manifest manifest = read_manifest(manifest_path);
  if (lookup(manifest, "format") != kFormat) {
    throw Error(ErrorCode::SpecMismatch, "unsupported checkpoint format");
  }

  ModelSpec spec;
  spec.backbone = lookup(manifest, "backbone");
  const auto pooling = parse_pooling(lookup(manifest, "pooling"));
  if (!pooling) throw Error(ErrorCode::SpecMismatch, "unknown pooling in manifest");
  spec.pooling = *pooling;
  spec.freeze_layers = lookup_size(manifest, "freeze_layers");
  spec.freeze_embeddings = lookup_bool(manifest, "freeze_embeddings");
  spec.num_classes = lookup_size(manifest, "num_classes");
  spec.max_sequence_length = lookup_size(manifest, "max_sequence_length");
  spec.truncate = lookup_bool(manifest, "truncate");
  if (expected && !(*expected == spec)) {
    throw Error(ErrorCode::SpecMismatch,
                "checkpoint at " + dir.string() + " was trained with spec (" +
                    spec.backbone + ", " + std::string(pooling_name(spec.pooling)) +
                    ", freeze " + std::to_string(spec.freeze_layers) +
                    ") which differs from the requested one");
  }

  ClassifierModel model = load_backbone(spec.backbone, registry, 0, spec);
  const EncoderConfig& enc = model.config();
  const EncoderConfig recorded{
      lookup_size(manifest, "encoder.vocab_size"),
      lookup_size(manifest, "encoder.hidden"),
      lookup_size(manifest, "encoder.layers"),
      lookup_size(manifest, "encoder.heads"),
      lookup_size(manifest, "encoder.intermediate"),
      lookup_size(manifest, "encoder.max_positions"),
      lookup_size(manifest, "encoder.type_vocab"),
      enc.layer_norm_eps};
  if (!(recorded == enc)) {
    throw Error(ErrorCode::SpecMismatch, "encoder shape differs from checkpoint");
  }
  if (hex32(frozen_checksum(model)) != lookup(manifest, "frozen_checksum")) {
    throw Error(ErrorCode::SpecMismatch,
                "frozen backbone weights differ from the ones this checkpoint "
                "was trained on");
  }

  const std::string blob = read_file(dir / "weights.bin");
  if (blob.size() != lookup_size(manifest, "weights_bytes") ||
      hex32(crc32(blob)) != lookup(manifest, "weights_checksum")) {
    throw Error(ErrorCode::ChecksumMismatch,
                (dir / "weights.bin").string() + " does not match its manifest");
  }

  size_t restored = 0;
  for (const auto& [key, value] : manifest) {
    if (key != "tensor") continue;
    std::istringstream fields(value);
    std::string name, crc;
    Eigen::Index rows = 0, cols = 0;
    size_t offset = 0;
    if (!(fields >> name >> rows >> cols >> offset >> crc)) {
      throw Error(ErrorCode::ChecksumMismatch, "malformed tensor entry: " + value);
    }
    Parameter& p = model.parameter(name);
    if (!p.trainable || p.value.rows() != rows || p.value.cols() != cols) {
      throw Error(ErrorCode::SpecMismatch, "tensor " + name + " does not fit the model");
    }
    const size_t bytes = static_cast<size_t>(rows * cols) * sizeof(double);
    if (offset + bytes > blob.size()) {
      throw Error(ErrorCode::ChecksumMismatch, "tensor " + name + " overruns weights.bin");
    }
    const std::string_view slice(blob.data() + offset, bytes);
    if (hex32(crc32(slice)) != crc) {
      throw Error(ErrorCode::ChecksumMismatch, "tensor " + name + " is corrupted");
    }
    std::memcpy(p.value.data(), slice.data(), bytes);
    ++restored;
  }
  size_t trainable = 0;
  for (const Parameter& p : model.parameters()) trainable += p.trainable ? 1 : 0;
  if (restored != trainable) {
    throw Error(ErrorCode::SpecMismatch, "checkpoint is missing trainable tensors");
  }
  return model;
}

}  // namespace hof
