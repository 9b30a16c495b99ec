#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "zsr/config.hpp"

namespace zsr {

struct NetworkRecord {
  std::string id;          ///< e.g. "content_encoder"
  std::string descriptor;  ///< architecture descriptor, "encoder depth=3 width=32 ..."
  friend bool operator==(const NetworkRecord&, const NetworkRecord&) = default;
};

struct TensorRecord {
  std::string name;
  std::vector<int> dims;
  std::string sha256;  ///< of the little-endian float32 blob
  friend bool operator==(const TensorRecord&, const TensorRecord&) = default;
};

/// Human-readable index of a checkpoint directory.
struct CheckpointManifest {
  std::vector<NetworkRecord> networks;
  std::vector<TensorRecord> tensors;
  RunConfig config;
  std::int64_t iteration = 0;
  std::int64_t seed = 0;
  friend bool operator==(const CheckpointManifest&, const CheckpointManifest&) = default;
};

/// Manifest plus one float32 blob per named parameter tensor.
struct Checkpoint {
  CheckpointManifest manifest;
  std::map<std::string, std::vector<float>> blobs;

  /// Appends a tensor record (checksum computed here) and stores its blob.
  void add_tensor(const std::string& name, std::vector<int> dims, std::vector<float> values);
  [[nodiscard]] const std::vector<float>& blob(const std::string& name) const;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string tensor_checksum(const std::vector<float>& values);

std::string serialize_manifest(const CheckpointManifest& m);
CheckpointManifest parse_manifest(const std::string& text);

/// Writes `dir/manifest.txt` and `dir/<name>.bin` for every tensor. Creates `dir`.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& dir);

/// Reads a checkpoint and verifies every blob against its recorded checksum and shape.
Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace zsr
