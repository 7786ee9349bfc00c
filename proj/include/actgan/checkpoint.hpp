#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace actgan {

// Checkpoint container: named little-endian f32 blobs behind an "ACTG" header
// with a format version and an architecture digest. Round-trips bit-exactly.
struct CheckpointBlob {
  std::string name;
  std::vector<float> values;
};

struct Checkpoint {
  uint16_t version = 1;
  uint64_t config_digest = 0;
  std::vector<CheckpointBlob> blobs;

  const CheckpointBlob* find(const std::string& name) const {
    for (const auto& b : blobs)
      if (b.name == name) return &b;
    return nullptr;
  }
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

uint64_t fnv1a64(const std::string& s);

}  // namespace actgan
