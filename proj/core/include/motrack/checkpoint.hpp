#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "motrack/params.hpp"

namespace motrack {

enum class CheckpointKind : std::uint8_t { kBox = 0, kTracklet = 1 };

/// Serialized model: named float32 tensors plus a string metadata map that
/// echoes the architecture hyper-parameters. The on-disk layout is a fixed
/// little-endian binary format guarded by a trailing CRC32, so a round trip
/// through disk is byte-stable and truncation or corruption is detected.
struct Checkpoint {
  CheckpointKind kind = CheckpointKind::kBox;
  std::map<std::string, std::string> meta;
  ParamStoreT<float> params;
};

void save_checkpoint(const std::string& path, const Checkpoint& ck);

/// Loads and validates a checkpoint. If `expect` is set, a mismatched model
/// kind is a DataError.
Checkpoint load_checkpoint(const std::string& path,
                           std::optional<CheckpointKind> expect = std::nullopt);

/// Fetches an integer metadata entry; DataError if absent or malformed.
int meta_int(const Checkpoint& ck, const std::string& key);

std::uint32_t crc32(const void* data, std::size_t len);

}  // namespace motrack
