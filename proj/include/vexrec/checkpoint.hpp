#pragma once

// Binary model checkpoint:
//   "VXCP", u32 version, u32 N, M, K, D, h, Z, N^w, O, u32 variant,
//   u32 tensor count, then per tensor: u32 name length, name bytes,
//   u64 value count, little-endian float64 values.

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "vexrec/feature_store.hpp"
#include "vexrec/params.hpp"

namespace vexrec {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  Variant variant = Variant::ReVecf;
  ModelParams params;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
// Writes to a sibling temp file, then renames over the destination.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

// Throws FormatError on any structural mismatch.
Checkpoint read_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace vexrec
