#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "c2l/data.hpp"
#include "c2l/model.hpp"

namespace c2l {

// Checkpoints compute in 64-bit regardless of how they are stored; 32-bit
// storage halves the file at the cost of a lossy round trip.
enum class CheckpointPrecision : std::uint32_t { f64 = 8, f32 = 4 };

// Versioned little-endian binary layout:
//   magic "C2LCKPT1" | u32 version | u32 scalar width (8 or 4)
//   config: 6 x i32 (window_len chunks channels hidden harmonics token_len),
//           3 x f64 (dropout attention_temp layernorm_eps), u64 seed
//   u8 scaler flag, then 6 x f64 channel ranges when set
//   u32 tensor count, then per tensor: u16 name length, name bytes,
//           u32 rows, u32 cols, row-major payload
//   u64 FNV-1a checksum of every preceding byte
void save_checkpoint(const Model& model, const std::optional<ScalerParams>& scaler,
                     const std::string& path,
                     CheckpointPrecision precision = CheckpointPrecision::f64);

struct LoadedCheckpoint {
    Model model;
    std::optional<ScalerParams> scaler;
    CheckpointPrecision precision = CheckpointPrecision::f64;
};

// The file is self-describing: the model is rebuilt from the embedded config
// and tensors are matched by name. Bad magic, version, truncation and
// checksum failures are distinct errors.
LoadedCheckpoint load_checkpoint(const std::string& path);

// Bytes needed to store the learnable parameters at the given precision.
std::int64_t storage_bytes(const ModelParams& params, CheckpointPrecision precision);

} // namespace c2l
