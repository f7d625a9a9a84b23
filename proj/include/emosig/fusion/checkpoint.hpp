#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "emosig/fusion/model.hpp"

namespace emosig::fusion {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Binary container: magic "EMOSIGCK", u32 version, u64 tensor count, then per
// tensor u64 name length, name bytes, u64 rows, u64 cols and row-major
// little-endian doubles.
std::string encode_tensors(const FusionModel& model);

nlohmann::json checkpoint_sidecar(const FusionModel& model);

// Writes `path` and `path` + ".json".
void save_checkpoint(const FusionModel& model, const std::filesystem::path& path);
FusionModel load_checkpoint(const std::filesystem::path& path);

}  // namespace emosig::fusion
