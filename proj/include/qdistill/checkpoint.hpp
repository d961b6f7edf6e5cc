#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "qdistill/net.hpp"

namespace qdistill {

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
  Network net;
  std::uint64_t seed = 0;
  int episodes = 0;
};

std::string kind_name(NetKind kind);
NetKind kind_from_name(const std::string& name);

// Text (JSON) checkpoint. Values round-trip exactly; loading and re-saving a
// checkpoint is byte-identical. The write is atomic (temp file + rename).
void save_checkpoint(const std::filesystem::path& path, const Network& net,
                     std::uint64_t seed, int episodes);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace qdistill
