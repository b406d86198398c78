#ifndef TCDIFF_CHECKPOINT_HPP
#define TCDIFF_CHECKPOINT_HPP

#include <filesystem>
#include <optional>
#include <string>

#include "tcdiff/denoiser.hpp"

namespace tcdiff {

// Single-file weight archive: magic, JSON header (format version, library
// version, architecture config, training-config hash, array directory),
// followed by the raw float64 payload of every named parameter in directory
// order. Loading validates the architecture config and rejects mismatches.

inline constexpr const char* kCheckpointMagic = "TCDIFFCK";
inline constexpr int kCheckpointFormatVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const DenoiserNet& net,
                     const std::string& train_config_hash);

struct LoadedCheckpoint {
    DenoiserNet net;
    std::string train_config_hash;
    std::string lib_version;
};

// expected_config: when set, loading fails unless the stored config matches.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path,
                                 const std::optional<DenoiserConfig>& expected_config = {});

}  // namespace tcdiff

#endif
