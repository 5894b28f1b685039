#pragma once

// Run configuration: a JSON file carrying dataset paths, architecture and
// training/eval settings; CLI flags override file values and the resolved
// result is echoed into the run directory.

#include <filesystem>
#include <string>

#include "lffont/evalsuite.hpp"
#include "lffont/networks.hpp"
#include "lffont/trainer.hpp"

namespace lffont {

struct RunConfig {
    std::filesystem::path manifest_dir;
    std::filesystem::path table_path;
    std::string arch_preset = "desk";  // "desk" | "default" | "custom"
    nn::ArchConfig arch = nn::ArchConfig::desk_scale();
    TrainConfig train;
    EvalProtocol eval;

    static RunConfig from_file(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    // Snapshot of the fully resolved configuration plus input fingerprints,
    // written into the run directory before long-running work starts.
    void echo(const std::filesystem::path& out_dir, const std::string& command, uint64_t table_fingerprint) const;
};

nn::ArchConfig arch_from_preset(const std::string& preset);

}  // namespace lffont
