#include "lffont/config.hpp"

#include <fstream>
#include <sstream>

namespace lffont {

nn::ArchConfig arch_from_preset(const std::string& preset) {
    if (preset == "desk") return nn::ArchConfig::desk_scale();
    if (preset == "default") return nn::ArchConfig{};
    throw std::invalid_argument("unknown architecture preset: " + preset + " (expected desk|default)");
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("config: cannot open " + path.string());
    nlohmann::json j;
    is >> j;

    RunConfig c;
    if (j.contains("manifest")) c.manifest_dir = j.at("manifest").get<std::string>();
    if (j.contains("table")) c.table_path = j.at("table").get<std::string>();
    if (j.contains("arch_preset")) {
        c.arch_preset = j.at("arch_preset").get<std::string>();
        c.arch = arch_from_preset(c.arch_preset);
    }
    if (j.contains("arch")) {
        c.arch_preset = "custom";
        c.arch = nn::ArchConfig::from_json(j.at("arch"));
    }
    if (j.contains("train")) c.train = TrainConfig::from_json(j.at("train"));
    if (j.contains("eval")) {
        const auto& je = j.at("eval");
        c.eval.n_ref = je.value("n_ref", c.eval.n_ref);
        c.eval.n_repeats = je.value("n_repeats", c.eval.n_repeats);
        c.eval.seed = je.value("seed", c.eval.seed);
        c.eval.max_chars_per_block = je.value("max_chars_per_block", c.eval.max_chars_per_block);
        c.eval.classifier_config.epochs = je.value("classifier_epochs", c.eval.classifier_config.epochs);
    }
    return c;
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["manifest"] = manifest_dir.string();
    j["table"] = table_path.string();
    j["arch_preset"] = arch_preset;
    j["arch"] = arch.to_json();
    j["train"] = train.to_json();
    j["eval"] = {{"n_ref", eval.n_ref},
                 {"n_repeats", eval.n_repeats},
                 {"seed", eval.seed},
                 {"max_chars_per_block", eval.max_chars_per_block},
                 {"classifier_epochs", eval.classifier_config.epochs}};
    return j;
}

void RunConfig::echo(const std::filesystem::path& out_dir, const std::string& command,
                     uint64_t table_fingerprint) const {
    std::filesystem::create_directories(out_dir);
    nlohmann::json j = to_json();
    j["command"] = command;
    std::ostringstream fp;
    fp << std::hex << table_fingerprint;
    j["table_fingerprint"] = fp.str();
    std::ofstream os(out_dir / "run.json");
    os << j.dump(2) << "\n";
}

}  // namespace lffont
