#pragma once

// Versioned checkpoint container: header JSON (arch config, phase tag,
// decomposition-table fingerprint, tensor directory) followed by raw
// little-endian tensor payloads in directory order.

#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "lffont/networks.hpp"

namespace lffont::nn {

inline constexpr char kCheckpointMagic[4] = {'L', 'F', 'F', 'C'};
inline constexpr uint32_t kCheckpointVersion = 1;

template <class S>
struct CheckpointExtras {
    nlohmann::json meta;  // iteration counters etc.
    std::vector<std::pair<std::string, Tensor<S>>> tensors;  // optimizer state
};

template <class S>
const char* scalar_tag() {
    if constexpr (std::is_same_v<S, float>) return "f32";
    else return "f64";
}

template <class S>
void save_checkpoint(const std::filesystem::path& path, const ModelBundle<S>& bundle,
                     const CheckpointExtras<S>& extras = {}) {
    nlohmann::json header;
    header["format_version"] = kCheckpointVersion;
    header["scalar"] = scalar_tag<S>();
    header["phase"] = bundle.phase;
    std::ostringstream fp;
    fp << std::hex << bundle.table_fingerprint;
    header["table_fingerprint"] = fp.str();
    header["arch"] = bundle.arch.to_json();
    header["meta"] = extras.meta.is_null() ? nlohmann::json::object() : extras.meta;

    nlohmann::json dir = nlohmann::json::array();
    for (const auto& p : bundle.params.params) dir.push_back({{"name", p->name}, {"shape", p->val.shape}});
    for (const auto& [name, t] : extras.tensors) dir.push_back({{"name", "extra:" + name}, {"shape", t.shape}});
    header["tensors"] = dir;

    std::string hs = header.dump();
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("checkpoint: cannot write " + path.string());
    os.write(kCheckpointMagic, 4);
    uint32_t version = kCheckpointVersion;
    os.write(reinterpret_cast<const char*>(&version), sizeof(version));
    uint64_t hlen = hs.size();
    os.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    os.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    for (const auto& p : bundle.params.params)
        os.write(reinterpret_cast<const char*>(p->val.ptr()), static_cast<std::streamsize>(p->val.numel() * sizeof(S)));
    for (const auto& [name, t] : extras.tensors)
        os.write(reinterpret_cast<const char*>(t.ptr()), static_cast<std::streamsize>(t.numel() * sizeof(S)));
    if (!os) throw std::runtime_error("checkpoint: write failed for " + path.string());
}

template <class S>
ModelBundle<S> load_checkpoint(const std::filesystem::path& path, CheckpointExtras<S>* extras_out = nullptr) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kCheckpointMagic, 4) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path.string());
    uint32_t version = 0;
    is.read(reinterpret_cast<char*>(&version), sizeof(version));
    if (version != kCheckpointVersion) throw std::runtime_error("checkpoint: unsupported version");
    uint64_t hlen = 0;
    is.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    std::string hs(hlen, '\0');
    is.read(hs.data(), static_cast<std::streamsize>(hlen));
    nlohmann::json header = nlohmann::json::parse(hs);
    if (header.at("scalar").get<std::string>() != scalar_tag<S>())
        throw std::runtime_error("checkpoint: scalar type mismatch (file has " +
                                 header.at("scalar").get<std::string>() + ")");

    ArchConfig arch = ArchConfig::from_json(header.at("arch"));
    uint64_t fingerprint = std::stoull(header.at("table_fingerprint").get<std::string>(), nullptr, 16);
    ModelBundle<S> bundle = ModelBundle<S>::init(arch, fingerprint, 0);
    bundle.phase = header.at("phase").get<int>();

    if (extras_out) {
        extras_out->meta = header.at("meta");
        extras_out->tensors.clear();
    }
    for (const auto& entry : header.at("tensors")) {
        std::string name = entry.at("name").get<std::string>();
        std::vector<int64_t> shape = entry.at("shape").get<std::vector<int64_t>>();
        Tensor<S> t(shape);
        is.read(reinterpret_cast<char*>(t.ptr()), static_cast<std::streamsize>(t.numel() * sizeof(S)));
        if (!is) throw std::runtime_error("checkpoint: truncated tensor data in " + path.string());
        if (name.rfind("extra:", 0) == 0) {
            if (extras_out) extras_out->tensors.emplace_back(name.substr(6), std::move(t));
        } else {
            auto p = bundle.params.get(name);
            if (p->val.shape != shape)
                throw std::runtime_error("checkpoint: shape mismatch for parameter " + name);
            p->val = std::move(t);
        }
    }
    return bundle;
}

// The phase tag and fingerprint in the header without loading tensors.
inline nlohmann::json read_checkpoint_header(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path.string());
    char magic[4];
    is.read(magic, 4);
    uint32_t version = 0;
    is.read(reinterpret_cast<char*>(&version), sizeof(version));
    uint64_t hlen = 0;
    is.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    std::string hs(hlen, '\0');
    is.read(hs.data(), static_cast<std::streamsize>(hlen));
    if (!is) throw std::runtime_error("checkpoint: truncated header in " + path.string());
    return nlohmann::json::parse(hs);
}

}  // namespace lffont::nn
