#include "tcdiff/checkpoint.hpp"

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "tcdiff/version.hpp"

namespace tcdiff {

using nlohmann::json;

static json config_to_json(const DenoiserConfig& c) {
    return json{{"img_channels", c.img_channels},
                {"base_width", c.base_width},
                {"emb_dim", c.emb_dim},
                {"num_tokens", c.num_tokens},
                {"control_channels", c.control_channels}};
}

static DenoiserConfig config_from_json(const json& j) {
    DenoiserConfig c;
    c.img_channels = j.at("img_channels").get<int>();
    c.base_width = j.at("base_width").get<int>();
    c.emb_dim = j.at("emb_dim").get<int>();
    c.num_tokens = j.at("num_tokens").get<int>();
    c.control_channels = j.at("control_channels").get<int>();
    return c;
}

void save_checkpoint(const std::filesystem::path& path, const DenoiserNet& net,
                     const std::string& train_config_hash) {
    json header;
    header["format_version"] = kCheckpointFormatVersion;
    header["lib_version"] = kVersion;
    header["config"] = config_to_json(net.config());
    header["train_config_hash"] = train_config_hash;
    json arrays = json::array();
    for (const ParamRef& p : net.params()) {
        arrays.push_back(json{{"name", p.name}, {"shape", p.value->shape()}});
    }
    header["arrays"] = arrays;
    const std::string hs = header.dump();

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("save_checkpoint: cannot open " + path.string());
    f.write(kCheckpointMagic, 8);
    const uint64_t hlen = hs.size();
    f.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    f.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    for (const ParamRef& p : net.params()) {
        f.write(reinterpret_cast<const char*>(p.value->data()),
                static_cast<std::streamsize>(p.value->size() * sizeof(double)));
    }
    if (!f) throw std::runtime_error("save_checkpoint: write failed for " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path,
                                 const std::optional<DenoiserConfig>& expected_config) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_checkpoint: cannot open " + path.string());
    char magic[8] = {};
    f.read(magic, 8);
    if (std::string(magic, 8) != kCheckpointMagic) {
        throw std::runtime_error("load_checkpoint: bad magic in " + path.string());
    }
    uint64_t hlen = 0;
    f.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    std::string hs(hlen, '\0');
    f.read(hs.data(), static_cast<std::streamsize>(hlen));
    if (!f) throw std::runtime_error("load_checkpoint: truncated header in " + path.string());
    json header = json::parse(hs);
    if (header.at("format_version").get<int>() != kCheckpointFormatVersion) {
        throw std::runtime_error("load_checkpoint: unsupported format version");
    }
    const DenoiserConfig cfg = config_from_json(header.at("config"));
    if (expected_config.has_value() && !(cfg == *expected_config)) {
        throw std::runtime_error("load_checkpoint: architecture config mismatch for " +
                                 path.string());
    }

    LoadedCheckpoint out{DenoiserNet(cfg, 0), header.value("train_config_hash", ""),
                         header.value("lib_version", "")};
    std::vector<ParamRef> refs = out.net.params();
    const json& arrays = header.at("arrays");
    if (arrays.size() != refs.size()) {
        throw std::runtime_error("load_checkpoint: array directory does not match architecture");
    }
    for (size_t i = 0; i < refs.size(); ++i) {
        const json& a = arrays[i];
        if (a.at("name").get<std::string>() != refs[i].name ||
            a.at("shape").get<std::vector<int>>() != refs[i].value->shape()) {
            throw std::runtime_error("load_checkpoint: array mismatch at '" + refs[i].name + "'");
        }
        f.read(reinterpret_cast<char*>(refs[i].value->data()),
               static_cast<std::streamsize>(refs[i].value->size() * sizeof(double)));
    }
    if (!f) throw std::runtime_error("load_checkpoint: truncated payload in " + path.string());
    return out;
}

}  // namespace tcdiff
