#pragma once

#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gliopipe/nn/unet.hpp"
#include "gliopipe/text.hpp"

namespace gliopipe::nn {

// Versioned checkpoint container: magic, JSON header (config, step, history,
// tensor manifest), then raw little-endian doubles. Round-trips bit-exactly.
struct Checkpoint {
    static constexpr char kMagic[8] = {'G', 'P', 'C', 'K', 'P', 'T', '0', '1'};
    static constexpr int kVersion = 1;

    NetworkConfig config;
    int step = 0;
    std::vector<double> loss_history;
    Dims3 crop_dims{0, 0, 0};  // training window, reused by tiled inference

    static void save(const std::string& path, UNet3d& model, int step,
                     const std::vector<double>& loss_history, const Dims3& crop_dims) {
        nlohmann::json header;
        header["version"] = kVersion;
        header["config"] = model.config().to_json();
        header["step"] = step;
        header["loss_history"] = loss_history;
        header["crop_dims"] = {crop_dims.d, crop_dims.h, crop_dims.w};
        nlohmann::json manifest = nlohmann::json::array();
        for (const Param* p : model.params())
            manifest.push_back({{"name", p->name}, {"shape", p->shape}});
        header["tensors"] = manifest;
        const std::string hs = header.dump();

        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot open checkpoint for writing: " + path);
        out.write(kMagic, sizeof(kMagic));
        const std::uint64_t len = hs.size();
        out.write(reinterpret_cast<const char*>(&len), sizeof(len));
        out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
        for (const Param* p : model.params())
            out.write(reinterpret_cast<const char*>(p->value.data()),
                      static_cast<std::streamsize>(p->value.size() * sizeof(double)));
        if (!out) throw IoError("checkpoint write failed: " + path);
    }

    // Rebuilds the model from the stored config and restores every tensor.
    static std::pair<UNet3d, Checkpoint> load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open checkpoint: " + path);
        char magic[8];
        in.read(magic, sizeof(magic));
        if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
            throw ConfigError("not a checkpoint file (bad magic): " + path);
        std::uint64_t len = 0;
        in.read(reinterpret_cast<char*>(&len), sizeof(len));
        std::string hs(len, '\0');
        in.read(hs.data(), static_cast<std::streamsize>(len));
        if (!in) throw IoError("truncated checkpoint header: " + path);

        nlohmann::json header;
        try {
            header = nlohmann::json::parse(hs);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("bad checkpoint header: " + std::string(e.what()));
        }
        if (header.at("version").get<int>() != kVersion)
            throw ConfigError("unsupported checkpoint version " +
                              std::to_string(header.at("version").get<int>()));

        Checkpoint meta;
        meta.config = NetworkConfig::from_json(header.at("config"));
        meta.step = header.at("step").get<int>();
        meta.loss_history = header.at("loss_history").get<std::vector<double>>();
        const auto cd = header.at("crop_dims").get<std::vector<int>>();
        meta.crop_dims = {cd.at(0), cd.at(1), cd.at(2)};

        UNet3d model(meta.config);
        auto params = model.params();
        const auto& manifest = header.at("tensors");
        if (manifest.size() != params.size())
            throw ConfigError("checkpoint tensor count does not match the architecture");
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (manifest[i].at("name").get<std::string>() != params[i]->name ||
                manifest[i].at("shape").get<std::vector<int>>() != params[i]->shape)
                throw ConfigError("checkpoint tensor " + params[i]->name +
                                  " does not match the architecture");
            in.read(reinterpret_cast<char*>(params[i]->value.data()),
                    static_cast<std::streamsize>(params[i]->value.size() * sizeof(double)));
        }
        if (!in) throw IoError("truncated checkpoint tensors: " + path);
        return {std::move(model), std::move(meta)};
    }
};

}  // namespace gliopipe::nn
