#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gliopipe/nifti.hpp"
#include "gliopipe/text.hpp"
#include "gliopipe/volume.hpp"

namespace gliopipe {

namespace fs = std::filesystem;

// Internal raw case format: a directory holding a JSON sidecar plus one
// little-endian binary grid per modality (float32) and an optional uint8
// label grid. Grids are stored in memory order (w fastest).
namespace raw {

template <typename T>
void write_bin(const fs::path& path, const std::vector<T>& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(T)));
    if (!out) throw IoError("write failed: " + path.string());
}

template <typename T>
void read_bin(const fs::path& path, std::vector<T>& data, std::size_t count) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    data.resize(count);
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(count * sizeof(T)));
    if (in.gcount() != static_cast<std::streamsize>(count * sizeof(T)))
        throw IoError("short read (expected " + std::to_string(count * sizeof(T)) +
                      " bytes): " + path.string());
}

}  // namespace raw

inline void save_case_raw(const fs::path& dir, const MultiModalVolume& volume,
                          const LabelVolume* label) {
    fs::create_directories(dir);
    nlohmann::json meta;
    meta["case_id"] = volume.case_id;
    meta["dims"] = {volume.dims().d, volume.dims().h, volume.dims().w};
    meta["spacing"] = {volume.spacing.d, volume.spacing.h, volume.spacing.w};
    meta["dtype"] = "float32";
    meta["modalities"] = kModalityNames;
    meta["has_label"] = (label != nullptr);
    write_text_file((dir / "meta.json").string(), meta.dump(2) + "\n");
    for (int c = 0; c < kNumModalities; ++c)
        raw::write_bin(dir / (std::string(kModalityNames[c]) + ".bin"),
                       volume.channels[c].data());
    if (label) raw::write_bin(dir / "label.bin", label->labels.data());
}

inline std::pair<MultiModalVolume, std::optional<LabelVolume>> load_case_raw(
    const fs::path& dir) {
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(read_text_file((dir / "meta.json").string()));
    } catch (const nlohmann::json::exception& e) {
        throw IngestError("bad meta.json in " + dir.string() + ": " + e.what());
    }
    MultiModalVolume volume;
    volume.case_id = meta.at("case_id").get<std::string>();
    const auto dims_v = meta.at("dims").get<std::vector<int>>();
    const auto spac_v = meta.at("spacing").get<std::vector<double>>();
    if (dims_v.size() != 3 || spac_v.size() != 3)
        throw IngestError("dims/spacing must have 3 entries in " + dir.string());
    const Dims3 dims{dims_v[0], dims_v[1], dims_v[2]};
    volume.spacing = {spac_v[0], spac_v[1], spac_v[2]};
    const auto count = static_cast<std::size_t>(dims.voxels());
    for (int c = 0; c < kNumModalities; ++c) {
        FloatGrid grid(dims);
        raw::read_bin(dir / (std::string(kModalityNames[c]) + ".bin"), grid.data(), count);
        volume.channels[c] = std::move(grid);
    }
    volume.validate();

    std::optional<LabelVolume> label;
    if (meta.at("has_label").get<bool>()) {
        label.emplace();
        label->case_id = volume.case_id;
        ByteGrid grid(dims);
        raw::read_bin(dir / "label.bin", grid.data(), count);
        label->labels = std::move(grid);
        label->validate();
    }
    return {std::move(volume), std::move(label)};
}

inline void save_pred_labels_raw(const fs::path& dir, const LabelVolume& label,
                                 const Spacing& spacing) {
    fs::create_directories(dir);
    nlohmann::json meta;
    meta["case_id"] = label.case_id;
    meta["dims"] = {label.dims().d, label.dims().h, label.dims().w};
    meta["spacing"] = {spacing.d, spacing.h, spacing.w};
    meta["dtype"] = "uint8";
    write_text_file((dir / "meta.json").string(), meta.dump(2) + "\n");
    raw::write_bin(dir / "label.bin", label.labels.data());
}

inline LabelVolume load_pred_labels_raw(const fs::path& dir) {
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(read_text_file((dir / "meta.json").string()));
    } catch (const nlohmann::json::exception& e) {
        throw IngestError("bad meta.json in " + dir.string() + ": " + e.what());
    }
    const auto dims_v = meta.at("dims").get<std::vector<int>>();
    const Dims3 dims{dims_v.at(0), dims_v.at(1), dims_v.at(2)};
    LabelVolume label;
    label.case_id = meta.at("case_id").get<std::string>();
    ByteGrid grid(dims);
    raw::read_bin(dir / "label.bin", grid.data(), static_cast<std::size_t>(dims.voxels()));
    label.labels = std::move(grid);
    label.validate();
    return label;
}

// Dataset manifest: {"cases": [{"id": ..., "dir": ...}, ...]} with dirs
// relative to the manifest location.
struct DatasetIndex {
    fs::path root;
    std::vector<std::pair<std::string, fs::path>> cases;  // (id, absolute dir)
};

inline DatasetIndex load_dataset_index(const fs::path& dataset_dir) {
    const fs::path manifest = dataset_dir / "manifest.json";
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(manifest.string()));
    } catch (const nlohmann::json::exception& e) {
        throw IngestError("bad manifest " + manifest.string() + ": " + e.what());
    }
    DatasetIndex index;
    index.root = dataset_dir;
    for (const auto& entry : j.at("cases")) {
        index.cases.emplace_back(entry.at("id").get<std::string>(),
                                 dataset_dir / entry.at("dir").get<std::string>());
    }
    return index;
}

inline void save_dataset_index(const fs::path& dataset_dir,
                               const std::vector<std::pair<std::string, std::string>>& cases) {
    nlohmann::json j;
    j["cases"] = nlohmann::json::array();
    for (const auto& [id, dir] : cases) j["cases"].push_back({{"id", id}, {"dir", dir}});
    fs::create_directories(dataset_dir);
    write_text_file((dataset_dir / "manifest.json").string(), j.dump(2) + "\n");
}

}  // namespace gliopipe
