#pragma once

#include <zlib.h>

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include "gliopipe/volume.hpp"

namespace gliopipe {
namespace nifti {

// NIfTI-1 single-file header (348 bytes). Only the fields this pipeline uses
// are interpreted; everything else is preserved as zeros on write.
#pragma pack(push, 1)
struct Header {
    std::int32_t sizeof_hdr;
    char data_type[10];
    char db_name[18];
    std::int32_t extents;
    std::int16_t session_error;
    char regular;
    char dim_info;
    std::int16_t dim[8];
    float intent_p1, intent_p2, intent_p3;
    std::int16_t intent_code;
    std::int16_t datatype;
    std::int16_t bitpix;
    std::int16_t slice_start;
    float pixdim[8];
    float vox_offset;
    float scl_slope;
    float scl_inter;
    std::int16_t slice_end;
    char slice_code;
    char xyzt_units;
    float cal_max, cal_min;
    float slice_duration, toffset;
    std::int32_t glmax, glmin;
    char descrip[80];
    char aux_file[24];
    std::int16_t qform_code, sform_code;
    float quatern_b, quatern_c, quatern_d;
    float qoffset_x, qoffset_y, qoffset_z;
    float srow_x[4], srow_y[4], srow_z[4];
    char intent_name[16];
    char magic[4];
};
#pragma pack(pop)
static_assert(sizeof(Header) == 348, "NIfTI-1 header must be 348 bytes");

enum Datatype : std::int16_t {
    kUint8 = 2,
    kInt16 = 4,
    kInt32 = 8,
    kFloat32 = 16,
    kFloat64 = 64,
    kUint16 = 512,
};

namespace detail {

template <typename T>
void byteswap(T& value) {
    auto* p = reinterpret_cast<unsigned char*>(&value);
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
        std::swap(p[i], p[sizeof(T) - 1 - i]);
}

inline void swap_header(Header& h) {
    byteswap(h.sizeof_hdr);
    for (auto& v : h.dim) byteswap(v);
    byteswap(h.datatype);
    byteswap(h.bitpix);
    for (auto& v : h.pixdim) byteswap(v);
    byteswap(h.vox_offset);
    byteswap(h.scl_slope);
    byteswap(h.scl_inter);
}

struct GzFile {
    gzFile f = nullptr;
    explicit GzFile(const std::string& path, const char* mode) {
        f = gzopen(path.c_str(), mode);
        if (!f) throw IoError("cannot open " + path);
    }
    ~GzFile() {
        if (f) gzclose(f);
    }
    GzFile(const GzFile&) = delete;
    GzFile& operator=(const GzFile&) = delete;
};

inline void read_exact(gzFile f, void* buf, std::size_t bytes, const std::string& path) {
    std::size_t done = 0;
    auto* p = static_cast<unsigned char*>(buf);
    while (done < bytes) {
        const unsigned chunk = static_cast<unsigned>(
            std::min<std::size_t>(bytes - done, 1u << 30));
        const int got = gzread(f, p + done, chunk);
        if (got <= 0) throw IoError("truncated or unreadable NIfTI file: " + path);
        done += static_cast<std::size_t>(got);
    }
}

inline void write_exact(gzFile f, const void* buf, std::size_t bytes, const std::string& path) {
    if (gzwrite(f, buf, static_cast<unsigned>(bytes)) != static_cast<int>(bytes))
        throw IoError("write failed: " + path);
}

template <typename Raw>
void convert(const std::vector<unsigned char>& raw, std::vector<double>& out, bool swap) {
    const std::size_t n = raw.size() / sizeof(Raw);
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        Raw v;
        std::memcpy(&v, raw.data() + i * sizeof(Raw), sizeof(Raw));
        if (swap) byteswap(v);
        out[i] = static_cast<double>(v);
    }
}

}  // namespace detail

struct RawVolume {
    Dims3 dims;
    Spacing spacing;
    std::vector<double> values;  // file order: x fastest, then y, then z
    Datatype stored_type = kFloat32;
};

inline RawVolume read_file(const std::string& path) {
    detail::GzFile file(path, "rb");
    Header h{};
    detail::read_exact(file.f, &h, sizeof(h), path);
    bool swap = false;
    if (h.sizeof_hdr != 348) {
        detail::swap_header(h);
        swap = true;
        if (h.sizeof_hdr != 348)
            throw IoError("not a NIfTI-1 file (bad sizeof_hdr): " + path);
    }
    if (std::strncmp(h.magic, "n+1", 3) != 0 && std::strncmp(h.magic, "ni1", 3) != 0)
        throw IoError("not a NIfTI-1 file (bad magic): " + path);
    if (h.dim[0] < 3)
        throw IngestError("expected a 3D NIfTI volume: " + path);
    for (int i = 4; i <= h.dim[0]; ++i)
        if (h.dim[i] > 1)
            throw IngestError("expected a single 3D volume, got extra dimensions: " + path);

    RawVolume out;
    out.dims = {h.dim[1], h.dim[2], h.dim[3]};
    if (out.dims.voxels() <= 0) throw IngestError("bad dimensions in " + path);
    out.spacing = {h.pixdim[1], h.pixdim[2], h.pixdim[3]};
    if (!out.spacing.valid()) out.spacing = {1.0, 1.0, 1.0};
    out.stored_type = static_cast<Datatype>(h.datatype);

    const std::size_t n = static_cast<std::size_t>(out.dims.voxels());
    std::size_t elem = 0;
    switch (h.datatype) {
        case kUint8: elem = 1; break;
        case kInt16: case kUint16: elem = 2; break;
        case kInt32: case kFloat32: elem = 4; break;
        case kFloat64: elem = 8; break;
        default:
            throw IngestError("unsupported NIfTI datatype " + std::to_string(h.datatype) +
                              " in " + path);
    }

    // Skip any header extension up to vox_offset.
    const long offset = static_cast<long>(h.vox_offset);
    if (offset > 348) {
        std::vector<unsigned char> skip(static_cast<std::size_t>(offset) - 348);
        if (!skip.empty()) detail::read_exact(file.f, skip.data(), skip.size(), path);
    }

    std::vector<unsigned char> raw(n * elem);
    detail::read_exact(file.f, raw.data(), raw.size(), path);

    switch (h.datatype) {
        case kUint8: detail::convert<std::uint8_t>(raw, out.values, swap); break;
        case kInt16: detail::convert<std::int16_t>(raw, out.values, swap); break;
        case kUint16: detail::convert<std::uint16_t>(raw, out.values, swap); break;
        case kInt32: detail::convert<std::int32_t>(raw, out.values, swap); break;
        case kFloat32: detail::convert<float>(raw, out.values, swap); break;
        case kFloat64: detail::convert<double>(raw, out.values, swap); break;
        default: break;
    }

    if (h.scl_slope != 0.0f && !(h.scl_slope == 1.0f && h.scl_inter == 0.0f))
        for (double& v : out.values)
            v = v * h.scl_slope + h.scl_inter;
    return out;
}

inline FloatGrid to_grid(const RawVolume& raw) {
    FloatGrid grid(raw.dims);
    std::size_t i = 0;
    for (int z = 0; z < raw.dims.w; ++z)
        for (int y = 0; y < raw.dims.h; ++y)
            for (int x = 0; x < raw.dims.d; ++x)
                grid.at(x, y, z) = static_cast<float>(raw.values[i++]);
    return grid;
}

inline ByteGrid to_label_grid(const RawVolume& raw, const std::string& path) {
    ByteGrid grid(raw.dims);
    std::size_t i = 0;
    for (int z = 0; z < raw.dims.w; ++z)
        for (int y = 0; y < raw.dims.h; ++y)
            for (int x = 0; x < raw.dims.d; ++x) {
                const double v = raw.values[i++];
                const auto b = static_cast<std::uint8_t>(v);
                if (static_cast<double>(b) != v || !valid_label(b))
                    throw LabelError("label value " + std::to_string(v) +
                                     " outside {0,1,2,4} in " + path);
                grid.at(x, y, z) = b;
            }
    return grid;
}

namespace detail {

inline Header make_header(const Dims3& dims, const Spacing& spacing, Datatype dt,
                          std::int16_t bitpix) {
    Header h{};
    h.sizeof_hdr = 348;
    h.regular = 'r';
    h.dim[0] = 3;
    h.dim[1] = static_cast<std::int16_t>(dims.d);
    h.dim[2] = static_cast<std::int16_t>(dims.h);
    h.dim[3] = static_cast<std::int16_t>(dims.w);
    for (int i = 4; i < 8; ++i) h.dim[i] = 1;
    h.datatype = dt;
    h.bitpix = bitpix;
    h.pixdim[0] = 1.0f;
    h.pixdim[1] = static_cast<float>(spacing.d);
    h.pixdim[2] = static_cast<float>(spacing.h);
    h.pixdim[3] = static_cast<float>(spacing.w);
    h.vox_offset = 352.0f;
    h.scl_slope = 1.0f;
    h.xyzt_units = 2;  // millimeters
    std::memcpy(h.magic, "n+1", 4);
    return h;
}

template <typename T, typename Grid>
void write_volume(const std::string& path, const Grid& grid, const Spacing& spacing,
                  Datatype dt, std::int16_t bitpix) {
    GzFile file(path, path.ends_with(".gz") ? "wb" : "wbT");  // T: no compression wrapper
    const Header h = make_header(grid.dims(), spacing, dt, bitpix);
    write_exact(file.f, &h, sizeof(h), path);
    const char pad[4] = {0, 0, 0, 0};
    write_exact(file.f, pad, 4, path);
    const Dims3& dims = grid.dims();
    std::vector<T> buf;
    buf.reserve(static_cast<std::size_t>(dims.voxels()));
    for (int z = 0; z < dims.w; ++z)
        for (int y = 0; y < dims.h; ++y)
            for (int x = 0; x < dims.d; ++x)
                buf.push_back(static_cast<T>(grid.at(x, y, z)));
    write_exact(file.f, buf.data(), buf.size() * sizeof(T), path);
}

}  // namespace detail

inline void write_image(const std::string& path, const FloatGrid& grid, const Spacing& spacing) {
    detail::write_volume<float>(path, grid, spacing, kFloat32, 32);
}

inline void write_labels(const std::string& path, const ByteGrid& grid, const Spacing& spacing) {
    detail::write_volume<std::uint8_t>(path, grid, spacing, kUint8, 8);
}

}  // namespace nifti

// Load one case from four modality files (fixed order T1, T1Gd, T2, FLAIR)
// plus an optional label file. All grids must agree on shape.
inline std::pair<MultiModalVolume, std::optional<LabelVolume>> load_case(
    const std::array<std::string, 4>& image_paths,
    const std::optional<std::string>& label_path, const std::string& case_id) {
    MultiModalVolume volume;
    volume.case_id = case_id;
    for (int c = 0; c < kNumModalities; ++c) {
        nifti::RawVolume raw = nifti::read_file(image_paths[c]);
        if (c == 0) {
            volume.spacing = raw.spacing;
        } else if (!(raw.dims == volume.channels[0].dims())) {
            throw IngestError("modality shapes disagree: " + image_paths[c] + " is " +
                              raw.dims.str() + ", expected " +
                              volume.channels[0].dims().str());
        }
        volume.channels[c] = nifti::to_grid(raw);
    }
    volume.validate();

    std::optional<LabelVolume> label;
    if (label_path) {
        nifti::RawVolume raw = nifti::read_file(*label_path);
        if (!(raw.dims == volume.dims()))
            throw IngestError("label shape " + raw.dims.str() + " does not match image " +
                              volume.dims().str());
        label.emplace();
        label->case_id = case_id;
        label->labels = nifti::to_label_grid(raw, *label_path);
    }
    return {std::move(volume), std::move(label)};
}

}  // namespace gliopipe
