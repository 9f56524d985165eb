#include "cvreg/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace cvreg::io {
namespace {

constexpr char kMagic[4] = {'C', 'V', 'R', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderSize = 40;

template <typename T>
void put(std::vector<std::uint8_t>& buf, std::size_t off, T v)
{
    std::memcpy(buf.data() + off, &v, sizeof(T));
}

template <typename T>
T get(const std::uint8_t* p)
{
    T v;
    std::memcpy(&v, p, sizeof(T));
    return v;
}

bool is_label_valued(float v)
{
    return std::isfinite(v) && v >= 0.0f && v == std::floor(v);
}

} // namespace

void write_volume(const std::string& path, const Volume& vol)
{
    const bool labels = vol.kind() == Kind::LabelMap;
    const std::int64_t count = std::int64_t(vol.channels()) * vol.voxel_count();

    if (labels)
        for (float v : vol.data())
            if (!is_label_valued(v))
                throw IoError(IoCode::KindDtypeMismatch,
                              path + ": label map contains non-integer or negative values");

    std::vector<std::uint8_t> header(kHeaderSize, 0);
    std::memcpy(header.data(), kMagic, 4);
    put<std::uint32_t>(header, 4, kVersion);
    header[8] = std::uint8_t(vol.kind());
    header[9] = labels ? 1 : 0;
    put<std::uint32_t>(header, 12, std::uint32_t(vol.channels()));
    put<std::uint32_t>(header, 16, std::uint32_t(vol.dims().x));
    put<std::uint32_t>(header, 20, std::uint32_t(vol.dims().y));
    put<std::uint32_t>(header, 24, std::uint32_t(vol.dims().z));
    put<float>(header, 28, vol.spacing().x);
    put<float>(header, 32, vol.spacing().y);
    put<float>(header, 36, vol.spacing().z);

    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw IoError(IoCode::WriteFailed, path + ": cannot open for writing");
    f.write(reinterpret_cast<const char*>(header.data()), header.size());

    if (labels) {
        std::vector<std::int32_t> raw(count);
        for (std::int64_t i = 0; i < count; ++i)
            raw[i] = std::int32_t(std::llround(vol.data()[i]));
        f.write(reinterpret_cast<const char*>(raw.data()), count * 4);
    } else {
        f.write(reinterpret_cast<const char*>(vol.data().data()), count * 4);
    }
    if (!f)
        throw IoError(IoCode::WriteFailed, path + ": write failed");
}

Volume read_volume(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw IoError(IoCode::ReadFailed, path + ": cannot open");
    f.seekg(0, std::ios::end);
    const std::int64_t file_size = f.tellg();
    f.seekg(0);

    if (file_size < std::int64_t(kHeaderSize))
        throw IoError(IoCode::BadHeader,
                      path + ": file too small for the 40-byte header (" +
                          std::to_string(file_size) + " bytes)");

    std::vector<std::uint8_t> header(kHeaderSize);
    f.read(reinterpret_cast<char*>(header.data()), kHeaderSize);

    if (std::memcmp(header.data(), kMagic, 4) != 0)
        throw IoError(IoCode::BadMagic, path + ": bad magic (expected CVR1)");
    const auto version = get<std::uint32_t>(header.data() + 4);
    if (version != kVersion)
        throw IoError(IoCode::VersionMismatch,
                      path + ": unsupported container version " + std::to_string(version));

    const std::uint8_t kind_b = header[8];
    const std::uint8_t dtype_b = header[9];
    if (kind_b > 3)
        throw IoError(IoCode::BadHeader, path + ": unknown kind byte " + std::to_string(kind_b));
    if (dtype_b > 1)
        throw IoError(IoCode::BadHeader, path + ": unknown dtype byte " + std::to_string(dtype_b));
    const Kind kind = Kind(kind_b);
    if ((kind == Kind::LabelMap) != (dtype_b == 1))
        throw IoError(IoCode::KindDtypeMismatch,
                      path + (kind == Kind::LabelMap ? ": label map must use int32 data"
                                                     : ": only label maps may use int32 data"));

    const auto channels = get<std::uint32_t>(header.data() + 12);
    const IVec3 dims{int(get<std::uint32_t>(header.data() + 16)),
                     int(get<std::uint32_t>(header.data() + 20)),
                     int(get<std::uint32_t>(header.data() + 24))};
    const Vec3 spacing{get<float>(header.data() + 28), get<float>(header.data() + 32),
                       get<float>(header.data() + 36)};
    if (channels < 1 || dims.x < 1 || dims.y < 1 || dims.z < 1)
        throw IoError(IoCode::BadHeader, path + ": non-positive dims or channels");
    if (!(spacing.x > 0) || !(spacing.y > 0) || !(spacing.z > 0) ||
        !std::isfinite(spacing.x) || !std::isfinite(spacing.y) || !std::isfinite(spacing.z))
        throw IoError(IoCode::BadHeader, path + ": spacing must be positive and finite");

    const std::int64_t count = std::int64_t(channels) * dims.x * dims.y * dims.z;
    const std::int64_t expected = count * 4;
    const std::int64_t actual = file_size - std::int64_t(kHeaderSize);
    if (actual != expected)
        throw IoError(IoCode::SizeMismatch,
                      path + ": size mismatch: expected " + std::to_string(expected) +
                          " data bytes, found " + std::to_string(actual));

    Volume vol(dims, int(channels), kind, spacing);
    if (dtype_b == 1) {
        std::vector<std::int32_t> raw(count);
        f.read(reinterpret_cast<char*>(raw.data()), expected);
        for (std::int64_t i = 0; i < count; ++i) {
            if (raw[i] < 0)
                throw IoError(IoCode::KindDtypeMismatch,
                              path + ": label map contains negative entries");
            vol.data()[i] = float(raw[i]);
        }
    } else {
        f.read(reinterpret_cast<char*>(vol.data().data()), expected);
    }
    if (!f)
        throw IoError(IoCode::ReadFailed, path + ": read failed");
    return vol;
}

namespace {

// NIfTI-1 header, 348 bytes.
#pragma pack(push, 1)
struct Nifti1Header {
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
    float slice_duration;
    float toffset;
    std::int32_t glmax, glmin;
    char descrip[80];
    char aux_file[24];
    std::int16_t qform_code;
    std::int16_t sform_code;
    float quatern_b, quatern_c, quatern_d;
    float qoffset_x, qoffset_y, qoffset_z;
    float srow_x[4];
    float srow_y[4];
    float srow_z[4];
    char intent_name[16];
    char magic[4];
};
#pragma pack(pop)
static_assert(sizeof(Nifti1Header) == 348);

constexpr std::int16_t kDtInt16 = 4;
constexpr std::int16_t kDtFloat32 = 16;

} // namespace

Volume read_nifti(const std::string& path, NiftiMeta* meta)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw IoError(IoCode::ReadFailed, path + ": cannot open");

    unsigned char gz[2] = {0, 0};
    f.read(reinterpret_cast<char*>(gz), 2);
    if (f && gz[0] == 0x1f && gz[1] == 0x8b)
        throw IoError(IoCode::UnsupportedNifti,
                      path + ": unsupported NIfTI feature: gzip-compressed file");
    f.seekg(0);

    Nifti1Header h{};
    f.read(reinterpret_cast<char*>(&h), sizeof(h));
    if (!f)
        throw IoError(IoCode::BadHeader, path + ": file too small for a NIfTI-1 header");
    if (h.sizeof_hdr != 348)
        throw IoError(IoCode::BadHeader,
                      path + ": sizeof_hdr is " + std::to_string(h.sizeof_hdr) +
                          ", expected 348 (big-endian files are unsupported)");
    if (std::memcmp(h.magic, "n+1", 4) != 0) {
        if (std::memcmp(h.magic, "ni1", 4) == 0)
            throw IoError(IoCode::UnsupportedNifti,
                          path + ": unsupported NIfTI feature: two-file (.hdr/.img) pairs");
        throw IoError(IoCode::BadMagic, path + ": bad NIfTI magic");
    }
    if (h.dim[0] != 3)
        throw IoError(IoCode::UnsupportedNifti,
                      path + ": unsupported NIfTI feature: dim[0] = " + std::to_string(h.dim[0]) +
                          " (only 3D volumes)");
    if (h.datatype != kDtInt16 && h.datatype != kDtFloat32)
        throw IoError(IoCode::UnsupportedNifti,
                      path + ": unsupported NIfTI feature: datatype " + std::to_string(h.datatype) +
                          " (only int16 and float32)");

    const IVec3 dims{h.dim[1], h.dim[2], h.dim[3]};
    if (dims.x < 1 || dims.y < 1 || dims.z < 1)
        throw IoError(IoCode::BadHeader, path + ": non-positive dims");
    auto fix_sp = [](float p) { return p > 0.0f && std::isfinite(p) ? p : 1.0f; };
    const Vec3 spacing{fix_sp(h.pixdim[1]), fix_sp(h.pixdim[2]), fix_sp(h.pixdim[3])};

    if (meta) {
        meta->qform_code = h.qform_code;
        meta->sform_code = h.sform_code;
        meta->quatern = {h.quatern_b, h.quatern_c, h.quatern_d};
        meta->qoffset = {h.qoffset_x, h.qoffset_y, h.qoffset_z};
        for (int i = 0; i < 4; ++i) {
            meta->srow[i] = h.srow_x[i];
            meta->srow[4 + i] = h.srow_y[i];
            meta->srow[8 + i] = h.srow_z[i];
        }
    }

    const std::int64_t offset = std::int64_t(h.vox_offset);
    if (offset < 348)
        throw IoError(IoCode::BadHeader, path + ": vox_offset below the header size");
    f.seekg(offset);

    const std::int64_t count = std::int64_t(dims.x) * dims.y * dims.z;
    Volume vol(dims, 1, Kind::ScalarImage, spacing);
    const bool scaled = h.scl_slope != 0.0f;

    if (h.datatype == kDtInt16) {
        std::vector<std::int16_t> raw(count);
        f.read(reinterpret_cast<char*>(raw.data()), count * 2);
        if (!f)
            throw IoError(IoCode::SizeMismatch, path + ": truncated NIfTI data section");
        for (std::int64_t i = 0; i < count; ++i) {
            // NIfTI stores x fastest; the container stores z fastest.
            const int x = int(i % dims.x);
            const int y = int((i / dims.x) % dims.y);
            const int z = int(i / (std::int64_t(dims.x) * dims.y));
            const float v = float(raw[i]);
            vol.at(0, x, y, z) = scaled ? h.scl_slope * v + h.scl_inter : v;
        }
    } else {
        std::vector<float> raw(count);
        f.read(reinterpret_cast<char*>(raw.data()), count * 4);
        if (!f)
            throw IoError(IoCode::SizeMismatch, path + ": truncated NIfTI data section");
        for (std::int64_t i = 0; i < count; ++i) {
            const int x = int(i % dims.x);
            const int y = int((i / dims.x) % dims.y);
            const int z = int(i / (std::int64_t(dims.x) * dims.y));
            vol.at(0, x, y, z) = raw[i];
        }
    }
    return vol;
}

void write_nifti(const std::string& path, const Volume& vol)
{
    if (vol.channels() != 1)
        throw IoError(IoCode::UnsupportedNifti,
                      path + ": unsupported NIfTI feature: multi-channel volumes");

    Nifti1Header h{};
    h.sizeof_hdr = 348;
    h.regular = 'r';
    h.dim[0] = 3;
    h.dim[1] = std::int16_t(vol.dims().x);
    h.dim[2] = std::int16_t(vol.dims().y);
    h.dim[3] = std::int16_t(vol.dims().z);
    for (int i = 4; i < 8; ++i)
        h.dim[i] = 1;
    h.datatype = kDtFloat32;
    h.bitpix = 32;
    h.pixdim[0] = 1.0f;
    h.pixdim[1] = vol.spacing().x;
    h.pixdim[2] = vol.spacing().y;
    h.pixdim[3] = vol.spacing().z;
    h.vox_offset = 352.0f;
    h.scl_slope = 1.0f;
    h.scl_inter = 0.0f;
    h.sform_code = 1;
    h.srow_x[0] = vol.spacing().x;
    h.srow_y[1] = vol.spacing().y;
    h.srow_z[2] = vol.spacing().z;
    std::memcpy(h.magic, "n+1", 4);

    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw IoError(IoCode::WriteFailed, path + ": cannot open for writing");
    f.write(reinterpret_cast<const char*>(&h), sizeof(h));
    const char ext[4] = {0, 0, 0, 0};
    f.write(ext, 4);

    const IVec3 d = vol.dims();
    std::vector<float> raw(std::size_t(vol.voxel_count()));
    for (std::int64_t i = 0; i < vol.voxel_count(); ++i) {
        const int x = int(i % d.x);
        const int y = int((i / d.x) % d.y);
        const int z = int(i / (std::int64_t(d.x) * d.y));
        raw[i] = vol.at(0, x, y, z);
    }
    f.write(reinterpret_cast<const char*>(raw.data()), raw.size() * 4);
    if (!f)
        throw IoError(IoCode::WriteFailed, path + ": write failed");
}

} // namespace cvreg::io
