#pragma once

// Native bit-exact volume container plus minimal uncompressed NIfTI-1 interop.
//
// Container layout (little-endian), 40-byte header then raw data:
//   bytes  0-3   magic "CVR1"
//   bytes  4-7   version u32 = 1
//   byte   8     kind  u8   (0 scalar, 1 label, 2 feature, 3 vector-field)
//   byte   9     dtype u8   (0 float32, 1 int32; label <=> int32)
//   bytes 10-11  reserved, zero
//   bytes 12-15  channels u32
//   bytes 16-27  dims 3 x u32
//   bytes 28-39  spacing 3 x float32 (mm)
// Data follows channel-major, z fastest.

#include "cvreg/volume.hpp"

#include <array>
#include <stdexcept>
#include <string>

namespace cvreg::io {

enum class IoCode {
    BadMagic,
    VersionMismatch,
    SizeMismatch,
    KindDtypeMismatch,
    BadHeader,
    UnsupportedNifti,
    ReadFailed,
    WriteFailed,
};

struct IoError : std::runtime_error {
    IoCode code;
    IoError(IoCode c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

void write_volume(const std::string& path, const Volume& vol);
Volume read_volume(const std::string& path);

// Orientation is read but never applied; quaternion/sform values are kept
// here for callers that care.
struct NiftiMeta {
    short qform_code = 0, sform_code = 0;
    std::array<float, 3> quatern{};  // b, c, d
    std::array<float, 3> qoffset{};
    std::array<float, 12> srow{};    // rows x, y, z
};

// Uncompressed single-file NIfTI-1, 3D, dtypes int16 (scaled by
// scl_slope/scl_inter when slope != 0) and float32.
Volume read_nifti(const std::string& path, NiftiMeta* meta = nullptr);

// Single-channel volumes as float32.
void write_nifti(const std::string& path, const Volume& vol);

} // namespace cvreg::io
