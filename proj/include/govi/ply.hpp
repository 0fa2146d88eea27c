#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "govi/geometry.hpp"

namespace govi::ply {

enum class Format { Ascii, BinaryLittleEndian };

/// Vertex-only PLY content. Optional attributes are empty when absent.
struct VertexData {
    std::vector<Vec3> points;
    std::vector<std::array<std::uint8_t, 3>> colors;
    std::vector<Vec3> normals;
    std::vector<float> quality;
    // Declare attributes in the header even when there are no vertices.
    bool declare_colors = false;
    bool declare_normals = false;
    bool declare_quality = false;
};

/// Writes x,y,z (float32), then red,green,blue (uint8), nx,ny,nz (float32)
/// and quality (float32) when present.
void write(const std::filesystem::path& path, const VertexData& data, Format format = Format::BinaryLittleEndian);

/// Reads ascii, binary_little_endian and binary_big_endian vertex data.
/// Elements after `vertex` are ignored.
VertexData read(const std::filesystem::path& path);

} // namespace govi::ply
