#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace lffont {

// 8-bit grayscale raster, row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels;

    uint8_t& at(int y, int x) { return pixels[static_cast<size_t>(y) * width + x]; }
    uint8_t at(int y, int x) const { return pixels[static_cast<size_t>(y) * width + x]; }
};

// Minimal PNG codec for the glyph cache: 8-bit grayscale, non-interlaced.
// Files written here are standard PNGs readable by any viewer.
void write_gray_png(const std::filesystem::path& path, const GrayImage& img);
GrayImage read_gray_png(const std::filesystem::path& path);

}  // namespace lffont
