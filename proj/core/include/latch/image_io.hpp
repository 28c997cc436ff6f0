#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "latch/image.hpp"

namespace latch {

// Decodes a binary (P5) or ASCII (P2) portable graymap with maxval <= 255.
// Sample values are kept verbatim (no rescaling to 255).
GrayImage load_pgm(std::span<const std::uint8_t> bytes);

// Canonical P5 encoding: "P5\n<w> <h>\n255\n" followed by the raster.
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes);

// Loads .pgm files, and .png files when built with PNG support. PNG color
// images are converted to luma.
GrayImage load_image(const std::string& path);
void save_pgm(const std::string& path, const GrayImage& img);

bool png_supported();

}  // namespace latch
