#pragma once

#include "types.hpp"

#include <filesystem>

namespace bayesedge
{
    /// Reads binary/ASCII PGM or grayscale PNG; intensities are scaled to [0, 1].
    GrayImage read_image(const std::filesystem::path &path);

    // 8-bit P5, values clamped to [0, 1] and rounded to the nearest level.
    void write_pgm(const std::filesystem::path &path, const GrayImage &img);

    // Nonzero mask entries become 255.
    void write_mask_pgm(const std::filesystem::path &path, const Mask &mask);
} // namespace bayesedge
