#pragma once

#include "types.hpp"

#include <filesystem>
#include <iosfwd>

namespace bayesedge
{
    struct SyntheticImage
    {
        GrayImage image;
        PixelList truth; // shape pixels with a 4-neighbour outside the shape
    };

    // Shapes at intensity `contrast` over a zero background.
    SyntheticImage shapes_from_mask(const Mask &shape, double contrast);

    // Two rectangles and a disk on a size x size canvas.
    SyntheticImage shapes_image(int size = 128, double contrast = 1.0);

    // Centred square of side size/2.
    SyntheticImage square_image(int size = 64, double contrast = 1.0);

    // Columns >= step_column are bright.
    SyntheticImage step_image(int width, int height, int step_column, double contrast = 1.0);

    struct ShingleSpec
    {
        int columns = 1;
        int rows = 3;
        int shingle_width = 96;
        int shingle_height = 64;
        int joint = 6;      // dark gap between neighbouring shingles
        int border = 0;     // dark band around the whole roof
        double shingle_level = 0.8;
        double joint_level = 0.1;
        double defect_fraction = 0.0; // disk area over shingle area
        int defect_column = 0;
        int defect_row = 1;
    };

    struct ShingleImage
    {
        GrayImage image;
        Mask defect;
        long shingle_area = 0;
        long defect_area = 0;
    };

    ShingleImage shingle_image(const ShingleSpec &spec);

    // CSV `x,y`.
    void write_truth_csv(std::ostream &os, const PixelList &truth);
    PixelList read_truth_csv(std::istream &is);
    PixelList read_truth_csv(const std::filesystem::path &path);
} // namespace bayesedge
