#include "bayesedge/synth.hpp"

#include "bayesedge/errors.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>

namespace bayesedge
{
    namespace
    {
        void fill_rect(Mask &m, int x0, int y0, int x1, int y1)
        {
            m.block(y0, x0, y1 - y0, x1 - x0).setOnes();
        }

        void fill_disk(Mask &m, double cx, double cy, double r)
        {
            for (int y = 0; y < height(m); ++y)
                for (int x = 0; x < width(m); ++x)
                    if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r)
                        m(y, x) = 1;
        }
    } // namespace

    SyntheticImage shapes_from_mask(const Mask &shape, double contrast)
    {
        SyntheticImage out;
        out.image = shape.cast<double>() * contrast;
        for (int y = 0; y < height(shape); ++y)
            for (int x = 0; x < width(shape); ++x)
            {
                if (!shape(y, x))
                    continue;
                bool boundary = false;
                for (const auto &[dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}})
                    if (in_bounds(shape, x + dx, y + dy) && !shape(y + dy, x + dx))
                        boundary = true;
                if (boundary)
                    out.truth.push_back({x, y});
            }
        return out;
    }

    SyntheticImage shapes_image(int size, double contrast)
    {
        if (size < 32)
            throw InvalidArgument("shapes image needs size >= 32");
        Mask m = Mask::Zero(size, size);
        const double s = size / 128.0;
        auto at = [s](double v) { return static_cast<int>(std::lround(v * s)); };
        fill_rect(m, at(16), at(16), at(56), at(52));
        fill_rect(m, at(72), at(20), at(112), at(60));
        fill_disk(m, 64.0 * s, 92.0 * s, 22.0 * s);
        return shapes_from_mask(m, contrast);
    }

    SyntheticImage square_image(int size, double contrast)
    {
        if (size < 8)
            throw InvalidArgument("square image needs size >= 8");
        Mask m = Mask::Zero(size, size);
        fill_rect(m, size / 4, size / 4, size - size / 4, size - size / 4);
        return shapes_from_mask(m, contrast);
    }

    SyntheticImage step_image(int width, int height, int step_column, double contrast)
    {
        if (width < 2 || height < 1 || step_column <= 0 || step_column >= width)
            throw InvalidArgument("step column must split the image");
        Mask m = Mask::Zero(height, width);
        fill_rect(m, step_column, 0, width, height);
        SyntheticImage out;
        out.image = m.cast<double>() * contrast;
        for (int y = 0; y < height; ++y)
            out.truth.push_back({step_column, y});
        return out;
    }

    ShingleImage shingle_image(const ShingleSpec &spec)
    {
        if (spec.columns < 1 || spec.rows < 1 || spec.shingle_width < 8 || spec.shingle_height < 8 || spec.joint < 1
            || spec.border < 0)
            throw InvalidArgument("invalid shingle layout");
        if (!(spec.defect_fraction >= 0.0 && spec.defect_fraction < 0.6))
            throw InvalidArgument("defect fraction must lie in [0, 0.6)");
        if (spec.defect_column < 0 || spec.defect_column >= spec.columns || spec.defect_row < 0
            || spec.defect_row >= spec.rows)
            throw InvalidArgument("defect shingle is outside the grid");

        const int w = 2 * spec.border + spec.columns * spec.shingle_width + (spec.columns - 1) * spec.joint;
        const int h = 2 * spec.border + spec.rows * spec.shingle_height + (spec.rows - 1) * spec.joint;
        ShingleImage out;
        out.image = GrayImage::Constant(h, w, spec.joint_level);
        out.defect = Mask::Zero(h, w);
        out.shingle_area = static_cast<long>(spec.shingle_width) * spec.shingle_height;
        for (int r = 0; r < spec.rows; ++r)
            for (int c = 0; c < spec.columns; ++c)
                out.image
                    .block(spec.border + r * (spec.shingle_height + spec.joint),
                           spec.border + c * (spec.shingle_width + spec.joint), spec.shingle_height, spec.shingle_width)
                    .setConstant(spec.shingle_level);

        if (spec.defect_fraction > 0.0)
        {
            const double radius = std::sqrt(spec.defect_fraction * static_cast<double>(out.shingle_area) / std::numbers::pi);
            const double cx = spec.border + spec.defect_column * (spec.shingle_width + spec.joint) + (spec.shingle_width - 1) / 2.0;
            const double cy = spec.border + spec.defect_row * (spec.shingle_height + spec.joint) + (spec.shingle_height - 1) / 2.0;
            fill_disk(out.defect, cx, cy, radius);
            out.defect_area = static_cast<long>(out.defect.cast<long>().sum());
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    if (out.defect(y, x))
                        out.image(y, x) = spec.joint_level;
        }
        return out;
    }

    void write_truth_csv(std::ostream &os, const PixelList &truth)
    {
        os << "x,y\n";
        for (const Pixel &p : truth)
            os << p.x << ',' << p.y << '\n';
    }

    PixelList read_truth_csv(std::istream &is)
    {
        std::string line;
        if (!std::getline(is, line) || line.rfind("x,y", 0) != 0)
            throw IoError("truth CSV must start with an `x,y` header");
        PixelList out;
        while (std::getline(is, line))
        {
            if (line.empty() || line == "\r")
                continue;
            const auto comma = line.find(',');
            try
            {
                if (comma == std::string::npos)
                    throw std::invalid_argument("missing comma");
                std::size_t used = 0;
                const int x = std::stoi(line.substr(0, comma), &used);
                const int y = std::stoi(line.substr(comma + 1));
                out.push_back({x, y});
            }
            catch (const std::logic_error &)
            {
                throw IoError("malformed truth CSV line: " + line);
            }
        }
        return out;
    }

    PixelList read_truth_csv(const std::filesystem::path &path)
    {
        std::ifstream is(path);
        if (!is)
            throw IoError("cannot open " + path.string());
        return read_truth_csv(is);
    }
} // namespace bayesedge
