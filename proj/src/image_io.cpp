#include "bayesedge/image_io.hpp"

#include "bayesedge/errors.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <vector>

namespace bayesedge
{
    namespace
    {
        class PgmHeaderReader
        {
        public:
            explicit PgmHeaderReader(const std::vector<unsigned char> &bytes) : bytes_(bytes) {}

            long next_int()
            {
                skip_space_and_comments();
                if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_]))
                    throw IoError("malformed PGM header");
                long v = 0;
                while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_]))
                {
                    v = v * 10 + (bytes_[pos_++] - '0');
                    if (v > 1'000'000'000)
                        throw IoError("PGM header value out of range");
                }
                return v;
            }

            // Exactly one whitespace byte separates maxval from the raster.
            std::size_t raster_start()
            {
                if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
                    throw IoError("malformed PGM header");
                return pos_ + 1;
            }

            std::size_t position() const { return pos_; }

        private:
            void skip_space_and_comments()
            {
                while (pos_ < bytes_.size())
                {
                    if (std::isspace(bytes_[pos_]))
                        ++pos_;
                    else if (bytes_[pos_] == '#')
                        while (pos_ < bytes_.size() && bytes_[pos_] != '\n')
                            ++pos_;
                    else
                        break;
                }
            }

            const std::vector<unsigned char> &bytes_;
            std::size_t pos_ = 2;
        };

        GrayImage decode_pgm(const std::vector<unsigned char> &bytes, bool binary)
        {
            PgmHeaderReader reader(bytes);
            const long w = reader.next_int();
            const long h = reader.next_int();
            const long maxval = reader.next_int();
            if (w < 1 || h < 1 || w > 65536 || h > 65536)
                throw IoError("PGM dimensions out of range");
            if (maxval < 1 || maxval > 65535)
                throw IoError("PGM maxval must be in [1, 65535]");

            GrayImage img(h, w);
            const double scale = 1.0 / static_cast<double>(maxval);
            const std::size_t count = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
            if (binary)
            {
                const std::size_t start = reader.raster_start();
                const std::size_t bpp = maxval > 255 ? 2 : 1;
                if (bytes.size() < start + count * bpp)
                    throw IoError("PGM raster is truncated");
                for (std::size_t i = 0; i < count; ++i)
                {
                    long v = bpp == 1 ? bytes[start + i] : (bytes[start + 2 * i] << 8) | bytes[start + 2 * i + 1];
                    if (v > maxval)
                        throw IoError("PGM sample exceeds maxval");
                    img.data()[i] = static_cast<double>(v) * scale;
                }
            }
            else
            {
                for (std::size_t i = 0; i < count; ++i)
                {
                    const long v = reader.next_int();
                    if (v > maxval)
                        throw IoError("PGM sample exceeds maxval");
                    img.data()[i] = static_cast<double>(v) * scale;
                }
            }
            return img;
        }

        GrayImage decode_png(const std::filesystem::path &path)
        {
            png_image image{};
            image.version = PNG_IMAGE_VERSION;
            if (!png_image_begin_read_from_file(&image, path.c_str()))
                throw IoError("cannot decode PNG: " + std::string(image.message));
            image.format = PNG_FORMAT_GRAY;
            std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
            if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr))
            {
                png_image_free(&image);
                throw IoError("cannot decode PNG: " + std::string(image.message));
            }
            GrayImage img(image.height, image.width);
            for (std::size_t i = 0; i < buffer.size(); ++i)
                img.data()[i] = buffer[i] / 255.0;
            return img;
        }

        std::uint8_t quantize(double v)
        {
            if (!(v > 0.0))
                return 0;
            if (v >= 1.0)
                return 255;
            return static_cast<std::uint8_t>(std::lround(v * 255.0));
        }

        void write_p5(const std::filesystem::path &path, int w, int h, const std::vector<std::uint8_t> &raster)
        {
            std::ofstream out(path, std::ios::binary);
            if (!out)
                throw IoError("cannot open for writing: " + path.string());
            out << "P5\n" << w << ' ' << h << "\n255\n";
            out.write(reinterpret_cast<const char *>(raster.data()), static_cast<std::streamsize>(raster.size()));
            if (!out)
                throw IoError("failed writing: " + path.string());
        }
    } // namespace

    GrayImage read_image(const std::filesystem::path &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw IoError("cannot open image: " + path.string());
        std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        static constexpr unsigned char png_magic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
        if (bytes.size() >= 8 && std::equal(png_magic, png_magic + 8, bytes.begin()))
            return decode_png(path);
        if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '2'))
            return decode_pgm(bytes, bytes[1] == '5');
        throw IoError("unrecognized image format (expected PGM or PNG): " + path.string());
    }

    void write_pgm(const std::filesystem::path &path, const GrayImage &img)
    {
        std::vector<std::uint8_t> raster(static_cast<std::size_t>(img.size()));
        for (std::size_t i = 0; i < raster.size(); ++i)
            raster[i] = quantize(img.data()[i]);
        write_p5(path, width(img), height(img), raster);
    }

    void write_mask_pgm(const std::filesystem::path &path, const Mask &mask)
    {
        std::vector<std::uint8_t> raster(static_cast<std::size_t>(mask.size()));
        for (std::size_t i = 0; i < raster.size(); ++i)
            raster[i] = mask.data()[i] ? 255 : 0;
        write_p5(path, width(mask), height(mask), raster);
    }
} // namespace bayesedge
