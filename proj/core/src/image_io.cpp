#include "mfid/image_io.hpp"

#include <png.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "mfid/error.hpp"

namespace mfid {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) {
        throw IoError("cannot open '" + path.string() + "': " + std::strerror(errno));
    }
    return f;
}

double max_sample(BitDepth depth) {
    return depth == BitDepth::eight ? 255.0 : 65535.0;
}

void check_expected(const std::filesystem::path& path, BitDepth actual,
                    std::optional<BitDepth> expected) {
    if (expected && *expected != actual) {
        throw IoError("'" + path.string() + "' has bit depth " +
                      std::to_string(static_cast<int>(actual)) + ", expected " +
                      std::to_string(static_cast<int>(*expected)));
    }
}

GrayImage from_samples(std::size_t w, std::size_t h, const std::vector<std::uint16_t>& samples,
                       BitDepth depth) {
    const double scale = max_sample(depth);
    std::vector<double> px(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) px[i] = samples[i] / scale;
    return GrayImage(w, h, std::move(px));
}

std::uint16_t quantize(double v, BitDepth depth) {
    return static_cast<std::uint16_t>(std::lround(v * max_sample(depth)));
}

// libpng reports errors through longjmp; convert to an exception at the
// boundary by stashing the message.
struct PngErrorState {
    std::string message;
};

void png_error_fn(png_structp png, png_const_charp msg) {
    auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
    if (state) state->message = msg;
    png_longjmp(png, 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

GrayImage load_png(const std::filesystem::path& path, std::optional<BitDepth> expected) {
    FilePtr f = open_file(path, "rb");
    PngErrorState err;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_fn,
                                             png_warning_fn);
    if (!png) throw IoError("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("png_create_info_struct failed");
    }

    // Everything with a destructor is declared before setjmp so a longjmp
    // out of libpng never skips a live object.
    std::vector<std::uint16_t> samples;
    std::vector<png_byte> raw;
    std::vector<png_bytep> rows;
    png_uint_32 width = 0;
    png_uint_32 height = 0;
    int bit_depth = 0;
    int color_type = 0;
    std::string failure;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("cannot decode PNG '" + path.string() + "': " + err.message);
    }

    png_init_io(png, f.get());
    png_read_info(png, info);
    png_get_IHDR(png, info, &width, &height, &bit_depth, &color_type, nullptr, nullptr,
                 nullptr);

    if (color_type != PNG_COLOR_TYPE_GRAY) {
        failure = "'" + path.string() + "' is not single-channel grayscale";
    } else if (width == 0 || height == 0) {
        failure = "'" + path.string() + "' has a zero dimension";
    } else {
        if (bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
        if (bit_depth == 16) png_set_swap(png);
        png_read_update_info(png, info);
        const std::size_t row_bytes = png_get_rowbytes(png, info);
        raw.resize(row_bytes * height);
        rows.resize(height);
        for (png_uint_32 y = 0; y < height; ++y) rows[y] = raw.data() + y * row_bytes;
        png_read_image(png, rows.data());
        png_read_end(png, nullptr);

        samples.resize(static_cast<std::size_t>(width) * height);
        if (bit_depth == 16) {
            for (std::size_t i = 0; i < samples.size(); ++i) {
                std::uint16_t s;
                std::memcpy(&s, raw.data() + 2 * i, 2);
                samples[i] = s;
            }
        } else {
            for (png_uint_32 y = 0; y < height; ++y)
                for (png_uint_32 x = 0; x < width; ++x)
                    samples[y * width + x] = rows[y][x];
        }
    }
    png_destroy_read_struct(&png, &info, nullptr);
    if (!failure.empty()) throw IoError(failure);

    // Sub-byte depths are expanded to 8 bits by libpng.
    const BitDepth depth = bit_depth == 16 ? BitDepth::sixteen : BitDepth::eight;
    check_expected(path, depth, expected);
    return from_samples(width, height, samples, depth);
}

// Reads one whitespace-delimited PGM header token, skipping comments.
std::string pgm_token(std::istream& in) {
    std::string token;
    char c;
    while (in.get(c)) {
        if (c == '#') {
            std::string ignored;
            std::getline(in, ignored);
            if (!token.empty()) break;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!token.empty()) break;
            continue;
        }
        token.push_back(c);
    }
    return token;
}

GrayImage load_pgm(const std::filesystem::path& path, std::optional<BitDepth> expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    const std::string magic = pgm_token(in);
    if (magic == "P6" || magic == "P3") {
        throw IoError("'" + path.string() + "' is a multi-channel PPM");
    }
    if (magic != "P5") throw IoError("'" + path.string() + "' is not a binary PGM");

    std::size_t w = 0;
    std::size_t h = 0;
    unsigned long maxval = 0;
    try {
        w = std::stoul(pgm_token(in));
        h = std::stoul(pgm_token(in));
        maxval = std::stoul(pgm_token(in));
    } catch (const std::logic_error&) {
        throw IoError("malformed PGM header in '" + path.string() + "'");
    }
    if (w == 0 || h == 0) throw IoError("'" + path.string() + "' has a zero dimension");
    BitDepth depth;
    if (maxval == 255) {
        depth = BitDepth::eight;
    } else if (maxval == 65535) {
        depth = BitDepth::sixteen;
    } else {
        throw IoError("'" + path.string() + "' has unsupported maxval " + std::to_string(maxval));
    }
    check_expected(path, depth, expected);

    const std::size_t bytes_per = depth == BitDepth::eight ? 1 : 2;
    std::vector<unsigned char> raw(w * h * bytes_per);
    if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
        throw IoError("truncated PGM data in '" + path.string() + "'");
    }
    std::vector<std::uint16_t> samples(w * h);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        // PGM stores 16-bit samples big-endian.
        samples[i] = bytes_per == 1 ? raw[i]
                                    : static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
    }
    return from_samples(w, h, samples, depth);
}

}  // namespace

GrayImage load_image(const std::filesystem::path& path, std::optional<BitDepth> expected) {
    std::array<unsigned char, 8> sig{};
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open '" + path.string() + "'");
        in.read(reinterpret_cast<char*>(sig.data()), sig.size());
        if (in.gcount() < 2) throw IoError("'" + path.string() + "' is too short to be an image");
    }
    if (png_sig_cmp(sig.data(), 0, sig.size()) == 0) return load_png(path, expected);
    if (sig[0] == 'P') return load_pgm(path, expected);
    throw IoError("'" + path.string() + "' is neither PNG nor PGM");
}

void save_png(const GrayImage& image, const std::filesystem::path& path, BitDepth depth) {
    if (image.empty()) throw InvalidArgument("cannot save an empty image");
    FilePtr f = open_file(path, "wb");
    PngErrorState err;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_fn,
                                              png_warning_fn);
    if (!png) throw IoError("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png_create_info_struct failed");
    }

    const std::size_t w = image.width();
    const std::size_t h = image.height();
    const std::size_t bytes_per = depth == BitDepth::eight ? 1 : 2;
    std::vector<png_byte> raw(w * h * bytes_per);
    for (std::size_t i = 0; i < w * h; ++i) {
        const std::uint16_t s = quantize(image.pixels()[i], depth);
        if (bytes_per == 1) {
            raw[i] = static_cast<png_byte>(s);
        } else {
            raw[2 * i] = static_cast<png_byte>(s >> 8);
            raw[2 * i + 1] = static_cast<png_byte>(s & 0xff);
        }
    }
    std::vector<png_bytep> rows(h);
    for (std::size_t y = 0; y < h; ++y) rows[y] = raw.data() + y * w * bytes_per;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("cannot encode PNG '" + path.string() + "': " + err.message);
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h),
                 static_cast<int>(depth), PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

void save_pgm(const GrayImage& image, const std::filesystem::path& path, BitDepth depth) {
    if (image.empty()) throw InvalidArgument("cannot save an empty image");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "P5\n" << image.width() << ' ' << image.height() << '\n'
        << (depth == BitDepth::eight ? 255 : 65535) << '\n';
    for (double v : image.pixels()) {
        const std::uint16_t s = quantize(v, depth);
        if (depth == BitDepth::eight) {
            out.put(static_cast<char>(s));
        } else {
            out.put(static_cast<char>(s >> 8));
            out.put(static_cast<char>(s & 0xff));
        }
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace mfid
