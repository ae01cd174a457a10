#include "uwimf/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cerrno>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "uwimf/color.hpp"

namespace uwimf {
namespace {

namespace fs = std::filesystem;

std::string lower_extension(const fs::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return ext;
}

struct FileCloser {
    void operator()(std::FILE* f) const noexcept {
        if (f != nullptr) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw InvalidInput("cannot open '" + path.string() + "': " + std::strerror(errno));
    return f;
}

// Decoded integer samples as read from disk, before any normalization.
struct RawImage {
    int width = 0;
    int height = 0;
    int channels = 0;   // 1..4 as stored
    int bit_depth = 0;  // 8 or 16
    std::vector<std::uint16_t> samples;
};

// ---------------------------------------------------------------------------
// PNG

struct PngReadState {
    png_structp png = nullptr;
    png_infop info = nullptr;
    char message[256] = {};
};

void png_error_handler(png_structp png, png_const_charp msg) {
    auto* state = static_cast<PngReadState*>(png_get_error_ptr(png));
    std::snprintf(state->message, sizeof(state->message), "%s", msg);
    png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

// Only POD state lives across setjmp; `raw` and `rows` are owned by the caller.
bool read_png_into(std::FILE* file, PngReadState& state, RawImage& raw,
                   std::vector<png_bytep>& rows, std::vector<std::uint8_t>& buffer) {
    state.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &state, png_error_handler,
                                       png_warning_handler);
    if (state.png == nullptr) return false;
    state.info = png_create_info_struct(state.png);
    if (state.info == nullptr) return false;
    if (setjmp(png_jmpbuf(state.png))) return false;

    png_init_io(state.png, file);
    png_read_info(state.png, state.info);

    const png_uint_32 width = png_get_image_width(state.png, state.info);
    const png_uint_32 height = png_get_image_height(state.png, state.info);
    const int depth = png_get_bit_depth(state.png, state.info);
    const int color = png_get_color_type(state.png, state.info);

    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(state.png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(state.png);
    if (png_get_valid(state.png, state.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(state.png);
    png_read_update_info(state.png, state.info);

    raw.width = static_cast<int>(width);
    raw.height = static_cast<int>(height);
    raw.channels = png_get_channels(state.png, state.info);
    raw.bit_depth = png_get_bit_depth(state.png, state.info);
    if (raw.width < 1 || raw.height < 1) {
        std::snprintf(state.message, sizeof(state.message), "zero-dimension image");
        return false;
    }
    if (raw.bit_depth != 8 && raw.bit_depth != 16) {
        std::snprintf(state.message, sizeof(state.message), "unsupported bit depth %d",
                      raw.bit_depth);
        return false;
    }

    const std::size_t row_bytes = png_get_rowbytes(state.png, state.info);
    buffer.resize(row_bytes * height);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = buffer.data() + y * row_bytes;
    png_read_image(state.png, rows.data());
    png_read_end(state.png, nullptr);
    return true;
}

RawImage read_png(const fs::path& path) {
    FilePtr file = open_file(path, "rb");
    png_byte signature[8] = {};
    if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
        throw InvalidInput("'" + path.string() + "' is not a PNG file");
    }
    std::rewind(file.get());

    PngReadState state;
    RawImage raw;
    std::vector<png_bytep> rows;
    std::vector<std::uint8_t> buffer;
    const bool ok = read_png_into(file.get(), state, raw, rows, buffer);
    png_destroy_read_struct(&state.png, &state.info, nullptr);
    if (!ok) {
        throw InvalidInput("cannot decode PNG '" + path.string() + "': " +
                           (state.message[0] != '\0' ? state.message : "libpng failure"));
    }

    const std::size_t count =
        static_cast<std::size_t>(raw.width) * static_cast<std::size_t>(raw.height) * raw.channels;
    raw.samples.resize(count);
    if (raw.bit_depth == 8) {
        for (std::size_t i = 0; i < count; ++i) raw.samples[i] = buffer[i];
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            raw.samples[i] = static_cast<std::uint16_t>((buffer[2 * i] << 8) | buffer[2 * i + 1]);
        }
    }
    return raw;
}

struct PngWriteState {
    png_structp png = nullptr;
    png_infop info = nullptr;
    char message[256] = {};
};

bool write_png_from(std::FILE* file, PngWriteState& state, int width, int height, int channels,
                    int bit_depth, std::vector<png_bytep>& rows) {
    state.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &state, png_error_handler,
                                        png_warning_handler);
    if (state.png == nullptr) return false;
    state.info = png_create_info_struct(state.png);
    if (state.info == nullptr) return false;
    if (setjmp(png_jmpbuf(state.png))) return false;

    png_init_io(state.png, file);
    png_set_IHDR(state.png, state.info, static_cast<png_uint_32>(width),
                 static_cast<png_uint_32>(height), bit_depth,
                 channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(state.png, state.info);
    png_write_image(state.png, rows.data());
    png_write_end(state.png, nullptr);
    return true;
}

void write_png(const fs::path& path, int width, int height, int channels, int bit_depth,
               const std::vector<std::uint16_t>& samples) {
    const std::size_t bytes_per_sample = bit_depth == 16 ? 2 : 1;
    const std::size_t row_bytes = static_cast<std::size_t>(width) * channels * bytes_per_sample;
    std::vector<std::uint8_t> buffer(row_bytes * height);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (bit_depth == 16) {
            buffer[2 * i] = static_cast<std::uint8_t>(samples[i] >> 8);
            buffer[2 * i + 1] = static_cast<std::uint8_t>(samples[i] & 0xFF);
        } else {
            buffer[i] = static_cast<std::uint8_t>(samples[i]);
        }
    }
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y) rows[y] = buffer.data() + y * row_bytes;

    FilePtr file = open_file(path, "wb");
    PngWriteState state;
    const bool ok = write_png_from(file.get(), state, width, height, channels, bit_depth, rows);
    png_destroy_write_struct(&state.png, &state.info);
    if (!ok) {
        throw InvalidInput("cannot encode PNG '" + path.string() + "': " +
                           (state.message[0] != '\0' ? state.message : "libpng failure"));
    }
}

// ---------------------------------------------------------------------------
// Netpbm / PFM headers

std::string next_token(std::istream& in) {
    std::string token;
    char ch = 0;
    while (in.get(ch)) {
        if (ch == '#') {
            std::string ignored;
            std::getline(in, ignored);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(ch))) {
            if (!token.empty()) break;
            continue;
        }
        token.push_back(ch);
    }
    return token;
}

int parse_int(const std::string& token, const fs::path& path) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
        return v;
    } catch (const std::exception&) {
        throw InvalidInput("malformed header in '" + path.string() + "'");
    }
}

RawImage read_ppm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
    const std::string magic = next_token(in);
    if (magic != "P6" && magic != "P5") {
        throw InvalidInput("'" + path.string() + "' is not a binary PPM/PGM file");
    }
    RawImage raw;
    raw.channels = magic == "P6" ? 3 : 1;
    raw.width = parse_int(next_token(in), path);
    raw.height = parse_int(next_token(in), path);
    const int maxval = parse_int(next_token(in), path);
    if (raw.width < 1 || raw.height < 1) throw InvalidInput("zero-dimension image '" + path.string() + "'");
    if (maxval < 1 || maxval > 65535) {
        throw InvalidInput("unsupported PPM maxval in '" + path.string() + "'");
    }
    raw.bit_depth = maxval < 256 ? 8 : 16;
    const std::size_t count =
        static_cast<std::size_t>(raw.width) * static_cast<std::size_t>(raw.height) * raw.channels;
    const std::size_t bytes = count * (raw.bit_depth == 16 ? 2 : 1);
    std::vector<std::uint8_t> buffer(bytes);
    in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(bytes));
    if (static_cast<std::size_t>(in.gcount()) != bytes) {
        throw InvalidInput("truncated pixel data in '" + path.string() + "'");
    }
    raw.samples.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        raw.samples[i] = raw.bit_depth == 16
                             ? static_cast<std::uint16_t>((buffer[2 * i] << 8) | buffer[2 * i + 1])
                             : buffer[i];
    }
    // Non-full-range maxvals are rescaled to the container range.
    const int full = raw.bit_depth == 16 ? 65535 : 255;
    if (maxval != full) {
        for (auto& s : raw.samples) {
            s = static_cast<std::uint16_t>(std::lround(static_cast<double>(s) * full / maxval));
        }
    }
    return raw;
}

void write_ppm(const fs::path& path, int width, int height, int bit_depth,
               const std::vector<std::uint16_t>& samples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
    out << "P6\n" << width << ' ' << height << '\n' << (bit_depth == 16 ? 65535 : 255) << '\n';
    std::vector<std::uint8_t> buffer;
    buffer.reserve(samples.size() * 2);
    for (std::uint16_t s : samples) {
        if (bit_depth == 16) {
            buffer.push_back(static_cast<std::uint8_t>(s >> 8));
            buffer.push_back(static_cast<std::uint8_t>(s & 0xFF));
        } else {
            buffer.push_back(static_cast<std::uint8_t>(s));
        }
    }
    out.write(reinterpret_cast<const char*>(buffer.data()),
              static_cast<std::streamsize>(buffer.size()));
    if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
}

struct PfmData {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<float> values;  // top-to-bottom rows
};

PfmData read_pfm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
    const std::string magic = next_token(in);
    PfmData pfm;
    if (magic == "Pf") {
        pfm.channels = 1;
    } else if (magic == "PF") {
        pfm.channels = 3;
    } else {
        throw InvalidInput("'" + path.string() + "' is not a PFM file");
    }
    pfm.width = parse_int(next_token(in), path);
    pfm.height = parse_int(next_token(in), path);
    const std::string scale_token = next_token(in);
    double scale = 0.0;
    try {
        scale = std::stod(scale_token);
    } catch (const std::exception&) {
        throw InvalidInput("malformed PFM scale in '" + path.string() + "'");
    }
    if (pfm.width < 1 || pfm.height < 1) throw InvalidInput("zero-dimension image '" + path.string() + "'");
    const bool little = scale < 0.0;
    const std::size_t count =
        static_cast<std::size_t>(pfm.width) * static_cast<std::size_t>(pfm.height) * pfm.channels;
    std::vector<std::uint8_t> buffer(count * 4);
    in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(buffer.size()));
    if (static_cast<std::size_t>(in.gcount()) != buffer.size()) {
        throw InvalidInput("truncated pixel data in '" + path.string() + "'");
    }
    const bool host_little = std::endian::native == std::endian::little;
    pfm.values.resize(count);
    const std::size_t row = static_cast<std::size_t>(pfm.width) * pfm.channels;
    for (int y = 0; y < pfm.height; ++y) {
        // PFM rows are stored bottom-to-top.
        const std::size_t src_row = static_cast<std::size_t>(pfm.height - 1 - y);
        for (std::size_t i = 0; i < row; ++i) {
            std::uint8_t b[4];
            std::memcpy(b, buffer.data() + (src_row * row + i) * 4, 4);
            if (little != host_little) {
                std::swap(b[0], b[3]);
                std::swap(b[1], b[2]);
            }
            float v = 0.0F;
            std::memcpy(&v, b, 4);
            pfm.values[static_cast<std::size_t>(y) * row + i] = v;
        }
    }
    return pfm;
}

std::uint16_t quantize(double v, bool encode_srgb, int bit_depth) {
    v = std::clamp(v, 0.0, 1.0);
    if (encode_srgb) v = std::clamp(linear_to_srgb(v), 0.0, 1.0);
    const double full = bit_depth == 16 ? 65535.0 : 255.0;
    return static_cast<std::uint16_t>(std::lround(v * full));
}

}  // namespace

LinearImage load_image(const std::filesystem::path& path, bool assume_srgb) {
    const std::string ext = lower_extension(path);
    RawImage raw;
    if (ext == ".png") {
        raw = read_png(path);
    } else if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") {
        raw = read_ppm(path);
    } else {
        throw InvalidInput("unsupported image format '" + ext + "' for '" + path.string() + "'");
    }

    const double full = raw.bit_depth == 16 ? 65535.0 : 255.0;
    LinearImage img(raw.width, raw.height);
    const std::size_t n = img.pixel_count();
    const int color_channels = raw.channels >= 3 ? 3 : 1;
    for (std::size_t p = 0; p < n; ++p) {
        for (int c = 0; c < 3; ++c) {
            const int src = color_channels == 3 ? c : 0;
            double v = raw.samples[p * raw.channels + src] / full;
            if (assume_srgb) v = srgb_to_linear(v);
            img.at(p, c) = v;
        }
    }
    return img;
}

void save_image(const LinearImage& img, const std::filesystem::path& path, bool encode_srgb,
                int bit_depth) {
    if (img.empty()) throw InvalidInput("cannot save an empty image");
    if (bit_depth != 8 && bit_depth != 16) {
        throw InvalidInput("bit depth must be 8 or 16, got " + std::to_string(bit_depth));
    }
    std::vector<std::uint16_t> samples(img.size());
    const auto data = img.data();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        samples[i] = quantize(data[i], encode_srgb, bit_depth);
    }
    const std::string ext = lower_extension(path);
    if (ext == ".png") {
        write_png(path, img.width(), img.height(), 3, bit_depth, samples);
    } else if (ext == ".ppm") {
        write_ppm(path, img.width(), img.height(), bit_depth, samples);
    } else {
        throw InvalidInput("unsupported output format '" + ext + "' for '" + path.string() + "'");
    }
}

RangeMap load_range(const std::filesystem::path& path, double scale) {
    const std::string ext = lower_extension(path);
    if (ext == ".pfm") {
        const PfmData pfm = read_pfm(path);
        if (pfm.channels != 1) {
            throw InvalidInput("range map '" + path.string() + "' must be single-channel");
        }
        RangeMap z(pfm.width, pfm.height);
        for (std::size_t i = 0; i < pfm.values.size(); ++i) {
            const double v = pfm.values[i];
            if (!std::isfinite(v)) throw InvalidInput("range map '" + path.string() + "' has non-finite values");
            if (v < 0.0) throw InvalidInput("range map '" + path.string() + "' has negative values");
            z.at(i) = v;
        }
        return z;
    }
    if (ext == ".png") {
        if (!(scale > 0.0) || !std::isfinite(scale)) {
            throw InvalidInput("range scale must be positive and finite");
        }
        const RawImage raw = read_png(path);
        if (raw.channels != 1) {
            throw InvalidInput("range map '" + path.string() + "' must be single-channel");
        }
        RangeMap z(raw.width, raw.height);
        for (std::size_t i = 0; i < raw.samples.size(); ++i) z.at(i) = raw.samples[i] * scale;
        return z;
    }
    throw InvalidInput("unsupported range-map format '" + ext + "' for '" + path.string() + "'");
}

void save_range(const RangeMap& z, const std::filesystem::path& path) {
    if (z.empty()) throw InvalidInput("cannot save an empty range map");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
    const bool host_little = std::endian::native == std::endian::little;
    out << "Pf\n" << z.width() << ' ' << z.height() << '\n' << "-1.0\n";
    for (int y = z.height() - 1; y >= 0; --y) {
        for (int x = 0; x < z.width(); ++x) {
            const float v = static_cast<float>(z(x, y));
            std::uint8_t b[4];
            std::memcpy(b, &v, 4);
            if (!host_little) {
                std::swap(b[0], b[3]);
                std::swap(b[1], b[2]);
            }
            out.write(reinterpret_cast<const char*>(b), 4);
        }
    }
    if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
}

}  // namespace uwimf
