#include "tarseg/image_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace tarseg {

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    f.seekg(0, std::ios::end);
    const auto n = f.tellg();
    f.seekg(0);
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(n));
    f.read(reinterpret_cast<char*>(bytes.data()), n);
    if (!f) throw IoError("read failed for " + path);
    return bytes;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed for " + path);
}

// ---- PNM ----

int pnm_token(const std::vector<std::uint8_t>& b, std::size_t& pos) {
    while (pos < b.size()) {
        if (b[pos] == '#') {
            while (pos < b.size() && b[pos] != '\n') ++pos;
        } else if (std::isspace(b[pos])) {
            ++pos;
        } else {
            break;
        }
    }
    int v = 0;
    bool any = false;
    while (pos < b.size() && std::isdigit(b[pos])) {
        v = v * 10 + (b[pos] - '0');
        ++pos;
        any = true;
    }
    if (!any) throw IoError("malformed PNM header");
    return v;
}

ImageU8 decode_pnm(const std::vector<std::uint8_t>& b) {
    if (b.size() < 2) throw IoError("PNM file too short");
    const int channels = b[1] == '5' ? 1 : 3;
    std::size_t pos = 2;
    ImageU8 img;
    img.width = pnm_token(b, pos);
    img.height = pnm_token(b, pos);
    const int maxval = pnm_token(b, pos);
    if (maxval <= 0 || maxval > 255) throw IoError("only 8-bit PNM supported");
    ++pos;  // single whitespace after maxval
    img.channels = channels;
    const std::size_t n =
        static_cast<std::size_t>(img.width) * img.height * static_cast<std::size_t>(channels);
    if (pos + n > b.size()) throw IoError("PNM pixel data truncated");
    img.pixels.assign(b.begin() + static_cast<std::ptrdiff_t>(pos),
                      b.begin() + static_cast<std::ptrdiff_t>(pos + n));
    return img;
}

std::vector<std::uint8_t> encode_pnm(const ImageU8& img) {
    std::string header = (img.channels == 1 ? "P5\n" : "P6\n") + std::to_string(img.width) + " " +
                         std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

// ---- PNG ----

const std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};

std::uint32_t be32(const std::uint8_t* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) |
           std::uint32_t(p[3]);
}

void push_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void push_chunk(std::vector<std::uint8_t>& out, const char type[4],
                const std::vector<std::uint8_t>& data) {
    push_be32(out, static_cast<std::uint32_t>(data.size()));
    const std::size_t typeStart = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    const auto crc = crc32(0L, out.data() + typeStart, static_cast<uInt>(4 + data.size()));
    push_be32(out, static_cast<std::uint32_t>(crc));
}

std::vector<std::uint8_t> zlib_inflate(const std::vector<std::uint8_t>& src,
                                       std::size_t expected) {
    std::vector<std::uint8_t> out(expected);
    z_stream zs{};
    if (inflateInit(&zs) != Z_OK) throw IoError("inflateInit failed");
    zs.next_in = const_cast<Bytef*>(src.data());
    zs.avail_in = static_cast<uInt>(src.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = inflate(&zs, Z_FINISH);
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || zs.avail_out != 0) throw IoError("PNG: corrupt compressed data");
    return out;
}

int paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

}  // namespace

ImageU8 decode_png(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kPngSig, 8) != 0)
        throw IoError("not a PNG file");
    std::size_t pos = 8;
    int width = 0, height = 0, bitDepth = 0, colorType = 0;
    std::vector<std::uint8_t> idat;
    bool sawIhdr = false, sawIend = false;
    while (pos + 8 <= bytes.size() && !sawIend) {
        const std::uint32_t len = be32(&bytes[pos]);
        if (pos + 12 + len > bytes.size()) throw IoError("PNG chunk truncated");
        const char* type = reinterpret_cast<const char*>(&bytes[pos + 4]);
        const std::uint8_t* data = &bytes[pos + 8];
        if (std::memcmp(type, "IHDR", 4) == 0) {
            if (len != 13) throw IoError("PNG: bad IHDR");
            width = static_cast<int>(be32(data));
            height = static_cast<int>(be32(data + 4));
            bitDepth = data[8];
            colorType = data[9];
            if (data[12] != 0) throw IoError("PNG: interlaced images not supported");
            if (bitDepth != 8) throw IoError("PNG: only 8-bit depth supported");
            if (colorType != 0 && colorType != 2 && colorType != 4 && colorType != 6)
                throw IoError("PNG: unsupported color type " + std::to_string(colorType));
            sawIhdr = true;
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), data, data + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            sawIend = true;
        }
        pos += 12 + len;
    }
    if (!sawIhdr || width <= 0 || height <= 0) throw IoError("PNG: missing or bad IHDR");

    const int srcCh = colorType == 0 ? 1 : colorType == 2 ? 3 : colorType == 4 ? 2 : 4;
    const std::size_t rowBytes = static_cast<std::size_t>(width) * srcCh;
    auto raw = zlib_inflate(idat, (rowBytes + 1) * static_cast<std::size_t>(height));

    // Unfilter in place into a contiguous pixel buffer.
    std::vector<std::uint8_t> px(rowBytes * static_cast<std::size_t>(height));
    const int bpp = srcCh;
    for (int y = 0; y < height; ++y) {
        const std::uint8_t filter = raw[(rowBytes + 1) * y];
        const std::uint8_t* src = &raw[(rowBytes + 1) * y + 1];
        std::uint8_t* dst = &px[rowBytes * y];
        const std::uint8_t* up = y > 0 ? &px[rowBytes * (y - 1)] : nullptr;
        for (std::size_t x = 0; x < rowBytes; ++x) {
            const int a = x >= static_cast<std::size_t>(bpp) ? dst[x - bpp] : 0;
            const int b = up ? up[x] : 0;
            const int c = (up && x >= static_cast<std::size_t>(bpp)) ? up[x - bpp] : 0;
            int v = src[x];
            switch (filter) {
                case 0: break;
                case 1: v += a; break;
                case 2: v += b; break;
                case 3: v += (a + b) / 2; break;
                case 4: v += paeth(a, b, c); break;
                default: throw IoError("PNG: unknown filter type");
            }
            dst[x] = static_cast<std::uint8_t>(v);
        }
    }

    ImageU8 img;
    img.width = width;
    img.height = height;
    img.channels = srcCh <= 2 ? 1 : 3;
    img.pixels.resize(static_cast<std::size_t>(width) * height * img.channels);
    const std::size_t n = static_cast<std::size_t>(width) * height;
    for (std::size_t i = 0; i < n; ++i) {
        for (int c = 0; c < img.channels; ++c)
            img.pixels[i * img.channels + c] = px[i * srcCh + c];
    }
    return img;
}

std::vector<std::uint8_t> encode_png(const ImageU8& img) {
    if (img.channels != 1 && img.channels != 3)
        throw IoError("PNG encoder supports 1 or 3 channels");
    const std::size_t rowBytes = static_cast<std::size_t>(img.width) * img.channels;
    std::vector<std::uint8_t> raw((rowBytes + 1) * static_cast<std::size_t>(img.height));
    for (int y = 0; y < img.height; ++y) {
        raw[(rowBytes + 1) * y] = 0;  // filter: none
        std::memcpy(&raw[(rowBytes + 1) * y + 1], &img.pixels[rowBytes * y], rowBytes);
    }
    uLongf compLen = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> comp(compLen);
    if (compress2(comp.data(), &compLen, raw.data(), static_cast<uLong>(raw.size()),
                  Z_DEFAULT_COMPRESSION) != Z_OK)
        throw IoError("PNG: deflate failed");
    comp.resize(compLen);

    std::vector<std::uint8_t> out(kPngSig, kPngSig + 8);
    std::vector<std::uint8_t> ihdr;
    push_be32(ihdr, static_cast<std::uint32_t>(img.width));
    push_be32(ihdr, static_cast<std::uint32_t>(img.height));
    ihdr.push_back(8);                                   // bit depth
    ihdr.push_back(img.channels == 1 ? 0 : 2);           // color type
    ihdr.push_back(0);                                   // compression
    ihdr.push_back(0);                                   // filter
    ihdr.push_back(0);                                   // interlace
    push_chunk(out, "IHDR", ihdr);
    push_chunk(out, "IDAT", comp);
    push_chunk(out, "IEND", {});
    return out;
}

ImageU8 read_image(const std::string& path) {
    auto bytes = read_file(path);
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), "TSR1", 4) == 0)
        throw IoError(path + " is a tensor file, not an image");
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSig, 8) == 0) return decode_png(bytes);
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6'))
        return decode_pnm(bytes);
    throw IoError(path + ": unrecognized image format (PNG, P5 PGM, P6 PPM supported)");
}

void write_image(const std::string& path, const ImageU8& img) {
    const auto dot = path.rfind('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
    if (ext == ".png") {
        write_file(path, encode_png(img));
    } else if (ext == ".pgm") {
        if (img.channels != 1) throw IoError("PGM requires a single channel");
        write_file(path, encode_pnm(img));
    } else if (ext == ".ppm") {
        if (img.channels != 3) throw IoError("PPM requires three channels");
        write_file(path, encode_pnm(img));
    } else {
        throw IoError("unsupported output extension '" + ext + "' (use .png, .pgm or .ppm)");
    }
}

Tensor image_to_tensor(const ImageU8& img) {
    Tensor t({img.channels, img.height, img.width});
    for (int c = 0; c < img.channels; ++c)
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) t(c, y, x) = img.at(y, x, c) / 255.0f;
    return t;
}

ImageU8 tensor_to_image(const Tensor& t) {
    if (t.rank() != 3) throw ShapeError("tensor_to_image: expected [C,H,W]");
    ImageU8 img;
    img.channels = t.dim(0);
    img.height = t.dim(1);
    img.width = t.dim(2);
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height * img.channels);
    for (int c = 0; c < img.channels; ++c)
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) {
                const float v = std::clamp(t(c, y, x), 0.0f, 1.0f);
                img.at(y, x, c) = static_cast<std::uint8_t>(std::lround(v * 255.0f));
            }
    return img;
}

ImageU8 gray_from_map(const Tensor& map) {
    if (map.rank() != 2) throw ShapeError("gray_from_map: expected [H,W]");
    ImageU8 img;
    img.channels = 1;
    img.height = map.dim(0);
    img.width = map.dim(1);
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const float v = std::clamp(map(y, x), 0.0f, 1.0f);
            img.at(y, x, 0) = static_cast<std::uint8_t>(std::lround(v * 255.0f));
        }
    return img;
}

ImageU8 gray_from_binary(const Tensor& map) {
    if (map.rank() != 2) throw ShapeError("gray_from_binary: expected [H,W]");
    ImageU8 img;
    img.channels = 1;
    img.height = map.dim(0);
    img.width = map.dim(1);
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) img.at(y, x, 0) = map(y, x) >= 0.5f ? 255 : 0;
    return img;
}

}  // namespace tarseg
