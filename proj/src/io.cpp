#include "tface/io.hpp"

#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace tface::io {

namespace {

// On-disk floats are little-endian; this codebase targets LE hosts.
static_assert(__BYTE_ORDER__ == __ORDER_LITTLE_ENDIAN__,
              "TFR1 I/O assumes a little-endian host");

void fail(const std::string& path, const std::string& what) {
    throw IoError(path + ": " + what);
}

/// Reads one PNM token, skipping whitespace and '#' comment lines.
std::string pnm_token(std::istream& in) {
    std::string tok;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    while (c != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    return tok;
}

long parse_dim(const std::string& path, const std::string& tok) {
    if (tok.empty()) fail(path, "truncated header");
    for (char ch : tok)
        if (!std::isdigit(static_cast<unsigned char>(ch)))
            fail(path, "malformed header token '" + tok + "'");
    return std::stol(tok);
}

}  // namespace

ImageGrid read_tfr(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");
    std::string magic;
    in >> magic;
    if (magic != "TFR1") fail(path, "bad magic (expected TFR1)");
    long w = 0, h = 0;
    in >> w >> h;
    if (!in || w <= 0 || h <= 0 || w > 1 << 20 || h > 1 << 20)
        fail(path, "bad dimensions");
    in.get();  // the single '\n' terminating the header
    ImageGrid img(static_cast<int>(w), static_cast<int>(h));
    std::vector<float> buf(img.size());
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (static_cast<size_t>(in.gcount()) != buf.size() * sizeof(float))
        fail(path, "truncated payload");
    for (size_t i = 0; i < buf.size(); ++i) img[i] = buf[i];
    return img;
}

void write_tfr(const std::string& path, const ImageGrid& img) {
    if (img.empty()) throw ParameterError("write_tfr: empty image");
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(path, "cannot open for writing");
    out << "TFR1 " << img.width() << " " << img.height() << "\n";
    std::vector<float> buf(img.size());
    for (size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(img[i]);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!out) fail(path, "write failed");
}

ImageGrid read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");
    if (pnm_token(in) != "P5") fail(path, "not a P5 PGM");
    const long w = parse_dim(path, pnm_token(in));
    const long h = parse_dim(path, pnm_token(in));
    const long maxval = parse_dim(path, pnm_token(in));
    if (w <= 0 || h <= 0 || w > 1 << 20 || h > 1 << 20) fail(path, "bad dimensions");
    if (maxval <= 0 || maxval > 65535) fail(path, "unsupported maxval");

    ImageGrid img(static_cast<int>(w), static_cast<int>(h));
    const size_t n = img.size();
    if (maxval < 256) {
        std::vector<uint8_t> buf(n);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
        if (static_cast<size_t>(in.gcount()) != n) fail(path, "truncated payload");
        for (size_t i = 0; i < n; ++i) img[i] = buf[i] / static_cast<double>(maxval);
    } else {
        std::vector<uint8_t> buf(n * 2);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * 2));
        if (static_cast<size_t>(in.gcount()) != n * 2) fail(path, "truncated payload");
        for (size_t i = 0; i < n; ++i) {
            const uint16_t v = static_cast<uint16_t>((buf[2 * i] << 8) | buf[2 * i + 1]);
            img[i] = v / static_cast<double>(maxval);
        }
    }
    return img;
}

void write_mask_pgm(const std::string& path, const BinaryMask& mask) {
    if (mask.empty()) throw ParameterError("write_mask_pgm: empty mask");
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(path, "cannot open for writing");
    out << "P5\n" << mask.width() << " " << mask.height() << "\n255\n";
    std::vector<uint8_t> buf(mask.size());
    for (size_t i = 0; i < buf.size(); ++i) buf[i] = mask[i] ? 255 : 0;
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
    if (!out) fail(path, "write failed");
}

BinaryMask read_mask_pgm(const std::string& path) {
    const ImageGrid img = read_pgm(path);
    BinaryMask mask(img.width(), img.height());
    for (size_t i = 0; i < img.size(); ++i) mask[i] = img[i] >= 0.5 ? 1 : 0;
    return mask;
}

ImageGrid read_image(const std::string& path) {
    const auto dot = path.find_last_of('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
    if (ext == ".tfr") return read_tfr(path);
    if (ext == ".pgm") return read_pgm(path);
    fail(path, "unsupported image extension '" + ext + "'");
    return {};
}

}  // namespace tface::io
