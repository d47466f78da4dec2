#include "yoda/pnm.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <string>

#include "yoda/errors.hpp"

namespace yoda {
namespace {

// header tokens separated by whitespace/comments
bool next_token(const std::string& buf, size_t& pos, std::string& tok) {
    while (pos < buf.size()) {
        if (buf[pos] == '#') {
            while (pos < buf.size() && buf[pos] != '\n') ++pos;
        } else if (std::isspace(static_cast<unsigned char>(buf[pos]))) {
            ++pos;
        } else {
            break;
        }
    }
    tok.clear();
    while (pos < buf.size() && !std::isspace(static_cast<unsigned char>(buf[pos])) &&
           buf[pos] != '#')
        tok.push_back(buf[pos++]);
    return !tok.empty();
}

} // namespace

void write_pnm(const std::filesystem::path& path, const ImageTensor& img) {
    if (img.c != 1 && img.c != 3) fail(errc::shape_mismatch, "pnm supports 1 or 3 channels");
    if (img.h < 1 || img.w < 1) fail(errc::shape_mismatch, "pnm write of empty image");
    std::string buf = img.c == 1 ? "P5\n" : "P6\n";
    buf += std::to_string(img.w) + " " + std::to_string(img.h) + "\n255\n";
    for (int y = 0; y < img.h; ++y) {
        for (int x = 0; x < img.w; ++x) {
            for (int ci = 0; ci < img.c; ++ci) {
                double q = std::round(img.at(ci, y, x) * 255.0);
                if (q < 0.0) q = 0.0;
                if (q > 255.0) q = 255.0;
                buf.push_back(static_cast<char>(static_cast<uint8_t>(q)));
            }
        }
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(errc::missing_file, "cannot open for write: " + path.string());
    f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!f) fail(errc::truncated, "short write: " + path.string());
}

ImageTensor read_pnm(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail(errc::missing_file, "cannot open: " + path.string());
    std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    size_t pos = 0;
    std::string tok;
    if (!next_token(buf, pos, tok) || (tok != "P5" && tok != "P6"))
        fail(errc::bad_magic, "not a binary pgm/ppm: " + path.string());
    const int c = tok == "P5" ? 1 : 3;
    long w = 0, h = 0, maxval = 0;
    try {
        if (!next_token(buf, pos, tok)) throw std::invalid_argument("w");
        w = std::stol(tok);
        if (!next_token(buf, pos, tok)) throw std::invalid_argument("h");
        h = std::stol(tok);
        if (!next_token(buf, pos, tok)) throw std::invalid_argument("maxval");
        maxval = std::stol(tok);
    } catch (const std::exception&) {
        fail(errc::bad_format, "bad pnm header: " + path.string());
    }
    if (w < 1 || h < 1 || w > (1 << 20) || h > (1 << 20))
        fail(errc::value_range, "pnm dims out of range: " + path.string());
    if (maxval != 255) fail(errc::bad_format, "only maxval 255 supported: " + path.string());
    if (pos >= buf.size() || !std::isspace(static_cast<unsigned char>(buf[pos])))
        fail(errc::bad_format, "bad pnm header: " + path.string());
    ++pos; // single whitespace byte after maxval
    const size_t need = static_cast<size_t>(w) * h * c;
    if (buf.size() - pos < need) fail(errc::truncated, "pnm payload truncated: " + path.string());
    ImageTensor img(static_cast<int>(h), static_cast<int>(w), c);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int ci = 0; ci < c; ++ci)
                img.at(ci, y, x) =
                    static_cast<double>(static_cast<uint8_t>(buf[pos++])) / 255.0;
    return img;
}

} // namespace yoda
