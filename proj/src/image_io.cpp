#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gdc/image.hpp"

namespace gdc {

namespace {

// Reads the next whitespace/comment-delimited token of a PNM header.
std::string pnm_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  if (tok.empty()) throw IoError("truncated image header");
  return tok;
}

int pnm_int(std::istream& in, const char* what) {
  std::string tok = pnm_token(in);
  try {
    size_t pos = 0;
    int v = std::stoi(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw IoError(std::string("bad image header field: ") + what);
  }
}

}  // namespace

ImageGrid load_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image: " + path);
  std::string magic = pnm_token(in);
  int channels;
  if (magic == "P5")
    channels = 1;
  else if (magic == "P6")
    channels = 3;
  else
    throw IoError("unsupported image format (want binary PGM/PPM): " + path);
  int w = pnm_int(in, "width");
  int h = pnm_int(in, "height");
  int maxval = pnm_int(in, "maxval");
  if (w <= 0 || h <= 0) throw IoError("bad image dimensions: " + path);
  if (maxval <= 0 || maxval > 255) throw IoError("only 8-bit images supported: " + path);
  // The header ends with exactly one whitespace byte (already consumed by the
  // tokenizer), so raster data starts here.
  size_t count = static_cast<size_t>(w) * h * channels;
  std::vector<unsigned char> raw(count);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count));
  if (static_cast<size_t>(in.gcount()) != count) throw IoError("truncated raster data: " + path);
  ImageGrid img(h, w, channels);
  // File raster is interleaved; grid layout is channel-major.
  size_t idx = 0;
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j)
      for (int ch = 0; ch < channels; ++ch) img.at(ch, i, j) = raw[idx++] / static_cast<double>(maxval);
  return img;
}

void save_image(const ImageGrid& u, const std::string& path) {
  if (u.c != 1 && u.c != 3) throw DimensionError("image files must have 1 or 3 channels");
  std::ostringstream out;
  out << (u.c == 1 ? "P5" : "P6") << "\n" << u.w << " " << u.h << "\n255\n";
  for (int i = 0; i < u.h; ++i)
    for (int j = 0; j < u.w; ++j)
      for (int ch = 0; ch < u.c; ++ch) {
        double v = std::clamp(u.at(ch, i, j), 0.0, 1.0);
        out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
      }
  write_file_atomic(path, out.str());
}

BlurKernel load_kernel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open kernel: " + path);
  int kh, kw;
  if (!(in >> kh >> kw)) throw IoError("bad kernel header: " + path);
  if (kh <= 0 || kw <= 0 || kh % 2 == 0 || kw % 2 == 0)
    throw IoError("kernel support must be positive and odd: " + path);
  BlurKernel k(kh, kw);
  for (double& v : k.data)
    if (!(in >> v)) throw IoError("truncated kernel data: " + path);
  k.project_simplex();
  return k;
}

void save_kernel(const BlurKernel& k, const std::string& path) {
  std::ostringstream out;
  out << k.kh << " " << k.kw << "\n";
  char buf[64];
  for (int i = 0; i < k.kh; ++i) {
    for (int j = 0; j < k.kw; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", k.at(i, j));
      out << buf << (j + 1 == k.kw ? "" : " ");
    }
    out << "\n";
  }
  write_file_atomic(path, out.str());
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed: " + path + " (" + ec.message() + ")");
}

}  // namespace gdc
