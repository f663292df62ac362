#include "charflow/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace charflow {

using Index = Eigen::Index;

namespace {

// Next header token, skipping whitespace and '#' comments.
std::string header_token(std::istream& in) {
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
  return tok;
}

long header_number(std::istream& in, const std::string& path) {
  const std::string tok = header_token(in);
  try {
    std::size_t used = 0;
    const long v = std::stol(tok, &used);
    if (used != tok.size() || v <= 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw Error(Errc::UnreadableImage, path + ": bad header field '" + tok + "'");
  }
}

void write_le(std::ostream& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  char buf[8];
  std::memcpy(buf, &bits, 8);
  out.write(buf, 8);
}

double read_le(std::istream& in) {
  char buf[8];
  in.read(buf, 8);
  std::uint64_t bits;
  std::memcpy(&bits, buf, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  return std::bit_cast<double>(bits);
}

std::string base_name(const std::string& path) {
  const auto slash = path.find_last_of('/');
  return slash == std::string::npos ? path : path.substr(slash + 1);
}

}  // namespace

Image read_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::UnreadableImage, path + ": cannot open");
  const std::string magic = header_token(in);
  if (magic != "P2" && magic != "P5" && magic != "P6") {
    throw Error(Errc::UnreadableImage, path + ": unsupported format '" + magic + "'");
  }
  Image img;
  img.width = header_number(in, path);
  img.height = header_number(in, path);
  const long maxval = header_number(in, path);
  if (maxval > 255) throw Error(Errc::UnreadableImage, path + ": only 8-bit images are supported");
  const std::size_t channels = magic == "P6" ? 3 : 1;
  img.planes.assign(channels, Raster<double>::Zero(img.height, img.width));
  const double scale = 1.0 / static_cast<double>(maxval);
  if (magic == "P2") {
    for (Index i = 0; i < img.height; ++i) {
      for (Index j = 0; j < img.width; ++j) {
        long v;
        if (!(in >> v) || v < 0 || v > maxval) throw Error(Errc::UnreadableImage, path + ": bad pixel data");
        img.planes[0](i, j) = static_cast<double>(v) * scale;
      }
    }
    return img;
  }
  // header_token consumed the single whitespace byte after maxval.
  const auto n = static_cast<std::size_t>(img.width * img.height) * channels;
  std::vector<unsigned char> data(n);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) throw Error(Errc::UnreadableImage, path + ": truncated pixel data");
  std::size_t k = 0;
  for (Index i = 0; i < img.height; ++i) {
    for (Index j = 0; j < img.width; ++j) {
      for (std::size_t c = 0; c < channels; ++c) {
        if (data[k] > maxval) throw Error(Errc::UnreadableImage, path + ": pixel exceeds maxval");
        img.planes[c](i, j) = static_cast<double>(data[k++]) * scale;
      }
    }
  }
  return img;
}

void write_image(const std::string& path, const Image& image) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw Error(Errc::InvalidArgument, "images need one or three channels");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::InvalidArgument, path + ": cannot write");
  out << (image.channels() == 1 ? "P5" : "P6") << "\n" << image.width << " " << image.height << "\n255\n";
  std::vector<unsigned char> data;
  data.reserve(static_cast<std::size_t>(image.width * image.height) * image.channels());
  for (Index i = 0; i < image.height; ++i) {
    for (Index j = 0; j < image.width; ++j) {
      for (const auto& plane : image.planes) {
        data.push_back(static_cast<unsigned char>(std::lround(std::clamp(plane(i, j), 0.0, 1.0) * 255.0)));
      }
    }
  }
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
}

void write_grid(const std::string& prefix, const GridFunction& g) {
  const Index ny = g.grid.ny, nx = g.grid.nx;
  {
    std::ofstream out(prefix + ".bin", std::ios::binary);
    if (!out) throw Error(Errc::InvalidArgument, prefix + ".bin: cannot write");
    for (Index i = 0; i < ny; ++i) {
      for (Index j = 0; j < nx; ++j) write_le(out, g.values(i, j));
    }
  }
  {
    std::ofstream out(prefix + ".mask.bin", std::ios::binary);
    for (Index i = 0; i < ny; ++i) {
      for (Index j = 0; j < nx; ++j) out.put(static_cast<char>(g.mask(i, j)));
    }
  }
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (Index i = 0; i < ny; ++i) {
    for (Index j = 0; j < nx; ++j) {
      if (!g.active(i, j)) continue;
      lo = any ? std::min(lo, g.values(i, j)) : g.values(i, j);
      hi = any ? std::max(hi, g.values(i, j)) : g.values(i, j);
      any = true;
    }
  }
  const double scale = hi > lo ? (hi - lo) / 255.0 : 1.0;
  {
    std::ofstream out(prefix + ".pgm", std::ios::binary);
    out << "P5\n" << nx << " " << ny << "\n255\n";
    for (Index i = ny - 1; i >= 0; --i) {
      for (Index j = 0; j < nx; ++j) {
        const double v = g.active(i, j) ? std::clamp((g.values(i, j) - lo) / scale, 0.0, 255.0) : 0.0;
        out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v))));
      }
    }
  }
  nlohmann::ordered_json j;
  j["nx"] = nx;
  j["ny"] = ny;
  j["spacing"] = g.grid.spacing;
  j["origin"] = {g.grid.origin.x(), g.grid.origin.y()};
  j["cell_centre"] = "origin + spacing * (j + 0.5, i + 0.5)";
  j["values"] = {{"file", base_name(prefix) + ".bin"}, {"dtype", "float64"}, {"byte_order", "little"},
                 {"layout", "row-major, row i = y index"}};
  j["mask"] = {{"file", base_name(prefix) + ".mask.bin"},
               {"dtype", "uint8"},
               {"encoding", {{"0", "outside"}, {"1", "inside"}, {"2", "sigma_tube"}}}};
  j["pgm"] = {{"file", base_name(prefix) + ".pgm"},
              {"row_order", "top row = largest y"},
              {"value", "offset + scale * pixel"},
              {"offset", lo},
              {"scale", scale},
              {"outside_pixel", 0}};
  j["float_format"] = "shortest-roundtrip";
  std::ofstream out(prefix + ".json");
  out << j.dump(2) << "\n";
}

GridFunction read_grid(const std::string& prefix) {
  std::ifstream hin(prefix + ".json");
  if (!hin) throw Error(Errc::InvalidArgument, prefix + ".json: cannot open");
  const nlohmann::json j = nlohmann::json::parse(hin);
  GridSpec spec;
  spec.nx = j.at("nx").get<Index>();
  spec.ny = j.at("ny").get<Index>();
  spec.spacing = j.at("spacing").get<double>();
  spec.origin = Point(j.at("origin")[0].get<double>(), j.at("origin")[1].get<double>());
  GridFunction g(spec);
  std::ifstream vin(prefix + ".bin", std::ios::binary);
  std::ifstream min(prefix + ".mask.bin", std::ios::binary);
  if (!vin || !min) throw Error(Errc::InvalidArgument, prefix + ": missing raster files");
  for (Index i = 0; i < spec.ny; ++i) {
    for (Index j2 = 0; j2 < spec.nx; ++j2) {
      g.values(i, j2) = read_le(vin);
      const int m = min.get();
      if (m < 0 || m > 2) throw Error(Errc::InvalidArgument, prefix + ".mask.bin: bad cell kind");
      g.mask(i, j2) = static_cast<CellKind>(m);
    }
  }
  if (!vin || !min) throw Error(Errc::InvalidArgument, prefix + ": truncated raster files");
  return g;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::InvalidArgument, path + ": cannot write");
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << "\n" << std::setprecision(17);
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << row[k];
    out << "\n";
  }
}

}  // namespace charflow
