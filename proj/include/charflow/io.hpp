#pragma once

#include "charflow/grid.hpp"

#include <string>
#include <vector>

namespace charflow {

/// 8-bit image with values mapped to [0, 1]; one plane per channel. Row 0 is
/// the first row of the file.
struct Image {
  Eigen::Index width = 0;
  Eigen::Index height = 0;
  std::vector<Raster<double>> planes;

  std::size_t channels() const { return planes.size(); }
};

/// Reads PGM (P2, P5) or PPM (P6). Throws UnreadableImage.
Image read_image(const std::string& path);

/// Writes P5 for one plane and P6 for three; values are clamped to [0, 1]
/// and rounded to 0..255.
void write_image(const std::string& path, const Image& image);

/// Writes <prefix>.bin (float64 little-endian, row-major), <prefix>.mask.bin
/// (uint8 cell kinds), <prefix>.pgm (values mapped affinely to 0..255, top
/// row = largest y) and <prefix>.json describing all three.
void write_grid(const std::string& prefix, const GridFunction& g);

/// Reads back the .json/.bin/.mask.bin triple written by write_grid.
GridFunction read_grid(const std::string& prefix);

/// CSV with a header row, comma separated, LF line ends, 17 significant digits.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace charflow
