#pragma once

#include "charflow/distance_field.hpp"
#include "charflow/io.hpp"
#include "charflow/quasilinear.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace charflow {

struct InpaintOptions {
  double blend = 0.0;      ///< 0: transport along the distance normal only
  double smoothing = 1.5;  ///< mollifier width in pixels
  double beta = 0.3;       ///< causality constant enforced on c[v]
  double tol = 1e-4;
  std::size_t max_iter = 20;
  double omega = 1.0;
  double step = 1e-3;
};

struct InpaintChannelReport {
  std::size_t iterations = 0;
  std::vector<double> residuals;
  bool converged = true;
};

struct InpaintReport {
  double beta_est = 0.0;
  double m0 = 0.0;
  std::size_t mask_pixels = 0;
  std::size_t sigma_pixels = 0;
  std::size_t filled_from_neighbours = 0;
  std::vector<InpaintChannelReport> channels;
};

struct InpaintResult {
  Image output;
  InpaintReport report;
};

/// Nonzero pixels of the first plane.
Raster<std::uint8_t> mask_from_image(const Image& mask);

/// Fills the masked region of every channel. Throws MaskMismatch when the
/// sizes differ or the mask touches the image border, EmptyMask when nothing
/// is masked.
InpaintResult inpaint(const Image& image, const Raster<std::uint8_t>& mask, const InpaintOptions& opts);

std::string to_json(const InpaintReport& report);

}  // namespace charflow
