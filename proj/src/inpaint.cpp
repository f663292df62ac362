#include "charflow/inpaint.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace charflow {

using Index = Eigen::Index;

Raster<std::uint8_t> mask_from_image(const Image& mask) {
  if (mask.planes.empty()) throw Error(Errc::UnreadableImage, "mask has no pixels");
  return (mask.planes[0] > 0.0).cast<std::uint8_t>();
}

InpaintResult inpaint(const Image& image, const Raster<std::uint8_t>& mask, const InpaintOptions& opts) {
  if (mask.rows() != image.height || mask.cols() != image.width) {
    throw Error(Errc::MaskMismatch, "mask and image sizes differ");
  }
  const Index ny = image.height, nx = image.width;
  for (Index i = 0; i < ny; ++i) {
    for (Index j = 0; j < nx; ++j) {
      if (mask(i, j) && (i == 0 || j == 0 || i == ny - 1 || j == nx - 1)) {
        throw Error(Errc::MaskMismatch, "mask region must lie strictly inside the image");
      }
    }
  }
  const double h = 1.0 / static_cast<double>(std::max(nx, ny));
  const DistanceField df = field_from_distance_grid(mask, h);

  InpaintResult result;
  InpaintReport& report = result.report;
  report.mask_pixels = static_cast<std::size_t>((df.inside != 0).count());
  report.sigma_pixels = static_cast<std::size_t>((df.sigma != 0).count());

  // m0 over mask pixels where the field is regular.
  double m_min = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < ny; ++i) {
    for (Index j = 0; j < nx; ++j) {
      if (!df.inside(i, j) || df.sigma(i, j)) continue;
      const Point x(j * h, i * h);
      const double g = grad_T0(*df.field, x).norm();
      if (g > 0) m_min = std::min(m_min, g);
    }
  }
  if (!std::isfinite(m_min)) throw Error(Errc::DegenerateField, "distance field has no usable gradient");
  report.m0 = 0.9 * m_min;

  LinearProblem base;
  base.domain = df.domain;
  base.tf = df.field;
  base.m0 = report.m0;
  base.f = Rhs::constant(0.0);
  base.opts.step = opts.step;

  result.output = image;
  report.beta_est = std::numeric_limits<double>::infinity();
  for (std::size_t ch = 0; ch < image.channels(); ++ch) {
    const Raster<double>& plane = image.planes[ch];
    LinearProblem p = base;
    p.u0.eval = [plane, nx](double s) {
      const auto idx = static_cast<Index>(std::llround(s));
      return plane(idx / nx, idx % nx);
    };
    p.u0.sup = 1.0;
    GridFunction known(df.grid);
    known.values = plane;
    const FunctionalCoefficients linear = build_inpainting_coefficients(p, known, opts.smoothing * h, 0.0, 1.0);
    GridFunction empty(df.grid);
    p.c = linear.c_of(empty);
    p = finalize(p);
    GridFunction u = solve_on_grid(p, df.grid);

    InpaintChannelReport chr;
    FunctionalCoefficients used = linear;
    if (opts.blend > 0.0) {
      used = build_inpainting_coefficients(p, known, opts.smoothing * h, opts.blend, opts.beta);
      FixedPointOptions fpo;
      fpo.tol = opts.tol;
      fpo.max_iter = opts.max_iter;
      fpo.omega = opts.omega;
      auto [v, fp] = solve_quasilinear(used, p, u, fpo);
      u = std::move(v);
      chr.iterations = fp.n_iters;
      chr.residuals = fp.l1_residuals;
      chr.converged = fp.converged;
    }
    const TransportField c = used.c_of(u);
    for (Index i = 0; i < ny; ++i) {
      for (Index j = 0; j < nx; ++j) {
        if (!u.active(i, j)) continue;
        if (u.mask(i, j) == CellKind::SigmaTube && ch == 0) ++report.filled_from_neighbours;
        result.output.planes[ch](i, j) = std::clamp(u.values(i, j), 0.0, 1.0);
        const Point x(j * h, i * h);
        if (df.sigma(i, j)) continue;
        try {
          report.beta_est = std::min(report.beta_est, c(x).dot(df.field->normal(x)));
        } catch (const Error&) {
        }
      }
    }
    report.channels.push_back(std::move(chr));
  }
  return result;
}

std::string to_json(const InpaintReport& report) {
  nlohmann::ordered_json j;
  j["beta_est"] = report.beta_est;
  j["m0"] = report.m0;
  j["mask_pixels"] = report.mask_pixels;
  j["sigma_pixels"] = report.sigma_pixels;
  j["filled_from_neighbours"] = report.filled_from_neighbours;
  j["channels"] = nlohmann::ordered_json::array();
  for (const auto& ch : report.channels) {
    j["channels"].push_back({{"iterations", ch.iterations}, {"residuals", ch.residuals}, {"converged", ch.converged}});
  }
  j["float_format"] = "shortest-roundtrip";
  return j.dump(2);
}

}  // namespace charflow
