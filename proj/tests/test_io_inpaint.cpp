#include "charflow/inpaint.hpp"
#include "charflow/io.hpp"
#include "charflow/parallel.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace charflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path d = fs::temp_directory_path() / "charflow_io_test";
  fs::create_directories(d);
  return d;
}

Image gray(Eigen::Index w, Eigen::Index h, double v) {
  Image img;
  img.width = w;
  img.height = h;
  img.planes.assign(1, Raster<double>::Constant(h, w, v));
  return img;
}

Raster<std::uint8_t> disk_mask(Eigen::Index n, double cx, double cy, double r) {
  Raster<std::uint8_t> m = Raster<std::uint8_t>::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = std::hypot(i - cy, j - cx) < r;
  }
  return m;
}

template <typename F>
void expect_error(Errc code, F&& f) {
  try {
    f();
    FAIL("expected " << to_string(code));
  } catch (const Error& e) {
    CHECK(e.code() == code);
  }
}

}  // namespace

TEST_CASE("image round trips") {
  const fs::path dir = scratch_dir();
  Image img = gray(5, 3, 0.0);
  for (Eigen::Index i = 0; i < 3; ++i) {
    for (Eigen::Index j = 0; j < 5; ++j) img.planes[0](i, j) = (17 * i + 40 * j) / 255.0;
  }
  write_image((dir / "a.pgm").string(), img);
  const Image back = read_image((dir / "a.pgm").string());
  CHECK(back.width == 5);
  CHECK(back.height == 3);
  CHECK((back.planes[0] - img.planes[0]).abs().maxCoeff() < 1e-12);

  Image rgb = img;
  rgb.planes = {img.planes[0], 1.0 - img.planes[0], Raster<double>::Constant(3, 5, 1.0)};
  write_image((dir / "a.ppm").string(), rgb);
  const Image rgb_back = read_image((dir / "a.ppm").string());
  REQUIRE(rgb_back.channels() == 3);
  for (int c = 0; c < 3; ++c) CHECK((rgb_back.planes[c] - rgb.planes[c]).abs().maxCoeff() < 1e-12);
}

TEST_CASE("ASCII PGM with comments") {
  const fs::path p = scratch_dir() / "ascii.pgm";
  std::ofstream(p) << "P2\n# comment\n3 2\n# another\n10\n0 5 10\n10 5 0\n";
  const Image img = read_image(p.string());
  CHECK(img.planes[0](0, 1) == doctest::Approx(0.5));
  CHECK(img.planes[0](1, 0) == doctest::Approx(1.0));
}

TEST_CASE("unreadable images") {
  const fs::path dir = scratch_dir();
  std::ofstream(dir / "bad.pgm") << "P3\n1 1\n255\n0 0 0\n";
  expect_error(Errc::UnreadableImage, [&] { read_image((dir / "bad.pgm").string()); });
  std::ofstream(dir / "short.pgm", std::ios::binary) << "P5\n4 4\n255\n" << "abc";
  expect_error(Errc::UnreadableImage, [&] { read_image((dir / "short.pgm").string()); });
  std::ofstream(dir / "deep.pgm") << "P2\n1 1\n65535\n7\n";
  expect_error(Errc::UnreadableImage, [&] { read_image((dir / "deep.pgm").string()); });
  expect_error(Errc::UnreadableImage, [&] { read_image((dir / "missing.pgm").string()); });
}

TEST_CASE("grid output round trip") {
  GridSpec g;
  g.nx = 4;
  g.ny = 3;
  g.spacing = 0.25;
  g.origin = {-0.5, -0.375};
  GridFunction u(g);
  for (Eigen::Index i = 0; i < 3; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      u.values(i, j) = std::sqrt(2.0) * i - j / 3.0;
      u.mask(i, j) = static_cast<CellKind>((i + j) % 3);
    }
  }
  const std::string prefix = (scratch_dir() / "grid").string();
  write_grid(prefix, u);
  const GridFunction back = read_grid(prefix);
  CHECK(back.grid == u.grid);
  CHECK((back.values - u.values).abs().maxCoeff() == 0.0);
  CHECK((back.mask == u.mask).all());
  std::ifstream hin(prefix + ".json");
  const nlohmann::json j = nlohmann::json::parse(hin);
  CHECK(j.at("pgm").at("row_order") == "top row = largest y");
  CHECK(fs::file_size(prefix + ".bin") == 12 * 8);
}

TEST_CASE("CSV output") {
  const fs::path p = scratch_dir() / "t.csv";
  write_csv(p.string(), {"a", "b"}, {{0.1, 1.0 / 3.0}, {2.0, -5e-300}});
  std::ifstream in(p);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "a,b");
  CHECK(std::stod(row.substr(row.find(',') + 1)) == 1.0 / 3.0);
}

TEST_CASE("inpainting reproduces constants") {
  const Image img = gray(48, 40, 0.37);
  const Raster<std::uint8_t> mask = disk_mask(48, 20.0, 19.0, 9.0).topRows(40);
  const InpaintResult r = inpaint(img, mask, InpaintOptions{});
  CHECK((r.output.planes[0] - img.planes[0]).abs().maxCoeff() == 0.0);
  CHECK(r.report.mask_pixels == static_cast<std::size_t>((mask != 0).count()));
  CHECK(r.report.m0 > 0.0);
}

TEST_CASE("vertical step is closed across the mask") {
  const Eigen::Index n = 64;
  Image img = gray(n, n, 0.0);
  img.planes[0].rightCols(n / 2).setConstant(1.0);
  const Raster<std::uint8_t> mask = disk_mask(n, 31.5, 31.5, 14.0);
  const InpaintResult r = inpaint(img, mask, InpaintOptions{});
  // Every masked row keeps the step within two cells of its true column.
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!mask(i, j)) continue;
      const double expected = j >= n / 2 ? 1.0 : 0.0;
      if (std::abs(j + 0.5 - n / 2.0) > 2.0) CHECK(std::abs(r.output.planes[0](i, j) - expected) < 1e-9);
    }
  }
}

TEST_CASE("horizontal stripes continue straight across a tall gap") {
  const Eigen::Index n = 64;
  Image img = gray(n, n, 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    if ((i / 8) % 2) img.planes[0].row(i).setConstant(1.0);
  }
  Raster<std::uint8_t> mask = Raster<std::uint8_t>::Zero(n, n);
  mask.block(6, 26, 52, 12).setOnes();
  InpaintOptions opts;
  opts.blend = 0.5;
  const InpaintResult r = inpaint(img, mask, opts);
  // Rows within half the gap width of the mask ends are filled from above or below.
  for (Eigen::Index i = 12; i < 52; ++i) {
    for (Eigen::Index j = 26; j < 38; ++j) {
      const double v = r.output.planes[0](i, j);
      const bool near_edge = i % 8 <= 1 || i % 8 == 7;
      if (!near_edge) CHECK(std::abs(v - img.planes[0](i, j)) < 0.5);
    }
  }
  CHECK(r.report.channels.at(0).residuals.size() == r.report.channels.at(0).iterations);
}

TEST_CASE("inpainting input errors") {
  const Image img = gray(32, 32, 0.5);
  expect_error(Errc::MaskMismatch, [&] { inpaint(img, disk_mask(40, 20, 20, 5), InpaintOptions{}); });
  expect_error(Errc::MaskMismatch, [&] { inpaint(img, disk_mask(32, 2, 16, 5), InpaintOptions{}); });
  expect_error(Errc::EmptyMask, [&] { inpaint(img, Raster<std::uint8_t>::Zero(32, 32), InpaintOptions{}); });
}

TEST_CASE("inpainting does not depend on the worker count") {
  const Eigen::Index n = 48;
  Image img = gray(n, n, 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) img.planes[0](i, j) = 0.5 + 0.5 * std::sin(0.3 * i + 0.17 * j * j / n);
  }
  const Raster<std::uint8_t> mask = disk_mask(n, 23.0, 25.0, 10.0);
  InpaintOptions opts;
  opts.blend = 0.4;
  opts.max_iter = 3;
  set_thread_count(1);
  const InpaintResult a = inpaint(img, mask, opts);
  set_thread_count(4);
  const InpaintResult b = inpaint(img, mask, opts);
  set_thread_count(0);
  CHECK((a.output.planes[0] - b.output.planes[0]).abs().maxCoeff() == 0.0);
  CHECK(to_json(a.report) == to_json(b.report));
}
