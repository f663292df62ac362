#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace charflow {

using Point = Eigen::Vector2d;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Row-major raster, row index = y cell, column index = x cell.
template <typename Scalar>
using Raster = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Points with 1 - T(x) below this are treated as lying on the stop set.
inline constexpr double kSigmaFloor = 1e-10;

enum class Errc {
  AmbiguousProjection,
  OutsideTube,
  OutOfDomain,
  NearStopSet,
  DegenerateField,
  NotCausal,
  EmptyMask,
  DisconnectedMask,
  StepLimit,
  LeftDomain,
  LevelNotFound,
  NodeProximity,
  MissingAux,
  UnreadableImage,
  MaskMismatch,
  InvalidArgument,
};

const char* to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

template <typename Scalar>
inline Eigen::Matrix<Scalar, 2, 1> perp(const Eigen::Matrix<Scalar, 2, 1>& v) {
  return {-v.y(), v.x()};
}

template <typename Scalar>
inline Eigen::Matrix<Scalar, 2, 1> rotate(const Eigen::Matrix<Scalar, 2, 1>& v, Scalar angle) {
  using std::cos;
  using std::sin;
  const Scalar c = cos(angle), s = sin(angle);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

}  // namespace charflow
