#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ssi {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// (channels, height, width) layout of a flat state; index = (c*H + h)*W + w.
struct GridShape {
  int channels = 1;
  int height = 1;
  int width = 1;

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(channels) * static_cast<std::size_t>(height) *
           static_cast<std::size_t>(width);
  }
  Eigen::Index index(int c, int h, int w) const noexcept {
    return (static_cast<Eigen::Index>(c) * height + h) * width + w;
  }
  friend bool operator==(const GridShape&, const GridShape&) = default;
};

/// A d-dimensional state, optionally laid out as a (C,H,W) grid.
struct StateVector {
  Vector values;
  std::optional<GridShape> grid_shape;

  StateVector() = default;
  explicit StateVector(Vector v, std::optional<GridShape> shape = std::nullopt);

  Eigen::Index dim() const noexcept { return values.size(); }
};

bool all_finite(const Vector& v) noexcept;

}  // namespace ssi
