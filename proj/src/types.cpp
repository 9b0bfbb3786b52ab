#include "ssi/types.hpp"

#include <cmath>

#include "ssi/error.hpp"

namespace ssi {

StateVector::StateVector(Vector v, std::optional<GridShape> shape) : values(std::move(v)), grid_shape(shape) {
  if (!all_finite(values)) throw InvalidArgument("state vector has non-finite components");
  if (grid_shape && grid_shape->size() != static_cast<std::size_t>(values.size()))
    throw InvalidArgument("grid shape does not match state dimension");
}

bool all_finite(const Vector& v) noexcept { return v.allFinite(); }

}  // namespace ssi
