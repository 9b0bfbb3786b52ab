#pragma once

#include <vector>

#include "ssi/inversion.hpp"

namespace ssi {

/// Two interpolation endpoints and the angle between them.
class SlerpPair {
 public:
  SlerpPair(Vector a, Vector b);

  const Vector& a() const noexcept { return a_; }
  const Vector& b() const noexcept { return b_; }
  double theta() const noexcept { return theta_; }

 private:
  Vector a_;
  Vector b_;
  double theta_;
};

/// Angles below this use linear interpolation.
inline constexpr double kSlerpLinearThreshold = 1e-6;

/// sin((1-l) theta) / sin(theta) a + sin(l theta) / sin(theta) b. Endpoints are returned verbatim.
/// Throws for antipodal inputs and lambda outside [0, 1].
Vector slerp(const SlerpPair& pair, double lambda);
inline Vector slerp(const Vector& a, const Vector& b, double lambda) { return slerp(SlerpPair(a, b), lambda); }

/// Slerps the two inverted noises at each lambda and decodes each through the sampler.
std::vector<Reconstruction> interpolate_and_decode(const ScoreModel& model, const NoiseSchedule& sch,
                                                   const InversionResult& a, const InversionResult& b,
                                                   const std::vector<double>& lambdas, const TimeGrid& grid,
                                                   SamplerSpec spec);

}  // namespace ssi
