#include "ssi/interp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ssi/error.hpp"
#include "ssi/parallel.hpp"

namespace ssi {

SlerpPair::SlerpPair(Vector a, Vector b) : a_(std::move(a)), b_(std::move(b)) {
  if (a_.size() != b_.size()) throw InvalidArgument("slerp endpoints differ in dimension");
  const double na = a_.norm();
  const double nb = b_.norm();
  if (!(na > 0.0) || !(nb > 0.0)) throw InvalidArgument("slerp endpoint is the zero vector");
  if (!std::isfinite(na) || !std::isfinite(nb)) throw InvalidArgument("slerp endpoint is not finite");
  theta_ = std::acos(std::clamp(a_.dot(b_) / (na * nb), -1.0, 1.0));
}

Vector slerp(const SlerpPair& pair, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("slerp lambda must lie in [0, 1]");
  if (lambda == 0.0) return pair.a();
  if (lambda == 1.0) return pair.b();
  const double theta = pair.theta();
  if (theta < kSlerpLinearThreshold) return (1.0 - lambda) * pair.a() + lambda * pair.b();
  const double st = std::sin(theta);
  if (std::numbers::pi - theta < kSlerpLinearThreshold || st == 0.0)
    throw InvalidArgument("slerp is undefined for antipodal endpoints");
  return (std::sin((1.0 - lambda) * theta) / st) * pair.a() + (std::sin(lambda * theta) / st) * pair.b();
}

std::vector<Reconstruction> interpolate_and_decode(const ScoreModel& model, const NoiseSchedule& sch,
                                                   const InversionResult& a, const InversionResult& b,
                                                   const std::vector<double>& lambdas, const TimeGrid& grid,
                                                   SamplerSpec spec) {
  if (a.schedule.family != b.schedule.family || a.schedule.family != sch.family ||
      a.schedule.beta0 != b.schedule.beta0 || a.schedule.beta1 != b.schedule.beta1)
    throw InvalidArgument("interpolated inversions use different schedules");
  if (a.t_final != b.t_final || a.formulation != b.formulation)
    throw InvalidArgument("interpolated inversions end at different times");
  const SlerpPair pair(a.noise, b.noise);
  return run_trials(lambdas.size(), [&](std::size_t i) {
    return sample_from(model, sch, a.formulation, slerp(pair, lambdas[i]), grid, spec);
  });
}

}  // namespace ssi
