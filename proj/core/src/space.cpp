#include "psmco/space.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "psmco/errors.hpp"

namespace psmco {

SearchSpace::SearchSpace(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.empty()) throw InvalidArgument("search space needs at least one dimension");
  if (lower_.size() != upper_.size())
    throw InvalidArgument("search space bounds have different lengths");
  for (std::size_t j = 0; j < lower_.size(); ++j) {
    if (!std::isfinite(lower_[j]) || !std::isfinite(upper_[j]) || !(lower_[j] < upper_[j]))
      throw InvalidArgument("search space requires lower < upper on coordinate " +
                            std::to_string(j));
  }
}

SearchSpace SearchSpace::cube(std::size_t dim, double lower, double upper) {
  return SearchSpace(std::vector<double>(dim, lower), std::vector<double>(dim, upper));
}

bool SearchSpace::contains(std::span<const double> theta) const {
  if (theta.size() != dim()) return false;
  for (std::size_t j = 0; j < theta.size(); ++j)
    if (!(lower_[j] <= theta[j] && theta[j] <= upper_[j])) return false;
  return true;
}

std::vector<double> SearchSpace::clip(std::span<const double> theta) const {
  std::vector<double> out(theta.begin(), theta.end());
  clip_in_place(out);
  return out;
}

void SearchSpace::clip_in_place(std::span<double> theta) const {
  if (theta.size() != dim()) throw InvalidArgument("point dimension does not match search space");
  for (std::size_t j = 0; j < theta.size(); ++j) theta[j] = std::clamp(theta[j], lower_[j], upper_[j]);
}

ParticleSet::ParticleSet(std::size_t dim, std::vector<double> data)
    : dim_(dim), data_(std::move(data)) {
  if (dim_ == 0 || data_.size() % dim_ != 0)
    throw InvalidArgument("particle data length is not a multiple of the dimension");
}

}  // namespace psmco
