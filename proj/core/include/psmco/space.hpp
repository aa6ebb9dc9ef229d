#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace psmco {

/// Compact axis-aligned box in R^d. Particles are kept inside by clamping.
class SearchSpace {
 public:
  /// Throws InvalidArgument unless lower[j] < upper[j] for every j and d >= 1.
  SearchSpace(std::vector<double> lower, std::vector<double> upper);

  /// Same bounds on every coordinate.
  static SearchSpace cube(std::size_t dim, double lower, double upper);

  std::size_t dim() const noexcept { return lower_.size(); }
  const std::vector<double>& lower() const noexcept { return lower_; }
  const std::vector<double>& upper() const noexcept { return upper_; }

  bool contains(std::span<const double> theta) const;

  /// Component-wise clamp into [lower, upper].
  std::vector<double> clip(std::span<const double> theta) const;
  void clip_in_place(std::span<double> theta) const;

  bool operator==(const SearchSpace&) const = default;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
};

inline std::vector<double> clip_to_space(const SearchSpace& space, std::span<const double> theta) {
  return space.clip(theta);
}

/// N points in R^d stored row-major.
class ParticleSet {
 public:
  ParticleSet() = default;
  ParticleSet(std::size_t count, std::size_t dim) : dim_(dim), data_(count * dim, 0.0) {}
  ParticleSet(std::size_t dim, std::vector<double> data);

  std::size_t size() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return data_.empty(); }

  std::span<double> operator[](std::size_t i) noexcept { return {data_.data() + i * dim_, dim_}; }
  std::span<const double> operator[](std::size_t i) const noexcept {
    return {data_.data() + i * dim_, dim_};
  }

  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

  bool operator==(const ParticleSet&) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

}  // namespace psmco
