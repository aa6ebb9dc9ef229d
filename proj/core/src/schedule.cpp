#include "psmco/schedule.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "psmco/errors.hpp"

namespace psmco {

MiniBatchSchedule::MiniBatchSchedule(std::vector<std::size_t> permutation, std::size_t batch_size)
    : order_(std::move(permutation)), batch_size_(batch_size) {
  if (batch_size_ == 0 || batch_size_ > order_.size())
    throw InvalidArgument("mini-batch size must satisfy 1 <= K <= n (K = " +
                          std::to_string(batch_size_) + ", n = " + std::to_string(order_.size()) +
                          ")");
  num_batches_ = (order_.size() + batch_size_ - 1) / batch_size_;
}

std::span<const std::size_t> MiniBatchSchedule::batch(std::size_t t) const {
  if (t >= num_batches_) throw InvalidArgument("batch index out of range");
  const std::size_t begin = t * batch_size_;
  const std::size_t end = std::min(order_.size(), begin + batch_size_);
  return {order_.data() + begin, end - begin};
}

MiniBatchSchedule build_schedule(std::size_t n, std::size_t batch_size, Rng& rng) {
  if (batch_size == 0 || batch_size > n)
    throw InvalidArgument("mini-batch size must satisfy 1 <= K <= n");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Fisher-Yates with our own draws so the permutation does not depend on
  // the standard library's shuffle.
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(order[i - 1], order[std::min(j, i - 1)]);
  }
  return MiniBatchSchedule(std::move(order), batch_size);
}

}  // namespace psmco
