#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "psmco/random.hpp"

namespace psmco {

/// A random partition of the 0-based component indices {0..n-1} into
/// T = ceil(n/K) consecutive batches. Every batch has K indices except
/// possibly the last, which holds the n - K(T-1) leftovers.
class MiniBatchSchedule {
 public:
  MiniBatchSchedule(std::vector<std::size_t> permutation, std::size_t batch_size);

  std::size_t num_batches() const noexcept { return num_batches_; }
  std::size_t batch_size() const noexcept { return batch_size_; }
  std::size_t num_components() const noexcept { return order_.size(); }

  /// Batch t, 0-based (I_{t+1} in 1-based notation).
  std::span<const std::size_t> batch(std::size_t t) const;

  const std::vector<std::size_t>& permutation() const noexcept { return order_; }

 private:
  std::vector<std::size_t> order_;
  std::size_t batch_size_;
  std::size_t num_batches_;
};

/// Uniformly random permutation of [n] chunked into size-K batches.
/// Throws InvalidArgument unless 1 <= K <= n.
MiniBatchSchedule build_schedule(std::size_t n, std::size_t batch_size, Rng& rng);

}  // namespace psmco
