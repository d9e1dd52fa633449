#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "rocket/kernelgen.hpp"
#include "rocket/pooling.hpp"

namespace rocket {

/// N examples x C channels x T timesteps, row-major [example][channel][timestep].
class TimeSeriesBatch {
 public:
  TimeSeriesBatch() = default;
  TimeSeriesBatch(std::size_t n_examples, std::size_t n_channels, std::size_t n_timesteps);
  TimeSeriesBatch(std::size_t n_examples, std::size_t n_channels, std::size_t n_timesteps,
                  std::vector<float> data);

  std::size_t n_examples() const { return n_examples_; }
  std::size_t n_channels() const { return n_channels_; }
  std::size_t n_timesteps() const { return n_timesteps_; }

  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }

  std::span<const float> example(std::size_t i) const {
    return std::span<const float>(data_).subspan(i * n_channels_ * n_timesteps_,
                                                 n_channels_ * n_timesteps_);
  }
  std::span<float> example(std::size_t i) {
    return std::span<float>(data_).subspan(i * n_channels_ * n_timesteps_,
                                           n_channels_ * n_timesteps_);
  }
  std::span<const float> channel(std::size_t i, std::size_t c) const {
    return example(i).subspan(c * n_timesteps_, n_timesteps_);
  }
  std::span<float> channel(std::size_t i, std::size_t c) {
    return example(i).subspan(c * n_timesteps_, n_timesteps_);
  }

  // Rows `indices` in the given order.
  TimeSeriesBatch select(std::span<const std::size_t> indices) const;

  bool operator==(const TimeSeriesBatch&) const = default;

  // Number of batches whose sample storage has been allocated so far. Used by
  // the benchmark to check that timed regions never build inputs.
  static std::size_t allocation_count() { return allocations_.load(); }

 private:
  std::size_t n_examples_ = 0;
  std::size_t n_channels_ = 0;
  std::size_t n_timesteps_ = 0;
  std::vector<float> data_;

  static inline std::atomic<std::size_t> allocations_{0};
};

/// N x F pooled features. With include_max, kernel k owns columns
/// [2k, 2k+1] = [PPV_k, MAX_k]; otherwise column k = PPV_k.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), values_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  float operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  float& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  std::span<const float> row(std::size_t r) const {
    return std::span<const float>(values_).subspan(r * cols_, cols_);
  }
  std::span<float> row(std::size_t r) { return std::span<float>(values_).subspan(r * cols_, cols_); }
  std::span<const float> values() const { return values_; }
  std::span<float> values() { return values_; }

  FeatureMatrix select(std::span<const std::size_t> indices) const;

  bool operator==(const FeatureMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> values_;
};

inline std::size_t feature_count(std::size_t num_kernels, const PoolingConfig& pooling) {
  return num_kernels * (pooling.include_max ? 2 : 1);
}

/// Output length of a kernel over a series of `n_timesteps` samples.
std::ptrdiff_t output_length(const Kernel& kernel, std::size_t n_timesteps);

/// Dilated cross-correlation of one example (C x T, row-major) with `kernel`
/// over the zero-padded series:
///   out[i] = bias + sum_c sum_j w[c][j] * x_pad[c][i + j * dilation]
std::vector<float> apply_kernel(std::span<const float> series, std::size_t n_channels,
                                const Kernel& kernel);

/// Worker count used when `workers` is 0.
unsigned default_worker_count();

/// Batched transform. Examples are distributed over `workers` threads
/// (0 = hardware concurrency); every feature is produced by one thread with a
/// fixed summation order, so the result does not depend on the worker count.
FeatureMatrix transform_batch(const TimeSeriesBatch& batch, const KernelSet& kernels,
                              const PoolingConfig& pooling, unsigned workers = 0);

/// As transform_batch, writing into a preallocated matrix of the right shape.
void transform_batch_into(const TimeSeriesBatch& batch, const KernelSet& kernels,
                          const PoolingConfig& pooling, FeatureMatrix& out, unsigned workers = 0);

/// Convolves once per (example, kernel) and pools the result under each
/// configuration. Element p of the result equals transform_batch(batch,
/// kernels, poolings[p]) bit for bit.
std::vector<FeatureMatrix> transform_batch_multi(const TimeSeriesBatch& batch,
                                                 const KernelSet& kernels,
                                                 std::span<const PoolingConfig> poolings,
                                                 unsigned workers = 0);

/// Unoptimized single-threaded reference: explicit padded copy, naive loops,
/// then the scalar pooling functions. Test oracle only.
FeatureMatrix transform_reference(const TimeSeriesBatch& batch, const KernelSet& kernels,
                                  const PoolingConfig& pooling);

/// CSV with header "example_id,f0,...,f{F-1}" and round-trip float text.
void write_features_csv(const FeatureMatrix& features, const std::filesystem::path& path);
FeatureMatrix read_features_csv(const std::filesystem::path& path);

}  // namespace rocket
