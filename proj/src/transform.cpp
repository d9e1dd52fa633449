#include "rocket/transform.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>

#include "rocket/errors.hpp"
#include "rocket/text.hpp"

namespace rocket {

TimeSeriesBatch::TimeSeriesBatch(std::size_t n_examples, std::size_t n_channels,
                                 std::size_t n_timesteps)
    : n_examples_(n_examples),
      n_channels_(n_channels),
      n_timesteps_(n_timesteps),
      data_(n_examples * n_channels * n_timesteps) {
  ++allocations_;
}

TimeSeriesBatch::TimeSeriesBatch(std::size_t n_examples, std::size_t n_channels,
                                 std::size_t n_timesteps, std::vector<float> data)
    : n_examples_(n_examples),
      n_channels_(n_channels),
      n_timesteps_(n_timesteps),
      data_(std::move(data)) {
  ++allocations_;
  if (data_.size() != n_examples * n_channels * n_timesteps) {
    throw ParameterError("batch data length does not equal N*C*T");
  }
  for (float x : data_) {
    if (!std::isfinite(x)) throw ParameterError("batch contains non-finite values");
  }
}

TimeSeriesBatch TimeSeriesBatch::select(std::span<const std::size_t> indices) const {
  TimeSeriesBatch out(indices.size(), n_channels_, n_timesteps_);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= n_examples_) throw ParameterError("example index out of range");
    const auto src = example(indices[r]);
    std::copy(src.begin(), src.end(), out.example(r).begin());
  }
  return out;
}

FeatureMatrix FeatureMatrix::select(std::span<const std::size_t> indices) const {
  FeatureMatrix out(indices.size(), cols_);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= rows_) throw ParameterError("row index out of range");
    const auto src = row(indices[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

std::ptrdiff_t output_length(const Kernel& kernel, std::size_t n_timesteps) {
  return static_cast<std::ptrdiff_t>(n_timesteps) + 2 * kernel.padding - kernel.span();
}

namespace {

void check_kernel_fits(const Kernel& kernel, std::size_t n_channels, std::size_t n_timesteps) {
  for (int c : kernel.channel_indices) {
    if (c < 0 || static_cast<std::size_t>(c) >= n_channels) {
      throw ParameterError("kernel channel index " + std::to_string(c) + " out of range for " +
                           std::to_string(n_channels) + " channels");
    }
  }
  if (kernel.length < 1 || kernel.dilation < 1 || kernel.padding < 0) {
    throw ParameterError("kernel has non-positive length/dilation or negative padding");
  }
  if (kernel.weights.size() != kernel.channel_indices.size() * static_cast<std::size_t>(kernel.length)) {
    throw ParameterError("kernel weight count does not match channels x length");
  }
  if (output_length(kernel, n_timesteps) < 1) {
    throw ParameterError("kernel receptive field exceeds padded series length");
  }
}

void check_inputs(const TimeSeriesBatch& batch, const KernelSet& kernels) {
  if (batch.n_channels() != static_cast<std::size_t>(kernels.num_channels())) {
    throw ParameterError("batch has " + std::to_string(batch.n_channels()) +
                         " channels, kernels expect " + std::to_string(kernels.num_channels()));
  }
  for (const auto& k : kernels.kernels()) check_kernel_fits(k, batch.n_channels(), batch.n_timesteps());
}

// Convolution of one example into `out` (length output_length). For every
// output element the terms are added in the order bias, then selected channel,
// then tap. Padded positions are skipped, which adds nothing.
void convolve(std::span<const float> series, std::size_t n_timesteps, const Kernel& kernel,
              std::span<float> out) {
  const auto n_out = static_cast<std::ptrdiff_t>(out.size());
  const auto t = static_cast<std::ptrdiff_t>(n_timesteps);
  std::fill(out.begin(), out.end(), kernel.bias);
  for (std::size_t ci = 0; ci < kernel.channel_indices.size(); ++ci) {
    const float* x = series.data() + static_cast<std::size_t>(kernel.channel_indices[ci]) * n_timesteps;
    const float* w = kernel.weights.data() + ci * static_cast<std::size_t>(kernel.length);
    for (int j = 0; j < kernel.length; ++j) {
      // Input index for output i is i + offset.
      const std::ptrdiff_t offset = static_cast<std::ptrdiff_t>(j) * kernel.dilation - kernel.padding;
      const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -offset);
      const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n_out, t - offset);
      const float wj = w[j];
      float* o = out.data();
      const float* xs = x + offset;
      for (std::ptrdiff_t i = lo; i < hi; ++i) o[i] += wj * xs[i];
    }
  }
}

void pool_into(std::span<const float> z, const PoolingConfig& pooling, std::size_t k,
               std::span<float> row) {
  const float p = pooling.mode == PoolingMode::kHard ? ppv(z) : soft_ppv(z, pooling.lambda, pooling.shift);
  if (pooling.include_max) {
    row[2 * k] = p;
    row[2 * k + 1] = max_pool(z);
  } else {
    row[k] = p;
  }
}

std::size_t max_output_length(const KernelSet& kernels, std::size_t n_timesteps) {
  std::size_t longest = 0;
  for (const auto& k : kernels.kernels()) {
    longest = std::max(longest, static_cast<std::size_t>(output_length(k, n_timesteps)));
  }
  return longest;
}

// Runs fn(example_index, scratch) for every example on up to `workers`
// threads. Each example is handled by exactly one thread.
template <typename Fn>
void for_each_example(std::size_t n_examples, unsigned workers, std::size_t scratch_size, Fn&& fn) {
  if (workers == 0) workers = default_worker_count();
  const auto n_threads = static_cast<unsigned>(std::min<std::size_t>(workers, n_examples));
  if (n_threads <= 1) {
    std::vector<float> scratch(scratch_size);
    for (std::size_t i = 0; i < n_examples; ++i) fn(i, std::span<float>(scratch));
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> threads;
    threads.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) {
      threads.emplace_back([&] {
        std::vector<float> scratch(scratch_size);
        try {
          for (std::size_t i = next++; i < n_examples; i = next++) fn(i, std::span<float>(scratch));
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n_examples;
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::vector<float> apply_kernel(std::span<const float> series, std::size_t n_channels,
                                const Kernel& kernel) {
  if (n_channels == 0 || series.size() % n_channels != 0) {
    throw ParameterError("series length is not a multiple of the channel count");
  }
  const std::size_t n_timesteps = series.size() / n_channels;
  check_kernel_fits(kernel, n_channels, n_timesteps);
  std::vector<float> out(static_cast<std::size_t>(output_length(kernel, n_timesteps)));
  convolve(series, n_timesteps, kernel, out);
  return out;
}

unsigned default_worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

void transform_batch_into(const TimeSeriesBatch& batch, const KernelSet& kernels,
                          const PoolingConfig& pooling, FeatureMatrix& out, unsigned workers) {
  pooling.validate();
  check_inputs(batch, kernels);
  const std::size_t n_features = feature_count(kernels.count(), pooling);
  if (out.rows() != batch.n_examples() || out.cols() != n_features) {
    throw ParameterError("output matrix has the wrong shape");
  }
  const std::size_t t = batch.n_timesteps();
  for_each_example(batch.n_examples(), workers, max_output_length(kernels, t),
                   [&](std::size_t i, std::span<float> scratch) {
                     const auto series = batch.example(i);
                     auto row = out.row(i);
                     for (std::size_t k = 0; k < kernels.count(); ++k) {
                       const auto z = scratch.first(static_cast<std::size_t>(output_length(kernels[k], t)));
                       convolve(series, t, kernels[k], z);
                       pool_into(z, pooling, k, row);
                     }
                   });
}

FeatureMatrix transform_batch(const TimeSeriesBatch& batch, const KernelSet& kernels,
                              const PoolingConfig& pooling, unsigned workers) {
  FeatureMatrix out(batch.n_examples(), feature_count(kernels.count(), pooling));
  transform_batch_into(batch, kernels, pooling, out, workers);
  return out;
}

std::vector<FeatureMatrix> transform_batch_multi(const TimeSeriesBatch& batch,
                                                 const KernelSet& kernels,
                                                 std::span<const PoolingConfig> poolings,
                                                 unsigned workers) {
  for (const auto& p : poolings) p.validate();
  check_inputs(batch, kernels);
  std::vector<FeatureMatrix> outs;
  outs.reserve(poolings.size());
  for (const auto& p : poolings) outs.emplace_back(batch.n_examples(), feature_count(kernels.count(), p));
  if (poolings.empty()) return outs;

  const std::size_t t = batch.n_timesteps();
  for_each_example(batch.n_examples(), workers, max_output_length(kernels, t),
                   [&](std::size_t i, std::span<float> scratch) {
                     const auto series = batch.example(i);
                     for (std::size_t k = 0; k < kernels.count(); ++k) {
                       const auto z = scratch.first(static_cast<std::size_t>(output_length(kernels[k], t)));
                       convolve(series, t, kernels[k], z);
                       for (std::size_t p = 0; p < poolings.size(); ++p) {
                         pool_into(z, poolings[p], k, outs[p].row(i));
                       }
                     }
                   });
  return outs;
}

FeatureMatrix transform_reference(const TimeSeriesBatch& batch, const KernelSet& kernels,
                                  const PoolingConfig& pooling) {
  pooling.validate();
  check_inputs(batch, kernels);
  const std::size_t n = batch.n_examples();
  const std::size_t t = batch.n_timesteps();
  FeatureMatrix out(n, feature_count(kernels.count(), pooling));

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < kernels.count(); ++k) {
      const Kernel& kernel = kernels[k];
      const std::size_t pad = static_cast<std::size_t>(kernel.padding);
      const std::size_t padded_len = t + 2 * pad;
      const std::size_t n_out = padded_len - static_cast<std::size_t>(kernel.span());

      std::vector<std::vector<float>> padded;
      for (int c : kernel.channel_indices) {
        std::vector<float> xp(padded_len, 0.0f);
        const auto src = batch.channel(i, static_cast<std::size_t>(c));
        for (std::size_t s = 0; s < t; ++s) xp[s + pad] = src[s];
        padded.push_back(std::move(xp));
      }

      std::vector<float> z(n_out);
      for (std::size_t o = 0; o < n_out; ++o) {
        float acc = kernel.bias;
        for (std::size_t ci = 0; ci < padded.size(); ++ci) {
          for (int j = 0; j < kernel.length; ++j) {
            const float w = kernel.weights[ci * static_cast<std::size_t>(kernel.length) + static_cast<std::size_t>(j)];
            acc += w * padded[ci][o + static_cast<std::size_t>(j * kernel.dilation)];
          }
        }
        z[o] = acc;
      }

      const float p = pooling.mode == PoolingMode::kHard ? ppv(z) : soft_ppv(z, pooling.lambda, pooling.shift);
      if (pooling.include_max) {
        out(i, 2 * k) = p;
        out(i, 2 * k + 1) = max_pool(z);
      } else {
        out(i, k) = p;
      }
    }
  }
  return out;
}

void write_features_csv(const FeatureMatrix& features, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "example_id";
  for (std::size_t f = 0; f < features.cols(); ++f) out << ",f" << f;
  out << '\n';
  for (std::size_t r = 0; r < features.rows(); ++r) {
    out << r;
    for (float v : features.row(r)) out << ',' << to_text(v);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

FeatureMatrix read_features_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": missing header");
  const auto header = split_fields(line);
  if (header.empty() || header[0] != "example_id") throw FormatError(path.string() + ": bad header");
  const std::size_t cols = header.size() - 1;

  std::vector<float> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != cols + 1) {
      throw FormatError(path.string() + ": row " + std::to_string(rows) + " has wrong field count");
    }
    for (std::size_t f = 1; f < fields.size(); ++f) values.push_back(parse_number<float>(fields[f]));
    ++rows;
  }
  FeatureMatrix m(rows, cols);
  std::copy(values.begin(), values.end(), m.values().begin());
  return m;
}

}  // namespace rocket
