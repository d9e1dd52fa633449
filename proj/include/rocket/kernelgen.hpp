#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace rocket {

/// One random dilated convolution kernel.
///
/// Weights are stored row-major by selected channel then tap, so the weight
/// for the j-th tap on the c-th selected channel is `weights[c * length + j]`.
/// `padding` is the number of zeros added on each side of the input.
struct Kernel {
  int length = 0;
  std::vector<float> weights;
  float bias = 0.0f;
  int dilation = 1;
  int padding = 0;
  std::vector<int> channel_indices;

  int span() const { return (length - 1) * dilation; }
  int num_selected_channels() const { return static_cast<int>(channel_indices.size()); }

  bool operator==(const Kernel&) const = default;
};

class KernelSet {
 public:
  KernelSet() = default;
  KernelSet(std::vector<Kernel> kernels, int num_channels, int input_length_hint,
            std::uint64_t seed);

  const std::vector<Kernel>& kernels() const { return kernels_; }
  const Kernel& operator[](std::size_t k) const { return kernels_[k]; }
  std::size_t count() const { return kernels_.size(); }
  bool empty() const { return kernels_.empty(); }
  int num_channels() const { return num_channels_; }
  int input_length_hint() const { return input_length_hint_; }
  std::uint64_t seed() const { return seed_; }

  bool operator==(const KernelSet&) const = default;

 private:
  std::vector<Kernel> kernels_;
  int num_channels_ = 1;
  int input_length_hint_ = 0;
  std::uint64_t seed_ = 0;
};

inline constexpr int kKernelLengths[] = {7, 9, 11};
inline constexpr float kWeightSumTolerance = 1e-4f;

/// Draws `num_kernels` kernels from a single seeded stream. Per kernel the draw
/// order is fixed: length, channel count, channel indices, weights, bias,
/// dilation, padding. Throws ParameterError for num_channels < 1 or
/// input_length < 11.
KernelSet generate_kernels(std::uint64_t seed, int num_kernels, int input_length,
                           int num_channels);

/// Checks the structural invariants of a generated kernel against a series
/// shape. Throws FormatError naming `index` on the first violation.
void validate_kernel(const Kernel& kernel, std::size_t index, int num_channels,
                     int input_length_hint);

void save_kernels(const KernelSet& set, const std::filesystem::path& path);
KernelSet load_kernels(const std::filesystem::path& path);

}  // namespace rocket
