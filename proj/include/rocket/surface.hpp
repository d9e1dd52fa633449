#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "rocket/transform.hpp"

namespace rocket {

/// Height profile in micrometres, sampled every `spacing` micrometres.
struct SurfaceProfile {
  std::vector<double> heights;
  double spacing = 0.8;
};

inline constexpr double kDefaultCutoffUm = 800.0;

/// Subtracts each channel's mean over time and divides by its population
/// standard deviation, per example. Constant channels become zeros.
TimeSeriesBatch normalize_per_channel(const TimeSeriesBatch& batch);

/// Half-width of the profile filter in samples, floor(cutoff / spacing).
std::size_t filter_half_width(double cutoff, double spacing);

/// Profile minus its Gaussian mean line. The weighting function is
/// s(x) = exp(-pi (x / (a * cutoff))^2) / (a * cutoff), a = sqrt(ln 2 / pi),
/// truncated at +-cutoff and renormalized to unit sum (near the ends, over the
/// samples that exist). Transmission of the mean line is 50% at the cutoff
/// wavelength.
SurfaceProfile highpass_filter(const SurfaceProfile& profile, double cutoff);

/// Mean absolute deviation of the mean-centred profile. With a cutoff the
/// profile is high-pass filtered first and only the central samples
/// [m, n - m) are used, m = filter_half_width(cutoff, spacing).
double compute_ra(const SurfaceProfile& profile, std::optional<double> cutoff);

struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t n_samples = 200;
  std::size_t n_channels = 20;
  std::size_t n_timesteps = 2000;
  double ra_min = 0.605;
  double ra_max = 1.834;
  double spacing = 0.8;
  double cutoff = kDefaultCutoffUm;
  double sensor_noise_sd = 3.0;
  double gain_min = 0.8;
  double gain_max = 1.2;
  double occlusion_probability = 0.1;
  double correlation_length = 20.0;
  // Sensor arc covers [-arc_half_span, +arc_half_span] radians.
  double arc_half_span = 0.3;
  // Angular response width of one sensor, radians.
  double angular_width = 0.03;

  void validate() const;
};

struct SyntheticDataset {
  TimeSeriesBatch batch;
  std::vector<double> labels;
  std::vector<SurfaceProfile> profiles;
};

SyntheticDataset generate_dataset(const SynthConfig& config);

/// "RKDS" + little-endian u32 {version=1, N, C, T} + N*C*T little-endian f32.
void write_dataset(const TimeSeriesBatch& batch, const std::filesystem::path& path);
TimeSeriesBatch read_dataset(const std::filesystem::path& path);

/// "example_id,ra" CSV.
void write_labels_csv(std::span<const double> labels, const std::filesystem::path& path);
std::vector<double> read_labels_csv(const std::filesystem::path& path);

}  // namespace rocket
