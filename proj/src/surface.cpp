#include "rocket/surface.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <string>

#include "rocket/errors.hpp"
#include "rocket/random.hpp"
#include "rocket/text.hpp"

namespace rocket {
namespace {

constexpr char kMagic[4] = {'R', 'K', 'D', 'S'};
constexpr std::uint32_t kDatasetVersion = 1;

void check_profile(const SurfaceProfile& p) {
  if (p.heights.size() < 2) throw ParameterError("profile needs at least 2 samples");
  if (!(p.spacing > 0.0) || !std::isfinite(p.spacing)) throw ParameterError("profile spacing must be > 0");
}

double mean_abs_deviation(std::span<const double> z) {
  double mean = 0.0;
  for (double v : z) mean += v;
  mean /= static_cast<double>(z.size());
  double sum = 0.0;
  for (double v : z) sum += std::fabs(v - mean);
  return sum / static_cast<double>(z.size());
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(const unsigned char* b) {
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

// Smooths white noise with a unit-sum Gaussian of standard deviation
// `sigma_samples`; returns exactly `length` samples.
std::vector<double> correlated_noise(Rng& rng, std::size_t length, double sigma_samples) {
  if (sigma_samples <= 0.0) {
    std::vector<double> out(length);
    for (auto& v : out) v = rng.normal();
    return out;
  }
  const auto radius = static_cast<std::size_t>(std::ceil(4.0 * sigma_samples));
  std::vector<double> kernel(2 * radius + 1);
  double total = 0.0;
  for (std::size_t k = 0; k < kernel.size(); ++k) {
    const double x = static_cast<double>(k) - static_cast<double>(radius);
    kernel[k] = std::exp(-0.5 * x * x / (sigma_samples * sigma_samples));
    total += kernel[k];
  }
  for (auto& w : kernel) w /= total;

  std::vector<double> white(length + 2 * radius);
  for (auto& v : white) v = rng.normal();
  std::vector<double> out(length, 0.0);
  for (std::size_t i = 0; i < length; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < kernel.size(); ++k) acc += kernel[k] * white[i + k];
    out[i] = acc;
  }
  return out;
}

}  // namespace

TimeSeriesBatch normalize_per_channel(const TimeSeriesBatch& batch) {
  if (batch.n_timesteps() < 2) throw ParameterError("normalization needs at least 2 timesteps");
  TimeSeriesBatch out(batch.n_examples(), batch.n_channels(), batch.n_timesteps());
  const auto t = static_cast<double>(batch.n_timesteps());
  for (std::size_t i = 0; i < batch.n_examples(); ++i) {
    for (std::size_t c = 0; c < batch.n_channels(); ++c) {
      const auto src = batch.channel(i, c);
      auto dst = out.channel(i, c);
      double mean = 0.0;
      for (float v : src) mean += v;
      mean /= t;
      double ss = 0.0;
      for (float v : src) ss += (v - mean) * (v - mean);
      const double sd = std::sqrt(ss / t);
      if (sd <= 1e-12 * std::max(1.0, std::fabs(mean))) {
        std::fill(dst.begin(), dst.end(), 0.0f);
        continue;
      }
      for (std::size_t s = 0; s < src.size(); ++s) dst[s] = static_cast<float>((src[s] - mean) / sd);
    }
  }
  return out;
}

std::size_t filter_half_width(double cutoff, double spacing) {
  return static_cast<std::size_t>(std::floor(cutoff / spacing));
}

SurfaceProfile highpass_filter(const SurfaceProfile& profile, double cutoff) {
  check_profile(profile);
  if (!(cutoff > 2.0 * profile.spacing) || !std::isfinite(cutoff)) {
    throw ParameterError("cutoff must exceed twice the sample spacing");
  }
  const std::size_t n = profile.heights.size();
  const std::size_t m = filter_half_width(cutoff, profile.spacing);
  if (n < m) throw ParameterError("profile is shorter than the cutoff wavelength");

  const double alpha = std::sqrt(std::log(2.0) / std::numbers::pi);
  const double width = alpha * cutoff;
  // weights[k] is the weight at offset k samples, k = 0..m (symmetric).
  std::vector<double> weights(m + 1);
  for (std::size_t k = 0; k <= m; ++k) {
    const double x = static_cast<double>(k) * profile.spacing / width;
    weights[k] = std::exp(-std::numbers::pi * x * x) / width;
  }

  SurfaceProfile out{std::vector<double>(n), profile.spacing};
  const auto& h = profile.heights;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= m ? i - m : 0;
    const std::size_t hi = std::min(n - 1, i + m);
    double acc = 0.0;
    double total = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) {
      const double w = weights[j > i ? j - i : i - j];
      acc += w * h[j];
      total += w;
    }
    out.heights[i] = h[i] - acc / total;
  }
  return out;
}

double compute_ra(const SurfaceProfile& profile, std::optional<double> cutoff) {
  check_profile(profile);
  if (!cutoff) return mean_abs_deviation(profile.heights);

  const SurfaceProfile rough = highpass_filter(profile, *cutoff);
  const std::size_t n = rough.heights.size();
  const std::size_t m = filter_half_width(*cutoff, profile.spacing);
  if (n <= 2 * m) throw ParameterError("profile too short for an unaffected central region");
  return mean_abs_deviation(std::span<const double>(rough.heights).subspan(m, n - 2 * m));
}

void SynthConfig::validate() const {
  if (n_channels < 1) throw ParameterError("n_channels must be >= 1");
  if (n_timesteps < 2) throw ParameterError("n_timesteps must be >= 2");
  if (!(ra_min > 0.0) || !(ra_min <= ra_max)) throw ParameterError("target Ra range must satisfy 0 < min <= max");
  if (!(spacing > 0.0)) throw ParameterError("spacing must be > 0");
  if (!(cutoff > 2.0 * spacing)) throw ParameterError("cutoff must exceed twice the spacing");
  if (!(sensor_noise_sd >= 0.0)) throw ParameterError("sensor_noise_sd must be >= 0");
  if (!(gain_min > 0.0) || !(gain_min <= gain_max)) throw ParameterError("gain range must satisfy 0 < min <= max");
  if (!(occlusion_probability >= 0.0 && occlusion_probability <= 1.0)) {
    throw ParameterError("occlusion_probability must be in [0, 1]");
  }
  if (!(correlation_length >= 0.0)) throw ParameterError("correlation_length must be >= 0");
  if (!(arc_half_span > 0.0)) throw ParameterError("arc_half_span must be > 0");
  if (!(angular_width > 0.0)) throw ParameterError("angular_width must be > 0");
}

SyntheticDataset generate_dataset(const SynthConfig& config) {
  config.validate();
  const std::size_t n = config.n_samples;
  const std::size_t c_count = config.n_channels;
  const std::size_t t_count = config.n_timesteps;
  const std::size_t margin = filter_half_width(config.cutoff, config.spacing);
  const std::size_t sensed = t_count + 1;
  const std::size_t length = sensed + 2 * margin;

  std::vector<double> channel_angles(c_count, 0.0);
  for (std::size_t c = 0; c < c_count && c_count > 1; ++c) {
    channel_angles[c] = -config.arc_half_span +
                        2.0 * config.arc_half_span * static_cast<double>(c) / static_cast<double>(c_count - 1);
  }
  const double inv_two_var = 1.0 / (2.0 * config.angular_width * config.angular_width);

  Rng rng(config.seed);
  SyntheticDataset ds;
  ds.batch = TimeSeriesBatch(n, c_count, t_count);
  ds.labels.reserve(n);
  ds.profiles.reserve(n);

  std::vector<double> angles(t_count);
  std::vector<double> gains(c_count);
  for (std::size_t i = 0; i < n; ++i) {
    const double target = rng.uniform(config.ra_min, config.ra_max);
    SurfaceProfile profile{correlated_noise(rng, length, config.correlation_length / config.spacing),
                           config.spacing};
    const double ra0 = compute_ra(profile, config.cutoff);
    const double scale = ra0 > 0.0 ? target / ra0 : 0.0;
    for (auto& h : profile.heights) h *= scale;

    for (std::size_t t = 0; t < t_count; ++t) {
      const double slope = (profile.heights[margin + t + 1] - profile.heights[margin + t]) / config.spacing;
      angles[t] = std::atan(2.0 * slope);
    }
    for (auto& g : gains) g = rng.uniform(config.gain_min, config.gain_max);
    for (auto& g : gains) {
      if (rng.uniform() < config.occlusion_probability) g *= rng.uniform(0.2, 0.7);
    }
    for (std::size_t c = 0; c < c_count; ++c) {
      auto out = ds.batch.channel(i, c);
      for (std::size_t t = 0; t < t_count; ++t) {
        const double d = angles[t] - channel_angles[c];
        double v = gains[c] * 255.0 * std::exp(-d * d * inv_two_var);
        v += config.sensor_noise_sd * rng.normal();
        out[t] = static_cast<float>(std::nearbyint(std::clamp(v, 0.0, 255.0)));
      }
    }

    ds.labels.push_back(compute_ra(profile, config.cutoff));
    ds.profiles.push_back(std::move(profile));
  }
  return ds;
}

void write_dataset(const TimeSeriesBatch& batch, const std::filesystem::path& path) {
  const auto limit = static_cast<std::size_t>(UINT32_MAX);
  if (batch.n_examples() > limit || batch.n_channels() > limit || batch.n_timesteps() > limit) {
    throw ParameterError("dataset dimensions exceed 32-bit header fields");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(kMagic, 4);
  put_u32(out, kDatasetVersion);
  put_u32(out, static_cast<std::uint32_t>(batch.n_examples()));
  put_u32(out, static_cast<std::uint32_t>(batch.n_channels()));
  put_u32(out, static_cast<std::uint32_t>(batch.n_timesteps()));
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(batch.data().data()),
              static_cast<std::streamsize>(batch.data().size_bytes()));
  } else {
    for (float v : batch.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

TimeSeriesBatch read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  unsigned char header[20];
  if (!in.read(reinterpret_cast<char*>(header), sizeof(header))) {
    throw FormatError(path.string() + ": truncated header");
  }
  if (std::memcmp(header, kMagic, 4) != 0) throw FormatError(path.string() + ": bad magic");
  if (get_u32(header + 4) != kDatasetVersion) throw FormatError(path.string() + ": unsupported version");
  const std::size_t n = get_u32(header + 8);
  const std::size_t c = get_u32(header + 12);
  const std::size_t t = get_u32(header + 16);

  std::vector<float> data(n * c * t);
  std::vector<unsigned char> raw(data.size() * 4);
  if (!raw.empty() && !in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
    throw FormatError(path.string() + ": truncated payload");
  }
  if (in.peek() != std::ifstream::traits_type::eof()) throw FormatError(path.string() + ": trailing bytes");
  for (std::size_t k = 0; k < data.size(); ++k) data[k] = std::bit_cast<float>(get_u32(raw.data() + 4 * k));
  try {
    return TimeSeriesBatch(n, c, t, std::move(data));
  } catch (const ParameterError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_labels_csv(std::span<const double> labels, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "example_id,ra\n";
  for (std::size_t i = 0; i < labels.size(); ++i) out << i << ',' << to_text(labels[i]) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<double> read_labels_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "example_id,ra") throw FormatError(path.string() + ": bad header");
  std::vector<double> labels;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 2) throw FormatError(path.string() + ": bad row");
    if (parse_number<std::size_t>(fields[0]) != labels.size()) {
      throw FormatError(path.string() + ": example ids must be 0..N-1 in order");
    }
    labels.push_back(parse_number<double>(fields[1]));
  }
  return labels;
}

}  // namespace rocket
