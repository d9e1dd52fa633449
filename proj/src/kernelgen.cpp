#include "rocket/kernelgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include <json.hpp>

#include "rocket/errors.hpp"
#include "rocket/random.hpp"

namespace rocket {
namespace {

// Floats stay floats so the file carries the shortest float text.
using FloatJson = nlohmann::basic_json<std::map, std::vector, std::string, bool, std::int64_t,
                                       std::uint64_t, float>;

constexpr int kFormatVersion = 1;

[[noreturn]] void kernel_error(std::size_t index, const std::string& what) {
  throw FormatError("kernel " + std::to_string(index) + ": " + what);
}

int same_padding(int length, int dilation) { return ((length - 1) * dilation) / 2; }

}  // namespace

KernelSet::KernelSet(std::vector<Kernel> kernels, int num_channels, int input_length_hint,
                     std::uint64_t seed)
    : kernels_(std::move(kernels)),
      num_channels_(num_channels),
      input_length_hint_(input_length_hint),
      seed_(seed) {}

KernelSet generate_kernels(std::uint64_t seed, int num_kernels, int input_length,
                           int num_channels) {
  if (num_kernels < 0) throw ParameterError("num_kernels must be >= 0");
  if (num_channels < 1) throw ParameterError("num_channels must be >= 1");
  if (input_length < 11) throw ParameterError("input_length must be >= 11");

  Rng rng(seed);
  std::vector<Kernel> kernels;
  kernels.reserve(static_cast<std::size_t>(num_kernels));

  std::vector<int> pool(static_cast<std::size_t>(num_channels));
  for (int k = 0; k < num_kernels; ++k) {
    Kernel kernel;
    kernel.length = kKernelLengths[rng.below(3)];

    int n_selected = 1;
    if (num_channels > 1) {
      const double u = rng.uniform(0.0, std::log2(static_cast<double>(num_channels)));
      n_selected = std::clamp(static_cast<int>(std::floor(std::exp2(u))), 1, num_channels);
    }

    // Partial Fisher-Yates: the first n_selected slots are a uniform sample.
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < n_selected; ++i) {
      const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(num_channels - i)));
      std::swap(pool[i], pool[j]);
    }
    kernel.channel_indices.assign(pool.begin(), pool.begin() + n_selected);
    std::sort(kernel.channel_indices.begin(), kernel.channel_indices.end());

    const auto n_weights = static_cast<std::size_t>(n_selected * kernel.length);
    kernel.weights.resize(n_weights);
    for (auto& w : kernel.weights) w = static_cast<float>(rng.normal());
    double mean = 0.0;
    for (float w : kernel.weights) mean += w;
    const auto shift = static_cast<float>(mean / static_cast<double>(n_weights));
    for (auto& w : kernel.weights) w -= shift;

    kernel.bias = static_cast<float>(rng.uniform(-1.0, 1.0));

    const double max_exponent =
        std::log2(static_cast<double>(input_length - 1) / (kernel.length - 1));
    const double x = rng.uniform(0.0, max_exponent);
    const int max_dilation = (input_length - 1) / (kernel.length - 1);
    kernel.dilation = std::clamp(static_cast<int>(std::floor(std::exp2(x))), 1, max_dilation);

    kernel.padding = rng.below(2) == 1 ? same_padding(kernel.length, kernel.dilation) : 0;

    kernels.push_back(std::move(kernel));
  }
  return KernelSet(std::move(kernels), num_channels, input_length, seed);
}

void validate_kernel(const Kernel& kernel, std::size_t index, int num_channels,
                     int input_length_hint) {
  if (kernel.length != 7 && kernel.length != 9 && kernel.length != 11) {
    kernel_error(index, "length must be 7, 9 or 11");
  }
  if (kernel.dilation < 1) kernel_error(index, "dilation must be positive");
  if (static_cast<long long>(kernel.length - 1) * kernel.dilation > input_length_hint - 1) {
    kernel_error(index, "receptive field exceeds input length");
  }
  if (kernel.padding != 0 && kernel.padding != same_padding(kernel.length, kernel.dilation)) {
    kernel_error(index, "padding must be 0 or (length-1)*dilation/2");
  }
  if (!(kernel.bias >= -1.0f && kernel.bias <= 1.0f)) {
    kernel_error(index, "bias outside [-1, 1]");
  }
  const auto& ch = kernel.channel_indices;
  if (ch.empty() || static_cast<int>(ch.size()) > num_channels) {
    kernel_error(index, "channel count outside [1, num_channels]");
  }
  for (std::size_t i = 0; i < ch.size(); ++i) {
    if (ch[i] < 0 || ch[i] >= num_channels) kernel_error(index, "channel index out of range");
    if (i > 0 && ch[i] == ch[i - 1]) kernel_error(index, "duplicate channel index");
    if (i > 0 && ch[i] < ch[i - 1]) kernel_error(index, "channel indices not sorted");
  }
  if (kernel.weights.size() != ch.size() * static_cast<std::size_t>(kernel.length)) {
    kernel_error(index, "weight count does not match channels x length");
  }
  float sum = 0.0f;
  for (float w : kernel.weights) {
    if (!std::isfinite(w)) kernel_error(index, "non-finite weight");
    sum += w;
  }
  if (std::fabs(sum) > kWeightSumTolerance) kernel_error(index, "weights are not mean-centred");
}

void save_kernels(const KernelSet& set, const std::filesystem::path& path) {
  FloatJson doc;
  doc["format_version"] = kFormatVersion;
  doc["seed"] = set.seed();
  doc["num_channels"] = set.num_channels();
  doc["input_length_hint"] = set.input_length_hint();
  doc["kernels"] = FloatJson::array();
  for (const auto& k : set.kernels()) {
    FloatJson entry;
    entry["length"] = k.length;
    entry["dilation"] = k.dilation;
    entry["padding"] = k.padding;
    entry["bias"] = k.bias;
    entry["channel_indices"] = k.channel_indices;
    entry["weights"] = k.weights;
    doc["kernels"].push_back(std::move(entry));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << doc.dump() << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

KernelSet load_kernels(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());

  FloatJson doc;
  try {
    doc = FloatJson::parse(in);
  } catch (const FloatJson::parse_error& e) {
    throw FormatError(path.string() + ": malformed JSON: " + e.what());
  }

  int num_channels = 0;
  int input_length_hint = 0;
  std::uint64_t seed = 0;
  try {
    if (doc.at("format_version").get<int>() != kFormatVersion) {
      throw FormatError(path.string() + ": unsupported format_version");
    }
    seed = doc.at("seed").get<std::uint64_t>();
    num_channels = doc.at("num_channels").get<int>();
    input_length_hint = doc.at("input_length_hint").get<int>();
  } catch (const FloatJson::exception& e) {
    throw FormatError(path.string() + ": bad header: " + e.what());
  }
  if (num_channels < 1 || input_length_hint < 11) {
    throw FormatError(path.string() + ": num_channels/input_length_hint out of range");
  }

  const auto& entries = doc.contains("kernels") ? doc["kernels"] : FloatJson();
  if (!entries.is_array()) throw FormatError(path.string() + ": kernels must be an array");

  std::vector<Kernel> kernels;
  kernels.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    Kernel k;
    try {
      const auto& e = entries[i];
      k.length = e.at("length").get<int>();
      k.dilation = e.at("dilation").get<int>();
      k.padding = e.at("padding").get<int>();
      k.bias = e.at("bias").get<float>();
      k.channel_indices = e.at("channel_indices").get<std::vector<int>>();
      k.weights = e.at("weights").get<std::vector<float>>();
    } catch (const FloatJson::exception& e) {
      kernel_error(i, std::string("schema violation: ") + e.what());
    }
    validate_kernel(k, i, num_channels, input_length_hint);
    kernels.push_back(std::move(k));
  }
  return KernelSet(std::move(kernels), num_channels, input_length_hint, seed);
}

}  // namespace rocket
