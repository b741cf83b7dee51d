#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "dagsmooth/null_dist.hpp"

namespace dagsmooth {

/// Mixes (seed, stream) into a fresh 64-bit seed. Used to derive independent
/// substreams, e.g. per-trial or per-node streams from one master seed, so
/// that parallel and serial execution consume identical randomness.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Deterministic random stream. All variate transforms are implemented on top
/// of raw 64-bit output (inverse-CDF normal, log-space gamma/beta), so a given
/// seed reproduces the same sequence on any platform and thread count.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);
  RngStream(std::uint64_t seed, std::uint64_t stream) : RngStream(derive_seed(seed, stream)) {}

  std::uint64_t next_u64();

  /// Uniform on the open interval (0,1); never returns an exact endpoint.
  double uniform();

  double uniform(double lo, double hi);

  /// Uniform integer on [lo, hi] inclusive.
  int uniform_int(int lo, int hi);

  /// Standard normal via the inverse-CDF transform.
  double normal();
  double normal(double mu, double sd) { return mu + sd * normal(); }

  /// Gamma(shape, 1) returned as a logarithm; exact for the tiny shapes used
  /// by Beta alternatives, where the linear-space draw would underflow.
  double log_gamma_variate(double shape);

  /// Beta(a, b) computed as X/(X+Y) from two gamma draws in log space.
  double beta(double a, double b);

  /// k distinct values from {0, ..., n-1}, in draw order.
  std::vector<int> sample_without_replacement(int n, int k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace dagsmooth
