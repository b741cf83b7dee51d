#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "dagsmooth/graph.hpp"
#include "dagsmooth/null_dist.hpp"

namespace dagsmooth {

using PValueVector = std::vector<double>;

enum class SmoothMethod {
  none,
  fisher,
  stouffer,
  tippett,
  ruger,
  generalized_mean,
  conservative_stouffer,
};

/// Weight support for conservative Stouffer smoothing; weights are equal over
/// the chosen support and sum to one.
enum class ConsWeightScheme {
  self_plus_children,
  all_descendants,
};

struct SmoothingSpec {
  SmoothMethod method = SmoothMethod::none;
  int order_k = 1;              // ruger: which order statistic (tippett is k=1)
  double mean_exponent = 1.0;   // generalized_mean: r in (0,1]
  ConsWeightScheme weight_scheme = ConsWeightScheme::self_plus_children;
  int mc_samples = 100000;      // generalized_mean Monte Carlo fallback budget
  std::uint64_t seed = 0;

  /// Accepts: none | fisher | stouffer | tippett | ruger:K | genmean:R |
  /// cons-stouffer[:children|:descendants]. Throws SpecMismatch.
  static SmoothingSpec parse(std::string_view text);

  /// Round-trips through parse(); used as the spec's name in CSV output.
  std::string name() const;

  /// Throws SpecMismatch when a required parameter is out of range.
  void validate() const;
};

// P-values entering a smoothing transform are clamped to this interval so
// logs and normal quantiles stay finite. Clamping down at 1 only raises the
// smoothed value through the monotone transforms, preserving validity.
inline constexpr double kPValueClampLo = 1e-15;
inline constexpr double kPValueClampHi = 1.0 - 1e-15;

double clamp_pvalue(double p) noexcept;

/// Clamps a whole vector, reporting through the warning handler when any
/// entry actually moved.
PValueVector clamp_pvalues(const PValueVector& p);

/// Replaces the stderr warning sink (pass nullptr to restore the default).
void set_warning_handler(std::function<void(const std::string&)> handler);
void emit_warning(const std::string& message);

/// Smoothing transform bound to one (dag, spec) pair. Construction builds any
/// per-node Monte Carlo null CDF tables (generalized mean with non-unit
/// exponent, or closures too large for the exact Irwin-Hall sum), using a
/// per-node stream derived from (spec.seed, node), so results do not depend
/// on thread count. apply() is then cheap and reusable across many p-vectors.
class Smoother {
 public:
  Smoother(const Dag& dag, SmoothingSpec spec);

  /// Throws AlignmentError when p is not aligned with the dag.
  PValueVector apply(const PValueVector& p) const;

  const SmoothingSpec& spec() const noexcept { return spec_; }

 private:
  double smooth_node(int v, const PValueVector& clamped) const;

  const Dag* dag_;
  SmoothingSpec spec_;
  std::vector<int> mc_slot_;           // node -> index into mc_cdf_, or -1
  std::vector<EmpiricalCdf> mc_cdf_;
};

/// One-shot convenience: Smoother(dag, spec).apply(p). method none is the
/// exact identity (no clamping).
PValueVector smooth(const Dag& dag, const PValueVector& p, const SmoothingSpec& spec);

PValueVector smooth_fisher(const Dag& dag, const PValueVector& p);
PValueVector smooth_stouffer(const Dag& dag, const PValueVector& p);
/// k-th order statistic of the closure values (k=1 is Tippett); k is clamped
/// per node to the closure size.
PValueVector smooth_order(const Dag& dag, const PValueVector& p, int k);
PValueVector smooth_generalized_mean(const Dag& dag, const PValueVector& p, double r,
                                     int mc_samples, std::uint64_t seed);
PValueVector smooth_conservative_stouffer(const Dag& dag, const PValueVector& p,
                                          ConsWeightScheme scheme);

}  // namespace dagsmooth
