#include "dagsmooth/smoothing.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iostream>
#include <mutex>
#include <sstream>

#include "dagsmooth/errors.hpp"
#include "dagsmooth/parallel.hpp"
#include "dagsmooth/rng.hpp"

namespace dagsmooth {

namespace {

std::mutex g_warn_mutex;
std::function<void(const std::string&)> g_warn_handler;

double parse_number(std::string_view text, const char* what) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw SpecMismatch(std::string("cannot parse ") + what + " from '" + std::string(text) + "'");
  return value;
}

std::string format_number(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

void set_warning_handler(std::function<void(const std::string&)> handler) {
  std::lock_guard<std::mutex> lock(g_warn_mutex);
  g_warn_handler = std::move(handler);
}

void emit_warning(const std::string& message) {
  std::lock_guard<std::mutex> lock(g_warn_mutex);
  if (g_warn_handler)
    g_warn_handler(message);
  else
    std::cerr << "warning: " << message << "\n";
}

double clamp_pvalue(double p) noexcept { return std::clamp(p, kPValueClampLo, kPValueClampHi); }

PValueVector clamp_pvalues(const PValueVector& p) {
  PValueVector out(p.size());
  int moved = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    out[i] = clamp_pvalue(p[i]);
    moved += out[i] != p[i];
  }
  if (moved > 0)
    emit_warning(std::to_string(moved) + " p-value(s) clamped into [" +
                 format_number(kPValueClampLo) + ", 1-" + format_number(kPValueClampLo) + "]");
  return out;
}

SmoothingSpec SmoothingSpec::parse(std::string_view text) {
  SmoothingSpec spec;
  auto colon = text.find(':');
  std::string_view head = text.substr(0, colon);
  std::string_view arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);

  if (head == "none") {
    spec.method = SmoothMethod::none;
  } else if (head == "fisher") {
    spec.method = SmoothMethod::fisher;
  } else if (head == "stouffer") {
    spec.method = SmoothMethod::stouffer;
  } else if (head == "tippett") {
    spec.method = SmoothMethod::tippett;
  } else if (head == "ruger") {
    spec.method = SmoothMethod::ruger;
    if (arg.empty()) throw SpecMismatch("ruger needs an order, e.g. ruger:2");
    spec.order_k = static_cast<int>(parse_number(arg, "ruger order"));
  } else if (head == "genmean") {
    spec.method = SmoothMethod::generalized_mean;
    if (arg.empty()) throw SpecMismatch("genmean needs an exponent, e.g. genmean:0.5");
    spec.mean_exponent = parse_number(arg, "genmean exponent");
  } else if (head == "cons-stouffer") {
    spec.method = SmoothMethod::conservative_stouffer;
    if (arg.empty() || arg == "children")
      spec.weight_scheme = ConsWeightScheme::self_plus_children;
    else if (arg == "descendants")
      spec.weight_scheme = ConsWeightScheme::all_descendants;
    else
      throw SpecMismatch("unknown cons-stouffer weight scheme '" + std::string(arg) + "'");
  } else {
    throw SpecMismatch("unknown smoothing method '" + std::string(text) + "'");
  }
  if (spec.method != SmoothMethod::ruger && spec.method != SmoothMethod::generalized_mean &&
      spec.method != SmoothMethod::conservative_stouffer && colon != std::string_view::npos)
    throw SpecMismatch("method '" + std::string(head) + "' takes no parameter");
  spec.validate();
  return spec;
}

std::string SmoothingSpec::name() const {
  switch (method) {
    case SmoothMethod::none:
      return "none";
    case SmoothMethod::fisher:
      return "fisher";
    case SmoothMethod::stouffer:
      return "stouffer";
    case SmoothMethod::tippett:
      return "tippett";
    case SmoothMethod::ruger:
      return "ruger:" + std::to_string(order_k);
    case SmoothMethod::generalized_mean:
      return "genmean:" + format_number(mean_exponent);
    case SmoothMethod::conservative_stouffer:
      return weight_scheme == ConsWeightScheme::self_plus_children ? "cons-stouffer:children"
                                                                   : "cons-stouffer:descendants";
  }
  return "none";
}

void SmoothingSpec::validate() const {
  if (method == SmoothMethod::ruger && order_k < 1)
    throw SpecMismatch("ruger order must be >= 1");
  if (method == SmoothMethod::generalized_mean &&
      !(mean_exponent > 0.0 && mean_exponent <= 1.0))
    throw SpecMismatch("genmean exponent must lie in (0, 1]");
  if (method == SmoothMethod::generalized_mean && mc_samples < kEmpiricalCdfMinSamples)
    throw SpecMismatch("genmean Monte Carlo budget must be at least " +
                       std::to_string(kEmpiricalCdfMinSamples));
}

Smoother::Smoother(const Dag& dag, SmoothingSpec spec) : dag_(&dag), spec_(spec) {
  spec_.validate();
  mc_slot_.assign(static_cast<size_t>(dag.node_count()), -1);
  if (spec_.method != SmoothMethod::generalized_mean) return;

  // Nodes whose null CDF has no workable closed form get a Monte Carlo table.
  std::vector<int> mc_nodes;
  for (int v = 0; v < dag.node_count(); ++v) {
    int m = static_cast<int>(dag.descendant_closure(v).size());
    if (m <= 1) continue;
    if (spec_.mean_exponent == 1.0 && m <= kIrwinHallMaxN) continue;
    mc_slot_[static_cast<size_t>(v)] = static_cast<int>(mc_nodes.size());
    mc_nodes.push_back(v);
  }
  mc_cdf_.resize(mc_nodes.size());
  const double r = spec_.mean_exponent;
  const auto n_mc = static_cast<std::int64_t>(mc_nodes.size());
#pragma omp parallel for schedule(dynamic) num_threads(max_threads())
  for (std::int64_t i = 0; i < n_mc; ++i) {
    int v = mc_nodes[static_cast<size_t>(i)];
    int m = static_cast<int>(dag.descendant_closure(v).size());
    auto statistic = [m, r](std::span<const double> u) {
      double s = 0.0;
      for (double x : u) s += std::pow(x, r);
      return std::pow(s / m, 1.0 / r);
    };
    mc_cdf_[static_cast<size_t>(i)] = EmpiricalCdf::build(
        statistic, m, spec_.mc_samples, derive_seed(spec_.seed, static_cast<std::uint64_t>(v)));
  }
}

double Smoother::smooth_node(int v, const PValueVector& p) const {
  const Dag& dag = *dag_;
  auto closure = dag.descendant_closure(v);
  const int m = static_cast<int>(closure.size());

  if (spec_.method == SmoothMethod::conservative_stouffer) {
    double sum = 0.0;
    if (spec_.weight_scheme == ConsWeightScheme::self_plus_children) {
      auto kids = dag.children(v);
      double w = 1.0 / (1.0 + static_cast<double>(kids.size()));
      sum = w * std_normal_quantile(p[static_cast<size_t>(v)]);
      for (int c : kids) sum += w * std_normal_quantile(p[static_cast<size_t>(c)]);
    } else {
      double w = 1.0 / static_cast<double>(m);
      for (int c : closure) sum += w * std_normal_quantile(p[static_cast<size_t>(c)]);
    }
    return sum >= 0.0 ? 1.0 : std_normal_cdf(sum);
  }

  // Every merging rule reduces to the identity on a singleton closure.
  if (m == 1) return p[static_cast<size_t>(v)];

  switch (spec_.method) {
    case SmoothMethod::fisher: {
      double stat = 0.0;
      for (int c : closure) stat -= 2.0 * std::log(p[static_cast<size_t>(c)]);
      return chi_square_sf(stat, 2 * m);
    }
    case SmoothMethod::stouffer: {
      double z = 0.0;
      for (int c : closure) z += std_normal_quantile(p[static_cast<size_t>(c)]);
      return std_normal_cdf(z / std::sqrt(static_cast<double>(m)));
    }
    case SmoothMethod::tippett:
    case SmoothMethod::ruger: {
      int k = spec_.method == SmoothMethod::tippett ? 1 : std::min(spec_.order_k, m);
      std::vector<double> vals;
      vals.reserve(static_cast<size_t>(m));
      for (int c : closure) vals.push_back(p[static_cast<size_t>(c)]);
      std::nth_element(vals.begin(), vals.begin() + (k - 1), vals.end());
      return beta_cdf(vals[static_cast<size_t>(k - 1)], k, m - k + 1);
    }
    case SmoothMethod::generalized_mean: {
      const double r = spec_.mean_exponent;
      double s = 0.0;
      for (int c : closure) s += std::pow(p[static_cast<size_t>(c)], r);
      if (r == 1.0 && m <= kIrwinHallMaxN) return irwin_hall_cdf(s, m);
      return mc_cdf_[static_cast<size_t>(mc_slot_[static_cast<size_t>(v)])](
          std::pow(s / m, 1.0 / r));
    }
    case SmoothMethod::none:
    case SmoothMethod::conservative_stouffer:
      break;
  }
  return p[static_cast<size_t>(v)];
}

PValueVector Smoother::apply(const PValueVector& p) const {
  const Dag& dag = *dag_;
  if (static_cast<int>(p.size()) != dag.node_count())
    throw AlignmentError("p-value vector has " + std::to_string(p.size()) + " entries for " +
                         std::to_string(dag.node_count()) + " nodes");
  if (spec_.method == SmoothMethod::none) return p;

  PValueVector clamped = clamp_pvalues(p);
  PValueVector out(p.size());
  for (int v = 0; v < dag.node_count(); ++v) out[static_cast<size_t>(v)] = smooth_node(v, clamped);
  return out;
}

PValueVector smooth(const Dag& dag, const PValueVector& p, const SmoothingSpec& spec) {
  return Smoother(dag, spec).apply(p);
}

PValueVector smooth_fisher(const Dag& dag, const PValueVector& p) {
  SmoothingSpec spec;
  spec.method = SmoothMethod::fisher;
  return smooth(dag, p, spec);
}

PValueVector smooth_stouffer(const Dag& dag, const PValueVector& p) {
  SmoothingSpec spec;
  spec.method = SmoothMethod::stouffer;
  return smooth(dag, p, spec);
}

PValueVector smooth_order(const Dag& dag, const PValueVector& p, int k) {
  SmoothingSpec spec;
  spec.method = k == 1 ? SmoothMethod::tippett : SmoothMethod::ruger;
  spec.order_k = k;
  return smooth(dag, p, spec);
}

PValueVector smooth_generalized_mean(const Dag& dag, const PValueVector& p, double r,
                                     int mc_samples, std::uint64_t seed) {
  SmoothingSpec spec;
  spec.method = SmoothMethod::generalized_mean;
  spec.mean_exponent = r;
  spec.mc_samples = mc_samples;
  spec.seed = seed;
  return smooth(dag, p, spec);
}

PValueVector smooth_conservative_stouffer(const Dag& dag, const PValueVector& p,
                                          ConsWeightScheme scheme) {
  SmoothingSpec spec;
  spec.method = SmoothMethod::conservative_stouffer;
  spec.weight_scheme = scheme;
  return smooth(dag, p, spec);
}

}  // namespace dagsmooth
