#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "rbd/error.hpp"
#include "rbd/model.hpp"
#include "rbd/quadrature.hpp"

namespace rbd {

/// Mission time in hours; finite and nonnegative.
class MissionTime {
 public:
  explicit MissionTime(double hours) : hours_(hours) {
    if (!std::isfinite(hours) || hours < 0)
      throw DomainError("mission time must be finite and >= 0, got " +
                        std::to_string(hours));
  }
  double hours() const { return hours_; }

 private:
  double hours_;
};

enum class MttfMethod { kClosedForm, kQuadrature, kInfinite };

/// Mean time to failure: positive hours, or infinite for a system that can
/// never fail. Remembers how it was obtained.
class Mttf {
 public:
  static Mttf infinite() {
    return Mttf(std::numeric_limits<double>::infinity(), MttfMethod::kInfinite);
  }
  static Mttf finite(double hours, MttfMethod method = MttfMethod::kClosedForm) {
    if (!(hours > 0) || !std::isfinite(hours))
      throw DomainError("finite MTTF must be positive");
    return Mttf(hours, method);
  }
  bool is_infinite() const { return std::isinf(hours_); }
  double hours() const { return hours_; }
  MttfMethod method() const { return method_; }

 private:
  Mttf(double h, MttfMethod m) : hours_(h), method_(m) {}
  double hours_;
  MttfMethod method_;
};

/// Exponential survival e^(-rate * t).
inline double component_reliability(double failure_rate, MissionTime t) {
  if (!std::isfinite(failure_rate) || failure_rate < 0)
    throw DomainError("failure rate must be finite and >= 0");
  if (t.hours() == 0) return 1.0;
  return std::exp(-failure_rate * t.hours());
}

namespace detail {

inline void check_probabilities(std::span<const double> values) {
  if (values.empty()) throw DomainError("empty list of reliabilities");
  for (double v : values)
    if (!(v >= 0.0 && v <= 1.0))
      throw DomainError("reliability outside [0, 1]: " + std::to_string(v));
}

}  // namespace detail

/// Product of the element reliabilities.
inline double series_reliability(std::span<const double> values) {
  detail::check_probabilities(values);
  double r = 1.0;
  for (double v : values) r *= v;
  return r;
}

/// 1 - product of the element unreliabilities.
inline double parallel_reliability(std::span<const double> values) {
  detail::check_probabilities(values);
  double q = 1.0;
  for (double v : values) q *= 1.0 - v;
  return 1.0 - q;
}

/// Reliability together with its complement, each carried at full relative
/// precision so that values near 0 or 1 survive composition.
struct ReliabilityPair {
  double reliability = 1.0;
  double unreliability = 0.0;
};

/// Pair for an exponential element at time t.
inline ReliabilityPair exponential_pair(double failure_rate, MissionTime t) {
  double r = component_reliability(failure_rate, t);
  return {r, -std::expm1(-failure_rate * t.hours())};
}

/// Series: R = prod R_i, Q = 1 - prod(1 - Q_i) via log1p/expm1.
inline ReliabilityPair series_pair(std::span<const ReliabilityPair> children) {
  double r = 1.0, log_survive = 0.0;
  for (const auto& c : children) {
    r *= c.reliability;
    log_survive += std::log1p(-c.unreliability);
  }
  return {r, -std::expm1(log_survive)};
}

/// Parallel: Q = prod Q_i, R = 1 - prod(1 - R_i) via log1p/expm1.
inline ReliabilityPair parallel_pair(std::span<const ReliabilityPair> children) {
  double q = 1.0, log_fail = 0.0;
  for (const auto& c : children) {
    q *= c.unreliability;
    log_fail += std::log1p(-c.reliability);
  }
  return {-std::expm1(log_fail), q};
}

/// Composes a tree from per-instance reliabilities: series nodes multiply,
/// parallel nodes take 1 - prod(1 - R). Exact for independent instances.
/// `leaf` maps a ComponentRef to either a double (reliability) or a
/// ReliabilityPair.
template <typename Leaf>
ReliabilityPair evaluate_tree_pair(const BlockExpr& expr, Leaf&& leaf) {
  return fold<ReliabilityPair>(
      expr,
      [&](const ComponentRef& r) -> ReliabilityPair {
        if constexpr (std::is_same_v<std::invoke_result_t<Leaf&, const ComponentRef&>,
                                     ReliabilityPair>) {
          return leaf(r);
        } else {
          double v = leaf(r);
          return {v, 1.0 - v};
        }
      },
      [](const std::vector<ReliabilityPair>& v) { return series_pair(v); },
      [](const std::vector<ReliabilityPair>& v) { return parallel_pair(v); });
}

template <typename Leaf>
double evaluate_tree(const BlockExpr& expr, Leaf&& leaf) {
  return evaluate_tree_pair(expr, leaf).reliability;
}

inline ReliabilityPair evaluate_pair(const SystemModel& model, MissionTime t) {
  require_valid(model);
  return evaluate_tree_pair(model.root, [&](const ComponentRef& r) {
    return exponential_pair(model.component(r.component_id).failure_rate, t);
  });
}

inline double evaluate(const SystemModel& model, MissionTime t) {
  return evaluate_pair(model, t).reliability;
}

/// 1 - R(t), computed directly from the failure side of each block.
inline double unreliability(const SystemModel& model, MissionTime t) {
  return evaluate_pair(model, t).unreliability;
}

namespace detail {

// Only series nodes, references, and arity-1 wrappers of either kind.
inline bool is_pure_series(const BlockExpr& expr) {
  if (expr.is_ref()) return true;
  if (expr.is_parallel() && expr.children().size() != 1) return false;
  return std::all_of(expr.children().begin(), expr.children().end(),
                     [](const BlockExpr& c) { return is_pure_series(c); });
}

}  // namespace detail

/// True when the system survives with every positive-rate instance failed.
inline bool never_fails(const SystemModel& model) {
  require_valid(model);
  StateAssignment state;
  for (const auto& inst : model.instances())
    state[inst] = model.component(inst.component_id).failure_rate == 0.0;
  return structure_function(model.root, state);
}

/// Sum of failure rates over all instances (series-equivalent hazard).
inline double total_failure_rate(const SystemModel& model) {
  double sum = 0.0;
  for (const auto& inst : model.instances())
    sum += model.component(inst.component_id).failure_rate;
  return sum;
}

/// Integral of R(t) over [0, T_max] with T_max = -ln(1e-12) / lambda_min,
/// by adaptive Simpson on geometrically growing panels, to relative
/// tolerance `rel_tol`. Requires a system that can fail.
inline double integrate_reliability(const SystemModel& model,
                                    double rel_tol = 1e-9) {
  require_valid(model);
  double lambda_min = std::numeric_limits<double>::infinity();
  for (const auto& inst : model.instances()) {
    double rate = model.component(inst.component_id).failure_rate;
    if (rate > 0) lambda_min = std::min(lambda_min, rate);
  }
  if (!std::isfinite(lambda_min))
    throw DomainError("no instance with a positive failure rate");

  constexpr double kTailEpsilon = 1e-12;
  const double t_max = -std::log(kTailEpsilon) / lambda_min;
  // R_sys >= product of all instance reliabilities, so MTTF >= 1/sum(lambda);
  // an absolute tolerance relative to that bound is a relative one.
  const double scale = 1.0 / total_failure_rate(model);

  auto r = [&](double t) {
    return evaluate_tree(model.root, [&](const ComponentRef& ref) {
      return exponential_pair(model.component(ref.component_id).failure_rate,
                              MissionTime(t));
    });
  };

  constexpr int kPanels = 48;
  const double panel_tol = rel_tol * scale / (kPanels + 1);
  double total = 0.0;
  double lo = 0.0;
  for (int k = kPanels; k >= 0; --k) {
    double hi = std::ldexp(t_max, -k);
    total += adaptive_simpson(r, lo, hi, panel_tol);
    lo = hi;
  }
  return total;
}

/// Closed form 1/sum(lambda) for a pure series tree, numerical integration
/// otherwise; infinite when the system can never fail.
inline Mttf mttf(const SystemModel& model) {
  if (never_fails(model)) return Mttf::infinite();
  if (detail::is_pure_series(model.root))
    return Mttf::finite(1.0 / total_failure_rate(model), MttfMethod::kClosedForm);
  return Mttf::finite(integrate_reliability(model), MttfMethod::kQuadrature);
}

}  // namespace rbd
