#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "rbd/analytic.hpp"
#include "rbd/error.hpp"
#include "rbd/model.hpp"
#include "rbd/random.hpp"

namespace rbd {

/// Lifetime of an element that never fails.
inline constexpr double kInfiniteLifetime = std::numeric_limits<double>::infinity();

/// Inverse-CDF draw from Exp(rate); infinite for rate 0.
inline double sample_lifetime(double failure_rate, double u) {
  if (!(u > 0.0 && u < 1.0))
    throw DomainError("uniform variate must lie in (0, 1)");
  if (!std::isfinite(failure_rate) || failure_rate < 0)
    throw DomainError("failure rate must be finite and >= 0");
  if (failure_rate == 0.0) return kInfiniteLifetime;
  return -std::log(u) / failure_rate;
}

using LifetimeMap = std::map<InstanceId, double>;

/// Series fails at its first child failure (min), parallel at its last (max).
inline double system_lifetime(const BlockExpr& expr, const LifetimeMap& lifetimes) {
  return fold<double>(
      expr,
      [&](const ComponentRef& r) {
        auto it = lifetimes.find(r.instance());
        if (it == lifetimes.end())
          throw UnknownInstanceError("no lifetime for instance " +
                                     to_string(r.instance()));
        return it->second;
      },
      [](const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); },
      [](const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); });
}

inline double system_lifetime(const SystemModel& model, const LifetimeMap& lifetimes) {
  return system_lifetime(model.root, lifetimes);
}

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SimulationConfig {
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
  double confidence_level = 0.95;
  /// Worker threads; 0 picks std::thread::hardware_concurrency(). Results do
  /// not depend on this value.
  unsigned threads = 0;

  void check() const {
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (!(confidence_level > 0.0 && confidence_level < 1.0))
      throw ConfigError("confidence level must lie in (0, 1)");
  }
};

struct ReliabilityEstimate {
  double point = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  double confidence_level = 0.95;
};

struct LifetimeEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
};

namespace detail {

/// Postfix program for a block tree: leaves push instance lifetimes,
/// series/parallel nodes reduce their top `arity` slots with min/max.
class LifetimeProgram {
 public:
  explicit LifetimeProgram(const SystemModel& model) {
    compile(model, model.root);
  }

  std::size_t instance_count() const { return rates_.size(); }

  /// Lifetime of trial `trial` under `seed`. `stack` is scratch space.
  double run(std::uint64_t seed, std::uint64_t trial,
             std::vector<double>& stack) const {
    stack.clear();
    for (const Op& op : ops_) {
      if (op.kind == Op::kLeaf) {
        double u = keyed_uniform(seed, trial, static_cast<std::uint32_t>(op.arg));
        double rate = rates_[op.arg];
        stack.push_back(rate == 0.0 ? kInfiniteLifetime : -std::log(u) / rate);
        continue;
      }
      auto first = stack.end() - op.arg;
      double v = op.kind == Op::kMin ? *std::min_element(first, stack.end())
                                     : *std::max_element(first, stack.end());
      stack.erase(first, stack.end());
      stack.push_back(v);
    }
    return stack.back();
  }

 private:
  struct Op {
    enum Kind { kLeaf, kMin, kMax } kind;
    std::size_t arg;  // instance ordinal for leaves, arity otherwise
  };

  void compile(const SystemModel& model, const BlockExpr& expr) {
    if (expr.is_ref()) {
      ops_.push_back({Op::kLeaf, rates_.size()});
      rates_.push_back(model.component(expr.ref().component_id).failure_rate);
      return;
    }
    for (const auto& child : expr.children()) compile(model, child);
    ops_.push_back({expr.is_series() ? Op::kMin : Op::kMax, expr.children().size()});
  }

  std::vector<Op> ops_;
  std::vector<double> rates_;
};

inline constexpr std::uint64_t kBlockTrials = 1 << 15;

/// Runs `per_block(first_trial, end_trial)` over fixed-size trial blocks on
/// `threads` workers, storing one result per block. Block boundaries do not
/// depend on the thread count, so any ordered reduction over the results is
/// reproducible.
template <typename Result, typename PerBlock>
std::vector<Result> run_blocks(std::uint64_t trials, unsigned threads,
                               PerBlock&& per_block) {
  std::uint64_t blocks = (trials + kBlockTrials - 1) / kBlockTrials;
  std::vector<Result> results(blocks);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, blocks));
  auto worker = [&](unsigned id) {
    for (std::uint64_t b = id; b < blocks; b += threads)
      results[b] = per_block(b * kBlockTrials,
                             std::min(trials, (b + 1) * kBlockTrials));
  };
  if (threads <= 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker, i);
  }
  return results;
}

inline ReliabilityEstimate make_estimate(std::uint64_t successes,
                                         const SimulationConfig& cfg) {
  ReliabilityEstimate e;
  e.trials = cfg.trials;
  e.seed = cfg.seed;
  e.confidence_level = cfg.confidence_level;
  double n = static_cast<double>(cfg.trials);
  e.point = static_cast<double>(successes) / n;
  e.std_error = std::sqrt(e.point * (1.0 - e.point) / n);
  boost::math::normal_distribution<double> standard;
  double z = boost::math::quantile(standard, 0.5 + 0.5 * cfg.confidence_level);
  e.ci_low = std::clamp(e.point - z * e.std_error, 0.0, 1.0);
  e.ci_high = std::clamp(e.point + z * e.std_error, 0.0, 1.0);
  return e;
}

}  // namespace detail

/// Fraction of simulated trials whose system lifetime exceeds t, with a
/// normal-approximation confidence interval. Trial k, instance i draws from
/// the keyed stream (cfg.seed, k, i), so the result depends only on
/// (model, t, cfg minus threads).
inline ReliabilityEstimate estimate_reliability(const SystemModel& model,
                                                MissionTime t,
                                                const SimulationConfig& cfg) {
  cfg.check();
  require_valid(model);
  detail::LifetimeProgram program(model);
  auto counts = detail::run_blocks<std::uint64_t>(
      cfg.trials, cfg.threads, [&](std::uint64_t begin, std::uint64_t end) {
        std::vector<double> stack;
        std::uint64_t ok = 0;
        for (std::uint64_t k = begin; k < end; ++k)
          ok += program.run(cfg.seed, k, stack) > t.hours();
        return ok;
      });
  std::uint64_t successes = 0;
  for (auto c : counts) successes += c;
  return detail::make_estimate(successes, cfg);
}

/// Survival estimates on a time grid from one set of trials (common random
/// numbers), so the curve is nonincreasing in t.
inline std::vector<ReliabilityEstimate> estimate_survival_curve(
    const SystemModel& model, const std::vector<MissionTime>& times,
    const SimulationConfig& cfg) {
  cfg.check();
  require_valid(model);
  detail::LifetimeProgram program(model);
  auto counts = detail::run_blocks<std::vector<std::uint64_t>>(
      cfg.trials, cfg.threads, [&](std::uint64_t begin, std::uint64_t end) {
        std::vector<double> stack;
        std::vector<std::uint64_t> ok(times.size(), 0);
        for (std::uint64_t k = begin; k < end; ++k) {
          double life = program.run(cfg.seed, k, stack);
          for (std::size_t j = 0; j < times.size(); ++j)
            ok[j] += life > times[j].hours();
        }
        return ok;
      });
  std::vector<ReliabilityEstimate> out;
  for (std::size_t j = 0; j < times.size(); ++j) {
    std::uint64_t successes = 0;
    for (const auto& block : counts) successes += block[j];
    out.push_back(detail::make_estimate(successes, cfg));
  }
  return out;
}

/// Sample mean of the system lifetime. Infinite when the system can never
/// fail.
inline LifetimeEstimate estimate_mean_lifetime(const SystemModel& model,
                                               const SimulationConfig& cfg) {
  cfg.check();
  require_valid(model);
  LifetimeEstimate e;
  e.trials = cfg.trials;
  e.seed = cfg.seed;
  if (never_fails(model)) {
    e.mean = kInfiniteLifetime;
    return e;
  }
  struct Sums {
    double sum = 0.0;
    double sum_sq = 0.0;
  };
  detail::LifetimeProgram program(model);
  auto sums = detail::run_blocks<Sums>(
      cfg.trials, cfg.threads, [&](std::uint64_t begin, std::uint64_t end) {
        std::vector<double> stack;
        Sums s;
        for (std::uint64_t k = begin; k < end; ++k) {
          double life = program.run(cfg.seed, k, stack);
          s.sum += life;
          s.sum_sq += life * life;
        }
        return s;
      });
  Sums total;
  for (const auto& s : sums) {
    total.sum += s.sum;
    total.sum_sq += s.sum_sq;
  }
  double n = static_cast<double>(cfg.trials);
  e.mean = total.sum / n;
  double var = n > 1 ? std::max(0.0, (total.sum_sq - n * e.mean * e.mean) / (n - 1)) : 0.0;
  e.std_error = std::sqrt(var / n);
  return e;
}

}  // namespace rbd
