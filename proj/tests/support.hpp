// Shared helpers for the test suites: fixture loading, random model
// generators, and the exhaustive-enumeration reliability oracle.
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rbd/rbd.hpp"

namespace rbd::test {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline SystemModel load_fixture(const std::string& name) {
  return parse(read_file(std::string(RBD_MODELS_DIR) + "/" + name));
}

struct GeneratorOptions {
  int max_instances = 10;
  int max_components = 5;
  double rate_lo = 1e-6;
  double rate_hi = 1e-3;
  double zero_rate_probability = 0.0;
  double wrapper_probability = 0.1;  // arity-1 series/parallel wrappers
};

namespace detail {

inline BlockExpr random_tree(std::mt19937_64& rng, int leaves,
                             const std::vector<Component>& comps,
                             const GeneratorOptions& opt) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, comps.size() - 1);
  if (leaves == 1) {
    BlockExpr leaf = ref(comps[pick(rng)].id);
    if (coin(rng) < opt.wrapper_probability)
      return coin(rng) < 0.5 ? series({leaf}) : parallel({leaf});
    return leaf;
  }
  std::uniform_int_distribution<int> arity_dist(2, std::min(leaves, 4));
  int arity = arity_dist(rng);
  // Split `leaves` into `arity` positive parts.
  std::vector<int> parts(static_cast<std::size_t>(arity), 1);
  for (int extra = leaves - arity; extra > 0; --extra)
    ++parts[std::uniform_int_distribution<std::size_t>(0, parts.size() - 1)(rng)];
  std::vector<BlockExpr> children;
  for (int p : parts) children.push_back(random_tree(rng, p, comps, opt));
  return coin(rng) < 0.5 ? series(std::move(children))
                         : parallel(std::move(children));
}

}  // namespace detail

/// Random valid model: 1..max_components components (all referenced),
/// 1..max_instances instances, log-uniform rates.
inline SystemModel random_model(std::mt19937_64& rng,
                                const GeneratorOptions& opt = {}) {
  std::uniform_int_distribution<int> n_inst(1, opt.max_instances);
  int leaves = n_inst(rng);
  std::uniform_int_distribution<int> n_comp(1, std::min(leaves, opt.max_components));
  int count = n_comp(rng);
  std::uniform_real_distribution<double> log_rate(std::log(opt.rate_lo),
                                                  std::log(opt.rate_hi));
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<Component> comps;
  for (int i = 0; i < count; ++i) {
    double rate = coin(rng) < opt.zero_rate_probability ? 0.0 : std::exp(log_rate(rng));
    comps.push_back({"c" + std::to_string(i), "", rate, std::nullopt});
  }
  for (;;) {
    SystemModel m = make_model("sys", comps, detail::random_tree(rng, leaves, comps, opt));
    if (validate_model(m).warnings().empty()) return m;
  }
}

/// Pure series model over fresh components.
inline SystemModel random_series_model(std::mt19937_64& rng, int max_instances = 10) {
  std::uniform_int_distribution<int> n(1, max_instances);
  std::uniform_real_distribution<double> log_rate(std::log(1e-6), std::log(1e-3));
  int count = n(rng);
  std::vector<Component> comps;
  std::vector<BlockExpr> refs;
  for (int i = 0; i < count; ++i) {
    comps.push_back({"s" + std::to_string(i), "", std::exp(log_rate(rng)), std::nullopt});
    refs.push_back(ref(comps.back().id));
  }
  return make_model("chain", comps, series(std::move(refs)));
}

struct ForcedInstance {
  InstanceId id;
  double reliability;
};

/// Sum over all 2^n instance states of [system up] * P(state), optionally
/// with one instance's reliability pinned. Independent of the composition
/// formulas in the analytic evaluator.
inline double enumerate_reliability(const SystemModel& model, double t,
                                    std::optional<ForcedInstance> forced = {}) {
  auto insts = model.instances();
  std::vector<double> p;
  for (const auto& i : insts) {
    if (forced && i == forced->id)
      p.push_back(forced->reliability);
    else
      p.push_back(std::exp(-model.component(i.component_id).failure_rate * t));
  }
  const std::uint64_t states = std::uint64_t{1} << insts.size();
  double total = 0.0;
  StateAssignment state;
  for (std::uint64_t mask = 0; mask < states; ++mask) {
    double prob = 1.0;
    for (std::size_t k = 0; k < insts.size(); ++k) {
      bool up = (mask >> k) & 1U;
      state[insts[k]] = up;
      prob *= up ? p[k] : 1.0 - p[k];
    }
    if (structure_function(model.root, state)) total += prob;
  }
  return total;
}

}  // namespace rbd::test
