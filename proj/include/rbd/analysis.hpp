#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "rbd/analytic.hpp"
#include "rbd/model.hpp"

namespace rbd {

namespace detail {

inline void require_instance(const SystemModel& model, const InstanceId& id) {
  auto all = model.instances();
  if (std::find(all.begin(), all.end(), id) == all.end())
    throw UnknownInstanceError("unknown instance " + to_string(id));
}

}  // namespace detail

/// System reliability at t with one instance's reliability replaced by
/// `forced`. The system is multilinear in each instance reliability.
inline double evaluate_forced(const SystemModel& model, const InstanceId& id,
                              double forced, MissionTime t) {
  require_valid(model);
  detail::require_instance(model, id);
  return evaluate_tree(model.root, [&](const ComponentRef& r) {
    if (r.instance() == id) return forced;
    return component_reliability(model.component(r.component_id).failure_rate, t);
  });
}

/// Birnbaum importance: R_sys(instance working) - R_sys(instance failed).
inline double birnbaum_importance(const SystemModel& model, const InstanceId& id,
                                  MissionTime t) {
  return evaluate_forced(model, id, 1.0, t) - evaluate_forced(model, id, 0.0, t);
}

enum class RankMeasure { kReliabilityAscending, kBirnbaumDescending };

struct ImportanceRow {
  InstanceId instance;
  std::string label;
  double failure_rate = 0.0;
  double reliability = 0.0;
  double birnbaum = 0.0;
};

struct ImportanceReport {
  double mission_time = 0.0;
  RankMeasure measure = RankMeasure::kReliabilityAscending;
  std::vector<ImportanceRow> rows;
};

/// One row per instance, ordered by `measure`; ties keep the left-to-right
/// instance order of the diagram.
inline ImportanceReport rank_instances(const SystemModel& model, MissionTime t,
                                       RankMeasure measure) {
  require_valid(model);
  ImportanceReport report{t.hours(), measure, {}};
  for (const auto& inst : model.instances()) {
    double rate = model.component(inst.component_id).failure_rate;
    report.rows.push_back({inst, instance_label(model, inst), rate,
                           component_reliability(rate, t),
                           birnbaum_importance(model, inst, t)});
  }
  auto& rows = report.rows;
  if (measure == RankMeasure::kReliabilityAscending) {
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
      return a.reliability < b.reliability;
    });
  } else {
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
      return a.birnbaum > b.birnbaum;
    });
  }
  return report;
}

struct WhatIfResult {
  double baseline_reliability = 0.0;
  double modified_reliability = 0.0;
  double delta = 0.0;
  SystemModel modified_model;
};

/// Replaces one instance by an active-parallel group of `copies` independent
/// instances of the same component and re-evaluates at t. Instances are
/// renumbered left to right in the modified model.
inline WhatIfResult whatif_redundancy(const SystemModel& model,
                                      const InstanceId& id, int copies,
                                      MissionTime t) {
  if (copies < 2) throw DomainError("redundancy needs copies >= 2");
  require_valid(model);
  detail::require_instance(model, id);

  BlockExpr root = model.root;
  auto replace = [&](auto& self, BlockExpr& expr) -> void {
    if (auto* r = std::get_if<ComponentRef>(&expr.node)) {
      if (r->instance() != id) return;
      std::vector<BlockExpr> group(static_cast<std::size_t>(copies),
                                   ref(r->component_id));
      expr = parallel(std::move(group));
      return;
    }
    for (auto& child : expr.children()) self(self, child);
  };
  replace(replace, root);

  WhatIfResult result;
  result.modified_model = make_model(model.name, model.components, std::move(root));
  result.baseline_reliability = evaluate(model, t);
  result.modified_reliability = evaluate(result.modified_model, t);
  result.delta = result.modified_reliability - result.baseline_reliability;
  return result;
}

}  // namespace rbd
