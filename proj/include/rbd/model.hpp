#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "rbd/error.hpp"

namespace rbd {

/// 1-based line/column into a model source text.
struct SourcePosition {
  int line = 1;
  int column = 1;
  friend bool operator==(const SourcePosition&, const SourcePosition&) = default;
};

/// A failure source with a constant failure rate (per hour).
/// Source positions are diagnostics only and never take part in equality.
struct Component {
  std::string id;
  std::string display_name;
  double failure_rate = 0.0;
  std::optional<SourcePosition> where;

  friend bool operator==(const Component& a, const Component& b) {
    return a.id == b.id && a.display_name == b.display_name &&
           a.failure_rate == b.failure_rate;
  }
};

/// One independent occurrence of a component in the block diagram.
struct InstanceId {
  std::string component_id;
  int index = 0;

  friend auto operator<=>(const InstanceId&, const InstanceId&) = default;
  friend bool operator==(const InstanceId&, const InstanceId&) = default;
};

inline std::string to_string(const InstanceId& id) {
  return id.component_id + "#" + std::to_string(id.index);
}

struct BlockExpr;

struct ComponentRef {
  std::string component_id;
  int instance_index = 0;
  std::optional<SourcePosition> where;

  InstanceId instance() const { return {component_id, instance_index}; }
};

struct Series {
  std::vector<BlockExpr> children;
};

struct Parallel {
  std::vector<BlockExpr> children;
};

/// Structure tree of a system: series / parallel composition over
/// component references. Owns its children; no sharing.
struct BlockExpr {
  std::variant<ComponentRef, Series, Parallel> node;

  bool is_ref() const { return std::holds_alternative<ComponentRef>(node); }
  bool is_series() const { return std::holds_alternative<Series>(node); }
  bool is_parallel() const { return std::holds_alternative<Parallel>(node); }

  const ComponentRef& ref() const { return std::get<ComponentRef>(node); }

  /// Children of a series or parallel node; empty for a reference.
  const std::vector<BlockExpr>& children() const {
    static const std::vector<BlockExpr> none;
    if (auto* s = std::get_if<Series>(&node)) return s->children;
    if (auto* p = std::get_if<Parallel>(&node)) return p->children;
    return none;
  }
  std::vector<BlockExpr>& children() {
    if (auto* s = std::get_if<Series>(&node)) return s->children;
    return std::get<Parallel>(node).children;
  }
};

inline bool operator==(const BlockExpr& a, const BlockExpr& b);

inline bool operator==(const ComponentRef& a, const ComponentRef& b) {
  return a.component_id == b.component_id &&
         a.instance_index == b.instance_index;
}
inline bool operator==(const Series& a, const Series& b) {
  return a.children == b.children;
}
inline bool operator==(const Parallel& a, const Parallel& b) {
  return a.children == b.children;
}
inline bool operator==(const BlockExpr& a, const BlockExpr& b) {
  return a.node == b.node;
}

inline BlockExpr ref(std::string component_id, int instance_index = 0) {
  return {ComponentRef{std::move(component_id), instance_index, std::nullopt}};
}
inline BlockExpr series(std::vector<BlockExpr> children) {
  return {Series{std::move(children)}};
}
inline BlockExpr parallel(std::vector<BlockExpr> children) {
  return {Parallel{std::move(children)}};
}

/// Bottom-up fold over a block tree.
///
/// `leaf` maps a ComponentRef to a value; `on_series` and `on_parallel`
/// combine the already-folded values of a node's children, passed as a
/// std::vector<T>.
template <typename T, typename Leaf, typename OnSeries, typename OnParallel>
T fold(const BlockExpr& expr, Leaf&& leaf, OnSeries&& on_series,
       OnParallel&& on_parallel) {
  if (const auto* r = std::get_if<ComponentRef>(&expr.node)) return leaf(*r);
  std::vector<T> values;
  values.reserve(expr.children().size());
  for (const auto& child : expr.children())
    values.push_back(fold<T>(child, leaf, on_series, on_parallel));
  if (expr.is_series()) return on_series(values);
  return on_parallel(values);
}

/// Visits every ComponentRef in left-to-right order.
template <typename F>
void for_each_ref(const BlockExpr& expr, F&& f) {
  if (const auto* r = std::get_if<ComponentRef>(&expr.node)) {
    f(*r);
    return;
  }
  for (const auto& child : expr.children()) for_each_ref(child, f);
}

template <typename F>
void for_each_ref(BlockExpr& expr, F&& f) {
  if (auto* r = std::get_if<ComponentRef>(&expr.node)) {
    f(*r);
    return;
  }
  for (auto& child : expr.children()) for_each_ref(child, f);
}

/// Renumbers instances so that the k-th reference (left to right) to a
/// component id gets instance index k.
inline void number_instances(BlockExpr& expr) {
  std::map<std::string, int, std::less<>> next;
  for_each_ref(expr, [&](ComponentRef& r) { r.instance_index = next[r.component_id]++; });
}

/// Instances of a tree in left-to-right order.
inline std::vector<InstanceId> instances(const BlockExpr& expr) {
  std::vector<InstanceId> out;
  for_each_ref(expr, [&](const ComponentRef& r) { out.push_back(r.instance()); });
  return out;
}

struct SystemModel {
  std::string name;
  std::vector<Component> components;  // declaration order
  BlockExpr root;

  const Component* find(std::string_view id) const {
    for (const auto& c : components)
      if (c.id == id) return &c;
    return nullptr;
  }

  const Component& component(std::string_view id) const {
    if (const auto* c = find(id)) return *c;
    throw UnknownInstanceError("unknown component '" + std::string(id) + "'");
  }

  std::vector<InstanceId> instances() const { return rbd::instances(root); }

  friend bool operator==(const SystemModel& a, const SystemModel& b) {
    return a.name == b.name && a.components == b.components &&
           a.root == b.root;
  }
};

/// Builds a model and assigns instance indices left to right.
inline SystemModel make_model(std::string name,
                              std::vector<Component> components,
                              BlockExpr root) {
  number_instances(root);
  return {std::move(name), std::move(components), std::move(root)};
}

/// Human-facing instance label: the bare component id when the component
/// occurs once in the tree, `id#k` otherwise.
inline std::string instance_label(const SystemModel& model,
                                  const InstanceId& id) {
  int count = 0;
  for_each_ref(model.root, [&](const ComponentRef& r) {
    count += r.component_id == id.component_id;
  });
  return count == 1 && id.index == 0 ? id.component_id : to_string(id);
}

/// Resolves `id` or `id#k` to an instance of the model.
inline InstanceId resolve_instance(const SystemModel& model,
                                   std::string_view label) {
  std::string id(label);
  std::optional<int> index;
  if (auto hash = label.rfind('#'); hash != std::string_view::npos) {
    id = std::string(label.substr(0, hash));
    auto digits = label.substr(hash + 1);
    if (digits.empty() ||
        digits.find_first_not_of("0123456789") != std::string_view::npos ||
        digits.size() > 9)
      throw UnknownInstanceError("unknown instance '" + std::string(label) + "'");
    index = std::stoi(std::string(digits));
  }
  std::vector<InstanceId> matches;
  for (auto& inst : model.instances())
    if (inst.component_id == id && (!index || inst.index == *index))
      matches.push_back(inst);
  if (matches.empty())
    throw UnknownInstanceError("unknown instance '" + std::string(label) + "'");
  if (matches.size() > 1)
    throw UnknownInstanceError("instance '" + std::string(label) +
                               "' is ambiguous; use " + id + "#k");
  return matches.front();
}

// ---------------------------------------------------------------------------
// Validation

enum class Severity { kError, kWarning };

struct Diagnostic {
  Severity severity = Severity::kError;
  std::string subject;  // offending id or node kind
  std::string message;
  std::optional<SourcePosition> where;
};

struct ValidationReport {
  std::vector<Diagnostic> diagnostics;

  std::vector<Diagnostic> errors() const { return filter(Severity::kError); }
  std::vector<Diagnostic> warnings() const { return filter(Severity::kWarning); }
  bool ok() const { return errors().empty(); }

 private:
  std::vector<Diagnostic> filter(Severity s) const {
    std::vector<Diagnostic> out;
    for (const auto& d : diagnostics)
      if (d.severity == s) out.push_back(d);
    return out;
  }
};

namespace detail {

inline void validate_tree(const BlockExpr& expr, const SystemModel& model,
                          std::set<InstanceId>& seen,
                          std::set<std::string, std::less<>>& used,
                          std::vector<Diagnostic>& out) {
  if (const auto* r = std::get_if<ComponentRef>(&expr.node)) {
    if (!model.find(r->component_id)) {
      out.push_back({Severity::kError, r->component_id,
                     "reference to undeclared component '" + r->component_id + "'",
                     r->where});
      return;
    }
    used.insert(r->component_id);
    if (r->instance_index < 0) {
      out.push_back({Severity::kError, r->component_id,
                     "negative instance index on '" + r->component_id + "'",
                     r->where});
    } else if (!seen.insert(r->instance()).second) {
      out.push_back({Severity::kError, r->component_id,
                     "duplicate instance " + to_string(r->instance()), r->where});
    }
    return;
  }
  if (expr.children().empty()) {
    std::string kind = expr.is_series() ? "series" : "parallel";
    out.push_back({Severity::kError, kind, kind + " block has no children",
                   std::nullopt});
  }
  for (const auto& child : expr.children())
    validate_tree(child, model, seen, used, out);
}

}  // namespace detail

inline ValidationReport validate_model(const SystemModel& model) {
  ValidationReport report;
  auto& out = report.diagnostics;

  if (model.components.empty())
    out.push_back({Severity::kError, model.name,
                   "model declares no components", std::nullopt});

  std::set<std::string, std::less<>> ids;
  for (const auto& c : model.components) {
    if (c.id.empty())
      out.push_back({Severity::kError, c.id, "component id is empty", c.where});
    else if (!ids.insert(c.id).second)
      out.push_back({Severity::kError, c.id,
                     "component '" + c.id + "' declared more than once", c.where});
    if (!std::isfinite(c.failure_rate) || c.failure_rate < 0)
      out.push_back({Severity::kError, c.id,
                     "failure rate of '" + c.id + "' must be finite and >= 0",
                     c.where});
  }

  std::set<InstanceId> seen;
  std::set<std::string, std::less<>> used;
  detail::validate_tree(model.root, model, seen, used, out);

  if (!model.components.empty() && used.empty())
    out.push_back({Severity::kError, model.name,
                   "system references no declared component", std::nullopt});

  for (const auto& c : model.components)
    if (!c.id.empty() && !used.contains(c.id))
      out.push_back({Severity::kWarning, c.id,
                     "component '" + c.id + "' is declared but never used",
                     c.where});
  return report;
}

/// Throws ValidationError carrying the first error, if any.
inline void require_valid(const SystemModel& model) {
  auto errors = validate_model(model).errors();
  if (!errors.empty()) throw ValidationError(errors.front().message);
}

// ---------------------------------------------------------------------------
// Structure function

/// Functioning (true) / failed (false) per instance.
using StateAssignment = std::map<InstanceId, bool>;

/// Series = AND, parallel = OR over the instance states.
inline bool structure_function(const BlockExpr& expr,
                               const StateAssignment& state) {
  if (const auto* r = std::get_if<ComponentRef>(&expr.node)) {
    auto it = state.find(r->instance());
    if (it == state.end())
      throw UnknownInstanceError("no state for instance " +
                                 to_string(r->instance()));
    return it->second;
  }
  // Every child is evaluated so a missing instance is always reported.
  bool all = true, any = false;
  for (const auto& child : expr.children()) {
    bool up = structure_function(child, state);
    all = all && up;
    any = any || up;
  }
  return expr.is_series() ? all : any;
}

}  // namespace rbd
