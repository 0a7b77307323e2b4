// rbd: command-line front end for reliability block diagram models.
//
// Exit status: 0 success, 1 model error (unreadable file, syntax or
// validation error, unknown instance), 2 usage error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "rbd/rbd.hpp"

namespace {

using nlohmann::json;

enum class Format { kTable, kJson, kCsv };

constexpr int kExitModelError = 1;
constexpr int kExitUsage = 2;

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string path;
  double time = 1000.0;
  Format format = Format::kTable;
};

rbd::SystemModel load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError(path + ": cannot read file");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return rbd::parse(ss.str());
  } catch (const rbd::ParseError& e) {
    throw ModelError(fmt::format("{}:{}:{}: error: {}", path, e.line(), e.column(),
                                 e.message()));
  }
}

// Shortest round-trip decimal; locale independent.
std::string num(double v) { return fmt::format("{}", v); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

void print_json(const json& doc) { std::cout << doc.dump(2) << '\n'; }

// ---------------------------------------------------------------------------

void cmd_eval(const Common& opt) {
  auto model = load(opt.path);
  rbd::MissionTime t(opt.time);
  auto sys = rbd::evaluate_pair(model, t);
  struct Row {
    std::string label;
    rbd::InstanceId id;
    double rate, reliability;
  };
  std::vector<Row> rows;
  for (const auto& inst : model.instances()) {
    double rate = model.component(inst.component_id).failure_rate;
    rows.push_back({rbd::instance_label(model, inst), inst, rate,
                    rbd::component_reliability(rate, t)});
  }

  switch (opt.format) {
    case Format::kJson: {
      json doc{{"command", "eval"},       {"model", model.name},
               {"time", opt.time},        {"reliability", sys.reliability},
               {"unreliability", sys.unreliability}, {"instances", json::array()}};
      for (const auto& r : rows)
        doc["instances"].push_back({{"instance", r.label},
                                    {"component", r.id.component_id},
                                    {"index", r.id.index},
                                    {"failure_rate", r.rate},
                                    {"reliability", r.reliability}});
      print_json(doc);
      break;
    }
    case Format::kCsv:
      std::cout << "kind,name,failure_rate,reliability,unreliability\n";
      std::cout << "system," << csv_field(model.name) << ",," << num(sys.reliability) << ','
                << num(sys.unreliability) << '\n';
      for (const auto& r : rows)
        std::cout << "instance," << r.label << ',' << num(r.rate) << ',' << num(r.reliability)
                  << ',' << num(1.0 - r.reliability) << '\n';
      break;
    case Format::kTable:
      fmt::print("model          {}\n", model.name);
      fmt::print("time           {} h\n", num(opt.time));
      fmt::print("reliability    {:.4f}\n", sys.reliability);
      fmt::print("unreliability  {:.4f}\n\n", sys.unreliability);
      fmt::print("{:<24} {:>12} {:>12}\n", "instance", "lambda [1/h]", "reliability");
      for (const auto& r : rows)
        fmt::print("{:<24} {:>12.4e} {:>12.4f}\n", r.label, r.rate, r.reliability);
      break;
  }
}

struct SimulateOptions {
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
  double confidence = 0.95;
  unsigned threads = 0;
};

void cmd_simulate(const Common& opt, const SimulateOptions& sim) {
  auto model = load(opt.path);
  rbd::MissionTime t(opt.time);
  rbd::SimulationConfig cfg;
  cfg.trials = sim.trials;
  cfg.seed = sim.seed;
  cfg.confidence_level = sim.confidence;
  cfg.threads = sim.threads;
  auto e = rbd::estimate_reliability(model, t, cfg);
  double analytic = rbd::evaluate(model, t);
  double diff = e.point - analytic;

  switch (opt.format) {
    case Format::kJson:
      print_json({{"command", "simulate"},
                  {"model", model.name},
                  {"time", opt.time},
                  {"trials", e.trials},
                  {"seed", e.seed},
                  {"confidence_level", e.confidence_level},
                  {"point", e.point},
                  {"std_error", e.std_error},
                  {"ci_low", e.ci_low},
                  {"ci_high", e.ci_high},
                  {"analytic", analytic},
                  {"difference", diff}});
      break;
    case Format::kCsv:
      std::cout << "time,trials,seed,confidence_level,point,std_error,ci_low,ci_high,"
                   "analytic,difference\n";
      std::cout << num(opt.time) << ',' << e.trials << ',' << e.seed << ','
                << num(e.confidence_level) << ',' << num(e.point) << ',' << num(e.std_error)
                << ',' << num(e.ci_low) << ',' << num(e.ci_high) << ',' << num(analytic) << ','
                << num(diff) << '\n';
      break;
    case Format::kTable:
      fmt::print("model          {}\n", model.name);
      fmt::print("time           {} h\n", num(opt.time));
      fmt::print("trials         {}\n", e.trials);
      fmt::print("seed           {}\n", e.seed);
      fmt::print("estimate       {:.4f}\n", e.point);
      fmt::print("std error      {:.4f}\n", e.std_error);
      fmt::print("{:<14} [{:.4f}, {:.4f}]\n", fmt::format("{}% CI", num(100 * e.confidence_level)),
                 e.ci_low, e.ci_high);
      fmt::print("analytic       {:.4f}\n", analytic);
      fmt::print("difference     {:+.4f}\n", diff);
      break;
  }
}

void cmd_rank(const Common& opt, const std::string& measure_name) {
  auto model = load(opt.path);
  auto measure = measure_name == "birnbaum" ? rbd::RankMeasure::kBirnbaumDescending
                                            : rbd::RankMeasure::kReliabilityAscending;
  auto report = rbd::rank_instances(model, rbd::MissionTime(opt.time), measure);

  switch (opt.format) {
    case Format::kJson: {
      json doc{{"command", "rank"}, {"model", model.name}, {"time", opt.time},
               {"measure", measure_name}, {"rows", json::array()}};
      int rank = 0;
      for (const auto& r : report.rows)
        doc["rows"].push_back({{"rank", ++rank},
                               {"instance", r.label},
                               {"component", r.instance.component_id},
                               {"index", r.instance.index},
                               {"failure_rate", r.failure_rate},
                               {"reliability", r.reliability},
                               {"birnbaum", r.birnbaum}});
      print_json(doc);
      break;
    }
    case Format::kCsv: {
      std::cout << "rank,instance,component,index,failure_rate,reliability,birnbaum\n";
      int rank = 0;
      for (const auto& r : report.rows)
        std::cout << ++rank << ',' << r.label << ',' << r.instance.component_id << ','
                  << r.instance.index << ',' << num(r.failure_rate) << ','
                  << num(r.reliability) << ',' << num(r.birnbaum) << '\n';
      break;
    }
    case Format::kTable: {
      fmt::print("model {} at {} h, ranked by {}\n\n", model.name, num(opt.time), measure_name);
      fmt::print("{:>4}  {:<24} {:>12} {:>12}\n", "rank", "instance", "reliability", "birnbaum");
      int rank = 0;
      for (const auto& r : report.rows)
        fmt::print("{:>4}  {:<24} {:>12.4f} {:>12.4f}\n", ++rank, r.label, r.reliability,
                   r.birnbaum);
      break;
    }
  }
}

void cmd_whatif(const Common& opt, const std::string& instance, int copies) {
  auto model = load(opt.path);
  rbd::InstanceId id;
  try {
    id = rbd::resolve_instance(model, instance);
  } catch (const rbd::UnknownInstanceError& e) {
    throw ModelError(opt.path + ": " + e.what());
  }
  auto w = rbd::whatif_redundancy(model, id, copies, rbd::MissionTime(opt.time));
  std::string text = rbd::serialize(w.modified_model);

  switch (opt.format) {
    case Format::kJson:
      print_json({{"command", "whatif"},
                  {"model", model.name},
                  {"time", opt.time},
                  {"instance", instance},
                  {"copies", copies},
                  {"baseline", w.baseline_reliability},
                  {"modified", w.modified_reliability},
                  {"delta", w.delta},
                  {"modified_model", text}});
      break;
    case Format::kCsv:
      std::cout << "instance,copies,time,baseline,modified,delta,modified_model\n";
      std::cout << csv_field(instance) << ',' << copies << ',' << num(opt.time) << ','
                << num(w.baseline_reliability) << ',' << num(w.modified_reliability) << ','
                << num(w.delta) << ',' << csv_field(text) << '\n';
      break;
    case Format::kTable:
      fmt::print("model          {}\n", model.name);
      fmt::print("time           {} h\n", num(opt.time));
      fmt::print("redundancy     {} x {}\n", copies, instance);
      fmt::print("baseline       {:.4f}\n", w.baseline_reliability);
      fmt::print("modified       {:.4f}\n", w.modified_reliability);
      fmt::print("delta          {:+.4f}\n\n", w.delta);
      fmt::print("# modified model\n{}", text);
      break;
  }
}

void cmd_mttf(const Common& opt) {
  auto model = load(opt.path);
  auto m = rbd::mttf(model);
  std::string method = m.method() == rbd::MttfMethod::kInfinite     ? "infinite"
                       : m.method() == rbd::MttfMethod::kQuadrature ? "quadrature"
                                                                    : "closed_form";
  switch (opt.format) {
    case Format::kJson:
      print_json({{"command", "mttf"},
                  {"model", model.name},
                  {"mttf", m.is_infinite() ? json(nullptr) : json(m.hours())},
                  {"infinite", m.is_infinite()},
                  {"method", method}});
      break;
    case Format::kCsv:
      std::cout << "model,mttf_hours,infinite,method\n";
      std::cout << csv_field(model.name) << ',' << (m.is_infinite() ? "inf" : num(m.hours()))
                << ',' << (m.is_infinite() ? "true" : "false") << ',' << method << '\n';
      break;
    case Format::kTable:
      fmt::print("model          {}\n", model.name);
      if (m.is_infinite())
        fmt::print("mttf           infinite (the system cannot fail)\n");
      else
        fmt::print("mttf           {:.4f} h\n", m.hours());
      fmt::print("method         {}\n", method);
      break;
  }
}

void cmd_curve(const Common& opt, double until, int points) {
  auto model = load(opt.path);
  std::vector<std::pair<double, rbd::ReliabilityPair>> curve;
  for (int k = 0; k < points; ++k) {
    double t = points == 1 ? 0.0 : until * k / (points - 1);
    curve.emplace_back(t, rbd::evaluate_pair(model, rbd::MissionTime(t)));
  }
  switch (opt.format) {
    case Format::kJson: {
      json doc{{"command", "curve"}, {"model", model.name}, {"points", json::array()}};
      for (const auto& [t, r] : curve)
        doc["points"].push_back(
            {{"time", t}, {"reliability", r.reliability}, {"unreliability", r.unreliability}});
      print_json(doc);
      break;
    }
    case Format::kCsv:
      std::cout << "time,reliability,unreliability\n";
      for (const auto& [t, r] : curve)
        std::cout << num(t) << ',' << num(r.reliability) << ',' << num(r.unreliability) << '\n';
      break;
    case Format::kTable:
      fmt::print("{:>12} {:>12}\n", "time [h]", "reliability");
      for (const auto& [t, r] : curve) fmt::print("{:>12.1f} {:>12.4f}\n", t, r.reliability);
      break;
  }
}

void add_common(CLI::App* cmd, Common& opt, bool with_time = true) {
  cmd->add_option("model", opt.path, "Model file (.rbd)")->required();
  if (with_time)
    cmd->add_option("-t,--time", opt.time, "Mission time in hours")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
  std::map<std::string, Format> formats{
      {"table", Format::kTable}, {"json", Format::kJson}, {"csv", Format::kCsv}};
  cmd->add_option("-f,--format", opt.format, "Output format: table, json, csv")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reliability block diagram evaluation, simulation and analysis"};
  app.require_subcommand(1);

  Common opt;
  SimulateOptions sim;
  std::string measure = "reliability";
  std::string instance;
  int copies = 2;
  double until = 1e5;
  int points = 101;

  auto* eval = app.add_subcommand("eval", "System and per-instance reliability at a mission time");
  add_common(eval, opt);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate of reliability");
  add_common(simulate, opt);
  simulate->add_option("-n,--trials", sim.trials, "Number of trials")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  simulate->add_option("-s,--seed", sim.seed, "Random seed")->capture_default_str();
  simulate->add_option("--confidence", sim.confidence, "Confidence level in (0, 1)")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  simulate->add_option("-j,--threads", sim.threads, "Worker threads (0 = all cores)");

  auto* rank = app.add_subcommand("rank", "Rank instances by reliability or Birnbaum importance");
  add_common(rank, opt);
  rank->add_option("-m,--measure", measure, "reliability or birnbaum")
      ->check(CLI::IsMember({"reliability", "birnbaum"}))
      ->capture_default_str();

  auto* whatif = app.add_subcommand("whatif", "Effect of adding active redundancy to an instance");
  add_common(whatif, opt);
  whatif->add_option("-d,--duplicate", instance, "Instance to duplicate (id or id#k)")->required();
  whatif->add_option("-c,--copies", copies, "Number of parallel copies (>= 2)")
      ->check(CLI::Range(2, 1 << 20))
      ->capture_default_str();

  auto* mttf = app.add_subcommand("mttf", "Mean time to failure");
  add_common(mttf, opt, false);

  auto* curve = app.add_subcommand("curve", "Reliability over a time grid");
  add_common(curve, opt, false);
  curve->add_option("--until", until, "Last grid time in hours")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  curve->add_option("--points", points, "Number of grid points")
      ->check(CLI::Range(1, 1000000))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "usage error: " << e.what() << "\n" << "Run with --help for more information.\n";
    return kExitUsage;
  }

  try {
    if (*eval) cmd_eval(opt);
    else if (*simulate) cmd_simulate(opt, sim);
    else if (*rank) cmd_rank(opt, measure);
    else if (*whatif) cmd_whatif(opt, instance, copies);
    else if (*mttf) cmd_mttf(opt);
    else if (*curve) cmd_curve(opt, until, points);
  } catch (const ModelError& e) {
    std::cerr << e.what() << '\n';
    return kExitModelError;
  } catch (const rbd::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << opt.path << ": error: " << e.what() << '\n';
    return kExitModelError;
  }
  return 0;
}
