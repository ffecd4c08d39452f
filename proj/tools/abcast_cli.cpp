#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "abcast/checks.hpp"
#include "abcast/fuzz.hpp"
#include "abcast/scenario.hpp"
#include "abcast/trace.hpp"

namespace {

using namespace abcast;
using namespace abcast::harness;

constexpr int kExitPass = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;

void print_reports(const std::vector<CheckReport>& reports) {
  for (const auto& r : reports) {
    std::cout << r.name << ": " << to_string(r.status);
    if (r.first_violation) std::cout << " at event " << *r.first_violation;
    if (!r.message.empty()) std::cout << " (" << r.message << ")";
    std::cout << '\n';
  }
}

int exit_code(const std::vector<CheckReport>& reports, std::uint64_t seed) {
  for (const auto& r : reports) {
    if (r.failed()) {
      std::cerr << "first violation: check " << r.name << ", seed " << seed << ", event "
                << r.first_violation.value_or(0) << "\n";
      return kExitCheckFailed;
    }
  }
  return kExitPass;
}

void write_report(const std::string& path, const std::vector<CheckReport>& reports) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : reports) j.push_back(to_json(r));
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << j.dump(2) << '\n';
}

void write_trace(const std::string& path, const Trace& trace) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  write_jsonl(out, trace);
}

std::pair<std::uint64_t, std::uint64_t> parse_range(const std::string& s) {
  const auto dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      const auto v = std::stoull(s);
      return {v, v};
    }
    return {std::stoull(s.substr(0, dots)), std::stoull(s.substr(dots + 2))};
  } catch (const std::exception&) {
    throw ConfigError("seed range must look like A..B, got " + s);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Atomic broadcast simulator and property checker"};
  app.require_subcommand(1);

  std::string scenario_path, trace_path, report_path, trace_in, seeds;
  std::optional<std::uint64_t> seed;
  std::uint64_t until = 0;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());

  auto* run = app.add_subcommand("run", "Run a scenario and check the trace");
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--trace", trace_path, "Write the trace as JSON lines");
  run->add_option("--report", report_path, "Write the check report as JSON");
  run->add_option("--seed", seed, "Override the scenario seed");

  auto* check = app.add_subcommand("check", "Re-check an existing trace");
  check->add_option("trace", trace_in, "Trace JSON-lines file")->required();
  check->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  check->add_option("--report", report_path, "Write the check report as JSON");

  auto* fuzz_cmd = app.add_subcommand("fuzz", "Sweep seeds over a template scenario");
  fuzz_cmd->add_option("--seeds", seeds, "Inclusive seed range A..B")->required();
  fuzz_cmd->add_option("template", scenario_path, "Scenario JSON file")->required();
  fuzz_cmd->add_option("--jobs", jobs, "Worker threads");
  fuzz_cmd->add_option("--report", report_path, "Write every report as JSON");

  auto* replay = app.add_subcommand("replay", "Print a run's trace up to an event index");
  replay->add_option("--seed", seed, "Seed to replay")->required();
  replay->add_option("--until", until, "Last event index to print")->required();
  replay->add_option("scenario", scenario_path, "Scenario JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfig;
  }

  try {
    Scenario scenario = load_scenario(scenario_path);
    if (seed) scenario = with_seed(scenario, *seed);

    if (*run) {
      const Trace trace = run_scenario(scenario);
      const auto reports = check_trace(trace, scenario);
      if (!trace_path.empty()) write_trace(trace_path, trace);
      if (!report_path.empty()) write_report(report_path, reports);
      std::cout << "seed " << trace.header.seed << ", " << trace.events.size() << " events, horizon "
                << trace.header.horizon << '\n';
      print_reports(reports);
      return exit_code(reports, trace.header.seed);
    }

    if (*check) {
      std::ifstream in(trace_in);
      if (!in) throw ConfigError("cannot open trace " + trace_in);
      const Trace trace = read_jsonl(in);
      const auto reports = check_trace(trace, scenario);
      if (!report_path.empty()) write_report(report_path, reports);
      print_reports(reports);
      return exit_code(reports, trace.header.seed);
    }

    if (*fuzz_cmd) {
      const auto [first, last] = parse_range(seeds);
      const auto results = fuzz(scenario, first, last, jobs);
      std::size_t failed = 0;
      std::map<std::string, std::size_t> inconclusive;
      nlohmann::json all = nlohmann::json::array();
      for (const auto& r : results) {
        for (const auto& rep : r.reports) {
          if (rep.status == Status::inconclusive) ++inconclusive[rep.name];
          all.push_back(to_json(rep));
        }
        if (r.passed()) continue;
        ++failed;
        for (const auto& rep : r.reports) {
          if (!rep.failed()) continue;
          std::cout << "seed " << r.seed << " (gst " << r.gst << "): " << rep.name
                    << " failed at event " << rep.first_violation.value_or(0) << ": "
                    << rep.message << '\n';
        }
      }
      if (!report_path.empty()) {
        std::ofstream out(report_path);
        out << all.dump(2) << '\n';
      }
      for (const auto& [name, count] : inconclusive) {
        std::cout << name << ": inconclusive in " << count << " runs\n";
      }
      std::cout << results.size() - failed << "/" << results.size() << " seeds passed\n";
      return failed == 0 ? kExitPass : kExitCheckFailed;
    }

    if (*replay) {
      Trace trace = run_scenario(scenario);
      if (until + 1 < trace.events.size()) trace.events.resize(until + 1);
      write_jsonl(std::cout, trace);
      return kExitPass;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
