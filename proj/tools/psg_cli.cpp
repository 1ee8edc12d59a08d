// psg command-line runner. Builds an experiment spec from flags and hands it to the C API.
//
// Exit codes: 0 success, 1 computation or I/O error, 2 invalid arguments or spec.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "psg/psg.h"

namespace {

using json = nlohmann::json;

constexpr int kExitFailure = 1;
constexpr int kExitInvalid = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Kind { integer, unsigned_integer, real, text, int_list, real_list, beta_list, flag, inverted_flag };

struct Param {
  const char* flag;
  const char* key;
  Kind kind;
  const char* help;
  bool mc = false;
};

struct Command {
  const char* name;
  const char* help;
  std::vector<Param> params;
};

const Param kKappa{"--kappa", "kappa", Kind::integer, "number of colors"};
const Param kN{"--n", "n", Kind::int_list, "system sizes, comma separated"};
const Param kBeta{"--beta", "beta", Kind::beta_list, "inverse temperatures, comma separated (inf allowed where supported)"};
const Param kSector{"--sector", "sector", Kind::text, "all | balanced | fixed:c1,...,ck"};
const Param kHamiltonian{"--hamiltonian", "hamiltonian", Kind::text, "raw | centered"};
const Param kSeed{"--seed", "seed", Kind::unsigned_integer, "root seed"};
const Param kReplicas{"--replicas", "replicas", Kind::integer, "disorder replicas"};
const Param kCap{"--cap", "cap", Kind::real, "enumeration cap"};
const std::vector<Param> kMc = {
    {"--burn-in", "burn_in", Kind::integer, "burn-in sweeps", true},
    {"--mc-samples", "samples", Kind::integer, "recorded samples per chain", true},
    {"--thinning", "thinning", Kind::integer, "sweeps between samples", true},
    {"--audit-every", "audit_every", Kind::integer, "sweeps between energy audits", true},
};

std::vector<Param> with_mc(std::vector<Param> params) {
  params.insert(params.end(), kMc.begin(), kMc.end());
  return params;
}

const std::vector<Command>& commands() {
  static const std::vector<Command> list = {
      {"thresholds", "closed-form thresholds per kappa", {{"--kappa-max", "kappa_max", Kind::integer, "largest kappa"}}},
      {"exact-free-energy",
       "quenched free energy by exact enumeration",
       {kKappa, kN, kBeta, kSector, kHamiltonian, kSeed, kReplicas,
        {"--per-replica", "per_replica", Kind::flag, "emit one row per disorder replica"}, kCap}},
      {"second-moment", "exact second-moment ratio of the balanced centered model", {kKappa, kN, kBeta, kCap}},
      {"uncentered-ratio", "exact E Z^2 / (E Z)^2 for the raw Hamiltonian", {kKappa, kN, kBeta, kSector, kCap}},
      {"rate-gap",
       "minimum of the exponent gap outside a Frobenius shell",
       {kKappa, kBeta, {"--delta", "delta", Kind::real, "shell radius (squared)"},
        {"--restarts", "restarts", Kind::integer, "multi-start count"}, kSeed}},
      {"kl-check",
       "randomized check of the local KL expansion bound",
       {{"--samples", "samples", Kind::integer, "total random pairs"}, kSeed,
        {"--dim-min", "dim_min", Kind::integer, "smallest dimension"},
        {"--dim-max", "dim_max", Kind::integer, "largest dimension"}}},
      {"ldp-check",
       "exact vs Stirling log-probability of an overlap table",
       {kKappa, kN, {"--base-counts", "base_counts", Kind::int_list, "base table, row-major (default all ones)"}}},
      {"shell-count", "admissible tables per Frobenius shell", {kKappa, kN}},
      {"gauge-check",
       "gauge antisymmetry of odd spin products (kappa = 2)",
       {kN, kBeta, {"--trials", "trials", Kind::integer, "random (g, sites) draws"}, kSeed, kCap}},
      {"moment-check",
       "magnetization and exponential moments against their bounds (kappa = 2)",
       {kN, kBeta, {"--m", "m", Kind::int_list, "moment orders"},
        {"--lambda", "lambda", Kind::real_list, "exponential-moment parameters"}, kReplicas, kSeed, kCap}},
      {"tail-bound",
       "tail of the magnetization deviation against 2 exp(-eps^2 N)",
       with_mc({kKappa, kN, kBeta, {"--epsilon", "epsilon", Kind::real_list, "deviation thresholds"}, kSector,
                kHamiltonian, kReplicas, kSeed, kCap})},
      {"mc-free-energy",
       "free energy by thermodynamic integration over Monte Carlo energies",
       with_mc({kKappa, kN, {"--beta-max", "beta_max", Kind::real, "upper integration limit"},
                {"--n-grid", "n_grid", Kind::integer, "trapezoid intervals"}, kSector, kHamiltonian, kReplicas,
                kSeed, {"--no-exact-check", "exact_check", Kind::inverted_flag, "skip the enumeration comparison"},
                kCap})},
  };
  return list;
}

long long parse_int(const std::string& s, const std::string& flag) {
  long long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw UsageError(flag + ": expected an integer, got '" + s + "'");
  return v;
}

unsigned long long parse_uint(const std::string& s, const std::string& flag) {
  unsigned long long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw UsageError(flag + ": expected a nonnegative integer, got '" + s + "'");
  return v;
}

double parse_real(const std::string& s, const std::string& flag) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
    throw UsageError(flag + ": expected a finite number, got '" + s + "'");
  return v;
}

json to_json(const Param& p, const std::vector<std::string>& raw) {
  const std::string flag = p.flag;
  auto single = [&]() -> const std::string& {
    if (raw.size() != 1) throw UsageError(flag + ": expected one value");
    return raw.front();
  };
  switch (p.kind) {
    case Kind::integer:
      return parse_int(single(), flag);
    case Kind::unsigned_integer:
      return parse_uint(single(), flag);
    case Kind::real:
      return parse_real(single(), flag);
    case Kind::text:
      return single();
    case Kind::int_list: {
      json out = json::array();
      for (const auto& s : raw) out.push_back(parse_int(s, flag));
      return out;
    }
    case Kind::real_list: {
      json out = json::array();
      for (const auto& s : raw) out.push_back(parse_real(s, flag));
      return out;
    }
    case Kind::beta_list: {
      json out = json::array();
      for (const auto& s : raw) {
        if (s == "inf" || s == "infinity")
          out.push_back("inf");
        else
          out.push_back(parse_real(s, flag));
      }
      return out;
    }
    case Kind::flag:
      return true;
    case Kind::inverted_flag:
      return false;
  }
  return nullptr;
}

std::string read_file(const std::string& path) {
  if (path == "-") return std::string(std::istreambuf_iterator<char>(std::cin), {});
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Writes via a temporary file in the target directory followed by rename().
void write_atomically(const std::filesystem::path& path, const std::string& text) {
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  if (!dir.empty()) std::filesystem::create_directories(dir);
  const auto tmp = dir / ("." + path.filename().string() + ".tmp." + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename into '" + path.string() + "': " + ec.message());
  }
}

struct CString {
  char* p = nullptr;
  ~CString() { psg_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct Outcome {
  int code;
  std::string message;
};

Outcome execute(const std::string& spec_text, const std::string& output, int workers) {
  psg_experiment* raw = nullptr;
  if (psg_experiment_parse(spec_text.c_str(), &raw) != PSG_OK) return {kExitInvalid, psg_last_error()};
  std::unique_ptr<psg_experiment, decltype(&psg_experiment_free)> spec(raw, psg_experiment_free);

  psg_table* table_raw = nullptr;
  if (psg_experiment_run(spec.get(), workers, &table_raw) != PSG_OK) return {kExitFailure, psg_last_error()};
  std::unique_ptr<psg_table, decltype(&psg_table_free)> table(table_raw, psg_table_free);

  CString format, rendered, command;
  psg_experiment_format(spec.get(), &format.p);
  psg_experiment_command(spec.get(), &command.p);
  const bool as_json = format.str() == "json";
  const psg_status st = as_json ? psg_table_to_json(table.get(), &rendered.p) : psg_table_to_csv(table.get(), &rendered.p);
  if (st != PSG_OK) return {kExitFailure, psg_last_error()};

  std::filesystem::path path = output;
  if (path.empty()) {
    if (const char* dir = std::getenv("PSG_OUTPUT_DIR"); dir && *dir)
      path = std::filesystem::path(dir) / (command.str() + (as_json ? ".json" : ".csv"));
  }
  if (path.empty()) {
    std::cout << rendered.str();
    std::cout.flush();
    return {std::cout ? 0 : kExitFailure, std::cout ? "" : "write to stdout failed"};
  }
  write_atomically(path, rendered.str());
  return {0, ""};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"psg: Potts spin-glass numerical laboratory"};
  app.set_version_flag("--version", std::string("psg ") + psg_version());
  app.require_subcommand(1);

  std::string output;
  std::string format;
  int workers = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-o,--output", output, "output file (default: $PSG_OUTPUT_DIR/<command>.<ext>, else stdout)");
    sub->add_option("--workers", workers, "worker threads (0 = all cores); results do not depend on it");
  };

  struct Bound {
    const Command* command;
    CLI::App* app;
    std::vector<std::pair<const Param*, std::unique_ptr<std::vector<std::string>>>> values;
    std::vector<std::pair<const Param*, std::unique_ptr<bool>>> flags;
  };
  std::vector<Bound> bound;
  for (const auto& cmd : commands()) {
    Bound b{&cmd, app.add_subcommand(cmd.name, cmd.help), {}, {}};
    add_common(b.app);
    b.app->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    for (const auto& p : cmd.params) {
      if (p.kind == Kind::flag || p.kind == Kind::inverted_flag) {
        auto slot = std::make_unique<bool>(false);
        b.app->add_flag(p.flag, *slot, p.help);
        b.flags.emplace_back(&p, std::move(slot));
      } else {
        auto slot = std::make_unique<std::vector<std::string>>();
        auto* opt = b.app->add_option(p.flag, *slot, p.help);
        if (p.kind == Kind::int_list || p.kind == Kind::real_list || p.kind == Kind::beta_list)
          opt->delimiter(',');
        b.values.emplace_back(&p, std::move(slot));
      }
    }
    bound.push_back(std::move(b));
  }

  std::string spec_path;
  auto* run = app.add_subcommand("run", "run a JSON spec file ('-' for stdin)");
  run->add_option("spec", spec_path, "spec file")->required();
  add_common(run);
  std::string rerun_path;
  auto* rerun = app.add_subcommand("rerun", "re-run the spec embedded in a previous output file");
  rerun->add_option("file", rerun_path, "CSV or JSON output of an earlier run")->required();
  add_common(rerun);
  auto* list = app.add_subcommand("commands", "list experiment commands");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    std::string spec_text;
    if (list->parsed()) {
      for (const char* const* c = psg_experiment_commands(); *c; ++c) std::cout << *c << '\n';
      return 0;
    } else if (run->parsed()) {
      spec_text = read_file(spec_path);
    } else if (rerun->parsed()) {
      const std::string previous = read_file(rerun_path);
      CString spec;
      if (psg_spec_from_output(previous.c_str(), &spec.p) != PSG_OK) {
        std::cerr << "psg: " << psg_last_error() << '\n';
        return kExitInvalid;
      }
      spec_text = spec.str();
    } else {
      for (const auto& b : bound) {
        if (!b.app->parsed()) continue;
        json spec{{"command", b.command->name}};
        if (!format.empty()) spec["format"] = format;
        for (const auto& [param, slot] : b.values) {
          if (b.app->get_option(param->flag)->count() == 0) continue;
          if (param->mc)
            spec["mc"][param->key] = to_json(*param, *slot);
          else
            spec[param->key] = to_json(*param, *slot);
        }
        for (const auto& [param, slot] : b.flags)
          if (*slot) spec[param->key] = to_json(*param, {});
        spec_text = spec.dump();
      }
    }
    const auto outcome = execute(spec_text, output, workers);
    if (outcome.code != 0) std::cerr << "psg: " << outcome.message << '\n';
    return outcome.code;
  } catch (const UsageError& e) {
    std::cerr << "psg: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "psg: " << e.what() << '\n';
    return kExitFailure;
  }
}
