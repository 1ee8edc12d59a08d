#pragma once

// Declarative experiment runner: a JSON spec in, one Table out.
//
// A spec is a JSON object with a "command" key and command-specific parameters; missing
// parameters take defaults, unknown ones are rejected. Parsing validates every constraint
// that can be checked without computing (divisibility, enumeration caps, ranges), so a
// spec that parses only fails at run time on numerical grounds.

#include <memory>
#include <string>
#include <vector>

#include "psg/table.hpp"

namespace psg {

class ExperimentSpec {
 public:
  // Throws psg::Error on any validation failure.
  static ExperimentSpec parse(const std::string& json_text);

  const std::string& command() const noexcept { return command_; }
  // Sorted-key compact JSON with all defaults filled in. Output sinks (path) and the
  // worker count are not part of the spec.
  std::string canonical() const;
  std::string format() const;
  std::uint64_t seed() const;

  struct Impl;
  const Impl& impl() const { return *impl_; }

 private:
  std::string command_;
  std::shared_ptr<const Impl> impl_;
};

const std::vector<std::string>& experiment_commands();

Table run_experiment(const ExperimentSpec& spec, int workers = 0);

std::string tool_version();

}  // namespace psg
