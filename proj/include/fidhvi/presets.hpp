#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fidhvi/contact.hpp"
#include "fidhvi/problem.hpp"

namespace fidhvi {

/// Flat numeric parameter overrides plus optional impulse times. Unknown
/// keys are a ConfigError.
struct PresetOverrides {
  std::map<std::string, double> values;
  std::optional<std::vector<double>> impulse_times;
};

struct PresetInfo {
  std::string name;
  std::string description;
  std::vector<std::string> parameters;
  bool contact = false;     ///< built from a ContactModel
  bool negative = false;    ///< engineered to fail a hypothesis
  bool impulsive = false;
  bool smooth = false;      ///< smooth right-hand side after eliminating y
};

const std::vector<PresetInfo>& preset_catalog();
const PresetInfo& preset_info(const std::string& name);  ///< ConfigError if unknown

/// Builds a preset on a uniform grid. Contact presets go through
/// to_problem_spec and may throw ConstantViolation.
ProblemSpec build_preset(const std::string& name, const PresetOverrides& overrides = {},
                         int steps_per_subinterval = 256);

/// The ContactModel behind a contact preset.
ContactModel build_contact_model(const std::string& name, const PresetOverrides& overrides = {});

}  // namespace fidhvi
