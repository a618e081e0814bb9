#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "aff/config.hpp"

namespace aff {

struct ScenarioSource {
    std::string name;
    std::string text;
    std::string origin;                ///< "shipped" or the file path
    std::filesystem::path base_dir;    ///< relative profile files resolve here
};

struct ShippedScenario {
    std::string name;
    std::string text;
};

/// Scenarios bundled with the build, sorted by name.
const std::vector<ShippedScenario>& shipped_scenarios();

/// A shipped scenario by name, else a file path. Throws InputError when neither exists.
ScenarioSource load_scenario(const std::string& name_or_path);

/// Every knob the scenario uses, with defaults filled in. Throws ParseError
/// (with the line and column of the offending value when it came from the
/// file) on syntax errors, unknown keys, and out-of-range values.
Config resolve_knobs(const ScenarioSource& src, const std::vector<std::string>& overrides = {});

struct RunOptions {
    std::filesystem::path out_dir;
    std::vector<std::string> overrides;
    int workers = 0;  ///< 0 keeps the default worker count
};

enum ExitCode { kExitPass = 0, kExitError = 1, kExitFail = 2 };

/// Runs every requested analysis in order and writes report.json plus one CSV
/// per scan into out_dir. Returns 0 when every verdict passes, 2 when one
/// fails, 1 on input or resource errors (the report is still written once the
/// scenario has parsed).
int run_scenario(const ScenarioSource& src, const RunOptions& opts, std::ostream& log);

}  // namespace aff
