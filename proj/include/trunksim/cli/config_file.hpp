#ifndef TRUNKSIM_CLI_CONFIG_FILE_HPP
#define TRUNKSIM_CLI_CONFIG_FILE_HPP

#include <string>
#include <vector>

#include "trunksim/scen/scenario.hpp"

namespace trunksim::cli {

// {fig2:a, fig2:b, fig2:c, fig3:on, fig3:off}
std::vector<std::string> builtin_names();
bool is_builtin(const std::string& name);
scen::ScenarioConfig builtin_config(const std::string& name);

// Flat line-oriented document; '#' starts a comment. Throws
// std::invalid_argument with a line number and the offending key.
scen::ScenarioConfig parse_config_text(const std::string& text);

// Canonical document; parse_config_text(serialize_config(c)) == c.
std::string serialize_config(const scen::ScenarioConfig& cfg);

// Builtin name or path to a config file; result is fully validated.
scen::ScenarioConfig parse_config(const std::string& source);

}  // namespace trunksim::cli

#endif  // TRUNKSIM_CLI_CONFIG_FILE_HPP
