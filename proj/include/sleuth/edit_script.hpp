#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sleuth/structural.hpp"

namespace sleuth {

// One line of an edit script. `args` holds the positional words, `options`
// the key=value words; SET keeps its payload verbatim in `payload`.
struct ScriptCommand {
    std::string verb;
    std::vector<std::string> args;
    std::map<std::string, std::string> options;
    std::string payload;
    int line = 0;
    std::string text;
};

struct EditScript {
    std::vector<ScriptCommand> commands;
};

// Throws Parse with the line number on malformed input.
EditScript parse_edit_script(std::string_view text);

struct ScriptOutcome {
    std::vector<EditResult> results;  // one per command
    std::size_t events = 0;
};

// Runs every command in order as one transaction: the first failure
// leaves set and registry as they were and rethrows with the line number.
ScriptOutcome apply_edit_script(WorkbookSet& set, Registry& reg, const EditScript& script);

// Single command against the live state (no rollback of earlier commands).
EditResult apply_command(WorkbookSet& set, Registry& reg, const ScriptCommand& cmd);

}  // namespace sleuth
