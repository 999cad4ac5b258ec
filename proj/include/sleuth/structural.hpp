#pragma once

#include <string>
#include <vector>

#include "sleuth/checker.hpp"
#include "sleuth/host_edits.hpp"

namespace sleuth {

struct EditResult {
    std::vector<std::string> touched;  // entries created or changed
    std::vector<std::string> removed;
    std::vector<Finding> findings;
    std::size_t events = 0;  // audit events appended
    std::string summary;
};

enum class InsertSide { After, Before };

// Refuses structural edits outside Development mode.
void require_development(const Registry& reg, std::string_view verb);

// Runs `fn` against copies of the set and registry and commits only when it
// returns; any exception leaves both untouched.
template <typename F>
EditResult transact(WorkbookSet& set, Registry& reg, F&& fn) {
    WorkbookSet set_copy = set;
    Registry reg_copy = reg;
    std::size_t before = reg_copy.audit_log().size();
    EditResult result = fn(set_copy, reg_copy);
    result.events = reg_copy.audit_log().size() - before;
    set = std::move(set_copy);
    reg = std::move(reg_copy);
    return result;
}

// Inserts `count` lines after (or before) the line `anchor`, which must lie
// in a member of the group; the same offset is used in every member.
EditResult insert_in_group(WorkbookSet& set, Registry& reg, const std::string& group, int anchor, int count,
                           InsertSide side = InsertSide::After);
EditResult delete_in_group(WorkbookSet& set, Registry& reg, const std::string& group, int anchor, int count);

// Tracked cut-paste of a watched area.
EditResult move_area(WorkbookSet& set, Registry& reg, const AreaExtent& source, const CellAddr& dest);

// Copies entries to new top-left cells and watches the copies.
EditResult replicate(WorkbookSet& set, Registry& reg, const std::vector<std::string>& sources,
                     const std::vector<CellAddr>& destinations);

// accept=false regenerates formula cells from the master generic (guards
// are blanked); accept=true adopts the current state.
EditResult fix_area(WorkbookSet& set, Registry& reg, const std::string& id, bool accept);

// Tracked insert/delete on a single watched area, through an implicit
// singleton group.
EditResult insert_in_area(WorkbookSet& set, Registry& reg, const std::string& id, Axis axis, int anchor, int count,
                          InsertSide side = InsertSide::After);

}  // namespace sleuth
