#include "sleuth/edit_script.hpp"

#include <charconv>

#include "sleuth/error.hpp"

namespace sleuth {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// Whitespace split that keeps quoted sheet names ('My Sheet'!A1) whole.
std::vector<std::string> words(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (char c : s) {
        if (c == '\'') quoted = !quoted;
        if (!quoted && (c == ' ' || c == '\t')) {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
            continue;
        }
        cur += c;
    }
    if (quoted) throw SleuthError(ErrorCode::Parse, "unbalanced quote");
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto comma = s.find(',', start);
        if (comma == std::string_view::npos) comma = s.size();
        auto item = trim(s.substr(start, comma - start));
        if (!item.empty()) out.emplace_back(item);
        start = comma + 1;
    }
    return out;
}

const std::vector<std::string_view> kVerbs = {
    "SET",          "MOVE",         "INSERT-BELOW",    "INSERT-ABOVE",    "INSERT-RIGHT", "INSERT-LEFT",
    "DELETE-ROWS",  "DELETE-COLS",  "REPLICATE",       "FIX",             "WATCH",        "UNWATCH",
    "GROUP",        "RAW-INSERT-ROWS", "RAW-INSERT-COLS", "RAW-DELETE-ROWS", "RAW-DELETE-COLS",
    "RAW-MOVE-ROW", "RAW-MOVE-COLUMN", "RAW-CUT",      "RAW-FILL",
};

int parse_int(const std::string& s, const char* what) {
    int v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw SleuthError(ErrorCode::Usage, std::string(what) + " '" + s + "' is not an integer");
    return v;
}

// Row number, or column number/letters.
int parse_line(const std::string& s, Axis axis) {
    if (axis == Axis::Column && !s.empty() && std::isalpha(static_cast<unsigned char>(s.front()))) {
        int c = column_index(s);
        if (c == 0) throw SleuthError(ErrorCode::Usage, "bad column '" + s + "'");
        return c;
    }
    return parse_int(s, axis == Axis::Row ? "row" : "column");
}

const std::string& option(const ScriptCommand& cmd, const std::string& key) {
    auto it = cmd.options.find(key);
    if (it == cmd.options.end()) throw SleuthError(ErrorCode::Usage, cmd.verb + " needs " + key + "=");
    return it->second;
}

std::string option_or(const ScriptCommand& cmd, const std::string& key, std::string fallback) {
    auto it = cmd.options.find(key);
    return it == cmd.options.end() ? fallback : it->second;
}

// Positional words split around "->".
std::pair<std::vector<std::string>, std::vector<std::string>> arrow_sides(const ScriptCommand& cmd) {
    std::pair<std::vector<std::string>, std::vector<std::string>> out;
    bool right = false;
    for (const auto& a : cmd.args) {
        if (a == "->") {
            if (right) throw SleuthError(ErrorCode::Usage, cmd.verb + ": more than one '->'");
            right = true;
            continue;
        }
        (right ? out.second : out.first).push_back(a);
    }
    if (!right) throw SleuthError(ErrorCode::Usage, cmd.verb + " needs '->'");
    return out;
}

std::string single(const std::vector<std::string>& side, const ScriptCommand& cmd) {
    if (side.size() != 1) throw SleuthError(ErrorCode::Usage, cmd.verb + ": expected one location on each side of '->'");
    return side.front();
}

void require_sheet(const WorkbookSet& set, const std::string& wb, const std::string& sheet) {
    const Workbook* w = set.find(wb);
    if (!w) throw SleuthError(ErrorCode::UnknownSheet, "no workbook '" + wb + "'");
    if (!w->has_sheet(sheet)) throw SleuthError(ErrorCode::UnknownSheet, "no sheet '" + sheet + "' in " + wb);
}

AreaExtent extent_arg(const WorkbookSet& set, const std::string& text) {
    AreaExtent e = parse_extent(text, set.default_id());
    require_sheet(set, e.workbook, e.sheet);
    return e;
}

CellAddr cell_arg(const WorkbookSet& set, const std::string& text) {
    CellAddr a = parse_cell(text, set.default_id());
    require_sheet(set, a.workbook, a.sheet);
    return a;
}

// sheet= names the sheet of raw line edits, optionally `[wb]Sheet`.
std::pair<std::string, std::string> sheet_option(const WorkbookSet& set, const ScriptCommand& cmd) {
    AreaExtent e = parse_extent(option(cmd, "sheet") + "!A1", set.default_id());
    require_sheet(set, e.workbook, e.sheet);
    return {e.workbook, e.sheet};
}

EditResult one_entry(std::string id, std::string summary) {
    EditResult r;
    r.touched.push_back(std::move(id));
    r.summary = std::move(summary);
    return r;
}

EditResult run_insert(WorkbookSet& set, Registry& reg, const ScriptCommand& cmd) {
    const std::string& v = cmd.verb;
    Axis axis = (v == "INSERT-BELOW" || v == "INSERT-ABOVE") ? Axis::Row : Axis::Column;
    InsertSide side = (v == "INSERT-BELOW" || v == "INSERT-RIGHT") ? InsertSide::After : InsertSide::Before;
    int anchor = parse_line(option(cmd, axis == Axis::Row ? "row" : "col"), axis);
    int count = parse_int(option_or(cmd, "count", "1"), "count");
    if (cmd.options.count("entry"))
        return insert_in_area(set, reg, option(cmd, "entry"), axis, anchor, count, side);
    const GroupDef& g = reg.group(option(cmd, "group"));
    if (g.axis != axis)
        throw SleuthError(ErrorCode::Usage, v + " does not match the axis of group " + option(cmd, "group"));
    return insert_in_group(set, reg, option(cmd, "group"), anchor, count, side);
}

EditResult run_watch(WorkbookSet& set, Registry& reg, const ScriptCommand& cmd) {
    if (cmd.args.size() != 1) throw SleuthError(ErrorCode::Usage, "WATCH takes one extent");
    WatchOptions o;
    if (auto k = cmd.options.find("kind"); k != cmd.options.end()) {
        if (k->second == "formula") o.kind_hint = AreaKind::FormulaArea;
        else if (k->second == "data") o.kind_hint = AreaKind::DataArea;
        else if (k->second == "guard") o.kind_hint = AreaKind::GuardArea;
        else throw SleuthError(ErrorCode::Usage, "kind must be formula, data or guard");
    }
    o.final_result = option_or(cmd, "final", "no") == "yes";
    o.accept_blank_as_zero = option_or(cmd, "blank-as-zero", "no") == "yes";
    if (auto b = cmd.options.find("bounds"); b != cmd.options.end()) {
        auto parts = split_list(b->second);
        if (parts.size() != 2) throw SleuthError(ErrorCode::Usage, "bounds=LOWER,UPPER");
        o.bounds = Bounds{std::stod(parts[0]), std::stod(parts[1])};
    }
    const WatchEntry& e = watch_area(reg, set, extent_arg(set, cmd.args.front()), o);
    return one_entry(e.id, "watched " + format_location(e.extent) + " as " + e.id);
}

EditResult run_raw(WorkbookSet& set, Registry& reg, const ScriptCommand& cmd) {
    const std::string& v = cmd.verb;
    EditResult r;
    r.summary = cmd.text;
    if (v == "RAW-CUT") {
        auto [lhs, rhs] = arrow_sides(cmd);
        raw_cut_paste(set, &reg, extent_arg(set, single(lhs, cmd)), cell_arg(set, single(rhs, cmd)));
        return r;
    }
    if (v == "RAW-FILL") {
        auto [lhs, rhs] = arrow_sides(cmd);
        raw_fill(set, cell_arg(set, single(lhs, cmd)), extent_arg(set, single(rhs, cmd)));
        return r;
    }
    auto [wb, sheet] = sheet_option(set, cmd);
    Axis axis = (v.ends_with("ROWS") || v.ends_with("ROW")) ? Axis::Row : Axis::Column;
    if (v == "RAW-MOVE-ROW" || v == "RAW-MOVE-COLUMN") {
        int from = parse_line(option(cmd, "from"), axis);
        int to = parse_line(option(cmd, "to"), axis);
        // `to` is where the line ends up; the host inserts before `before`.
        int before = to > from ? to + 1 : to;
        raw_move_lines(set, &reg, wb, sheet, axis, from, from, before);
        return r;
    }
    int at = parse_line(option(cmd, "at"), axis);
    int count = parse_int(option_or(cmd, "count", "1"), "count");
    if (v.starts_with("RAW-INSERT")) raw_insert_lines(set, &reg, wb, sheet, axis, at, count);
    else raw_delete_lines(set, &reg, wb, sheet, axis, at, count);
    return r;
}

}  // namespace

EditScript parse_edit_script(std::string_view text) {
    EditScript script;
    int lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view raw = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++lineno;
        std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        try {
            ScriptCommand cmd;
            cmd.line = lineno;
            cmd.text = std::string(line);
            auto sp = line.find_first_of(" \t");
            cmd.verb = to_upper(line.substr(0, sp));
            std::string_view rest = sp == std::string_view::npos ? std::string_view{} : trim(line.substr(sp));
            if (std::find(kVerbs.begin(), kVerbs.end(), cmd.verb) == kVerbs.end())
                throw SleuthError(ErrorCode::Parse, "unknown command '" + cmd.verb + "'");
            if (cmd.verb == "SET") {
                auto assign = rest.find(":=");
                if (assign == std::string_view::npos) throw SleuthError(ErrorCode::Parse, "SET needs ':='");
                cmd.args.emplace_back(trim(rest.substr(0, assign)));
                cmd.payload = std::string(trim(rest.substr(assign + 2)));
            } else {
                for (auto& w : words(rest)) {
                    auto eq = w.find('=');
                    if (eq != std::string::npos && eq > 0 && w.front() != '\'')
                        cmd.options[to_lower(w.substr(0, eq))] = w.substr(eq + 1);
                    else
                        cmd.args.push_back(std::move(w));
                }
            }
            script.commands.push_back(std::move(cmd));
        } catch (const SleuthError& e) {
            throw SleuthError(ErrorCode::Parse, "script line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return script;
}

EditResult apply_command(WorkbookSet& set, Registry& reg, const ScriptCommand& cmd) {
    const std::string& v = cmd.verb;
    if (v == "SET") {
        CellAddr a = cell_arg(set, cmd.args.at(0));
        set.set_cell(a, cmd.payload.empty() ? CellContent::blank() : parse_payload(cmd.payload));
        EditResult r;
        r.summary = "set " + format_location(a);
        return r;
    }
    if (v == "MOVE") {
        auto [lhs, rhs] = arrow_sides(cmd);
        return move_area(set, reg, extent_arg(set, single(lhs, cmd)), cell_arg(set, single(rhs, cmd)));
    }
    if (v.starts_with("INSERT-")) return run_insert(set, reg, cmd);
    if (v == "DELETE-ROWS" || v == "DELETE-COLS") {
        Axis axis = v == "DELETE-ROWS" ? Axis::Row : Axis::Column;
        const std::string& group = option(cmd, "group");
        if (reg.group(group).axis != axis)
            throw SleuthError(ErrorCode::Usage, v + " does not match the axis of group " + group);
        int anchor = parse_line(option(cmd, axis == Axis::Row ? "row" : "col"), axis);
        return delete_in_group(set, reg, group, anchor, parse_int(option_or(cmd, "count", "1"), "count"));
    }
    if (v == "REPLICATE") {
        auto [lhs, rhs] = arrow_sides(cmd);
        if (!lhs.empty()) throw SleuthError(ErrorCode::Usage, "REPLICATE takes entries=ID,... -> DEST");
        auto ids = split_list(option(cmd, "entries"));
        std::vector<CellAddr> dests;
        for (const auto& r : rhs)
            for (const auto& d : split_list(r)) dests.push_back(cell_arg(set, d));
        if (dests.size() == 1 && ids.size() > 1) {
            // One destination places the whole selection, keeping relative layout.
            int top = kMaxRows, left = kMaxCols;
            for (const auto& id : ids) {
                const AreaExtent& x = reg.entry(id).extent;
                top = std::min(top, x.top);
                left = std::min(left, x.left);
            }
            CellAddr base = dests.front();
            dests.clear();
            for (const auto& id : ids) {
                const AreaExtent& x = reg.entry(id).extent;
                dests.push_back({base.workbook, base.sheet, base.row + x.top - top, base.col + x.left - left});
            }
        }
        if (dests.size() != ids.size())
            throw SleuthError(ErrorCode::Usage, "REPLICATE needs one destination, or one per entry");
        return replicate(set, reg, ids, dests);
    }
    if (v == "FIX") {
        if (cmd.args.size() != 2 || (cmd.args[1] != "accept" && cmd.args[1] != "reject"))
            throw SleuthError(ErrorCode::Usage, "FIX ID accept|reject");
        return fix_area(set, reg, cmd.args[0], cmd.args[1] == "accept");
    }
    if (v == "WATCH") {
        require_development(reg, "watch");
        return run_watch(set, reg, cmd);
    }
    if (v == "UNWATCH") {
        require_development(reg, "unwatch");
        if (cmd.args.size() != 1) throw SleuthError(ErrorCode::Usage, "UNWATCH takes one id");
        unwatch(reg, cmd.args.front());
        EditResult r;
        r.removed.push_back(cmd.args.front());
        r.summary = "unwatched " + cmd.args.front();
        return r;
    }
    if (v == "GROUP") {
        require_development(reg, "group");
        if (cmd.args.size() != 1) throw SleuthError(ErrorCode::Usage, "GROUP NAME ids=ID,... [axis=row|col]");
        std::string axis = option_or(cmd, "axis", "row");
        if (axis != "row" && axis != "col") throw SleuthError(ErrorCode::Usage, "axis must be row or col");
        auto ids = split_list(option(cmd, "ids"));
        assign_group(reg, ids, cmd.args.front(), axis == "row" ? Axis::Row : Axis::Column);
        EditResult r;
        r.touched = ids;
        r.summary = "grouped " + std::to_string(ids.size()) + " areas as " + cmd.args.front();
        return r;
    }
    return run_raw(set, reg, cmd);
}

ScriptOutcome apply_edit_script(WorkbookSet& set, Registry& reg, const EditScript& script) {
    WorkbookSet set_copy = set;
    Registry reg_copy = reg;
    std::size_t before = reg_copy.audit_log().size();
    ScriptOutcome out;
    for (const auto& cmd : script.commands) {
        try {
            out.results.push_back(apply_command(set_copy, reg_copy, cmd));
        } catch (const SleuthError& e) {
            throw SleuthError(e.code(), "script line " + std::to_string(cmd.line) + " (" + cmd.text + "): " + e.what());
        }
    }
    out.events = reg_copy.audit_log().size() - before;
    set = std::move(set_copy);
    reg = std::move(reg_copy);
    return out;
}

}  // namespace sleuth
