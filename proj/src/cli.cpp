#include "sleuth/cli.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "sleuth/edit_script.hpp"
#include "sleuth/error.hpp"
#include "sleuth/evaluator.hpp"
#include "sleuth/render.hpp"

namespace sleuth::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
    // shared
    std::string model;
    std::string watchfile;
    std::string mode;
    std::string format = "table";
    std::string actor;
    std::int64_t now = 0;

    std::vector<std::string> targets;  // extents, ids
    std::string name;
    std::string axis = "row";
    bool all = false;
    std::string kind;
    bool final_result = false;
    bool blank_as_zero = false;
    std::string bounds;
    bool annotate = false;
    int context = -1;
    bool accept = false;
    bool reject = false;
    std::string group;
    std::string entry;
    std::string below, above, right, left;
    std::string rows, cols;
    int count = 1;
    std::string source, dest;
    std::string entries, to;
    std::string script;
    std::string cell;
    int depth = 0;
    std::string formula;
};

// Exclusive `<watchfile>.lock`, removed on scope exit.
class LockFile {
public:
    explicit LockFile(fs::path path) : path_(std::move(path)) {
        int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd < 0) {
            if (errno == EEXIST)
                throw SleuthError(ErrorCode::Locked, "watchfile is locked by another writer (" + path_.string() + ")");
            throw SleuthError(ErrorCode::Io, "cannot create lock " + path_.string());
        }
        std::string pid = std::to_string(::getpid()) + "\n";
        [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
        ::close(fd);
    }
    ~LockFile() {
        std::error_code ec;
        fs::remove(path_, ec);
    }
    LockFile(const LockFile&) = delete;
    LockFile& operator=(const LockFile&) = delete;

private:
    fs::path path_;
};

fs::path default_watchfile(const fs::path& model) {
    fs::path p = model;
    if (!p.has_filename()) p = p.parent_path();  // "model/" -> "model"
    if (p.extension() == ".swt") p.replace_extension();
    return p.string() + ".sleuth";
}

const std::set<std::string> kMutating = {"watch", "unwatch", "group", "check",  "fix",
                                         "insert", "delete", "move", "replicate", "apply"};
const std::set<std::string> kOperational = {"check", "fix", "trace", "report"};

class Session {
public:
    Session(const Options& o, const std::string& verb) {
        model_ = o.model;
        watch_ = o.watchfile.empty() ? default_watchfile(model_) : fs::path(o.watchfile);
        if (kMutating.count(verb)) lock_.emplace(watch_.string() + ".lock");
        set_ = load_workbook_set(model_);
        if (fs::exists(watch_)) {
            reg_ = load_registry(watch_);
        } else if (const char* env = std::getenv("SLEUTH_MODE"); env && *env) {
            reg_.set_mode(parse_mode(env));
        }
        if (!o.mode.empty()) reg_.set_mode(parse_mode(o.mode));
        if (o.now != 0) {
            std::int64_t t = o.now;
            reg_.set_clock([t] { return t; });
        } else if (const char* env = std::getenv("SLEUTH_NOW"); env && *env) {
            std::int64_t t = std::stoll(env);
            reg_.set_clock([t] { return t; });
        }
        if (!o.actor.empty()) reg_.set_actor(o.actor);
        if (reg_.mode() == Mode::Operational && !kOperational.count(verb))
            throw SleuthError(ErrorCode::Mode, "'" + verb + "' is not available in operational mode");
    }

    WorkbookSet& set() { return set_; }
    Registry& reg() { return reg_; }

    void save_registry_only() { save_registry(reg_, watch_); }
    void save_all() {
        save_workbook_set(set_, model_);
        save_registry(reg_, watch_);
    }

private:
    fs::path model_, watch_;
    std::optional<LockFile> lock_;
    WorkbookSet set_;
    Registry reg_;
};

ReportFormat report_format(const Options& o) {
    if (o.format == "table") return ReportFormat::Table;
    if (o.format == "delimited" || o.format == "tsv") return ReportFormat::Delimited;
    throw SleuthError(ErrorCode::Usage, "--format must be table or delimited");
}

bool has_errors(const std::vector<Finding>& fs) {
    return std::any_of(fs.begin(), fs.end(), [](const Finding& f) { return f.severity == Severity::Error; });
}

int print_edit(const EditResult& r, std::ostream& out) {
    out << r.summary << "\n";
    for (const auto& id : r.touched) out << "  touched " << id << "\n";
    for (const auto& id : r.removed) out << "  removed " << id << "\n";
    Report rep;
    rep.findings = r.findings;
    out << render_findings(rep);
    return has_errors(r.findings) ? kExitFindings : kExitOk;
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

void print_dumps(const WorkbookSet& set, const Report& report, const Options& o, std::ostream& out) {
    int context = o.context >= 0 ? o.context : 1;
    for (const auto& row : report.rows) {
        if (!row.error_flag && !(o.annotate && row.change_flag)) continue;
        out << "\n" << render_grid(set, with_context(row.extent, context), o.annotate ? &report : nullptr);
    }
}

int do_check(Session& s, const Options& o, bool persist, std::ostream& out) {
    Report report = check_all(s.set(), s.reg());
    out << render_check_report(report, report_format(o));
    if (!report.findings.empty()) out << "\n" << render_findings(report);
    if (o.annotate || o.context >= 0) print_dumps(s.set(), report, o, out);
    if (persist) s.save_registry_only();
    return report.error_count() > 0 ? kExitFindings : kExitOk;
}

int do_watch(Session& s, const Options& o, std::ostream& out) {
    WatchOptions w;
    if (o.kind == "formula") w.kind_hint = AreaKind::FormulaArea;
    else if (o.kind == "data") w.kind_hint = AreaKind::DataArea;
    else if (o.kind == "guard") w.kind_hint = AreaKind::GuardArea;
    else if (!o.kind.empty()) throw SleuthError(ErrorCode::Usage, "--kind must be formula, data or guard");
    w.final_result = o.final_result;
    w.accept_blank_as_zero = o.blank_as_zero;
    if (!o.bounds.empty()) {
        auto parts = split_commas(o.bounds);
        if (parts.size() != 2) throw SleuthError(ErrorCode::Usage, "--bounds LOWER,UPPER");
        w.bounds = Bounds{std::stod(parts[0]), std::stod(parts[1])};
    }
    std::vector<AreaExtent> extents;
    for (const auto& t : o.targets) extents.push_back(parse_extent(t, s.set().default_id()));
    if (o.all) {
        for (const Workbook* wb : s.set().workbooks())
            for (const Sheet* sh : wb->sheets())
                for (const Area& a : infer_areas(*wb, sh->name()))
                    if (s.reg().overlapping(a.extent).empty()) extents.push_back(a.extent);
    }
    if (extents.empty()) throw SleuthError(ErrorCode::Usage, "watch needs extents or --all");
    Registry copy = s.reg();
    std::vector<std::string> ids;
    for (const auto& e : extents) {
        const WatchEntry& entry = watch_area(copy, s.set(), e, w);
        ids.push_back(entry.id);
    }
    s.reg() = std::move(copy);
    for (const auto& id : ids) {
        const WatchEntry& e = s.reg().entry(id);
        out << id << "\t" << to_string(e.kind) << "\t" << format_location(e.extent, s.set().workbooks().size() > 1);
        if (const GenericFormula* g = e.current_generic()) out << "\t" << g->r1c1_text;
        out << "\n";
    }
    s.save_registry_only();
    return kExitOk;
}

std::string resolve_entry_id(Session& s, const std::string& text) {
    if (s.reg().has(text)) return text;
    try {
        AreaExtent x = parse_extent(text, s.set().default_id());
        if (const WatchEntry* e = s.reg().find_exact(x)) return e->id;
    } catch (const SleuthError&) {
    }
    throw SleuthError(ErrorCode::UnknownId, "no watch entry '" + text + "'");
}

int do_insert(Session& s, const Options& o, std::ostream& out) {
    const std::pair<const char*, const std::string*> choices[] = {
        {"INSERT-BELOW", &o.below}, {"INSERT-ABOVE", &o.above}, {"INSERT-RIGHT", &o.right}, {"INSERT-LEFT", &o.left}};
    ScriptCommand cmd;
    std::string line;
    for (const auto& [verb, value] : choices) {
        if (value->empty()) continue;
        if (!cmd.verb.empty())
            throw SleuthError(ErrorCode::Usage, "insert takes one of --below/--above/--right/--left");
        cmd.verb = verb;
        line = *value;
    }
    if (cmd.verb.empty()) throw SleuthError(ErrorCode::Usage, "insert needs --below, --above, --right or --left");
    if (o.group.empty() == o.entry.empty()) throw SleuthError(ErrorCode::Usage, "insert needs --group or --entry");
    bool rows = cmd.verb == "INSERT-BELOW" || cmd.verb == "INSERT-ABOVE";
    cmd.options[rows ? "row" : "col"] = line;
    cmd.options["count"] = std::to_string(o.count);
    if (!o.group.empty()) cmd.options["group"] = o.group;
    else cmd.options["entry"] = resolve_entry_id(s, o.entry);
    cmd.text = cmd.verb;
    EditResult r = apply_command(s.set(), s.reg(), cmd);
    s.save_all();
    return print_edit(r, out);
}

int do_delete(Session& s, const Options& o, std::ostream& out) {
    if (o.rows.empty() == o.cols.empty()) throw SleuthError(ErrorCode::Usage, "delete needs --rows or --cols");
    ScriptCommand cmd;
    cmd.verb = o.rows.empty() ? "DELETE-COLS" : "DELETE-ROWS";
    cmd.options[o.rows.empty() ? "col" : "row"] = o.rows.empty() ? o.cols : o.rows;
    cmd.options["count"] = std::to_string(o.count);
    cmd.options["group"] = o.group;
    cmd.text = cmd.verb;
    EditResult r = apply_command(s.set(), s.reg(), cmd);
    s.save_all();
    return print_edit(r, out);
}

int do_find(Session& s, std::ostream& out) {
    auto areas = find_unwatched_formulas(s.set(), s.reg());
    bool multi = s.set().workbooks().size() > 1;
    for (const auto& a : areas) {
        out << format_location(a.extent, multi) << "\t";
        if (a.generic) out << a.generic->a1_at(a.extent.top, a.extent.left);
        else out << s.set().cell(a.extent.top_left()).formula;
        out << "\n";
    }
    if (areas.empty()) out << "no unwatched formula areas\n";
    return kExitOk;
}

int do_eval(Session& s, const Options& o, std::ostream& out) {
    Value v;
    if (!o.formula.empty()) {
        if (o.cell.empty()) throw SleuthError(ErrorCode::Usage, "eval --formula needs --at CELL");
        v = evaluate_formula(s.set(), o.formula, parse_cell(o.cell, s.set().default_id()));
    } else {
        if (o.cell.empty()) throw SleuthError(ErrorCode::Usage, "eval needs a cell");
        v = evaluate(s.set(), parse_cell(o.cell, s.set().default_id()));
    }
    out << to_string(v) << "\n";
    return kExitOk;
}

int dispatch(const std::string& verb, const Options& o, std::ostream& out) {
    Session s(o, verb);
    WorkbookSet& set = s.set();
    Registry& reg = s.reg();
    if (verb == "check") return do_check(s, o, true, out);
    if (verb == "report") return do_check(s, o, false, out);
    if (verb == "watch") return do_watch(s, o, out);
    if (verb == "find") return do_find(s, out);
    if (verb == "eval") return do_eval(s, o, out);
    if (verb == "trace") {
        out << render_trace(set, parse_cell(o.cell, set.default_id()), o.depth);
        return kExitOk;
    }
    if (verb == "unwatch") {
        Registry copy = reg;
        for (const auto& t : o.targets) {
            std::string id = resolve_entry_id(s, t);
            unwatch(copy, id);
            out << "unwatched " << id << "\n";
        }
        reg = std::move(copy);
        s.save_registry_only();
        return kExitOk;
    }
    if (verb == "group") {
        if (o.axis != "row" && o.axis != "col") throw SleuthError(ErrorCode::Usage, "--axis must be row or col");
        std::vector<std::string> ids;
        for (const auto& t : o.targets) ids.push_back(resolve_entry_id(s, t));
        assign_group(reg, ids, o.name, o.axis == "row" ? Axis::Row : Axis::Column);
        out << "group " << o.name << ":";
        for (const auto& id : ids) out << " " << id;
        out << "\n";
        s.save_registry_only();
        return kExitOk;
    }
    if (verb == "fix") {
        if (o.accept == o.reject) throw SleuthError(ErrorCode::Usage, "fix needs exactly one of --accept/--reject");
        EditResult r = fix_area(set, reg, resolve_entry_id(s, o.cell), o.accept);
        s.save_all();
        return print_edit(r, out);
    }
    if (verb == "insert") return do_insert(s, o, out);
    if (verb == "delete") return do_delete(s, o, out);
    if (verb == "move") {
        EditResult r = move_area(set, reg, parse_extent(o.source, set.default_id()), parse_cell(o.dest, set.default_id()));
        s.save_all();
        return print_edit(r, out);
    }
    if (verb == "replicate") {
        ScriptCommand cmd;
        cmd.verb = "REPLICATE";
        cmd.options["entries"] = o.entries;
        cmd.args = {"->", o.to};
        cmd.text = "REPLICATE";
        EditResult r = apply_command(set, reg, cmd);
        s.save_all();
        return print_edit(r, out);
    }
    if (verb == "apply") {
        std::ifstream in(o.script, std::ios::binary);
        if (!in) throw SleuthError(ErrorCode::Io, "cannot read script " + o.script);
        std::stringstream buf;
        buf << in.rdbuf();
        ScriptOutcome outcome = apply_edit_script(set, reg, parse_edit_script(buf.str()));
        int code = kExitOk;
        for (const auto& r : outcome.results)
            if (print_edit(r, out) != kExitOk) code = kExitFindings;
        out << outcome.results.size() << " command(s), " << outcome.events << " audit event(s)\n";
        s.save_all();
        return code;
    }
    throw SleuthError(ErrorCode::Usage, "unknown verb " + verb);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Watches spreadsheet workbooks for damaged formulas, invalid references and rogue data."};
    app.name("sleuth");
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--watchfile", o.watchfile, "Registry sidecar (default: <model>.sleuth)");
    app.add_option("--mode", o.mode, "development or operational; stored by verbs that write the watchfile");
    app.add_option("--format", o.format, "Report layout: table or delimited");
    app.add_option("--actor", o.actor, "Name recorded in audit events");
    app.add_option("--now", o.now, "Fixed clock in Unix seconds");

    auto model = [&](CLI::App* sub) {
        sub->add_option("model", o.model, "Workbook set directory or .swt file")->required();
    };

    CLI::App* watch = app.add_subcommand("watch", "Watch areas");
    model(watch);
    watch->add_option("extents", o.targets, "Areas such as Costs!G5:I6");
    watch->add_flag("--all", o.all, "Watch every inferred area not yet watched");
    watch->add_option("--kind", o.kind, "formula, data or guard");
    watch->add_flag("--final", o.final_result, "Mark as a final result");
    watch->add_flag("--blank-as-zero", o.blank_as_zero, "Data area accepts blanks as zero");
    watch->add_option("--bounds", o.bounds, "LOWER,UPPER for data areas");

    CLI::App* unw = app.add_subcommand("unwatch", "Stop watching entries");
    model(unw);
    unw->add_option("ids", o.targets, "Entry ids or exact extents")->required();

    CLI::App* find = app.add_subcommand("find", "List formula areas not yet watched");
    model(find);

    CLI::App* group = app.add_subcommand("group", "Group areas for multi-area insert/delete");
    model(group);
    group->add_option("name", o.name)->required();
    group->add_option("ids", o.targets, "Entry ids or exact extents")->required();
    group->add_option("--axis", o.axis, "row or col");

    for (const char* name : {"check", "report"}) {
        CLI::App* c = app.add_subcommand(name, std::string(name) == "check" ? "Check and record flags"
                                                                          : "Check without writing the watchfile");
        model(c);
        c->add_flag("--annotate", o.annotate, "Dump flagged areas with !err/~chg markers");
        c->add_option("--context", o.context, "Cells of context around dumped areas");
    }

    CLI::App* fix = app.add_subcommand("fix", "Fix or accept one entry");
    model(fix);
    fix->add_option("entry", o.cell, "Entry id or exact extent")->required();
    fix->add_flag("--accept", o.accept, "Adopt the current state");
    fix->add_flag("--reject", o.reject, "Regenerate from the master formula");

    CLI::App* ins = app.add_subcommand("insert", "Insert rows/columns in a group or area");
    model(ins);
    ins->add_option("--group", o.group);
    ins->add_option("--entry", o.entry);
    ins->add_option("--below", o.below, "Anchor row");
    ins->add_option("--above", o.above, "Anchor row");
    ins->add_option("--right", o.right, "Anchor column");
    ins->add_option("--left", o.left, "Anchor column");
    ins->add_option("--count", o.count);

    CLI::App* del = app.add_subcommand("delete", "Delete rows/columns in a group");
    model(del);
    del->add_option("--group", o.group)->required();
    del->add_option("--rows", o.rows, "First row to delete");
    del->add_option("--cols", o.cols, "First column to delete");
    del->add_option("--count", o.count);

    CLI::App* move = app.add_subcommand("move", "Move a watched area");
    model(move);
    move->add_option("source", o.source)->required();
    move->add_option("dest", o.dest, "New top-left cell")->required();

    CLI::App* rep = app.add_subcommand("replicate", "Copy watched areas and watch the copies");
    model(rep);
    rep->add_option("--entries", o.entries, "Comma-separated entry ids")->required();
    rep->add_option("--to", o.to, "One top-left cell, or one per entry")->required();

    CLI::App* apply = app.add_subcommand("apply", "Run an edit script");
    model(apply);
    apply->add_option("script", o.script)->required();

    CLI::App* trace = app.add_subcommand("trace", "Break a formula down to its references");
    model(trace);
    trace->add_option("cell", o.cell)->required();
    trace->add_option("--depth", o.depth);

    CLI::App* ev = app.add_subcommand("eval", "Evaluate a cell or formula");
    model(ev);
    ev->add_option("cell", o.cell);
    ev->add_option("--formula", o.formula);
    ev->add_option("--at", o.cell);

    std::vector<const char*> argv{"sleuth"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitFailure;
    }
    std::string verb = app.get_subcommands().front()->get_name();
    try {
        return dispatch(verb, o, out);
    } catch (const SleuthError& e) {
        err << "sleuth: " << to_string(e.code()) << ": " << e.what() << "\n";
    } catch (const std::exception& e) {
        err << "sleuth: " << e.what() << "\n";
    }
    return kExitFailure;
}

}  // namespace sleuth::cli
