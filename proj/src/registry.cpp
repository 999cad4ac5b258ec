#include "sleuth/registry.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "sleuth/checker.hpp"
#include "sleuth/error.hpp"

namespace sleuth {

using nlohmann::json;

const char* to_string(Mode m) { return m == Mode::Development ? "Development" : "Operational"; }

Mode parse_mode(std::string_view text) {
    if (iequals(text, "development") || iequals(text, "dev")) return Mode::Development;
    if (iequals(text, "operational") || iequals(text, "op")) return Mode::Operational;
    throw SleuthError(ErrorCode::Usage, "unknown mode '" + std::string(text) + "'");
}

const char* to_string(EntryStatus s) {
    switch (s) {
        case EntryStatus::Normal: return "normal";
        case EntryStatus::FinalResult: return "final";
        case EntryStatus::Guard: return "guard";
    }
    return "?";
}

const char* to_string(AuditVerb v) {
    switch (v) {
        case AuditVerb::Watch: return "Watch";
        case AuditVerb::Unwatch: return "Unwatch";
        case AuditVerb::Check: return "Check";
        case AuditVerb::Fix: return "Fix";
        case AuditVerb::Insert: return "Insert";
        case AuditVerb::Delete: return "Delete";
        case AuditVerb::Move: return "Move";
        case AuditVerb::Replicate: return "Replicate";
        case AuditVerb::Group: return "Group";
        case AuditVerb::Change: return "Change";
        case AuditVerb::Edit: return "Edit";
    }
    return "?";
}

namespace {

AuditVerb parse_verb(const std::string& s) {
    for (auto v : {AuditVerb::Watch, AuditVerb::Unwatch, AuditVerb::Check, AuditVerb::Fix, AuditVerb::Insert,
                   AuditVerb::Delete, AuditVerb::Move, AuditVerb::Replicate, AuditVerb::Group, AuditVerb::Change,
                   AuditVerb::Edit})
        if (s == to_string(v)) return v;
    throw SleuthError(ErrorCode::Corrupt, "unknown audit verb '" + s + "'");
}

AreaKind parse_area_kind(const std::string& s) {
    if (s == "formula") return AreaKind::FormulaArea;
    if (s == "data") return AreaKind::DataArea;
    if (s == "guard") return AreaKind::GuardArea;
    throw SleuthError(ErrorCode::Corrupt, "unknown area kind '" + s + "'");
}

EntryStatus parse_status(const std::string& s) {
    if (s == "normal") return EntryStatus::Normal;
    if (s == "final") return EntryStatus::FinalResult;
    if (s == "guard") return EntryStatus::Guard;
    throw SleuthError(ErrorCode::Corrupt, "unknown status '" + s + "'");
}

json state_to_json(const AreaState& s) {
    if (const auto* g = std::get_if<GenericFormula>(&s)) return json{{"r1c1", g->r1c1_text}};
    const auto& d = std::get<DataDescriptor>(s);
    json j{{"data_kind", to_string(d.data_kind)}, {"blank_as_zero", d.accept_blank_as_zero}};
    if (d.bounds) j["bounds"] = json::array({d.bounds->lower, d.bounds->upper});
    else j["bounds"] = nullptr;
    return j;
}

AreaState state_from_json(const json& j) {
    if (j.contains("r1c1")) return GenericFormula::from_r1c1_text(j.at("r1c1").get<std::string>());
    DataDescriptor d;
    d.data_kind = j.at("data_kind").get<std::string>() == "textual" ? DataKind::Textual : DataKind::Numeric;
    d.accept_blank_as_zero = j.at("blank_as_zero").get<bool>();
    if (!j.at("bounds").is_null()) d.bounds = Bounds{j.at("bounds")[0].get<double>(), j.at("bounds")[1].get<double>()};
    return d;
}

json extent_to_json(const AreaExtent& e) {
    return json{{"wb", e.workbook}, {"sheet", e.sheet}, {"top", e.top}, {"left", e.left},
                {"bottom", e.bottom}, {"right", e.right}};
}

AreaExtent extent_from_json(const json& j) {
    return {j.at("wb").get<std::string>(), j.at("sheet").get<std::string>(), j.at("top").get<int>(),
            j.at("left").get<int>(), j.at("bottom").get<int>(), j.at("right").get<int>()};
}

json group_to_json(const GroupDef& g) {
    return json{{"axis", g.axis == Axis::Row ? "row" : "column"}, {"ids", g.ids}};
}

GroupDef group_from_json(const json& j) {
    GroupDef g;
    g.axis = j.at("axis").get<std::string>() == "row" ? Axis::Row : Axis::Column;
    g.ids = j.at("ids").get<std::vector<std::string>>();
    return g;
}

std::int64_t system_seconds() {
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

}  // namespace

bool operator==(const WatchEntry& a, const WatchEntry& b) {
    // modified_at is audit metadata and deliberately not part of state equality.
    return a.id == b.id && a.extent == b.extent && a.kind == b.kind && a.current == b.current &&
           a.last_watched == b.last_watched && a.names == b.names && a.group == b.group &&
           a.status == b.status && a.change_flag == b.change_flag && a.error_flag == b.error_flag &&
           a.extent_lost == b.extent_lost && a.guard_of == b.guard_of;
}

json entry_to_json(const WatchEntry& e) {
    json names = json::array();
    for (const auto& n : e.names) names.push_back(json::array({n.name, extent_to_json(n.target)}));
    return json{{"id", e.id},
                {"extent", extent_to_json(e.extent)},
                {"kind", to_string(e.kind)},
                {"current", state_to_json(e.current)},
                {"last_watched", state_to_json(e.last_watched)},
                {"names", names},
                {"group", e.group ? json(*e.group) : json(nullptr)},
                {"status", to_string(e.status)},
                {"change", e.change_flag},
                {"error", e.error_flag},
                {"lost", e.extent_lost},
                {"guard_of", e.guard_of},
                {"modified", e.modified_at}};
}

WatchEntry entry_from_json(const json& j) {
    WatchEntry e;
    e.id = j.at("id").get<std::string>();
    e.extent = extent_from_json(j.at("extent"));
    e.kind = parse_area_kind(j.at("kind").get<std::string>());
    e.current = state_from_json(j.at("current"));
    e.last_watched = state_from_json(j.at("last_watched"));
    for (const auto& n : j.at("names")) e.names.push_back({n[0].get<std::string>(), extent_from_json(n[1])});
    if (!j.at("group").is_null()) e.group = j.at("group").get<std::string>();
    e.status = parse_status(j.at("status").get<std::string>());
    e.change_flag = j.at("change").get<bool>();
    e.error_flag = j.at("error").get<bool>();
    e.extent_lost = j.at("lost").get<bool>();
    e.guard_of = j.at("guard_of").get<std::string>();
    e.modified_at = j.at("modified").get<std::int64_t>();
    refresh_derived(e);
    return e;
}

void refresh_derived(WatchEntry& e) {
    e.references.clear();
    e.link_sources.clear();
    if (const auto* g = e.current_generic()) {
        e.references = extract_references(g->ast);
        for (const auto& r : e.references)
            if (r.workbook) e.link_sources.push_back(r);
    }
}

std::vector<NameDef> names_covering(const WorkbookSet& set, const AreaExtent& extent) {
    std::vector<NameDef> out;
    if (const Workbook* wb = set.find(extent.workbook))
        for (const auto& n : wb->names())
            if (extent.contains(n.target)) out.push_back(n);
    return out;
}

Registry::Registry(std::size_t capacity) : capacity_(capacity), clock_(system_seconds) {}

std::int64_t Registry::now() const { return clock_ ? clock_() : system_seconds(); }

const WatchEntry& Registry::entry(const std::string& id) const {
    auto it = entries_.find(id);
    if (it == entries_.end()) throw SleuthError(ErrorCode::UnknownId, "unknown watch entry '" + id + "'");
    return it->second;
}

WatchEntry& Registry::mutable_entry(const std::string& id) {
    auto it = entries_.find(id);
    if (it == entries_.end()) throw SleuthError(ErrorCode::UnknownId, "unknown watch entry '" + id + "'");
    return it->second;
}

const WatchEntry* Registry::find_containing(const CellAddr& a) const {
    for (const auto& [id, e] : entries_)
        if (!e.extent_lost && e.extent.contains(a)) return &e;
    return nullptr;
}

const WatchEntry* Registry::find_exact(const AreaExtent& x) const {
    for (const auto& [id, e] : entries_)
        if (!e.extent_lost && e.extent == x) return &e;
    return nullptr;
}

std::vector<const WatchEntry*> Registry::overlapping(const AreaExtent& x) const {
    std::vector<const WatchEntry*> out;
    for (const auto& [id, e] : entries_)
        if (!e.extent_lost && e.extent.intersects(x)) out.push_back(&e);
    return out;
}

const GroupDef& Registry::group(const std::string& name) const {
    auto it = groups_.find(name);
    if (it == groups_.end()) throw SleuthError(ErrorCode::UnknownGroup, "unknown group '" + name + "'");
    return it->second;
}

std::string Registry::allocate_id() { return "e" + std::to_string(next_id_++); }

void Registry::upsert(WatchEntry e) {
    refresh_derived(e);
    std::string id = e.id;
    entries_[id] = std::move(e);
}

void Registry::remove(const std::string& id) {
    if (!entries_.erase(id)) throw SleuthError(ErrorCode::UnknownId, "unknown watch entry '" + id + "'");
}

void Registry::set_group(const std::string& name, std::optional<GroupDef> def) {
    if (def) groups_[name] = std::move(*def);
    else groups_.erase(name);
}

const AuditEvent& Registry::log(AuditVerb verb, std::string summary, const std::vector<std::string>& touched,
                                const std::vector<std::string>& removed,
                                const std::vector<std::string>& touched_groups) {
    AuditEvent ev;
    ev.timestamp = std::max(now(), last_timestamp_);
    last_timestamp_ = ev.timestamp;
    ev.actor = actor_;
    ev.verb = verb;
    ev.summary = std::move(summary);
    json upserts = json::array();
    for (const auto& id : touched)
        if (auto it = entries_.find(id); it != entries_.end()) upserts.push_back(entry_to_json(it->second));
    json groups = json::object();
    for (const auto& g : touched_groups) {
        auto it = groups_.find(g);
        groups[g] = it == groups_.end() ? json(nullptr) : group_to_json(it->second);
    }
    ev.detail = json{{"upsert", upserts}, {"remove", removed}, {"groups", groups}, {"next_id", next_id_}};
    audit_.push_back(std::move(ev));
    return audit_.back();
}

void Registry::apply_detail(const json& d) {
    for (const auto& id : d.at("remove")) entries_.erase(id.get<std::string>());
    for (const auto& ej : d.at("upsert")) upsert(entry_from_json(ej));
    for (const auto& [name, g] : d.at("groups").items()) set_group(name, g.is_null() ? std::nullopt : std::optional(group_from_json(g)));
    next_id_ = d.at("next_id").get<std::uint64_t>();
}

void Registry::validate() const {
    std::vector<const WatchEntry*> live;
    for (const auto& [id, e] : entries_)
        if (!e.extent_lost) live.push_back(&e);
    std::sort(live.begin(), live.end(), [](const WatchEntry* a, const WatchEntry* b) { return extent_less(a->extent, b->extent); });
    for (std::size_t i = 0; i < live.size(); ++i)
        for (std::size_t j = i + 1; j < live.size(); ++j)
            if (live[i]->extent.intersects(live[j]->extent))
                throw SleuthError(ErrorCode::Overlap, "entries " + live[i]->id + " and " + live[j]->id + " overlap");
}

void Registry::restore(std::uint64_t next_id, std::vector<AuditEvent> audit) {
    next_id_ = next_id;
    audit_ = std::move(audit);
    last_timestamp_ = audit_.empty() ? 0 : audit_.back().timestamp;
}

Registry Registry::replay(const std::vector<AuditEvent>& log, std::size_t capacity, Mode mode) {
    Registry reg(capacity);
    reg.mode_ = mode;
    for (const auto& ev : log) reg.apply_detail(ev.detail);
    reg.audit_ = log;
    if (!log.empty()) reg.last_timestamp_ = log.back().timestamp;
    return reg;
}

bool operator==(const Registry& a, const Registry& b) {
    return a.capacity_ == b.capacity_ && a.mode_ == b.mode_ && a.entries_ == b.entries_ &&
           a.groups_ == b.groups_ && a.next_id_ == b.next_id_;
}

const WatchEntry& watch_area(Registry& reg, const WorkbookSet& set, const AreaExtent& extent,
                             const WatchOptions& options) {
    if (!extent.valid()) throw SleuthError(ErrorCode::OutOfGrid, "extent " + format_location(extent) + " is invalid");
    const Workbook& wb = set.get(extent.workbook);
    const Sheet& sheet = wb.sheet(extent.sheet);
    if (reg.size() >= reg.capacity())
        throw SleuthError(ErrorCode::Capacity,
                          "registry is full: at most " + std::to_string(reg.capacity()) + " watched areas");
    if (auto hits = reg.overlapping(extent); !hits.empty())
        throw SleuthError(ErrorCode::Overlap,
                          format_location(extent) + " overlaps watched entry " + hits.front()->id);

    std::size_t formulas = 0, data = 0;
    std::vector<double> numbers;
    for (int r = extent.top; r <= extent.bottom; ++r)
        for (int c = extent.left; c <= extent.right; ++c) {
            const CellContent& cell = sheet.get(r, c);
            if (cell.is_formula()) ++formulas;
            else if (cell.is_data()) ++data;
            if (cell.kind == CellKind::Number) numbers.push_back(cell.number);
        }

    AreaKind kind;
    if (options.kind_hint) kind = *options.kind_hint;
    else if (formulas == 0 && data == 0) kind = AreaKind::GuardArea;
    else if (formulas > 0 && data > 0)
        throw SleuthError(ErrorCode::MixedContent,
                          format_location(extent) + " mixes formulas and data; give a kind hint");
    else kind = formulas > 0 ? AreaKind::FormulaArea : AreaKind::DataArea;

    WatchEntry e;
    e.extent = extent;
    e.extent.workbook = wb.id();
    e.extent.sheet = sheet.name();
    e.kind = kind;
    e.modified_at = reg.now();
    e.names = names_covering(set, e.extent);
    switch (kind) {
        case AreaKind::FormulaArea: {
            GenericFormula g;
            if (options.kind_hint) {
                const CellContent& tl = sheet.get(extent.top, extent.left);
                if (!tl.is_formula())
                    throw SleuthError(ErrorCode::NonFormulaCell,
                                      "top-left cell of " + format_location(extent) + " does not hold a formula");
                g = GenericFormula::from_a1_at(tl.formula, extent.top, extent.left);
            } else {
                g = generic_formula(wb, extent);
            }
            auto refs = extract_references(g.ast);
            if (refs.size() > kMaxReferences)
                throw SleuthError(ErrorCode::ReferenceLimit, "formula area " + format_location(extent) + " carries " +
                                                                 std::to_string(refs.size()) + " references; at most " +
                                                                 std::to_string(kMaxReferences) + " are supported");
            e.current = g;
            e.last_watched = g;
            e.status = options.final_result ? EntryStatus::FinalResult : EntryStatus::Normal;
            break;
        }
        case AreaKind::DataArea: {
            DataDescriptor d;
            d.data_kind = data > 0 ? classify_data_area(wb, extent) : DataKind::Numeric;
            d.accept_blank_as_zero = options.accept_blank_as_zero;
            if (options.bounds) d.bounds = options.bounds;
            else if (d.data_kind == DataKind::Numeric && !numbers.empty()) d.bounds = compute_bounds(numbers);
            e.current = d;
            e.last_watched = d;
            break;
        }
        case AreaKind::GuardArea:
            if (formulas > 0 || data > 0)
                throw SleuthError(ErrorCode::MixedContent, "guard area " + format_location(extent) + " must be blank");
            e.current = DataDescriptor{};
            e.last_watched = DataDescriptor{};
            e.status = EntryStatus::Guard;
            break;
    }
    e.id = reg.allocate_id();
    std::string id = e.id;
    reg.upsert(std::move(e));
    reg.log(AuditVerb::Watch, "watch " + format_location(extent) + " as " + to_string(kind), {id});
    return reg.entry(id);
}

void unwatch(Registry& reg, const std::string& id) {
    const WatchEntry& e = reg.entry(id);
    std::vector<std::string> touched_groups;
    std::vector<std::string> touched;
    if (e.group) {
        GroupDef g = reg.group(*e.group);
        std::erase(g.ids, id);
        touched_groups.push_back(*e.group);
        reg.set_group(*e.group, g.ids.empty() ? std::nullopt : std::optional(g));
    }
    std::string location = format_location(e.extent);
    reg.remove(id);
    // Guards die with the area they protect.
    std::vector<std::string> removed{id};
    for (const auto& [gid, ge] : std::map(reg.entries()))
        if (ge.guard_of == id) {
            reg.remove(gid);
            removed.push_back(gid);
        }
    reg.log(AuditVerb::Unwatch, "unwatch " + id + " at " + location, touched, removed, touched_groups);
}

void assign_group(Registry& reg, const std::vector<std::string>& ids, const std::string& group_name, Axis axis) {
    if (ids.empty()) throw SleuthError(ErrorCode::Usage, "a group needs at least one entry");
    std::vector<const WatchEntry*> members;
    for (const auto& id : ids) members.push_back(&reg.entry(id));
    for (const auto* m : members) {
        if (m->kind == AreaKind::GuardArea)
            throw SleuthError(ErrorCode::ShapeMismatch, "guard " + m->id + " cannot join a group");
        if (m->extent.extent_along(axis) != members.front()->extent.extent_along(axis))
            throw SleuthError(ErrorCode::ShapeMismatch,
                              std::string("entries ") + members.front()->id + " and " + m->id + " differ in " +
                                  (axis == Axis::Row ? "height" : "width") + "; a " +
                                  (axis == Axis::Row ? "row" : "column") + " group needs equal extents along its axis");
    }
    std::vector<std::string> touched_groups{group_name};
    for (const auto* m : members)
        if (m->group && *m->group != group_name) touched_groups.push_back(*m->group);
    // An entry belongs to one group at a time.
    for (const auto& id : ids) {
        WatchEntry& m = reg.mutable_entry(id);
        if (m.group && *m.group != group_name) {
            GroupDef old = reg.group(*m.group);
            std::erase(old.ids, id);
            reg.set_group(*m.group, old.ids.empty() ? std::nullopt : std::optional(old));
        }
        m.group = group_name;
    }
    GroupDef def;
    def.axis = axis;
    if (reg.groups().count(group_name)) def.ids = reg.group(group_name).ids;
    for (const auto& id : ids)
        if (std::find(def.ids.begin(), def.ids.end(), id) == def.ids.end()) def.ids.push_back(id);
    reg.set_group(group_name, def);
    reg.log(AuditVerb::Group, "group " + group_name, ids, {}, touched_groups);
}

void set_status(Registry& reg, const std::string& id, EntryStatus status) {
    WatchEntry& e = reg.mutable_entry(id);
    if (e.status == status) return;
    e.status = status;
    e.modified_at = reg.now();
    reg.log(AuditVerb::Change, "status of " + id + " set to " + to_string(status), {id});
}

bool record_change(Registry& reg, const std::string& id, const AreaState& new_state) {
    WatchEntry& e = reg.mutable_entry(id);
    if (e.current == new_state) return false;
    e.current = new_state;
    e.change_flag = !(e.current == e.last_watched);
    e.modified_at = reg.now();
    refresh_derived(e);
    reg.log(AuditVerb::Change, "change recorded for " + id, {id});
    return true;
}

std::string to_watchfile(const Registry& reg) {
    std::ostringstream out;
    out << "SLEUTHFILE v1\n";
    out << "mode " << to_string(reg.mode()) << "\n";
    out << "capacity " << reg.capacity() << "\n";
    out << "next_id " << reg.next_id() << "\n";
    for (const auto& [id, e] : reg.entries()) out << "entry " << entry_to_json(e).dump() << "\n";
    for (const auto& [name, g] : reg.groups()) {
        json j = group_to_json(g);
        j["name"] = name;
        out << "group " << j.dump() << "\n";
    }
    for (const auto& ev : reg.audit_log()) {
        json j{{"ts", ev.timestamp}, {"actor", ev.actor}, {"verb", to_string(ev.verb)},
               {"summary", ev.summary}, {"detail", ev.detail}};
        out << "audit " << j.dump() << "\n";
    }
    return out.str();
}

Registry parse_watchfile(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line)) throw SleuthError(ErrorCode::Corrupt, "empty watchfile");
    if (line.rfind("SLEUTHFILE ", 0) != 0) throw SleuthError(ErrorCode::Corrupt, "missing SLEUTHFILE header");
    if (line != "SLEUTHFILE v1") throw SleuthError(ErrorCode::Version, "unsupported watchfile version '" + line + "'");
    Mode mode = Mode::Development;
    std::size_t capacity = kDefaultCapacity;
    std::uint64_t next_id = 1;
    std::vector<WatchEntry> entries;
    std::vector<std::pair<std::string, GroupDef>> groups;
    std::vector<AuditEvent> audit;
    std::size_t lineno = 1;
    try {
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            auto sp = line.find(' ');
            std::string tag = line.substr(0, sp);
            std::string rest = sp == std::string::npos ? std::string() : line.substr(sp + 1);
            if (tag == "mode") mode = parse_mode(rest);
            else if (tag == "capacity") capacity = std::stoul(rest);
            else if (tag == "next_id") next_id = std::stoull(rest);
            else if (tag == "entry") entries.push_back(entry_from_json(json::parse(rest)));
            else if (tag == "group") {
                json j = json::parse(rest);
                groups.emplace_back(j.at("name").get<std::string>(), group_from_json(j));
            } else if (tag == "audit") {
                json j = json::parse(rest);
                AuditEvent ev;
                ev.timestamp = j.at("ts").get<std::int64_t>();
                ev.actor = j.at("actor").get<std::string>();
                ev.verb = parse_verb(j.at("verb").get<std::string>());
                ev.summary = j.at("summary").get<std::string>();
                ev.detail = j.at("detail");
                audit.push_back(std::move(ev));
            } else {
                throw SleuthError(ErrorCode::Corrupt, "unknown record '" + tag + "'");
            }
        }
    } catch (const SleuthError& e) {
        if (e.code() == ErrorCode::Corrupt || e.code() == ErrorCode::Version) throw;
        throw SleuthError(ErrorCode::Corrupt, "watchfile line " + std::to_string(lineno) + ": " + e.what());
    } catch (const std::exception& e) {
        throw SleuthError(ErrorCode::Corrupt, "watchfile line " + std::to_string(lineno) + ": " + e.what());
    }
    // The persisted entries are authoritative; the audit log travels alongside.
    Registry reg(capacity);
    reg.set_mode(mode);
    for (auto& e : entries) reg.upsert(std::move(e));
    for (auto& [name, g] : groups) reg.set_group(name, g);
    reg.restore(next_id, std::move(audit));
    return reg;
}

void save_registry(const Registry& reg, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw SleuthError(ErrorCode::Io, "cannot write " + path.string());
    out << to_watchfile(reg);
}

Registry load_registry(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SleuthError(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_watchfile(ss.str());
}

}  // namespace sleuth
