#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "sleuth/area.hpp"

namespace sleuth {

inline constexpr std::size_t kDefaultCapacity = 10'000;
inline constexpr std::size_t kMaxReferences = 60;

enum class Mode { Development, Operational };
enum class EntryStatus { Normal, FinalResult, Guard };

const char* to_string(Mode m);
const char* to_string(EntryStatus s);
Mode parse_mode(std::string_view text);

struct Bounds {
    double lower = 0.0;
    double upper = 0.0;

    friend bool operator==(const Bounds&, const Bounds&) = default;
};

struct DataDescriptor {
    DataKind data_kind = DataKind::Numeric;
    std::optional<Bounds> bounds;
    bool accept_blank_as_zero = false;

    friend bool operator==(const DataDescriptor&, const DataDescriptor&) = default;
};

// Area Elements 1a/1b: a generic formula for formula areas, a descriptor otherwise.
using AreaState = std::variant<GenericFormula, DataDescriptor>;

struct WatchEntry {
    std::string id;
    AreaExtent extent;
    AreaKind kind = AreaKind::FormulaArea;
    AreaState current;
    AreaState last_watched;
    std::vector<Reference> references;
    std::vector<Reference> link_sources;
    std::vector<NameDef> names;
    std::optional<std::string> group;
    EntryStatus status = EntryStatus::Normal;
    bool change_flag = false;
    bool error_flag = false;
    // Set when a host edit deleted every cell of the extent.
    bool extent_lost = false;
    // Guard entries: id of the area the guard protects.
    std::string guard_of;
    std::int64_t modified_at = 0;

    const std::string& sheet() const { return extent.sheet; }
    bool is_formula() const { return kind == AreaKind::FormulaArea; }
    const GenericFormula* current_generic() const { return std::get_if<GenericFormula>(&current); }
    const GenericFormula* master_generic() const { return std::get_if<GenericFormula>(&last_watched); }
    const DataDescriptor* data() const { return std::get_if<DataDescriptor>(&current); }

    friend bool operator==(const WatchEntry& a, const WatchEntry& b);
};

enum class AuditVerb { Watch, Unwatch, Check, Fix, Insert, Delete, Move, Replicate, Group, Change, Edit };

const char* to_string(AuditVerb v);

struct AuditEvent {
    std::int64_t timestamp = 0;
    std::string actor;
    AuditVerb verb = AuditVerb::Watch;
    std::string summary;
    // Post-state of every entry and group the event touched, plus removals;
    // replaying these payloads in order rebuilds the registry.
    nlohmann::json detail;
};

struct GroupDef {
    Axis axis = Axis::Row;
    std::vector<std::string> ids;

    friend bool operator==(const GroupDef&, const GroupDef&) = default;
};

// Orders ids such as e2 < e10.
struct IdLess {
    bool operator()(const std::string& a, const std::string& b) const {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
    }
};

class Registry {
public:
    using Clock = std::function<std::int64_t()>;

    explicit Registry(std::size_t capacity = kDefaultCapacity);

    std::size_t capacity() const { return capacity_; }
    Mode mode() const { return mode_; }
    void set_mode(Mode m) { mode_ = m; }
    void set_clock(Clock c) { clock_ = std::move(c); }
    std::int64_t now() const;
    std::string actor() const { return actor_; }
    void set_actor(std::string a) { actor_ = std::move(a); }

    const std::map<std::string, WatchEntry, IdLess>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool has(const std::string& id) const { return entries_.count(id) > 0; }
    const WatchEntry& entry(const std::string& id) const;
    WatchEntry& mutable_entry(const std::string& id);
    const WatchEntry* find_containing(const CellAddr& a) const;
    const WatchEntry* find_exact(const AreaExtent& e) const;
    std::vector<const WatchEntry*> overlapping(const AreaExtent& e) const;

    const std::map<std::string, GroupDef>& groups() const { return groups_; }
    const GroupDef& group(const std::string& name) const;

    const std::vector<AuditEvent>& audit_log() const { return audit_; }
    std::uint64_t next_id() const { return next_id_; }
    // Loader hook: id counter and audit trail read back from a watchfile.
    void restore(std::uint64_t next_id, std::vector<AuditEvent> audit);

    // Low-level mutations; the operations below use these and then log().
    std::string allocate_id();
    void upsert(WatchEntry e);
    void remove(const std::string& id);
    void set_group(const std::string& name, std::optional<GroupDef> def);
    const AuditEvent& log(AuditVerb verb, std::string summary, const std::vector<std::string>& touched,
                          const std::vector<std::string>& removed = {},
                          const std::vector<std::string>& touched_groups = {});

    // Throws Overlap when any two entries overlap.
    void validate() const;

    // Rebuilds a registry by applying the payload of every event in order.
    static Registry replay(const std::vector<AuditEvent>& log, std::size_t capacity, Mode mode);

    // Registry state equality; the audit log and clock are not compared.
    friend bool operator==(const Registry& a, const Registry& b);

private:
    void apply_detail(const nlohmann::json& detail);

    std::size_t capacity_;
    Mode mode_ = Mode::Development;
    std::map<std::string, WatchEntry, IdLess> entries_;
    std::map<std::string, GroupDef> groups_;
    std::vector<AuditEvent> audit_;
    std::uint64_t next_id_ = 1;
    Clock clock_;
    std::string actor_ = "sleuth";
    std::int64_t last_timestamp_ = 0;
};

struct WatchOptions {
    std::optional<AreaKind> kind_hint;
    bool final_result = false;
    bool accept_blank_as_zero = false;
    std::optional<Bounds> bounds;  // user-set bounds override the automatic ones
};

const WatchEntry& watch_area(Registry& reg, const WorkbookSet& set, const AreaExtent& extent,
                             const WatchOptions& options = {});
void unwatch(Registry& reg, const std::string& id);
void assign_group(Registry& reg, const std::vector<std::string>& ids, const std::string& group_name,
                  Axis axis = Axis::Row);
void set_status(Registry& reg, const std::string& id, EntryStatus status);
// Returns true when the current state changed.
bool record_change(Registry& reg, const std::string& id, const AreaState& new_state);

// Builds the entry fields derived from its state (references, link sources).
void refresh_derived(WatchEntry& e);
// Names whose target lies inside the extent.
std::vector<NameDef> names_covering(const WorkbookSet& set, const AreaExtent& extent);

nlohmann::json entry_to_json(const WatchEntry& e);
WatchEntry entry_from_json(const nlohmann::json& j);

std::string to_watchfile(const Registry& reg);
Registry parse_watchfile(std::string_view text);
void save_registry(const Registry& reg, const std::filesystem::path& path);
Registry load_registry(const std::filesystem::path& path);

}  // namespace sleuth
