#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sleuth/registry.hpp"

namespace sleuth {

enum class Severity { Error, Warning };

enum class FindingCode {
    ErrorInFormula,
    NotWatched,
    DataOverBlank,
    DataNotReferred,
    CandidateFinalResult,
    UnwatchedDependent,
    InconsistentDependent,
    VulnerableDollaring,
    BlankInData,
    FormulaInData,
    TypeMismatch,
    OutOfBounds,
};

// Bit-exact indication strings; the first four are the tool's classic messages.
std::string canonical_message(FindingCode code);
const char* to_string(FindingCode code);
const char* to_string(Severity s);
Severity default_severity(FindingCode code);
std::vector<FindingCode> all_finding_codes();

struct Finding {
    std::string entry_id;
    AreaExtent location;
    Severity severity = Severity::Error;
    FindingCode code = FindingCode::ErrorInFormula;
    std::string message;
    std::string detail;
    std::optional<std::string> fix_hint;  // master formula, A1 at the location's top-left
};

struct ReportRow {
    std::string entry_id;
    std::int64_t modified_at = 0;
    bool error_flag = false;
    std::string indications;
    bool change_flag = false;
    AreaExtent extent;
    std::string location;
    std::string formula_string;
};

struct Report {
    std::int64_t generated_at = 0;
    std::vector<ReportRow> rows;
    std::vector<Finding> findings;

    std::size_t error_count() const;
    std::size_t warning_count() const;
    std::vector<Finding> findings_for(const std::string& entry_id) const;
};

// Sweeps and ownership shared by the reconciliation checks; build once per check.
class ReconciliationIndex {
public:
    ReconciliationIndex(const WorkbookSet& set, const Registry& reg);
    ~ReconciliationIndex();
    ReconciliationIndex(const ReconciliationIndex&) = delete;
    ReconciliationIndex& operator=(const ReconciliationIndex&) = delete;

    struct Impl;
    const Impl& impl() const { return *impl_; }

private:
    std::unique_ptr<Impl> impl_;
};

// Runs every check, refreshes current generics from the grid, sets error
// flags and appends one Check audit event.
Report check_all(const WorkbookSet& set, Registry& reg);

std::vector<Finding> check_damage(const WorkbookSet& set, const WatchEntry& entry);
std::vector<Finding> check_precedents(const WorkbookSet& set, const Registry& reg, const WatchEntry& entry);
std::vector<Finding> check_precedents(const ReconciliationIndex& index, const WatchEntry& entry);
std::vector<Finding> check_dependents(const WorkbookSet& set, const Registry& reg, const WatchEntry& entry);
std::vector<Finding> check_dependents(const ReconciliationIndex& index, const WatchEntry& entry);
std::vector<Finding> check_dollaring(const WorkbookSet& set, const Registry& reg, const WatchEntry& entry);
std::vector<Finding> check_dollaring(const ReconciliationIndex& index, const WatchEntry& entry);
std::vector<Finding> check_data(const WorkbookSet& set, const WatchEntry& entry);

// All checks for one entry (used by fix to verify its result).
std::vector<Finding> check_entry(const WorkbookSet& set, const Registry& reg, const WatchEntry& entry);

// n >= 3: mean +/- 3 sample standard deviations; otherwise
// [min - 0.5(|min|+1), max + 0.5(|max|+1)].
Bounds compute_bounds(std::span<const double> values);

// The concrete regions a reference reads when its generic is filled over
// `area`; empty when the reference cannot be resolved.
std::optional<std::vector<AreaExtent>> sweep_reference(const WorkbookSet& set, const Reference& r1c1_ref,
                                                       const AreaExtent& area);

// Resolves an A1 reference read by a formula at `host` to concrete extents.
std::optional<AreaExtent> resolve_reference(const WorkbookSet& set, const Reference& a1_ref, const CellAddr& host);

Report build_report(const Registry& reg, std::vector<Finding> findings, std::int64_t generated_at);

}  // namespace sleuth
