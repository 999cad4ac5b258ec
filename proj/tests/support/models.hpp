#pragma once

#include <string>

#include "sleuth/checker.hpp"
#include "sleuth/grid.hpp"
#include "sleuth/registry.hpp"

namespace sleuth::fixtures {

// The equipment cost model: connection volumes, ports per card, unit cost,
// a Year 0 column, cumulative card counts and a SUMPRODUCT cost row.
inline const char* kCostModelSwt = R"(@sheet Costs
Costs!B1 := "Equipment"
Costs!G1 := "Year 0"
Costs!H1 := "Year 1"
Costs!I1 := "Year 2"
Costs!B2 := "Connections Type 1"
Costs!B3 := "Connections Type 2"
Costs!H2 := 10
Costs!I2 := 100
Costs!H3 := 2
Costs!I3 := 6
Costs!B5 := "Cards Type 1"
Costs!B6 := "Cards Type 2"
Costs!D5 := 24
Costs!D6 := 8
Costs!E5 := 500
Costs!E6 := 800
Costs!G5 := 0
Costs!G6 := 0
Costs!H5 := =ROUNDUP(H2/$D5,0)-SUM($G5:G5)
Costs!I5 := =ROUNDUP(I2/$D5,0)-SUM($G5:H5)
Costs!H6 := =ROUNDUP(H3/$D6,0)-SUM($G6:G6)
Costs!I6 := =ROUNDUP(I3/$D6,0)-SUM($G6:H6)
Costs!B7 := "Cost"
Costs!H7 := =SUMPRODUCT(H5:H6,$E5:$E6)
Costs!I7 := =SUMPRODUCT(I5:I6,$E5:$E6)
)";

inline WorkbookSet cost_model() {
    WorkbookSet set;
    set.add(parse_swt(kCostModelSwt, "model"));
    return set;
}

inline AreaExtent costs(const std::string& a1) { return parse_extent(a1, "model", "Costs"); }
inline CellAddr costs_cell(const std::string& a1) { return parse_cell(a1, "model", "Costs"); }

// Ids of the watched cost model, in watch order.
struct CostIds {
    std::string volumes, ports, unit_cost, year0, cards, cost;
};

inline Registry fixed_clock_registry(std::int64_t t = 1'700'000'000) {
    Registry reg;
    reg.set_clock([t] { return t; });
    return reg;
}

inline CostIds watch_cost_model(Registry& reg, const WorkbookSet& set) {
    CostIds ids;
    ids.volumes = watch_area(reg, set, costs("H2:I3")).id;
    ids.ports = watch_area(reg, set, costs("D5:D6")).id;
    ids.unit_cost = watch_area(reg, set, costs("E5:E6")).id;
    ids.year0 = watch_area(reg, set, costs("G5:G6")).id;
    ids.cards = watch_area(reg, set, costs("H5:I6")).id;
    WatchOptions final_opts;
    final_opts.final_result = true;
    ids.cost = watch_area(reg, set, costs("H7:I7"), final_opts).id;
    return ids;
}

inline bool has_message(const Report& r, const std::string& message) {
    for (const auto& f : r.findings)
        if (f.message == message) return true;
    return false;
}

inline bool has_code(const std::vector<Finding>& fs, FindingCode code) {
    for (const auto& f : fs)
        if (f.code == code) return true;
    return false;
}

}  // namespace sleuth::fixtures
