#pragma once

#include <cstdint>
#include <string>

#include "sleuth/checker.hpp"

namespace sleuth {

enum class ReportFormat { Table, Delimited };

// dd/mm/yy HH:MM in UTC; "-" for 0.
std::string format_timestamp(std::int64_t unix_seconds);

// Header (codes and messages), one row per entry, footer with the
// exact-match rule. Byte-deterministic for a given report.
std::string render_check_report(const Report& report, ReportFormat format);

// One line per finding, with detail and the master formula when known.
std::string render_findings(const Report& report);

// Breakdown of the formula at `addr`, then of every formula cell it reads,
// `depth` levels down. Throws NonFormulaCell when `addr` holds no formula.
std::string render_trace(const WorkbookSet& set, const CellAddr& addr, int depth);

// Text dump of a grid region; with a report, cells inside Error findings get
// `!err` and cells of changed entries `~chg`.
std::string render_grid(const WorkbookSet& set, const AreaExtent& region, const Report* annotate = nullptr);

// `extent` grown by `context` cells on every side, clipped to the grid.
AreaExtent with_context(const AreaExtent& extent, int context);

}  // namespace sleuth
