#pragma once

#include <string>

#include "sleuth/grid.hpp"

namespace sleuth {

struct Value {
    enum class Kind { Blank, Number, Text, Boolean, Error };

    Kind kind = Kind::Blank;
    double number = 0.0;
    bool boolean = false;
    std::string text;  // text payload or error code such as #DIV/0!

    static Value of_number(double v);
    static Value of_text(std::string s);
    static Value of_boolean(bool b);
    static Value of_error(std::string code);

    bool is_error() const { return kind == Kind::Error; }

    friend bool operator==(const Value&, const Value&) = default;
};

std::string to_string(const Value& v);

// Evaluates the cell at `addr`. Supports arithmetic, comparison and `&`
// operators plus SUM, SUMPRODUCT, ROUNDUP, MAX, MIN and IF. Throws on
// reference cycles, unknown functions and SUMPRODUCT shape mismatches.
Value evaluate(const WorkbookSet& set, const CellAddr& addr);

// Evaluates an A1 formula as if it were entered at `host`.
Value evaluate_formula(const WorkbookSet& set, std::string_view formula, const CellAddr& host);

}  // namespace sleuth
