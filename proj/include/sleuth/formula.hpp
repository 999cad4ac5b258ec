#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sleuth/address.hpp"

namespace sleuth {

enum class Notation { A1, R1C1 };

// One coordinate of a reference endpoint. In A1 notation `value` is always
// the 1-based index and `absolute` records a `$`. In R1C1 notation an
// absolute coordinate holds the index and a relative one holds the offset.
struct Coord {
    int value = 0;
    bool absolute = false;

    friend bool operator==(const Coord&, const Coord&) = default;
};

struct RefEnd {
    Coord row;
    Coord col;

    friend bool operator==(const RefEnd&, const RefEnd&) = default;
};

enum class RefKind { Cell, Range, Name };

struct Reference {
    RefKind kind = RefKind::Cell;
    std::optional<std::string> workbook;
    std::optional<std::string> sheet;
    RefEnd first;
    RefEnd last;  // Range only
    std::string name;  // Name only

    bool fully_absolute() const;
    bool fully_relative() const;
};

bool operator==(const Reference& a, const Reference& b);

struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;
};

enum class NodeKind { Number, Text, Boolean, Error, Ref, Call, Binary, Unary, Percent, Paren };

struct Node {
    NodeKind kind = NodeKind::Number;
    double number = 0.0;
    bool boolean = false;
    // Text payload, error literal, operator symbol or uppercase function name.
    std::string text;
    Reference ref;
    std::vector<Node> args;
    Span span;

    static Node make_number(double v);
    static Node make_text(std::string s);
    static Node make_ref(Reference r);
    static Node make_error(std::string code);
};

// Structural equality; spans are ignored.
bool operator==(const Node& a, const Node& b);

struct FormulaAst {
    Notation notation = Notation::A1;
    Node root;

    friend bool operator==(const FormulaAst& a, const FormulaAst& b) {
        return a.notation == b.notation && a.root == b.root;
    }
};

FormulaAst parse(std::string_view source, Notation notation = Notation::A1);

// Canonical text: leading `=`, no spaces, uppercase function names.
std::string render(const FormulaAst& ast);
std::string render(const Node& node, Notation notation);
std::string render_reference(const Reference& ref, Notation notation);

std::vector<Reference> extract_references(const FormulaAst& ast);

FormulaAst a1_to_r1c1(const FormulaAst& ast, int anchor_row, int anchor_col);
FormulaAst r1c1_to_a1(const FormulaAst& ast, int anchor_row, int anchor_col);

// Convenience: A1 formula text at a cell to its R1C1 rendering.
std::string a1_text_to_r1c1(std::string_view a1_source, int anchor_row, int anchor_col);

struct TraceRow {
    std::string ref_type;
    std::string value_text;
    int nesting_level = 0;
    Span span;
};

std::vector<TraceRow> breakdown(const FormulaAst& ast, std::string_view source);

// Label such as "Mixed Range" or "Off Sheet, Relative Single Cell".
std::string reference_type_label(const Reference& ref);

// Visits every node in source order (pre-order). The callback may mutate.
template <typename F>
void visit_nodes(Node& node, F&& fn) {
    fn(node);
    for (auto& child : node.args) visit_nodes(child, fn);
}
template <typename F>
void visit_nodes(const Node& node, F&& fn) {
    fn(node);
    for (const auto& child : node.args) visit_nodes(child, fn);
}

}  // namespace sleuth
