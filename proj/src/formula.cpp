#include "sleuth/formula.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include "sleuth/error.hpp"

namespace sleuth {

namespace {

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '\\';
}
bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}
bool is_digit(char c) { return c >= '0' && c <= '9'; }

constexpr const char* kErrorLiterals[] = {"#NULL!", "#DIV/0!", "#VALUE!", "#REF!",
                                          "#NAME?", "#NUM!",   "#N/A"};

class Parser {
public:
    Parser(std::string_view src, Notation notation) : src_(src), notation_(notation) {}

    Node parse_formula() {
        skip_ws();
        if (peek() == '=') ++pos_;
        skip_ws();
        if (at_end()) fail("empty formula");
        Node root = parse_comparison();
        skip_ws();
        if (!at_end()) {
            if (peek() == ')') fail("unbalanced parentheses");
            fail("unexpected character '" + std::string(1, peek()) + "'");
        }
        return root;
    }

private:
    std::string_view src_;
    Notation notation_;
    std::size_t pos_ = 0;

    bool at_end() const { return pos_ >= src_.size(); }
    char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }
    void skip_ws() {
        while (!at_end() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
                             src_[pos_] == '\r'))
            ++pos_;
    }
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

    static Node binary(std::string op, Node lhs, Node rhs) {
        Node n;
        n.kind = NodeKind::Binary;
        n.text = std::move(op);
        n.span = {lhs.span.begin, rhs.span.end};
        n.args.push_back(std::move(lhs));
        n.args.push_back(std::move(rhs));
        return n;
    }

    std::optional<std::string> match_comparison() {
        skip_ws();
        char c = peek();
        if (c == '=') { ++pos_; return "="; }
        if (c == '<') {
            if (peek(1) == '>') { pos_ += 2; return "<>"; }
            if (peek(1) == '=') { pos_ += 2; return "<="; }
            ++pos_;
            return "<";
        }
        if (c == '>') {
            if (peek(1) == '=') { pos_ += 2; return ">="; }
            ++pos_;
            return ">";
        }
        return std::nullopt;
    }

    Node parse_comparison() {
        Node lhs = parse_concat();
        while (auto op = match_comparison()) lhs = binary(*op, std::move(lhs), parse_concat());
        return lhs;
    }

    Node parse_concat() {
        Node lhs = parse_additive();
        for (;;) {
            skip_ws();
            if (peek() != '&') return lhs;
            ++pos_;
            lhs = binary("&", std::move(lhs), parse_additive());
        }
    }

    Node parse_additive() {
        Node lhs = parse_multiplicative();
        for (;;) {
            skip_ws();
            char c = peek();
            if (c != '+' && c != '-') return lhs;
            ++pos_;
            lhs = binary(std::string(1, c), std::move(lhs), parse_multiplicative());
        }
    }

    Node parse_multiplicative() {
        Node lhs = parse_power();
        for (;;) {
            skip_ws();
            char c = peek();
            if (c != '*' && c != '/') return lhs;
            ++pos_;
            lhs = binary(std::string(1, c), std::move(lhs), parse_power());
        }
    }

    Node parse_power() {
        Node lhs = parse_prefix();
        for (;;) {
            skip_ws();
            if (peek() != '^') return lhs;
            ++pos_;
            lhs = binary("^", std::move(lhs), parse_prefix());
        }
    }

    Node parse_prefix() {
        skip_ws();
        char c = peek();
        if (c == '+' || c == '-') {
            std::size_t start = pos_++;
            Node operand = parse_prefix();
            Node n;
            n.kind = NodeKind::Unary;
            n.text = std::string(1, c);
            n.span = {start, operand.span.end};
            n.args.push_back(std::move(operand));
            return n;
        }
        return parse_percent();
    }

    Node parse_percent() {
        Node inner = parse_primary();
        for (;;) {
            skip_ws();
            if (peek() != '%') return inner;
            ++pos_;
            Node n;
            n.kind = NodeKind::Percent;
            n.span = {inner.span.begin, pos_};
            n.args.push_back(std::move(inner));
            inner = std::move(n);
        }
    }

    Node parse_primary() {
        skip_ws();
        if (at_end()) fail("unexpected end of formula");
        std::size_t start = pos_;
        char c = peek();
        if (c == '(') {
            ++pos_;
            Node inner = parse_comparison();
            skip_ws();
            if (peek() != ')') fail("unbalanced parentheses");
            ++pos_;
            Node n;
            n.kind = NodeKind::Paren;
            n.span = {start, pos_};
            n.args.push_back(std::move(inner));
            return n;
        }
        if (is_digit(c) || (c == '.' && is_digit(peek(1)))) return parse_number();
        if (c == '"') return parse_string();
        if (c == '#') return parse_error_literal();
        if (c == '[' || c == '\'' || c == '$' || is_ident_start(c) || is_digit(c))
            return parse_reference_or_name();
        if (c == ')') fail("unbalanced parentheses");
        fail("unexpected character '" + std::string(1, c) + "'");
    }

    Node parse_number() {
        std::size_t start = pos_;
        while (is_digit(peek())) ++pos_;
        if (peek() == '.') {
            ++pos_;
            while (is_digit(peek())) ++pos_;
        }
        if (peek() == 'e' || peek() == 'E') {
            std::size_t save = pos_;
            ++pos_;
            if (peek() == '+' || peek() == '-') ++pos_;
            if (!is_digit(peek())) {
                pos_ = save;
            } else {
                while (is_digit(peek())) ++pos_;
            }
        }
        double value = 0.0;
        auto text = src_.substr(start, pos_ - start);
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc() || ptr != text.data() + text.size()) {
            pos_ = start;
            fail("malformed number");
        }
        Node n = Node::make_number(value);
        n.span = {start, pos_};
        return n;
    }

    Node parse_string() {
        std::size_t start = pos_++;
        std::string out;
        for (;;) {
            if (at_end()) {
                pos_ = start;
                fail("unterminated string");
            }
            char c = src_[pos_++];
            if (c == '"') {
                if (peek() == '"') {
                    out.push_back('"');
                    ++pos_;
                    continue;
                }
                break;
            }
            out.push_back(c);
        }
        Node n = Node::make_text(std::move(out));
        n.span = {start, pos_};
        return n;
    }

    Node parse_error_literal() {
        std::size_t start = pos_;
        for (const char* lit : kErrorLiterals) {
            std::string_view l(lit);
            if (src_.size() - pos_ >= l.size()) {
                auto cand = src_.substr(pos_, l.size());
                if (iequals(cand, l)) {
                    pos_ += l.size();
                    Node n = Node::make_error(std::string(l));
                    n.span = {start, pos_};
                    return n;
                }
            }
        }
        fail("unknown error literal");
    }

    // Reads a quoted sheet name at pos_ (opening quote included).
    std::string read_quoted() {
        std::size_t start = pos_++;
        std::string out;
        for (;;) {
            if (at_end()) {
                pos_ = start;
                fail("unterminated quoted sheet name");
            }
            char c = src_[pos_++];
            if (c == '\'') {
                if (peek() == '\'') {
                    out.push_back('\'');
                    ++pos_;
                    continue;
                }
                return out;
            }
            out.push_back(c);
        }
    }

    // A1: $?COL$?ROW. Leaves pos_ untouched on failure.
    std::optional<RefEnd> try_a1_end() {
        std::size_t p = pos_;
        auto ch = [&](std::size_t i) { return i < src_.size() ? src_[i] : '\0'; };
        RefEnd end;
        if (ch(p) == '$') { end.col.absolute = true; ++p; }
        std::size_t ls = p;
        while (std::isalpha(static_cast<unsigned char>(ch(p))) && p - ls < 4) ++p;
        std::size_t nletters = p - ls;
        if (nletters == 0 || nletters > 3) return std::nullopt;
        int col = column_index(src_.substr(ls, nletters));
        if (ch(p) == '$') { end.row.absolute = true; ++p; }
        std::size_t ds = p;
        while (is_digit(ch(p))) ++p;
        if (p == ds || p - ds > 7) return std::nullopt;
        if (is_ident_char(ch(p)) || ch(p) == '(' || ch(p) == '!') return std::nullopt;
        long row = std::stol(std::string(src_.substr(ds, p - ds)));
        if (col < 1 || col > kMaxCols || row < 1 || row > kMaxRows) return std::nullopt;
        end.col.value = col;
        end.row.value = static_cast<int>(row);
        pos_ = p;
        return end;
    }

    // R1C1: R(n|[n])?C(n|[n])?
    std::optional<RefEnd> try_r1c1_end() {
        std::size_t p = pos_;
        auto ch = [&](std::size_t i) { return i < src_.size() ? src_[i] : '\0'; };
        auto read_part = [&](char letter, Coord& out) -> bool {
            if (std::toupper(static_cast<unsigned char>(ch(p))) != letter) return false;
            ++p;
            if (ch(p) == '[') {
                ++p;
                std::size_t s = p;
                if (ch(p) == '-' || ch(p) == '+') ++p;
                std::size_t ds = p;
                while (is_digit(ch(p))) ++p;
                if (p == ds || ch(p) != ']') return false;
                out.value = std::stoi(std::string(src_.substr(s, p - s)));
                out.absolute = false;
                ++p;
            } else if (is_digit(ch(p))) {
                std::size_t ds = p;
                while (is_digit(ch(p))) ++p;
                if (p - ds > 7) return false;
                out.value = std::stoi(std::string(src_.substr(ds, p - ds)));
                out.absolute = true;
            } else {
                out.value = 0;
                out.absolute = false;
            }
            return true;
        };
        RefEnd end;
        if (!read_part('R', end.row)) return std::nullopt;
        if (!read_part('C', end.col)) return std::nullopt;
        if (is_ident_char(ch(p)) || ch(p) == '(' || ch(p) == '!') return std::nullopt;
        if (end.row.absolute && (end.row.value < 1 || end.row.value > kMaxRows)) return std::nullopt;
        if (end.col.absolute && (end.col.value < 1 || end.col.value > kMaxCols)) return std::nullopt;
        pos_ = p;
        return end;
    }

    std::optional<RefEnd> try_end() {
        return notation_ == Notation::A1 ? try_a1_end() : try_r1c1_end();
    }

    Node parse_reference_or_name() {
        std::size_t start = pos_;
        Reference ref;
        bool qualified = false;
        if (peek() == '[') {
            std::size_t close = src_.find(']', pos_);
            if (close == std::string_view::npos) fail("unterminated workbook qualifier");
            ref.workbook = std::string(src_.substr(pos_ + 1, close - pos_ - 1));
            if (ref.workbook->empty()) fail("empty workbook qualifier");
            pos_ = close + 1;
            qualified = true;
        }
        if (peek() == '\'') {
            std::string sheet = read_quoted();
            if (peek() != '!') fail("expected '!' after sheet name");
            ++pos_;
            ref.sheet = std::move(sheet);
            qualified = true;
        } else {
            std::size_t p = pos_;
            while (p < src_.size() && is_ident_char(src_[p])) ++p;
            if (p > pos_ && p < src_.size() && src_[p] == '!') {
                ref.sheet = std::string(src_.substr(pos_, p - pos_));
                pos_ = p + 1;
                qualified = true;
            }
        }

        if (auto first = try_end()) {
            ref.first = *first;
            ref.kind = RefKind::Cell;
            if (peek() == ':') {
                ++pos_;
                auto last = try_end();
                if (!last) fail("malformed reference");
                ref.kind = RefKind::Range;
                ref.last = *last;
            }
            Node n = Node::make_ref(std::move(ref));
            n.span = {start, pos_};
            return n;
        }

        if (!is_ident_start(peek())) {
            fail("malformed reference");
        }
        std::size_t is = pos_;
        while (is_ident_char(peek())) ++pos_;
        std::string ident(src_.substr(is, pos_ - is));
        std::size_t after_ident = pos_;
        skip_ws();
        if (!qualified && peek() == '(') {
            ++pos_;
            Node call;
            call.kind = NodeKind::Call;
            call.text = to_upper(ident);
            skip_ws();
            if (peek() != ')') {
                for (;;) {
                    call.args.push_back(parse_comparison());
                    skip_ws();
                    if (peek() == ',') {
                        ++pos_;
                        continue;
                    }
                    break;
                }
            }
            skip_ws();
            if (peek() != ')') fail("unbalanced parentheses");
            ++pos_;
            call.span = {start, pos_};
            return call;
        }
        pos_ = after_ident;
        if (!qualified && (iequals(ident, "TRUE") || iequals(ident, "FALSE"))) {
            Node n;
            n.kind = NodeKind::Boolean;
            n.boolean = iequals(ident, "TRUE");
            n.span = {start, pos_};
            return n;
        }
        ref.kind = RefKind::Name;
        ref.name = std::move(ident);
        Node n = Node::make_ref(std::move(ref));
        n.span = {start, pos_};
        return n;
    }
};

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

std::string render_coord_r1c1(char letter, const Coord& c) {
    std::string out(1, letter);
    if (c.absolute) {
        out += std::to_string(c.value);
    } else if (c.value != 0) {
        out += "[" + std::to_string(c.value) + "]";
    }
    return out;
}

std::string render_end(const RefEnd& e, Notation notation) {
    if (notation == Notation::A1) return format_a1(e.row.value, e.col.value, e.row.absolute, e.col.absolute);
    return render_coord_r1c1('R', e.row) + render_coord_r1c1('C', e.col);
}

bool names_equal(const std::optional<std::string>& a, const std::optional<std::string>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || iequals(*a, *b);
}

void render_into(const Node& n, Notation notation, std::string& out) {
    switch (n.kind) {
        case NodeKind::Number: out += format_number(n.number); break;
        case NodeKind::Text: {
            out += '"';
            for (char c : n.text) {
                if (c == '"') out += '"';
                out += c;
            }
            out += '"';
            break;
        }
        case NodeKind::Boolean: out += n.boolean ? "TRUE" : "FALSE"; break;
        case NodeKind::Error: out += n.text; break;
        case NodeKind::Ref: out += render_reference(n.ref, notation); break;
        case NodeKind::Call: {
            out += n.text;
            out += '(';
            for (std::size_t i = 0; i < n.args.size(); ++i) {
                if (i) out += ',';
                render_into(n.args[i], notation, out);
            }
            out += ')';
            break;
        }
        case NodeKind::Binary:
            render_into(n.args[0], notation, out);
            out += n.text;
            render_into(n.args[1], notation, out);
            break;
        case NodeKind::Unary:
            out += n.text;
            render_into(n.args[0], notation, out);
            break;
        case NodeKind::Percent:
            render_into(n.args[0], notation, out);
            out += '%';
            break;
        case NodeKind::Paren:
            out += '(';
            render_into(n.args[0], notation, out);
            out += ')';
            break;
    }
}

template <typename F>
FormulaAst convert(const FormulaAst& ast, Notation to, F&& coord_fn) {
    FormulaAst out = ast;
    out.notation = to;
    visit_nodes(out.root, [&](Node& n) {
        if (n.kind != NodeKind::Ref || n.ref.kind == RefKind::Name) return;
        coord_fn(n.ref.first);
        if (n.ref.kind == RefKind::Range) coord_fn(n.ref.last);
    });
    return out;
}

void collect_trace(const Node& n, std::string_view source, const std::vector<int>& depth_at,
                   std::vector<TraceRow>& rows) {
    auto level = [&](std::size_t pos) {
        return pos < depth_at.size() ? depth_at[pos] : (depth_at.empty() ? 0 : depth_at.back());
    };
    auto text_of = [&](const Span& s) {
        if (s.end <= source.size() && s.begin <= s.end) return std::string(source.substr(s.begin, s.end - s.begin));
        return std::string();
    };
    switch (n.kind) {
        case NodeKind::Call:
            rows.push_back({"Worksheet Function", text_of(n.span), level(n.span.begin), n.span});
            break;
        case NodeKind::Number:
            rows.push_back({"Number", text_of(n.span), level(n.span.begin), n.span});
            break;
        case NodeKind::Text:
            rows.push_back({"Text", text_of(n.span), level(n.span.begin), n.span});
            break;
        case NodeKind::Boolean:
            rows.push_back({"Boolean", text_of(n.span), level(n.span.begin), n.span});
            break;
        case NodeKind::Error:
            rows.push_back({"Error Value", text_of(n.span), level(n.span.begin), n.span});
            break;
        case NodeKind::Ref:
            rows.push_back({reference_type_label(n.ref), text_of(n.span), level(n.span.begin), n.span});
            break;
        default: break;
    }
    for (const auto& child : n.args) collect_trace(child, source, depth_at, rows);
}

}  // namespace

bool Reference::fully_absolute() const {
    if (kind == RefKind::Name) return true;
    bool a = first.row.absolute && first.col.absolute;
    if (kind == RefKind::Range) a = a && last.row.absolute && last.col.absolute;
    return a;
}

bool Reference::fully_relative() const {
    if (kind == RefKind::Name) return false;
    bool r = !first.row.absolute && !first.col.absolute;
    if (kind == RefKind::Range) r = r && !last.row.absolute && !last.col.absolute;
    return r;
}

bool operator==(const Reference& a, const Reference& b) {
    if (a.kind != b.kind || !names_equal(a.workbook, b.workbook) || !names_equal(a.sheet, b.sheet))
        return false;
    switch (a.kind) {
        case RefKind::Name: return iequals(a.name, b.name);
        case RefKind::Cell: return a.first == b.first;
        case RefKind::Range: return a.first == b.first && a.last == b.last;
    }
    return false;
}

Node Node::make_number(double v) {
    Node n;
    n.kind = NodeKind::Number;
    n.number = v;
    return n;
}
Node Node::make_text(std::string s) {
    Node n;
    n.kind = NodeKind::Text;
    n.text = std::move(s);
    return n;
}
Node Node::make_ref(Reference r) {
    Node n;
    n.kind = NodeKind::Ref;
    n.ref = std::move(r);
    return n;
}
Node Node::make_error(std::string code) {
    Node n;
    n.kind = NodeKind::Error;
    n.text = std::move(code);
    return n;
}

bool operator==(const Node& a, const Node& b) {
    if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
    switch (a.kind) {
        case NodeKind::Number:
            if (a.number != b.number) return false;
            break;
        case NodeKind::Boolean:
            if (a.boolean != b.boolean) return false;
            break;
        case NodeKind::Text:
        case NodeKind::Error:
        case NodeKind::Call:
        case NodeKind::Binary:
        case NodeKind::Unary:
            if (a.text != b.text) return false;
            break;
        case NodeKind::Ref:
            if (!(a.ref == b.ref)) return false;
            break;
        default: break;
    }
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!(a.args[i] == b.args[i])) return false;
    return true;
}

FormulaAst parse(std::string_view source, Notation notation) {
    Parser p(source, notation);
    FormulaAst ast;
    ast.notation = notation;
    ast.root = p.parse_formula();
    return ast;
}

std::string render_reference(const Reference& ref, Notation notation) {
    std::string out;
    if (ref.workbook) out += "[" + *ref.workbook + "]";
    if (ref.sheet) out += quote_sheet(*ref.sheet) + "!";
    switch (ref.kind) {
        case RefKind::Name: out += ref.name; break;
        case RefKind::Cell: out += render_end(ref.first, notation); break;
        case RefKind::Range:
            out += render_end(ref.first, notation);
            out += ':';
            out += render_end(ref.last, notation);
            break;
    }
    return out;
}

std::string render(const Node& node, Notation notation) {
    std::string out;
    render_into(node, notation, out);
    return out;
}

std::string render(const FormulaAst& ast) { return "=" + render(ast.root, ast.notation); }

std::vector<Reference> extract_references(const FormulaAst& ast) {
    std::vector<Reference> refs;
    visit_nodes(ast.root, [&](const Node& n) {
        if (n.kind == NodeKind::Ref) refs.push_back(n.ref);
    });
    return refs;
}

FormulaAst a1_to_r1c1(const FormulaAst& ast, int anchor_row, int anchor_col) {
    if (ast.notation == Notation::R1C1) return ast;
    return convert(ast, Notation::R1C1, [&](RefEnd& e) {
        if (!e.row.absolute) e.row.value -= anchor_row;
        if (!e.col.absolute) e.col.value -= anchor_col;
    });
}

FormulaAst r1c1_to_a1(const FormulaAst& ast, int anchor_row, int anchor_col) {
    if (ast.notation == Notation::A1) return ast;
    return convert(ast, Notation::A1, [&](RefEnd& e) {
        if (!e.row.absolute) e.row.value += anchor_row;
        if (!e.col.absolute) e.col.value += anchor_col;
        if (e.row.value < 1 || e.row.value > kMaxRows || e.col.value < 1 || e.col.value > kMaxCols)
            throw SleuthError(ErrorCode::OutOfGrid,
                              "reference falls outside the grid when anchored at " +
                                  format_a1(anchor_row, anchor_col));
    });
}

std::string a1_text_to_r1c1(std::string_view a1_source, int anchor_row, int anchor_col) {
    return render(a1_to_r1c1(parse(a1_source, Notation::A1), anchor_row, anchor_col));
}

std::string reference_type_label(const Reference& ref) {
    std::string prefix;
    if (ref.workbook) prefix = "Off Workbook, ";
    else if (ref.sheet) prefix = "Off Sheet, ";
    if (ref.kind == RefKind::Name) return prefix + "Name";
    std::string dollaring = ref.fully_absolute() ? "Absolute" : ref.fully_relative() ? "Relative" : "Mixed";
    return prefix + dollaring + (ref.kind == RefKind::Range ? " Range" : " Single Cell");
}

std::vector<TraceRow> breakdown(const FormulaAst& ast, std::string_view source) {
    // depth_at[i] = number of unclosed '(' before position i, ignoring quoted text.
    std::vector<int> depth_at(source.size() + 1, 0);
    int depth = 0;
    char quote = 0;
    for (std::size_t i = 0; i < source.size(); ++i) {
        depth_at[i] = depth;
        char c = source[i];
        if (quote) {
            if (c == quote) quote = 0;
            continue;
        }
        if (c == '"' || c == '\'') quote = c;
        else if (c == '(') ++depth;
        else if (c == ')') --depth;
    }
    depth_at[source.size()] = depth;
    std::vector<TraceRow> rows;
    collect_trace(ast.root, source, depth_at, rows);
    return rows;
}

}  // namespace sleuth
