#include "sleuth/evaluator.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include "sleuth/checker.hpp"
#include "sleuth/error.hpp"

namespace sleuth {

Value Value::of_number(double v) {
    Value out;
    out.kind = Kind::Number;
    out.number = v;
    return out;
}

Value Value::of_text(std::string s) {
    Value out;
    out.kind = Kind::Text;
    out.text = std::move(s);
    return out;
}

Value Value::of_boolean(bool b) {
    Value out;
    out.kind = Kind::Boolean;
    out.boolean = b;
    return out;
}

Value Value::of_error(std::string code) {
    Value out;
    out.kind = Kind::Error;
    out.text = std::move(code);
    return out;
}

namespace {

std::string number_text(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::string to_string(const Value& v) {
    switch (v.kind) {
        case Value::Kind::Blank: return "";
        case Value::Kind::Number: return number_text(v.number);
        case Value::Kind::Text: return v.text;
        case Value::Kind::Boolean: return v.boolean ? "TRUE" : "FALSE";
        case Value::Kind::Error: return v.text;
    }
    return "";
}

namespace {

struct Operand {
    std::vector<Value> cells;
    int rows = 1;
    int cols = 1;
    bool range = false;

    static Operand scalar(Value v) {
        Operand o;
        o.cells.push_back(std::move(v));
        return o;
    }
};

const std::string kValueError = "#VALUE!";

class Evaluator {
public:
    explicit Evaluator(const WorkbookSet& set) : set_(set) {}

    Value cell(const CellAddr& a) {
        auto key = std::make_tuple(to_lower(a.workbook), to_lower(a.sheet), a.row, a.col);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        const CellContent& c = set_.cell(a);
        Value v;
        switch (c.kind) {
            case CellKind::Blank: break;
            case CellKind::Number: v = Value::of_number(c.number); break;
            case CellKind::Text: v = Value::of_text(c.text); break;
            case CellKind::Formula: {
                if (!active_.insert(key).second)
                    throw SleuthError(ErrorCode::Cycle, "reference cycle through " + format_location(a));
                v = formula(c.formula, a);
                active_.erase(key);
                break;
            }
        }
        memo_[key] = v;
        return v;
    }

    Value formula(std::string_view text, const CellAddr& host) {
        FormulaAst ast = parse(text, Notation::A1);
        Value v = scalar(node(ast.root, host));
        // A formula reading an empty cell shows 0.
        if (v.kind == Value::Kind::Blank) v = Value::of_number(0);
        return v;
    }

private:
    Operand reference(const Reference& ref, const CellAddr& host) {
        auto x = resolve_reference(set_, ref, host);
        if (!x) return Operand::scalar(Value::of_error("#REF!"));
        Operand o;
        o.range = ref.kind != RefKind::Cell;
        o.rows = x->height();
        o.cols = x->width();
        for (int r = x->top; r <= x->bottom; ++r)
            for (int c = x->left; c <= x->right; ++c) o.cells.push_back(cell({x->workbook, x->sheet, r, c}));
        if (o.cells.size() == 1) o.range = false;
        return o;
    }

    static Value scalar(const Operand& o) {
        if (o.range) return Value::of_error(kValueError);
        return o.cells.front();
    }

    static std::optional<double> to_number(const Value& v) {
        switch (v.kind) {
            case Value::Kind::Blank: return 0.0;
            case Value::Kind::Number: return v.number;
            case Value::Kind::Boolean: return v.boolean ? 1.0 : 0.0;
            default: return std::nullopt;
        }
    }

    static std::string to_text(const Value& v) { return to_string(v); }

    Value arithmetic(const std::string& op, const Value& a, const Value& b) {
        if (a.is_error()) return a;
        if (b.is_error()) return b;
        auto x = to_number(a), y = to_number(b);
        if (!x || !y) return Value::of_error(kValueError);
        if (op == "+") return Value::of_number(*x + *y);
        if (op == "-") return Value::of_number(*x - *y);
        if (op == "*") return Value::of_number(*x * *y);
        if (op == "/") return *y == 0.0 ? Value::of_error("#DIV/0!") : Value::of_number(*x / *y);
        double p = std::pow(*x, *y);
        return std::isfinite(p) ? Value::of_number(p) : Value::of_error("#NUM!");
    }

    static int type_rank(const Value& v) {
        switch (v.kind) {
            case Value::Kind::Text: return 1;
            case Value::Kind::Boolean: return 2;
            default: return 0;
        }
    }

    Value compare(const std::string& op, Value a, Value b) {
        if (a.is_error()) return a;
        if (b.is_error()) return b;
        // Blank compares as the other side's empty value.
        if (a.kind == Value::Kind::Blank) a = b.kind == Value::Kind::Text ? Value::of_text("") : Value::of_number(0);
        if (b.kind == Value::Kind::Blank) b = a.kind == Value::Kind::Text ? Value::of_text("") : Value::of_number(0);
        int cmp;
        if (type_rank(a) != type_rank(b)) {
            cmp = type_rank(a) < type_rank(b) ? -1 : 1;
        } else if (a.kind == Value::Kind::Text) {
            std::string x = to_lower(a.text), y = to_lower(b.text);
            cmp = x < y ? -1 : (x > y ? 1 : 0);
        } else {
            double x = *to_number(a), y = *to_number(b);
            cmp = x < y ? -1 : (x > y ? 1 : 0);
        }
        bool r = op == "=" ? cmp == 0 : op == "<>" ? cmp != 0 : op == "<" ? cmp < 0 : op == ">" ? cmp > 0
               : op == "<=" ? cmp <= 0 : cmp >= 0;
        return Value::of_boolean(r);
    }

    // Numbers read from an argument the way SUM/MAX/MIN read them.
    bool collect(const Operand& o, std::vector<double>& out, Value& error) {
        for (const auto& v : o.cells) {
            if (v.is_error()) {
                error = v;
                return false;
            }
            if (o.range) {
                if (v.kind == Value::Kind::Number) out.push_back(v.number);
            } else if (auto n = to_number(v)) {
                out.push_back(*n);
            } else {
                error = Value::of_error(kValueError);
                return false;
            }
        }
        return true;
    }

    Operand call(const Node& n, const CellAddr& host) {
        const std::string& f = n.text;
        std::vector<Operand> args;
        if (f != "IF")
            for (const auto& a : n.args) args.push_back(node(a, host));
        auto arity = [&](std::size_t lo, std::size_t hi) {
            if (args.size() < lo || args.size() > hi)
                throw SleuthError(ErrorCode::Usage, f + " takes " + std::to_string(lo) +
                                                        (lo == hi ? "" : " to " + std::to_string(hi)) + " arguments");
        };
        if (f == "SUM" || f == "MAX" || f == "MIN") {
            arity(1, 255);
            std::vector<double> xs;
            Value err;
            for (const auto& a : args)
                if (!collect(a, xs, err)) return Operand::scalar(err);
            if (f == "SUM") {
                double s = 0;
                for (double x : xs) s += x;
                return Operand::scalar(Value::of_number(s));
            }
            if (xs.empty()) return Operand::scalar(Value::of_number(0));
            double best = xs.front();
            for (double x : xs) best = f == "MAX" ? std::max(best, x) : std::min(best, x);
            return Operand::scalar(Value::of_number(best));
        }
        if (f == "SUMPRODUCT") {
            arity(1, 255);
            for (const auto& a : args)
                if (a.rows != args.front().rows || a.cols != args.front().cols)
                    throw SleuthError(ErrorCode::ShapeMismatch, "SUMPRODUCT arguments differ in shape");
            double total = 0;
            for (std::size_t i = 0; i < args.front().cells.size(); ++i) {
                double p = 1;
                for (const auto& a : args) {
                    const Value& v = a.cells[i];
                    if (v.is_error()) return Operand::scalar(v);
                    p *= v.kind == Value::Kind::Number ? v.number : 0.0;
                }
                total += p;
            }
            return Operand::scalar(Value::of_number(total));
        }
        if (f == "ROUNDUP") {
            arity(2, 2);
            Value x = scalar(args[0]), d = scalar(args[1]);
            if (x.is_error()) return Operand::scalar(x);
            if (d.is_error()) return Operand::scalar(d);
            auto xv = to_number(x), dv = to_number(d);
            if (!xv || !dv) return Operand::scalar(Value::of_error(kValueError));
            double scale = std::pow(10.0, std::trunc(*dv));
            double m = std::fabs(*xv) * scale;
            // Guard against representation noise such as 0.1*3 exceeding 0.3.
            double up = std::ceil(m - 1e-9 * std::max(1.0, m));
            return Operand::scalar(Value::of_number(std::copysign(up / scale, *xv) + 0.0));
        }
        if (f == "IF") {
            if (n.args.size() < 2 || n.args.size() > 3) throw SleuthError(ErrorCode::Usage, "IF takes 2 to 3 arguments");
            Value c = scalar(node(n.args[0], host));
            if (c.is_error()) return Operand::scalar(c);
            auto cv = to_number(c);
            if (!cv) return Operand::scalar(Value::of_error(kValueError));
            if (*cv != 0.0) return node(n.args[1], host);
            if (n.args.size() == 3) return node(n.args[2], host);
            return Operand::scalar(Value::of_boolean(false));
        }
        throw SleuthError(ErrorCode::Unsupported, "function " + f + " is not supported");
    }

    Operand node(const Node& n, const CellAddr& host) {
        switch (n.kind) {
            case NodeKind::Number: return Operand::scalar(Value::of_number(n.number));
            case NodeKind::Text: return Operand::scalar(Value::of_text(n.text));
            case NodeKind::Boolean: return Operand::scalar(Value::of_boolean(n.boolean));
            case NodeKind::Error: return Operand::scalar(Value::of_error(n.text));
            case NodeKind::Ref: return reference(n.ref, host);
            case NodeKind::Paren: return node(n.args.front(), host);
            case NodeKind::Call: return call(n, host);
            case NodeKind::Percent: {
                Value v = scalar(node(n.args.front(), host));
                return Operand::scalar(arithmetic("/", v, Value::of_number(100)));
            }
            case NodeKind::Unary: {
                Value v = scalar(node(n.args.front(), host));
                if (n.text == "+") return Operand::scalar(v);
                return Operand::scalar(arithmetic("-", Value::of_number(0), v));
            }
            case NodeKind::Binary: {
                Value a = scalar(node(n.args[0], host));
                Value b = scalar(node(n.args[1], host));
                const std::string& op = n.text;
                if (op == "&") {
                    if (a.is_error()) return Operand::scalar(a);
                    if (b.is_error()) return Operand::scalar(b);
                    return Operand::scalar(Value::of_text(to_text(a) + to_text(b)));
                }
                if (op == "=" || op == "<>" || op == "<" || op == ">" || op == "<=" || op == ">=")
                    return Operand::scalar(compare(op, a, b));
                return Operand::scalar(arithmetic(op, a, b));
            }
        }
        return Operand::scalar(Value::of_error(kValueError));
    }

    const WorkbookSet& set_;
    std::map<std::tuple<std::string, std::string, int, int>, Value> memo_;
    std::set<std::tuple<std::string, std::string, int, int>> active_;
};

}  // namespace

Value evaluate(const WorkbookSet& set, const CellAddr& addr) { return Evaluator(set).cell(addr); }

Value evaluate_formula(const WorkbookSet& set, std::string_view formula, const CellAddr& host) {
    return Evaluator(set).formula(formula, host);
}

}  // namespace sleuth
