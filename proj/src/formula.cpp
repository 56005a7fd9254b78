#include "shadow_audit/formula.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>

#include "shadow_audit/error.hpp"
#include "shadow_audit/text.hpp"

namespace shadow_audit::formula {

namespace {

constexpr std::array<std::string_view, 6> kFunctions{"SUM", "MAX", "MIN", "AVERAGE", "IF", "NPV"};

bool accepts_range(std::string_view fn, std::size_t arg_index) {
    if (fn == "NPV") return arg_index > 0;
    return fn == "SUM" || fn == "MAX" || fn == "MIN" || fn == "AVERAGE";
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string upper(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    Expr parse_formula() {
        skip_ws();
        if (!eat('=')) fail({"'='"}, "formula must begin with '='");
        auto start = pos_;
        Expr e = parse_cmp();
        reject_range(e, start);
        skip_ws();
        if (pos_ != src_.size()) fail({"operator", "end of formula"}, "unexpected character");
        return e;
    }

private:
    [[noreturn]] void fail(std::vector<std::string> expected, const std::string& detail) const {
        throw SyntaxError(pos_, std::move(expected), detail);
    }

    void reject_range(const Expr& e, std::size_t at) const {
        if (std::holds_alternative<RangeRef>(e.node))
            throw SyntaxError(at, {}, "a range is only allowed as an argument of SUM, MAX, MIN, AVERAGE or NPV");
    }

    void skip_ws() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t')) ++pos_;
    }

    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    bool eat(char c) {
        if (peek() != c) return false;
        ++pos_;
        return true;
    }

    bool eat(std::string_view s) {
        skip_ws();
        if (src_.substr(pos_, s.size()) != s) return false;
        pos_ += s.size();
        return true;
    }

    Expr parse_cmp() {
        auto start = pos_;
        Expr lhs = parse_add();
        static constexpr std::array<std::pair<std::string_view, BinaryOp>, 6> ops{{
            {"<=", BinaryOp::Le}, {">=", BinaryOp::Ge}, {"<>", BinaryOp::Ne},
            {"<", BinaryOp::Lt},  {">", BinaryOp::Gt},  {"=", BinaryOp::Eq},
        }};
        for (auto [text, op] : ops) {
            if (eat(text)) {
                auto rhs_start = pos_;
                Expr rhs = parse_add();
                reject_range(lhs, start);
                reject_range(rhs, rhs_start);
                return Expr{Binary{op, std::move(lhs), std::move(rhs)}};
            }
        }
        return lhs;
    }

    Expr parse_add() {
        auto start = pos_;
        Expr lhs = parse_mul();
        for (;;) {
            BinaryOp op;
            if (eat('+')) op = BinaryOp::Add;
            else if (eat('-')) op = BinaryOp::Sub;
            else return lhs;
            auto rhs_start = pos_;
            Expr rhs = parse_mul();
            reject_range(lhs, start);
            reject_range(rhs, rhs_start);
            lhs = Expr{Binary{op, std::move(lhs), std::move(rhs)}};
        }
    }

    Expr parse_mul() {
        auto start = pos_;
        Expr lhs = parse_unary();
        for (;;) {
            BinaryOp op;
            if (eat('*')) op = BinaryOp::Mul;
            else if (eat('/')) op = BinaryOp::Div;
            else return lhs;
            auto rhs_start = pos_;
            Expr rhs = parse_unary();
            reject_range(lhs, start);
            reject_range(rhs, rhs_start);
            lhs = Expr{Binary{op, std::move(lhs), std::move(rhs)}};
        }
    }

    Expr parse_unary() {
        if (eat('-')) {
            auto start = pos_;
            Expr operand = parse_unary();
            reject_range(operand, start);
            return Expr{Negate{std::move(operand)}};
        }
        return parse_pow();
    }

    Expr parse_pow() {
        auto start = pos_;
        Expr base = parse_primary();
        if (!eat('^')) return base;
        auto exp_start = pos_;
        // The exponent may carry its own sign: 2^-1.
        Expr exponent = parse_unary();
        reject_range(base, start);
        reject_range(exponent, exp_start);
        return Expr{Binary{BinaryOp::Pow, std::move(base), std::move(exponent)}};
    }

    std::string_view scan_word() {
        auto start = pos_;
        while (pos_ < src_.size() && is_word_char(src_[pos_])) ++pos_;
        return src_.substr(start, pos_ - start);
    }

    Expr parse_number() {
        auto start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            auto save = pos_++;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            } else {
                pos_ = save;
            }
        }
        auto value = parse_decimal(src_.substr(start, pos_ - start));
        if (!value) {
            pos_ = start;
            fail({"number"}, "malformed number");
        }
        return Expr{NumberLit{*value}};
    }

    // COL ROW at the cursor, e.g. "AB12".
    std::pair<int, int> parse_cell_coords() {
        auto start = pos_;
        auto word = scan_word();
        std::size_t i = 0;
        while (i < word.size() && std::isalpha(static_cast<unsigned char>(word[i]))) ++i;
        int col = column_from_letters(word.substr(0, i));
        auto digits = word.substr(i);
        bool ok = col > 0 && !digits.empty() && digits.size() <= 7 && digits.front() != '0' &&
                  std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; });
        if (!ok) {
            pos_ = start;
            fail({"cell reference"}, "'" + std::string(word) + "' is not a cell reference");
        }
        int row = std::stoi(std::string(digits));
        if (row > kMaxRow) {
            pos_ = start;
            fail({"cell reference"}, "row out of range");
        }
        return {col, row};
    }

    Expr parse_reference(std::optional<std::string> sheet) {
        skip_ws();
        auto [col, row] = parse_cell_coords();
        if (!eat(':')) return Expr{CellRef{std::move(sheet), col, row}};
        skip_ws();
        auto save = pos_;
        auto word = scan_word();
        if (pos_ < src_.size() && src_[pos_] == '!') {
            ++pos_;
            if (sheet != std::string(word)) {
                pos_ = save;
                fail({}, "both corners of a range must be on the same sheet");
            }
        } else {
            pos_ = save;
        }
        auto [col2, row2] = parse_cell_coords();
        return Expr{RangeRef{std::move(sheet), col, row, col2, row2}};
    }

    Expr parse_call(std::string name, std::size_t name_pos) {
        if (!is_known_function(name)) {
            pos_ = name_pos;
            throw Error(ErrorKind::UnknownFunction, "'" + name + "' at position " + std::to_string(name_pos));
        }
        Call call{name, {}};
        if (peek() == ')') fail({"expression"}, name + " needs at least one argument");
        do {
            skip_ws();
            auto arg_start = pos_;
            Expr arg = parse_cmp();
            if (!accepts_range(name, call.args.size())) reject_range(arg, arg_start);
            call.args.push_back(std::move(arg));
        } while (eat(','));
        if (!eat(')')) fail({"','", "')'"}, "unterminated argument list");
        if (name == "IF" && call.args.size() != 3) throw SyntaxError(name_pos, {}, "IF takes exactly 3 arguments");
        if (name == "NPV" && call.args.size() < 2) throw SyntaxError(name_pos, {}, "NPV takes a rate and at least one value");
        return Expr{std::move(call)};
    }

    Expr parse_primary() {
        char c = peek();
        if (c == '(') {
            ++pos_;
            auto start = pos_;
            Expr inner = parse_cmp();
            reject_range(inner, start);
            if (!eat(')')) fail({"')'"}, "unbalanced parenthesis");
            return inner;
        }
        if (c == '\0') fail({"number", "reference", "function", "'('", "'-'"}, "unexpected end of formula");
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            // A sheet name may start with a digit: 2001!A1.
            auto start = pos_;
            auto word = scan_word();
            if (!word.empty() && pos_ < src_.size() && src_[pos_] == '!') {
                ++pos_;
                return parse_reference(std::string(word));
            }
            pos_ = start;
            return parse_number();
        }
        if (is_word_char(c)) {
            auto start = pos_;
            auto word = scan_word();
            if (pos_ < src_.size() && src_[pos_] == '!') {
                ++pos_;
                return parse_reference(std::string(word));
            }
            if (peek() == '(') {
                ++pos_;
                return parse_call(upper(word), start);
            }
            pos_ = start;
            return parse_reference(std::nullopt);
        }
        fail({"number", "reference", "function", "'('", "'-'"}, std::string("unexpected '") + c + "'");
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

// Binding strength, loosest first.
enum Level { kCmp = 1, kAdd, kMul, kUnary, kPow, kAtom };

Level level_of(const Expr& e) {
    if (const auto* b = std::get_if<Binary>(&e.node)) {
        switch (b->op) {
            case BinaryOp::Add:
            case BinaryOp::Sub: return kAdd;
            case BinaryOp::Mul:
            case BinaryOp::Div: return kMul;
            case BinaryOp::Pow: return kPow;
            default: return kCmp;
        }
    }
    if (std::holds_alternative<Negate>(e.node)) return kUnary;
    if (const auto* n = std::get_if<NumberLit>(&e.node); n && std::signbit(n->value)) return kUnary;
    return kAtom;
}

std::string_view op_text(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return "+";
        case BinaryOp::Sub: return "-";
        case BinaryOp::Mul: return "*";
        case BinaryOp::Div: return "/";
        case BinaryOp::Pow: return "^";
        case BinaryOp::Eq: return "=";
        case BinaryOp::Ne: return "<>";
        case BinaryOp::Lt: return "<";
        case BinaryOp::Le: return "<=";
        case BinaryOp::Gt: return ">";
        case BinaryOp::Ge: return ">=";
    }
    return "?";
}

std::string print_cell(const std::optional<std::string>& sheet, int col, int row) {
    std::string out = sheet ? *sheet + "!" : "";
    return out + column_to_letters(col) + std::to_string(row);
}

std::string print_expr(const Expr& e);

std::string wrap(const Expr& e, bool parens) {
    auto s = print_expr(e);
    return parens ? "(" + s + ")" : s;
}

std::string print_expr(const Expr& e) {
    return std::visit(
        [&](const auto& n) -> std::string {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, NumberLit>) {
                return format_number(n.value);
            } else if constexpr (std::is_same_v<T, CellRef>) {
                return print_cell(n.sheet, n.column, n.row);
            } else if constexpr (std::is_same_v<T, RangeRef>) {
                return print_cell(n.sheet, n.first_column, n.first_row) + ":" +
                       print_cell(std::nullopt, n.last_column, n.last_row);
            } else if constexpr (std::is_same_v<T, Negate>) {
                return "-" + wrap(*n.operand, level_of(*n.operand) < kUnary);
            } else if constexpr (std::is_same_v<T, Binary>) {
                Level self = level_of(e);
                Level l = level_of(*n.lhs);
                Level r = level_of(*n.rhs);
                bool lhs_parens, rhs_parens;
                if (n.op == BinaryOp::Pow) {
                    lhs_parens = l < kAtom;
                    rhs_parens = r < kUnary;
                } else {
                    lhs_parens = l < self || (l == self && self == kCmp);
                    rhs_parens = r <= self;
                }
                return wrap(*n.lhs, lhs_parens) + std::string(op_text(n.op)) + wrap(*n.rhs, rhs_parens);
            } else {
                std::string out = n.name + "(";
                for (std::size_t i = 0; i < n.args.size(); ++i) {
                    if (i) out += ",";
                    out += print_expr(n.args[i]);
                }
                return out + ")";
            }
        },
        e.node);
}

void collect(const Expr& e, const std::string& home, std::set<CellAddress>& out) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, CellRef>) {
                out.insert(n.resolve(home));
            } else if constexpr (std::is_same_v<T, RangeRef>) {
                for (auto& a : n.expand(home)) out.insert(std::move(a));
            } else if constexpr (std::is_same_v<T, Negate>) {
                collect(*n.operand, home, out);
            } else if constexpr (std::is_same_v<T, Binary>) {
                collect(*n.lhs, home, out);
                collect(*n.rhs, home, out);
            } else if constexpr (std::is_same_v<T, Call>) {
                for (const auto& a : n.args) collect(a, home, out);
            }
        },
        e.node);
}

}  // namespace

std::vector<CellAddress> RangeRef::expand(const std::string& home_sheet) const {
    const auto& s = sheet ? *sheet : home_sheet;
    auto [c0, c1] = std::minmax(first_column, last_column);
    auto [r0, r1] = std::minmax(first_row, last_row);
    std::vector<CellAddress> out;
    out.reserve(static_cast<std::size_t>(c1 - c0 + 1) * static_cast<std::size_t>(r1 - r0 + 1));
    for (int r = r0; r <= r1; ++r)
        for (int c = c0; c <= c1; ++c) out.push_back(CellAddress{s, c, r});
    return out;
}

bool is_known_function(std::string_view upper_name) noexcept {
    return std::find(kFunctions.begin(), kFunctions.end(), upper_name) != kFunctions.end();
}

Expr parse(std::string_view source) { return Parser(source).parse_formula(); }

std::string print(const Expr& expr) { return "=" + print_expr(expr); }

std::set<CellAddress> extract_dependencies(const Expr& expr, const std::string& home_sheet) {
    std::set<CellAddress> out;
    collect(expr, home_sheet, out);
    return out;
}

}  // namespace shadow_audit::formula
