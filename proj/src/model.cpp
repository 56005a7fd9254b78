#include "shadow_audit/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <functional>
#include <set>

#include "shadow_audit/error.hpp"
#include "shadow_audit/text.hpp"

namespace shadow_audit::model {

namespace {

enum class Tok { Ident, Number, String, Punct, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::size_t offset = 0;
    int line = 1;
    int column = 1;
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0;
    int line = 1;
    std::size_t line_start = 0;
    auto here = [&](Tok kind, std::string text, std::size_t start) {
        out.push_back(Token{kind, std::move(text), start, line, static_cast<int>(start - line_start) + 1});
    };
    while (i < src.size()) {
        char c = src[i];
        if (c == '\n') {
            ++line;
            line_start = ++i;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '#') {
            while (i < src.size() && src[i] != '\n') ++i;
            continue;
        }
        std::size_t start = i;
        if (is_ident_start(c)) {
            while (i < src.size() && is_ident_char(src[i])) ++i;
            here(Tok::Ident, std::string(src.substr(start, i - start)), start);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            while (i < src.size() && (std::isdigit(static_cast<unsigned char>(src[i])) || src[i] == '.')) ++i;
            if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
                std::size_t save = i++;
                if (i < src.size() && (src[i] == '+' || src[i] == '-')) ++i;
                if (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) {
                    while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
                } else {
                    i = save;
                }
            }
            // Labels such as 2001a are word-like; keep them whole.
            while (i < src.size() && is_ident_char(src[i])) ++i;
            here(Tok::Number, std::string(src.substr(start, i - start)), start);
            continue;
        }
        if (c == '"') {
            ++i;
            while (i < src.size() && src[i] != '"' && src[i] != '\n') ++i;
            if (i >= src.size() || src[i] != '"')
                throw SyntaxError(start, {"'\"'"}, "line " + std::to_string(line) + ": unterminated string");
            here(Tok::String, std::string(src.substr(start + 1, i - start - 1)), start);
            ++i;
            continue;
        }
        static constexpr std::string_view two[] = {":=", "<>", "<=", ">="};
        bool matched = false;
        for (auto t : two) {
            if (src.substr(i, 2) == t) {
                here(Tok::Punct, std::string(t), start);
                i += 2;
                matched = true;
                break;
            }
        }
        if (matched) continue;
        if (std::string_view("(){},;|+-*/^=<>").find(c) != std::string_view::npos) {
            here(Tok::Punct, std::string(1, c), start);
            ++i;
            continue;
        }
        throw SyntaxError(start, {}, "line " + std::to_string(line) + ": unexpected character '" + std::string(1, c) + "'");
    }
    out.push_back(Token{Tok::End, "", src.size(), line, static_cast<int>(src.size() - line_start) + 1});
    return out;
}

const std::set<std::string, std::less<>> kKeywords{"SET",  "PARAM", "DEF",   "SUM",   "MAX",    "MIN",    "IF",
                                                   "THEN", "ELSE",  "ENDIF", "FIRST", "SUBSET", "INCLUDE"};

struct RawSet {
    SetDecl decl;
    std::size_t offset;
};

class Parser {
public:
    explicit Parser(std::string_view src) : toks_(tokenize(src)) {}

    void parse(std::vector<SetDecl>& sets, std::vector<ParamDecl>& params) {
        while (cur().kind != Tok::End) {
            const auto& t = cur();
            if (is_kw("SET")) sets.push_back(parse_set());
            else if (is_kw("PARAM")) params.push_back(parse_param());
            else if (is_kw("DEF")) params.push_back(parse_def());
            else if (is_kw("INCLUDE"))
                fail({}, "INCLUDE must be resolved before parsing");
            else
                fail({"SET", "PARAM", "DEF", "INCLUDE"}, "unexpected '" + t.text + "'");
        }
    }

private:
    const Token& cur() const { return toks_[pos_]; }
    bool is_kw(std::string_view kw) const { return cur().kind == Tok::Ident && cur().text == kw; }
    bool is_punct(std::string_view p) const { return cur().kind == Tok::Punct && cur().text == p; }

    [[noreturn]] void fail(std::vector<std::string> expected, const std::string& detail) const {
        const auto& t = cur();
        throw SyntaxError(t.offset, std::move(expected),
                          "line " + std::to_string(t.line) + ", column " + std::to_string(t.column) + ": " + detail);
    }

    void expect_punct(std::string_view p) {
        if (!is_punct(p)) fail({"'" + std::string(p) + "'"}, "found '" + cur().text + "'");
        ++pos_;
    }
    bool accept_punct(std::string_view p) {
        if (!is_punct(p)) return false;
        ++pos_;
        return true;
    }
    void expect_kw(std::string_view kw) {
        if (!is_kw(kw)) fail({std::string(kw)}, "found '" + cur().text + "'");
        ++pos_;
    }

    std::string name() {
        if (cur().kind != Tok::Ident || kKeywords.count(cur().text)) fail({"name"}, "found '" + cur().text + "'");
        return toks_[pos_++].text;
    }

    std::vector<std::string> name_list() {
        std::vector<std::string> out{name()};
        while (accept_punct(",")) out.push_back(name());
        return out;
    }

    std::string label() {
        if (cur().kind == Tok::Ident || cur().kind == Tok::Number) return toks_[pos_++].text;
        fail({"element label"}, "found '" + cur().text + "'");
    }

    SetDecl parse_set() {
        expect_kw("SET");
        SetDecl s;
        s.name = name();
        expect_punct("(");
        s.indices = name_list();
        expect_punct(")");
        if (is_kw("SUBSET")) {
            ++pos_;
            s.parent = name();
        }
        if (accept_punct(":=")) {
            expect_punct("{");
            std::vector<std::string> labels;
            if (!is_punct("}")) {
                labels.push_back(label());
                while (accept_punct(",")) labels.push_back(label());
            }
            expect_punct("}");
            s.declared_elements = std::move(labels);
        }
        expect_punct(";");
        return s;
    }

    ParamDecl parse_param() {
        expect_kw("PARAM");
        ParamDecl p;
        p.name = name();
        if (accept_punct("(")) {
            p.domain = name_list();
            expect_punct(")");
        }
        expect_punct(";");
        return p;
    }

    ParamDecl parse_def() {
        expect_kw("DEF");
        ParamDecl p;
        p.role = ParamRole::Defined;
        p.name = name();
        if (accept_punct("(")) {
            p.domain = name_list();
            expect_punct(")");
        }
        expect_punct(":=");
        p.definition = parse_expr();
        expect_punct(";");
        return p;
    }

    Expr parse_expr() {
        Expr lhs = parse_add();
        static constexpr std::pair<std::string_view, BinaryOp> ops[] = {
            {"=", BinaryOp::Eq}, {"<>", BinaryOp::Ne}, {"<", BinaryOp::Lt},
            {"<=", BinaryOp::Le}, {">", BinaryOp::Gt}, {">=", BinaryOp::Ge},
        };
        for (auto [text, op] : ops)
            if (accept_punct(text)) return Expr{Binary{op, std::move(lhs), parse_add()}};
        return lhs;
    }

    Expr parse_add() {
        Expr lhs = parse_mul();
        for (;;) {
            if (accept_punct("+")) lhs = Expr{Binary{BinaryOp::Add, std::move(lhs), parse_mul()}};
            else if (accept_punct("-")) lhs = Expr{Binary{BinaryOp::Sub, std::move(lhs), parse_mul()}};
            else return lhs;
        }
    }

    Expr parse_mul() {
        Expr lhs = parse_unary();
        for (;;) {
            if (accept_punct("*")) lhs = Expr{Binary{BinaryOp::Mul, std::move(lhs), parse_unary()}};
            else if (accept_punct("/")) lhs = Expr{Binary{BinaryOp::Div, std::move(lhs), parse_unary()}};
            else return lhs;
        }
    }

    Expr parse_unary() {
        if (accept_punct("-")) return Expr{Negate{parse_unary()}};
        Expr base = parse_primary();
        if (accept_punct("^")) return Expr{Binary{BinaryOp::Pow, std::move(base), parse_unary()}};
        return base;
    }

    Expr parse_aggregate(AggregateKind kind) {
        ++pos_;
        expect_punct("(");
        Aggregate agg{kind, {}, std::nullopt, Expr{NumberLit{0}}};
        if (accept_punct("(")) {
            agg.indices = name_list();
            expect_punct(")");
        } else {
            agg.indices = {name()};
        }
        if (accept_punct("|")) agg.filter = parse_expr();
        expect_punct(",");
        agg.body = parse_expr();
        expect_punct(")");
        return Expr{std::move(agg)};
    }

    Expr parse_primary() {
        const auto& t = cur();
        if (t.kind == Tok::Number) {
            auto v = parse_decimal(t.text);
            if (!v) fail({"number"}, "malformed number '" + t.text + "'");
            ++pos_;
            return Expr{NumberLit{*v}};
        }
        if (accept_punct("(")) {
            Expr inner = parse_expr();
            expect_punct(")");
            return inner;
        }
        if (is_kw("SUM")) return parse_aggregate(AggregateKind::Sum);
        if (is_kw("MAX")) return parse_aggregate(AggregateKind::Max);
        if (is_kw("MIN")) return parse_aggregate(AggregateKind::Min);
        if (is_kw("IF")) {
            ++pos_;
            Expr cond = parse_expr();
            expect_kw("THEN");
            Expr a = parse_expr();
            expect_kw("ELSE");
            Expr b = parse_expr();
            expect_kw("ENDIF");
            return Expr{Conditional{std::move(cond), std::move(a), std::move(b)}};
        }
        if (is_kw("FIRST")) {
            ++pos_;
            expect_punct("(");
            auto set = name();
            expect_punct(")");
            return Expr{FirstOf{std::move(set)}};
        }
        if (t.kind == Tok::Ident && !kKeywords.count(t.text)) {
            auto n = name();
            if (accept_punct("(")) {
                auto args = name_list();
                expect_punct(")");
                return Expr{ParamRef{std::move(n), std::move(args)}};
            }
            // Bare name: an index or a scalar parameter, settled on resolve.
            return Expr{IndexRef{std::move(n)}};
        }
        fail({"number", "name", "'('", "'-'", "SUM", "MAX", "MIN", "IF", "FIRST"}, "found '" + t.text + "'");
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

// Name resolution and checks over a whole declaration list.
class Resolver {
public:
    Resolver(std::vector<SetDecl>& sets, std::vector<ParamDecl>& params) : sets_(sets), params_(params) {}

    void run(std::map<std::string, std::vector<std::string>, std::less<>>& reads, std::vector<std::string>& order) {
        index_names();
        resolve_sets();
        for (auto& p : params_) {
            check_domain(p);
            if (p.definition) {
                std::set<std::string> read;
                scope_.assign(p.domain.begin(), p.domain.end());
                current_ = &p;
                resolve(*p.definition, read);
                reads[p.name] = {read.begin(), read.end()};
            } else {
                reads[p.name] = {};
            }
        }
        order = topo_order(reads);
    }

private:
    [[noreturn]] static void raise(ErrorKind kind, const std::string& msg, std::vector<std::string> trail = {}) {
        throw Error(kind, msg, std::move(trail));
    }

    void index_names() {
        std::set<std::string> names;
        for (const auto& s : sets_)
            if (!names.insert(s.name).second) raise(ErrorKind::DuplicateName, "'" + s.name + "' declared twice");
        for (const auto& p : params_)
            if (!names.insert(p.name).second) raise(ErrorKind::DuplicateName, "'" + p.name + "' declared twice");
        for (const auto& s : sets_)
            for (const auto& i : s.indices) {
                if (!names.insert(i).second)
                    raise(ErrorKind::DuplicateName, "index '" + i + "' clashes with another declaration");
                index_set_[i] = &s;
            }
    }

    const SetDecl& set_named(const std::string& n) const {
        for (const auto& s : sets_)
            if (s.name == n) return s;
        raise(ErrorKind::UnknownSet, "'" + n + "'");
    }

    void resolve_sets() {
        std::set<std::string> done, active;
        std::function<void(SetDecl&)> visit = [&](SetDecl& s) {
            if (done.count(s.name)) return;
            if (!active.insert(s.name).second) raise(ErrorKind::CyclicDefinition, "subset chain through '" + s.name + "'");
            if (s.parent) {
                auto it = std::find_if(sets_.begin(), sets_.end(), [&](const auto& x) { return x.name == *s.parent; });
                if (it == sets_.end()) raise(ErrorKind::UnknownSet, "'" + *s.parent + "', parent of '" + s.name + "'");
                auto& parent = *it;
                visit(parent);
                if (s.declared_elements) {
                    for (const auto& e : *s.declared_elements)
                        if (std::find(parent.elements.begin(), parent.elements.end(), e) == parent.elements.end())
                            raise(ErrorKind::UnknownElement,
                                  "'" + e + "' of subset '" + s.name + "' is not an element of '" + parent.name + "'");
                    s.elements = *s.declared_elements;
                } else {
                    s.elements = parent.elements;
                }
            } else {
                s.elements = s.declared_elements.value_or(std::vector<std::string>{});
            }
            std::set<std::string> seen;
            for (const auto& e : s.elements)
                if (!seen.insert(e).second) raise(ErrorKind::DuplicateName, "element '" + e + "' repeated in '" + s.name + "'");
            active.erase(s.name);
            done.insert(s.name);
        };
        for (auto& s : sets_) visit(s);
    }

    void check_domain(const ParamDecl& p) const {
        std::set<std::string> seen;
        for (const auto& i : p.domain) {
            if (!index_set_.count(i)) raise(ErrorKind::UnknownIndex, "'" + i + "' in the domain of '" + p.name + "'");
            if (!seen.insert(i).second) raise(ErrorKind::DuplicateName, "index '" + i + "' repeated in '" + p.name + "'");
        }
    }

    const ParamDecl* param_named(const std::string& n) const {
        for (const auto& p : params_)
            if (p.name == n) return &p;
        return nullptr;
    }

    bool within(const SetDecl* s, const SetDecl* ancestor) const {
        while (s) {
            if (s == ancestor) return true;
            s = s->parent ? &set_named(*s->parent) : nullptr;
        }
        return false;
    }

    void require_bound(const std::string& index) const {
        if (!index_set_.count(index)) raise(ErrorKind::UnknownIndex, "'" + index + "' in the definition of '" + current_->name + "'");
        if (std::find(scope_.begin(), scope_.end(), index) == scope_.end())
            raise(ErrorKind::FreeIndex, "index '" + index + "' is free in the definition of '" + current_->name +
                                            "' but not in its domain");
    }

    void resolve(Expr& e, std::set<std::string>& read) {
        if (auto* ir = std::get_if<IndexRef>(&e.node)) {
            if (index_set_.count(ir->index)) {
                require_bound(ir->index);
                return;
            }
            ParamRef scalar{ir->index, {}};
            e.node = std::move(scalar);
        }
        std::visit(
            [&](auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, ParamRef>) {
                    const auto* target = param_named(n.name);
                    if (!target) raise(ErrorKind::UnknownParam, "'" + n.name + "' in the definition of '" + current_->name + "'");
                    if (n.args.size() != target->domain.size())
                        raise(ErrorKind::ArityMismatch, "'" + n.name + "' takes " + std::to_string(target->domain.size()) +
                                                            " indices, " + std::to_string(n.args.size()) + " given in '" +
                                                            current_->name + "'");
                    for (std::size_t k = 0; k < n.args.size(); ++k) {
                        require_bound(n.args[k]);
                        const auto* have = index_set_.at(n.args[k]);
                        const auto* want = index_set_.at(target->domain[k]);
                        if (!within(have, want))
                            raise(ErrorKind::DomainMismatch, "index '" + n.args[k] + "' ranges over '" + have->name +
                                                                 "', which is not within '" + want->name + "' required by '" +
                                                                 n.name + "'");
                    }
                    read.insert(n.name);
                } else if constexpr (std::is_same_v<T, FirstOf>) {
                    set_named(n.set);
                } else if constexpr (std::is_same_v<T, Negate>) {
                    resolve(*n.operand, read);
                } else if constexpr (std::is_same_v<T, Binary>) {
                    resolve(*n.lhs, read);
                    resolve(*n.rhs, read);
                } else if constexpr (std::is_same_v<T, Conditional>) {
                    resolve(*n.condition, read);
                    resolve(*n.then_branch, read);
                    resolve(*n.else_branch, read);
                } else if constexpr (std::is_same_v<T, Aggregate>) {
                    auto saved = scope_.size();
                    for (const auto& i : n.indices) {
                        if (!index_set_.count(i))
                            raise(ErrorKind::UnknownIndex, "'" + i + "' in the definition of '" + current_->name + "'");
                        if (std::find(scope_.begin(), scope_.end(), i) != scope_.end())
                            raise(ErrorKind::DuplicateName, "index '" + i + "' is already bound in '" + current_->name + "'");
                        scope_.push_back(i);
                    }
                    if (n.filter) resolve(**n.filter, read);
                    resolve(*n.body, read);
                    scope_.resize(saved);
                }
            },
            e.node);
    }

    std::vector<std::string> topo_order(const std::map<std::string, std::vector<std::string>, std::less<>>& reads) const {
        std::vector<std::string> order;
        std::map<std::string, int> mark;  // 1 = on stack, 2 = done
        std::vector<std::string> stack;
        std::function<void(const std::string&)> visit = [&](const std::string& n) {
            const auto* p = param_named(n);
            if (!p || p->role != ParamRole::Defined || mark[n] == 2) return;
            if (mark[n] == 1) {
                std::vector<std::string> path(std::find(stack.begin(), stack.end(), n), stack.end());
                path.push_back(n);
                raise(ErrorKind::CyclicDefinition, join(path, " -> "), path);
            }
            mark[n] = 1;
            stack.push_back(n);
            for (const auto& dep : reads.at(n)) visit(dep);
            stack.pop_back();
            mark[n] = 2;
            order.push_back(n);
        };
        for (const auto& p : params_) visit(p.name);
        return order;
    }

    std::vector<SetDecl>& sets_;
    std::vector<ParamDecl>& params_;
    std::map<std::string, const SetDecl*> index_set_;
    std::vector<std::string> scope_;
    const ParamDecl* current_ = nullptr;
};

// Loosest first; shared with the formula printer's conventions.
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
        case BinaryOp::Add: return " + ";
        case BinaryOp::Sub: return " - ";
        case BinaryOp::Mul: return " * ";
        case BinaryOp::Div: return " / ";
        case BinaryOp::Pow: return "^";
        case BinaryOp::Eq: return " = ";
        case BinaryOp::Ne: return " <> ";
        case BinaryOp::Lt: return " < ";
        case BinaryOp::Le: return " <= ";
        case BinaryOp::Gt: return " > ";
        case BinaryOp::Ge: return " >= ";
    }
    return " ? ";
}

std::string wrap(const Expr& e, bool parens) {
    auto s = print_expr(e);
    return parens ? "(" + s + ")" : s;
}

std::string domain_text(const std::vector<std::string>& domain) {
    return domain.empty() ? "" : "(" + join(domain, ", ") + ")";
}

}  // namespace

std::string print_expr(const Expr& e) {
    return std::visit(
        [&](const auto& n) -> std::string {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, NumberLit>) {
                return format_number(n.value);
            } else if constexpr (std::is_same_v<T, IndexRef>) {
                return n.index;
            } else if constexpr (std::is_same_v<T, ParamRef>) {
                return n.name + domain_text(n.args);
            } else if constexpr (std::is_same_v<T, FirstOf>) {
                return "FIRST(" + n.set + ")";
            } else if constexpr (std::is_same_v<T, Negate>) {
                return "-" + wrap(*n.operand, level_of(*n.operand) < kUnary);
            } else if constexpr (std::is_same_v<T, Binary>) {
                Level self = level_of(e);
                Level l = level_of(*n.lhs);
                Level r = level_of(*n.rhs);
                bool lp, rp;
                if (n.op == BinaryOp::Pow) {
                    lp = l < kAtom;
                    rp = r < kUnary;
                } else {
                    lp = l < self || (l == self && self == kCmp);
                    rp = r <= self;
                }
                return wrap(*n.lhs, lp) + std::string(op_text(n.op)) + wrap(*n.rhs, rp);
            } else if constexpr (std::is_same_v<T, Aggregate>) {
                static constexpr std::string_view names[] = {"SUM", "MAX", "MIN"};
                std::string out(names[static_cast<int>(n.kind)]);
                out += n.indices.size() == 1 ? "(" + n.indices.front() : "((" + join(n.indices, ", ") + ")";
                if (n.filter) out += " | " + print_expr(**n.filter);
                return out + ", " + print_expr(*n.body) + ")";
            } else {
                return "IF " + print_expr(*n.condition) + " THEN " + print_expr(*n.then_branch) + " ELSE " +
                       print_expr(*n.else_branch) + " ENDIF";
            }
        },
        e.node);
}

const SetDecl* Model::find_set(std::string_view name) const noexcept {
    for (const auto& s : sets_)
        if (s.name == name) return &s;
    return nullptr;
}

const ParamDecl* Model::find_param(std::string_view name) const noexcept {
    for (const auto& p : params_)
        if (p.name == name) return &p;
    return nullptr;
}

const SetDecl* Model::set_of_index(std::string_view index) const noexcept {
    for (const auto& s : sets_)
        if (std::find(s.indices.begin(), s.indices.end(), index) != s.indices.end()) return &s;
    return nullptr;
}

bool Model::is_within(std::string_view set, std::string_view ancestor) const noexcept {
    const SetDecl* s = find_set(set);
    while (s) {
        if (s->name == ancestor) return true;
        s = s->parent ? find_set(*s->parent) : nullptr;
    }
    return false;
}

const std::vector<std::string>& Model::reads(std::string_view param) const {
    auto it = reads_.find(param);
    if (it == reads_.end()) throw Error(ErrorKind::UnknownParam, "'" + std::string(param) + "'");
    return it->second;
}

std::vector<std::string> Model::downstream(std::string_view param) const {
    std::set<std::string, std::less<>> hit{std::string(param)};
    std::vector<std::string> out;
    for (const auto& d : order_) {
        const auto& r = reads_.at(d);
        if (std::any_of(r.begin(), r.end(), [&](const auto& x) { return hit.count(x) > 0; })) {
            hit.insert(d);
            out.push_back(d);
        }
    }
    return out;
}

std::vector<std::string> Model::unused_inputs() const {
    std::set<std::string> used;
    for (const auto& [_, r] : reads_) used.insert(r.begin(), r.end());
    std::vector<std::string> out;
    for (const auto& p : params_)
        if (p.role == ParamRole::Input && !used.count(p.name)) out.push_back(p.name);
    return out;
}

std::size_t Model::definition_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(params_.begin(), params_.end(), [](const auto& p) { return p.role == ParamRole::Defined; }));
}

std::size_t Model::definitions_fingerprint() const {
    std::string text;
    for (const auto& p : params_)
        if (p.definition) text += p.name + domain_text(p.domain) + ":=" + print_expr(*p.definition) + ";";
    return std::hash<std::string>{}(text);
}

Model parse_model(std::string_view source) {
    Model m;
    Parser(source).parse(m.sets_, m.params_);
    Resolver(m.sets_, m.params_).run(m.reads_, m.order_);
    return m;
}

std::string print_model(const Model& model) {
    std::string out;
    for (const auto& s : model.sets()) {
        out += "SET " + s.name + "(" + join(s.indices, ", ") + ")";
        if (s.parent) out += " SUBSET " + *s.parent;
        if (s.declared_elements) out += " := {" + join(*s.declared_elements, ", ") + "}";
        out += ";\n";
    }
    for (const auto& p : model.params()) {
        if (p.role == ParamRole::Input)
            out += "PARAM " + p.name + domain_text(p.domain) + ";\n";
        else
            out += "DEF " + p.name + domain_text(p.domain) + " := " + print_expr(*p.definition) + ";\n";
    }
    return out;
}

namespace {

namespace fs = std::filesystem;

// Parses `INCLUDE "file";` (with optional trailing comment); nullopt when the
// line is not an include directive.
std::optional<std::string> include_target(std::string_view line, const std::string& where) {
    auto t = trim(line);
    if (t.substr(0, 7) != "INCLUDE" || (t.size() > 7 && is_ident_char(t[7]))) return std::nullopt;
    auto rest = trim(t.substr(7));
    auto bad = [&] { return Error(ErrorKind::Syntax, where + ": expected INCLUDE \"file\";"); };
    if (rest.empty() || rest.front() != '"') throw bad();
    auto close = rest.find('"', 1);
    if (close == std::string_view::npos) throw bad();
    auto target = std::string(rest.substr(1, close - 1));
    auto tail = trim(rest.substr(close + 1));
    if (tail.empty() || tail.front() != ';') throw bad();
    tail = trim(tail.substr(1));
    if (!tail.empty() && tail.front() != '#') throw bad();
    return target;
}

std::string splice(std::string_view source, const std::string& origin, const std::vector<std::string>& include_paths,
                   std::vector<std::string>& chain) {
    std::string out;
    std::size_t line_no = 0;
    fs::path base = fs::path(origin).parent_path();
    for (auto line : split(source, '\n')) {
        ++line_no;
        auto target = include_target(line, origin + ":" + std::to_string(line_no));
        if (!target) {
            out += line;
            out += '\n';
            continue;
        }
        std::vector<fs::path> candidates{base / *target};
        for (const auto& dir : include_paths) candidates.push_back(fs::path(dir) / *target);
        std::optional<fs::path> found;
        for (const auto& c : candidates)
            if (fs::is_regular_file(c)) {
                found = c;
                break;
            }
        auto trail = chain;
        trail.push_back(*target);
        if (!found) throw Error(ErrorKind::Io, "cannot find include '" + *target + "' (" + join(trail, " -> ") + ")", trail);
        auto canonical = fs::weakly_canonical(*found).string();
        if (std::find(chain.begin(), chain.end(), canonical) != chain.end()) {
            trail.back() = canonical;
            throw Error(ErrorKind::IncludeCycle, join(trail, " -> "), trail);
        }
        chain.push_back(canonical);
        std::string body;
        try {
            body = read_file(canonical);
        } catch (const Error&) {
            throw Error(ErrorKind::Io, "cannot read include '" + canonical + "' (" + join(chain, " -> ") + ")", chain);
        }
        out += splice(body, canonical, include_paths, chain);
        chain.pop_back();
    }
    if (!source.empty() && source.back() == '\n') out.pop_back();
    return out;
}

}  // namespace

std::string include_resolve(std::string_view source, const std::string& origin,
                            const std::vector<std::string>& include_paths) {
    std::vector<std::string> chain;
    if (fs::exists(origin)) chain.push_back(fs::weakly_canonical(origin).string());
    else chain.push_back(origin);
    return splice(source, origin, include_paths, chain);
}

Model load_model(const std::string& path, const std::vector<std::string>& include_paths) {
    return parse_model(include_resolve(read_file(path), path, include_paths));
}

}  // namespace shadow_audit::model
