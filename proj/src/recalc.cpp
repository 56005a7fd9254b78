#include "shadow_audit/recalc.hpp"

#include <cmath>
#include <deque>

#include "shadow_audit/error.hpp"

namespace shadow_audit {

namespace {

using formula::BinaryOp;
using formula::Expr;

class Evaluator {
public:
    Evaluator(const Workbook& wb, const ValueGrid& values, const CellAddress& home)
        : wb_(wb), values_(values), home_(home) {}

    double eval(const Expr& e) const {
        return std::visit([&](const auto& n) { return eval_node(n); }, e.node);
    }

private:
    double checked(double v) const {
        if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, home_.to_string() + ": result is not finite");
        return v;
    }

    // nullopt for Empty cells.
    std::optional<double> read(const CellAddress& a) const {
        const auto* sheet = wb_.find_sheet(a.sheet);
        if (!sheet)
            throw Error(ErrorKind::UnknownSheetRef, home_.to_string() + ": reference to missing sheet '" + a.sheet + "'");
        const auto& cell = sheet->at(a.column, a.row);
        switch (cell.kind()) {
            case CellContent::Kind::Empty: return std::nullopt;
            case CellContent::Kind::Number: return cell.as_number();
            case CellContent::Kind::Text:
                throw Error(ErrorKind::Type, home_.to_string() + ": reads text cell " + a.to_string());
            case CellContent::Kind::Formula: return values_.at(a);
        }
        return std::nullopt;
    }

    double eval_node(const formula::NumberLit& n) const { return n.value; }

    double eval_node(const formula::CellRef& r) const { return read(r.resolve(home_.sheet)).value_or(0.0); }

    double eval_node(const formula::RangeRef&) const {
        throw Error(ErrorKind::Type, home_.to_string() + ": range used as a scalar");
    }

    double eval_node(const formula::Negate& n) const { return -eval(*n.operand); }

    double eval_node(const formula::Binary& b) const {
        double l = eval(*b.lhs);
        double r = eval(*b.rhs);
        switch (b.op) {
            case BinaryOp::Add: return checked(l + r);
            case BinaryOp::Sub: return checked(l - r);
            case BinaryOp::Mul: return checked(l * r);
            case BinaryOp::Div:
                if (r == 0.0) throw Error(ErrorKind::DivideByZero, home_.to_string());
                return checked(l / r);
            case BinaryOp::Pow: return checked(std::pow(l, r));
            case BinaryOp::Eq: return l == r ? 1.0 : 0.0;
            case BinaryOp::Ne: return l != r ? 1.0 : 0.0;
            case BinaryOp::Lt: return l < r ? 1.0 : 0.0;
            case BinaryOp::Le: return l <= r ? 1.0 : 0.0;
            case BinaryOp::Gt: return l > r ? 1.0 : 0.0;
            case BinaryOp::Ge: return l >= r ? 1.0 : 0.0;
        }
        return 0.0;
    }

    // Values of aggregate arguments in order; empty cells inside ranges are
    // skipped, scalar arguments always count.
    std::vector<double> flatten(const std::vector<Expr>& args, std::size_t from) const {
        std::vector<double> out;
        for (std::size_t i = from; i < args.size(); ++i) {
            if (const auto* range = std::get_if<formula::RangeRef>(&args[i].node)) {
                for (const auto& a : range->expand(home_.sheet))
                    if (auto v = read(a)) out.push_back(*v);
            } else {
                out.push_back(eval(args[i]));
            }
        }
        return out;
    }

    double eval_node(const formula::Call& c) const {
        if (c.name == "IF") return eval(c.args[0]) != 0.0 ? eval(c.args[1]) : eval(c.args[2]);
        if (c.name == "NPV") {
            double rate = eval(c.args[0]);
            double growth = 1.0 + rate;
            if (growth == 0.0) throw Error(ErrorKind::DivideByZero, home_.to_string() + ": NPV rate of -1");
            double total = 0.0;
            double factor = 1.0;
            for (double v : flatten(c.args, 1)) {
                factor *= growth;
                total += v / factor;
            }
            return checked(total);
        }
        auto values = flatten(c.args, 0);
        if (c.name == "SUM") {
            double total = 0.0;
            for (double v : values) total += v;
            return checked(total);
        }
        if (c.name == "AVERAGE") {
            if (values.empty()) throw Error(ErrorKind::DivideByZero, home_.to_string() + ": AVERAGE of no values");
            double total = 0.0;
            for (double v : values) total += v;
            return checked(total / static_cast<double>(values.size()));
        }
        if (values.empty()) return 0.0;
        double best = values.front();
        for (double v : values) best = c.name == "MAX" ? std::max(best, v) : std::min(best, v);
        return best;
    }

    const Workbook& wb_;
    const ValueGrid& values_;
    const CellAddress& home_;
};

}  // namespace

Recalculator::Recalculator(Workbook wb) : wb_(std::move(wb)) {
    wb_.for_each_cell([&](const CellAddress& addr, const CellContent& cell) {
        if (cell.kind() == CellContent::Kind::Number) {
            values_[addr] = cell.as_number();
        } else if (cell.kind() == CellContent::Kind::Formula) {
            try {
                attach(addr, formula::parse(cell.as_formula()));
            } catch (const Error& e) {
                throw Error(e.kind(), addr.to_string() + ": " + e.detail());
            }
        }
    });
    rebuild_order();
    for (const auto& addr : order_) values_[addr] = evaluate_cell(addr);
}

const std::set<CellAddress>& Recalculator::precedents(const CellAddress& addr) const {
    static const std::set<CellAddress> none;
    auto it = precedents_.find(addr);
    return it == precedents_.end() ? none : it->second;
}

std::vector<CellAddress> Recalculator::dependents(const CellAddress& addr) const {
    auto it = dependents_.find(addr);
    if (it == dependents_.end()) return {};
    return {it->second.begin(), it->second.end()};
}

void Recalculator::attach(const CellAddress& addr, const formula::Expr& ast) {
    auto deps = formula::extract_dependencies(ast, addr.sheet);
    for (const auto& d : deps) dependents_[d].insert(addr);
    precedents_[addr] = std::move(deps);
    asts_.insert_or_assign(addr, ast);
}

void Recalculator::detach(const CellAddress& addr) {
    auto it = precedents_.find(addr);
    if (it == precedents_.end()) return;
    for (const auto& d : it->second) {
        auto dep = dependents_.find(d);
        dep->second.erase(addr);
        if (dep->second.empty()) dependents_.erase(dep);
    }
    precedents_.erase(it);
    asts_.erase(addr);
}

void Recalculator::rebuild_order() {
    enum class Mark { White, Grey, Black };
    std::map<CellAddress, Mark> marks;
    for (const auto& [addr, _] : asts_) marks[addr] = Mark::White;

    order_.clear();
    struct Frame {
        CellAddress addr;
        std::set<CellAddress>::const_iterator next;
    };
    for (const auto& [root, _] : asts_) {
        if (marks[root] != Mark::White) continue;
        std::vector<Frame> stack;
        marks[root] = Mark::Grey;
        stack.push_back({root, precedents_.at(root).begin()});
        while (!stack.empty()) {
            auto& top = stack.back();
            const auto& deps = precedents_.at(top.addr);
            if (top.next == deps.end()) {
                marks[top.addr] = Mark::Black;
                order_.push_back(top.addr);
                stack.pop_back();
                continue;
            }
            const CellAddress& dep = *top.next++;
            auto m = marks.find(dep);
            if (m == marks.end() || m->second == Mark::Black) continue;
            if (m->second == Mark::Grey) {
                std::vector<std::string> path;
                bool on_path = false;
                for (const auto& f : stack) {
                    on_path = on_path || f.addr == dep;
                    if (on_path) path.push_back(f.addr.to_string());
                }
                path.push_back(dep.to_string());
                std::string text;
                for (std::size_t i = 0; i < path.size(); ++i) text += (i ? " -> " : "") + path[i];
                throw Error(ErrorKind::Cycle, text, std::move(path));
            }
            m->second = Mark::Grey;
            stack.push_back({dep, precedents_.at(dep).begin()});
        }
    }
}

double Recalculator::evaluate_cell(const CellAddress& addr) const {
    return Evaluator(wb_, values_, addr).eval(asts_.at(addr));
}

const ValueGrid& Recalculator::set_cell(const CellAddress& addr, CellContent content) {
    Recalculator next = *this;
    next.detach(addr);
    next.values_.erase(addr);
    if (content.kind() == CellContent::Kind::Formula) {
        try {
            next.attach(addr, formula::parse(content.as_formula()));
        } catch (const Error& e) {
            throw Error(e.kind(), addr.to_string() + ": " + e.detail());
        }
    } else if (content.kind() == CellContent::Kind::Number) {
        next.values_[addr] = content.as_number();
    }
    next.wb_.set_cell(addr, std::move(content));
    next.rebuild_order();

    std::set<CellAddress> dirty;
    std::deque<CellAddress> queue{addr};
    if (next.asts_.count(addr)) dirty.insert(addr);
    while (!queue.empty()) {
        auto it = next.dependents_.find(queue.front());
        queue.pop_front();
        if (it == next.dependents_.end()) continue;
        for (const auto& d : it->second)
            if (dirty.insert(d).second) queue.push_back(d);
    }
    for (const auto& a : next.order_)
        if (dirty.count(a)) next.values_[a] = next.evaluate_cell(a);

    *this = std::move(next);
    return values_;
}

ValueGrid recalculate(const Workbook& wb) { return Recalculator(wb).values(); }

const ValueGrid& recalc_after_set(Recalculator& calc, const CellAddress& addr, CellContent content) {
    return calc.set_cell(addr, std::move(content));
}

}  // namespace shadow_audit
