#include "shadow_audit/shadow_eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "shadow_audit/error.hpp"
#include "shadow_audit/text.hpp"

namespace shadow_audit {

using namespace model;

std::string format_tuple(const Tuple& tuple) { return tuple.empty() ? "" : "(" + join(tuple, ",") + ")"; }

std::vector<Assignment> parse_data(std::string_view text) {
    std::vector<Assignment> out;
    std::size_t line_no = 0;
    for (auto raw : split(text, '\n')) {
        ++line_no;
        auto line = trim(raw);
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = trim(line.substr(0, hash));
        if (line.empty()) continue;
        auto fail = [&](const std::string& why) {
            return SyntaxError(line_no, {}, "data line " + std::to_string(line_no) + ": " + why);
        };
        auto eq = line.find('=');
        if (eq == std::string_view::npos) throw fail("expected 'Name(...) = number'");
        auto lhs = trim(line.substr(0, eq));
        auto value = parse_decimal(trim(line.substr(eq + 1)));
        if (!value) throw fail("value is not a number");
        Assignment a;
        auto open = lhs.find('(');
        if (open == std::string_view::npos) {
            a.param = std::string(lhs);
        } else {
            if (lhs.back() != ')') throw fail("missing ')'");
            a.param = std::string(trim(lhs.substr(0, open)));
            for (auto label : split(lhs.substr(open + 1, lhs.size() - open - 2), ',')) {
                auto l = trim(label);
                if (l.empty()) throw fail("empty element label");
                a.tuple.emplace_back(l);
            }
        }
        if (a.param.empty() || !std::all_of(a.param.begin(), a.param.end(), [](char c) {
                return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
            }))
            throw fail("invalid parameter name");
        a.value = *value;
        out.push_back(std::move(a));
    }
    return out;
}

std::vector<Assignment> load_data_file(const std::string& path) { return parse_data(read_file(path)); }

namespace {

/// A scalar during evaluation: a number, or an element label from an index
/// or FIRST().
struct Value {
    double number = 0.0;
    const std::string* label = nullptr;
};

class Evaluator {
public:
    Evaluator(const Model& m, const std::map<std::string, const std::map<Tuple, double>*, std::less<>>& data,
              const ParamDecl& target, const Tuple& tuple)
        : m_(m), data_(data), target_(target), tuple_(tuple) {
        for (std::size_t i = 0; i < target.domain.size(); ++i) env_.emplace_back(target.domain[i], &tuple[i]);
    }

    double run() { return number(eval(*target_.definition)); }

private:
    std::string where() const { return target_.name + format_tuple(tuple_); }

    double number(const Value& v) const {
        if (!v.label) return v.number;
        if (auto n = parse_decimal(*v.label)) return *n;
        throw Error(ErrorKind::Type, where() + ": element '" + *v.label + "' used as a number");
    }

    double checked(double v) const {
        if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, where());
        return v;
    }

    const std::string& bound(const std::string& index) const {
        for (auto it = env_.rbegin(); it != env_.rend(); ++it)
            if (it->first == index) return *it->second;
        throw Error(ErrorKind::UnknownIndex, where() + ": '" + index + "' unbound");
    }

    bool compare(BinaryOp op, const Value& l, const Value& r) const {
        if (l.label && r.label && (op == BinaryOp::Eq || op == BinaryOp::Ne))
            return (*l.label == *r.label) == (op == BinaryOp::Eq);
        double a = number(l), b = number(r);
        switch (op) {
            case BinaryOp::Eq: return a == b;
            case BinaryOp::Ne: return a != b;
            case BinaryOp::Lt: return a < b;
            case BinaryOp::Le: return a <= b;
            case BinaryOp::Gt: return a > b;
            default: return a >= b;
        }
    }

    Value eval(const Expr& e) {
        return std::visit([&](const auto& n) { return eval_node(n); }, e.node);
    }

    Value eval_node(const NumberLit& n) { return {n.value, nullptr}; }
    Value eval_node(const IndexRef& n) { return {0.0, &bound(n.index)}; }
    Value eval_node(const FirstOf& n) {
        const auto* s = m_.find_set(n.set);
        if (s->elements.empty()) throw Error(ErrorKind::EmptyAggregate, where() + ": FIRST of empty set '" + n.set + "'");
        return {0.0, &s->elements.front()};
    }
    Value eval_node(const ParamRef& n) {
        Tuple key;
        key.reserve(n.args.size());
        for (const auto& a : n.args) key.push_back(bound(a));
        const auto& values = *data_.at(n.name);
        auto it = values.find(key);
        return {it == values.end() ? 0.0 : it->second, nullptr};
    }
    Value eval_node(const Negate& n) { return {-number(eval(*n.operand)), nullptr}; }
    Value eval_node(const Binary& b) {
        Value l = eval(*b.lhs);
        Value r = eval(*b.rhs);
        switch (b.op) {
            case BinaryOp::Add: return {checked(number(l) + number(r)), nullptr};
            case BinaryOp::Sub: return {checked(number(l) - number(r)), nullptr};
            case BinaryOp::Mul: return {checked(number(l) * number(r)), nullptr};
            case BinaryOp::Div: {
                double d = number(r);
                if (d == 0.0) throw Error(ErrorKind::DivideByZero, where());
                return {checked(number(l) / d), nullptr};
            }
            case BinaryOp::Pow: return {checked(std::pow(number(l), number(r))), nullptr};
            default: return {compare(b.op, l, r) ? 1.0 : 0.0, nullptr};
        }
    }
    Value eval_node(const Conditional& c) {
        return number(eval(*c.condition)) != 0.0 ? eval(*c.then_branch) : eval(*c.else_branch);
    }
    Value eval_node(const Aggregate& a) {
        std::vector<const std::vector<std::string>*> domains;
        for (const auto& i : a.indices) domains.push_back(&m_.set_of_index(i)->elements);
        const auto base = env_.size();
        for (std::size_t k = 0; k < a.indices.size(); ++k) env_.emplace_back(a.indices[k], nullptr);

        double acc = 0.0;
        bool any = false;
        std::vector<std::size_t> pos(domains.size(), 0);
        bool empty = std::any_of(domains.begin(), domains.end(), [](auto* d) { return d->empty(); });
        while (!empty) {
            for (std::size_t k = 0; k < pos.size(); ++k) env_[base + k].second = &(*domains[k])[pos[k]];
            if (!a.filter || number(eval(**a.filter)) != 0.0) {
                double v = number(eval(*a.body));
                if (a.kind == AggregateKind::Sum) acc = checked(acc + v);
                else if (!any) acc = v;
                else acc = a.kind == AggregateKind::Max ? std::max(acc, v) : std::min(acc, v);
                any = true;
            }
            // Odometer over the bound indices, last index fastest.
            std::size_t k = pos.size();
            while (k > 0) {
                if (++pos[k - 1] < domains[k - 1]->size()) break;
                pos[k - 1] = 0;
                --k;
            }
            if (k == 0) break;
        }
        env_.resize(base);
        if (!any && a.kind != AggregateKind::Sum)
            throw Error(ErrorKind::EmptyAggregate, where() + ": MAX/MIN over no elements");
        return {acc, nullptr};
    }

    const Model& m_;
    const std::map<std::string, const std::map<Tuple, double>*, std::less<>>& data_;
    const ParamDecl& target_;
    const Tuple& tuple_;
    std::vector<std::pair<std::string, const std::string*>> env_;
};

}  // namespace

DataStore::DataStore(std::shared_ptr<const Model> model) : model_(std::move(model)) {
    for (const auto& p : model_->params()) slots_[p.name].valid = p.role == ParamRole::Input;
}

const ParamDecl& DataStore::param_or_throw(const std::string& name) const {
    const auto* p = model_->find_param(name);
    if (!p) throw Error(ErrorKind::UnknownParam, "'" + name + "'");
    return *p;
}

void DataStore::check_tuple(const ParamDecl& p, const Tuple& tuple) const {
    if (tuple.size() != p.domain.size())
        throw Error(ErrorKind::ArityMismatch, "'" + p.name + "' takes " + std::to_string(p.domain.size()) + " labels, got " +
                                                  std::to_string(tuple.size()));
    for (std::size_t i = 0; i < tuple.size(); ++i) {
        const auto& elems = model_->set_of_index(p.domain[i])->elements;
        if (std::find(elems.begin(), elems.end(), tuple[i]) == elems.end())
            throw Error(ErrorKind::UnknownElement, p.name + " position " + std::to_string(i + 1) + ": '" + tuple[i] +
                                                       "' is not an element of " + model_->set_of_index(p.domain[i])->name);
    }
}

void DataStore::set_input(const std::string& param, const Tuple& tuple, double value) {
    const auto& p = param_or_throw(param);
    if (p.role == ParamRole::Defined) throw Error(ErrorKind::AssignToDefined, "'" + param + "' has a definition");
    check_tuple(p, tuple);
    if (!std::isfinite(value)) throw Error(ErrorKind::InvalidArgument, param + format_tuple(tuple) + ": value not finite");
    slots_.find(param)->second.values[tuple] = value;
    for (const auto& d : model_->downstream(param)) slots_.find(d)->second.valid = false;
}

std::vector<Tuple> DataStore::domain_tuples(const std::string& param) const {
    const auto& p = param_or_throw(param);
    std::vector<Tuple> out{Tuple{}};
    for (const auto& index : p.domain) {
        std::vector<Tuple> next;
        for (const auto& prefix : out)
            for (const auto& e : model_->set_of_index(index)->elements) {
                auto t = prefix;
                t.push_back(e);
                next.push_back(std::move(t));
            }
        out = std::move(next);
    }
    return out;
}

void DataStore::compute(const ParamDecl& p) {
    std::map<std::string, const std::map<Tuple, double>*, std::less<>> view;
    for (const auto& r : model_->reads(p.name)) view.emplace(r, &slots_.find(r)->second.values);
    std::map<Tuple, double> result;
    for (auto& t : domain_tuples(p.name)) {
        double v = Evaluator(*model_, view, p, t).run();
        result.emplace(std::move(t), v);
    }
    auto& slot = slots_.find(p.name)->second;
    slot.values = std::move(result);
    slot.valid = true;
}

void DataStore::evaluate() {
    last_recomputed_.clear();
    for (const auto& name : model_->evaluation_order()) {
        if (slots_.find(name)->second.valid) continue;
        compute(*model_->find_param(name));
        last_recomputed_.push_back(name);
    }
}

bool DataStore::is_valid(const std::string& param) const {
    param_or_throw(param);
    return slots_.find(param)->second.valid;
}

double DataStore::query(const std::string& param, const Tuple& tuple) const {
    const auto& p = param_or_throw(param);
    check_tuple(p, tuple);
    const auto& slot = slots_.find(param)->second;
    if (!slot.valid) throw Error(ErrorKind::StaleValue, "'" + param + "' needs evaluation");
    auto it = slot.values.find(tuple);
    return it == slot.values.end() ? 0.0 : it->second;
}

const std::map<Tuple, double>& DataStore::values(const std::string& param) const {
    param_or_throw(param);
    return slots_.find(param)->second.values;
}

std::vector<std::string> DataStore::missing_input_warnings() const {
    std::vector<std::string> out;
    for (const auto& p : model_->params()) {
        if (p.role != ParamRole::Input) continue;
        std::size_t total = 1;
        for (const auto& i : p.domain) total *= model_->set_of_index(i)->elements.size();
        std::size_t have = slots_.find(p.name)->second.values.size();
        if (have < total)
            out.push_back(p.name + ": " + std::to_string(total - have) + " of " + std::to_string(total) +
                          " elements not loaded, read as 0");
    }
    return out;
}

DataStore load_data(std::shared_ptr<const Model> model, const std::vector<Assignment>& assignments) {
    DataStore store(std::move(model));
    for (const auto& a : assignments) store.set_input(a.param, a.tuple, a.value);
    return store;
}

}  // namespace shadow_audit
