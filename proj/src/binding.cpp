#include "shadow_audit/binding.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "shadow_audit/error.hpp"
#include "shadow_audit/text.hpp"

namespace shadow_audit {

using model::Model;
using model::ParamRole;

std::vector<std::string> Binding::template_indices() const {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while ((pos = sheet_template.find('{', pos)) != std::string::npos) {
        auto close = sheet_template.find('}', pos);
        out.push_back(sheet_template.substr(pos + 1, close - pos - 1));
        pos = close + 1;
    }
    return out;
}

const Binding* BindingSet::input_for(std::string_view param) const noexcept {
    for (const auto& b : bindings)
        if (b.direction == Direction::Input && b.param == param) return &b;
    return nullptr;
}

namespace {

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class LineParser {
public:
    LineParser(std::string_view text, int line) : s_(text), line_(line) {}

    [[noreturn]] void fail(const std::string& what, std::vector<std::string> expected = {}) const {
        throw SyntaxError(pos_, std::move(expected),
                          "bindings line " + std::to_string(line_) + ", column " + std::to_string(pos_ + 1) + ": " + what);
    }

    void ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool at_end() {
        ws();
        return pos_ >= s_.size();
    }
    char peek() {
        ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }
    bool accept(char c) {
        if (peek() != c) return false;
        ++pos_;
        return true;
    }
    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'", {std::string("'") + c + "'"});
    }
    bool keyword(std::string_view kw) {
        ws();
        if (s_.substr(pos_, kw.size()) != kw) return false;
        if (pos_ + kw.size() < s_.size() && ident_char(s_[pos_ + kw.size()])) return false;
        pos_ += kw.size();
        return true;
    }
    void expect_keyword(std::string_view kw) {
        if (!keyword(kw)) fail("expected " + std::string(kw), {std::string(kw)});
    }
    std::string word() {
        ws();
        auto start = pos_;
        while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
        if (start == pos_) fail("expected a name or label", {"name"});
        return std::string(s_.substr(start, pos_ - start));
    }
    std::vector<std::string> word_list(char close) {
        std::vector<std::string> out;
        if (accept(close)) return out;
        do out.push_back(word());
        while (accept(','));
        expect(close);
        return out;
    }
    /// Everything up to the next whitespace.
    std::string raw() {
        ws();
        auto start = pos_;
        while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (start == pos_) fail("unexpected end of line");
        return std::string(s_.substr(start, pos_ - start));
    }
    double number() {
        auto start = pos_;
        auto text = raw();
        auto v = parse_decimal(text);
        if (!v) {
            pos_ = start;
            fail("expected a number", {"number"});
        }
        return *v;
    }
    int integer() {
        ws();
        auto start = pos_;
        if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) ++pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        auto v = parse_decimal(s_.substr(start, pos_ - start));
        if (!v || *v != static_cast<int>(*v)) {
            pos_ = start;
            fail("expected an integer", {"integer"});
        }
        return static_cast<int>(*v);
    }

    std::size_t pos() const { return pos_; }
    int line() const { return line_; }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
    int line_;
};

std::pair<int, int> cell_coords(std::string_view text, const LineParser& lp) {
    try {
        auto a = CellAddress::parse("X!" + std::string(text));
        return {a.column, a.row};
    } catch (const Error&) {
        lp.fail("'" + std::string(text) + "' is not a cell reference");
    }
}

// "Sheet!A1:B2", "Sheet!A1", "A1:B2" (when sheet is optional).
Region parse_region(const std::string& text, bool sheet_required, const LineParser& lp, std::string* sheet_out) {
    Region r;
    std::string_view rest = text;
    auto bang = rest.find('!');
    if (bang != std::string_view::npos) {
        r.sheet = std::string(rest.substr(0, bang));
        rest.remove_prefix(bang + 1);
    } else if (sheet_required) {
        lp.fail("expected Sheet!A1 or Sheet!A1:B2");
    }
    auto colon = rest.find(':');
    auto [c0, r0] = cell_coords(rest.substr(0, colon), lp);
    r.first_column = c0;
    r.first_row = r0;
    if (colon == std::string_view::npos) {
        r.last_column = c0;
        r.last_row = r0;
    } else {
        auto [c1, r1] = cell_coords(rest.substr(colon + 1), lp);
        r.last_column = c1;
        r.last_row = r1;
        if (c1 < c0 || r1 < r0) lp.fail("range corners must be top-left then bottom-right");
    }
    if (sheet_out) *sheet_out = r.sheet;
    return r;
}

bool valid_template(const std::string& t) {
    std::string plain;
    bool in = false;
    for (char c : t) {
        if (c == '{') {
            if (in) return false;
            in = true;
        } else if (c == '}') {
            if (!in) return false;
            in = false;
            plain += 'x';
        } else if (!in) {
            plain += c;
        } else if (!ident_char(c)) {
            return false;
        }
    }
    return !in && is_valid_sheet_name(plain);
}

const std::vector<std::string>& elements_of(const Model& m, const std::string& index) {
    return m.set_of_index(index)->elements;
}

void check_labels(const Model& m, const std::string& param, const std::string& index, const std::vector<std::string>& labels) {
    const auto& elems = elements_of(m, index);
    for (const auto& l : labels)
        if (std::find(elems.begin(), elems.end(), l) == elems.end())
            throw Error(ErrorKind::UnknownElement,
                        param + ": '" + l + "' is not an element of " + m.set_of_index(index)->name + " (index " + index + ")");
}

Axis parse_axis(LineParser& lp) {
    Axis axis;
    axis.index = lp.word();
    if (lp.accept('=')) {
        lp.expect('{');
        axis.labels = lp.word_list('}');
    } else if (lp.keyword("FROM")) {
        axis.header = parse_region(lp.raw(), false, lp, nullptr);
    } else {
        lp.fail("expected '= {labels}' or FROM range", {"'='", "FROM"});
    }
    return axis;
}

Binding parse_binding(LineParser& lp, Direction direction, const Model& m) {
    Binding b;
    b.direction = direction;
    b.line = lp.line();
    b.param = lp.word();
    if (lp.accept('(')) b.indices = lp.word_list(')');
    lp.expect_keyword("FROM");
    auto region_text = lp.raw();
    b.range = parse_region(region_text, true, lp, &b.sheet_template);
    b.range.sheet.clear();
    if (!valid_template(b.sheet_template)) lp.fail("invalid sheet name or template '" + b.sheet_template + "'");

    std::optional<std::pair<std::string, std::optional<std::vector<std::string>>>> block_spec;
    while (!lp.at_end()) {
        if (lp.keyword("ROWS")) {
            if (b.rows) lp.fail("ROWS given twice");
            b.rows = parse_axis(lp);
        } else if (lp.keyword("COLS")) {
            if (b.columns) lp.fail("COLS given twice");
            b.columns = parse_axis(lp);
        } else if (lp.keyword("BLOCK")) {
            if (b.block) lp.fail("BLOCK given twice");
            Block blk;
            blk.index = lp.word();
            std::optional<std::vector<std::string>> labels;
            if (lp.accept('=')) {
                lp.expect('{');
                labels = lp.word_list('}');
            }
            lp.expect_keyword("STEP");
            lp.expect('(');
            blk.row_step = lp.integer();
            lp.expect(',');
            blk.column_step = lp.integer();
            lp.expect(')');
            b.block = blk;
            block_spec.emplace(blk.index, std::move(labels));
        } else if (lp.keyword("TRIANGULAR")) {
            lp.expect_keyword("LOWER");
            b.triangular_lower = true;
        } else {
            lp.fail("unexpected clause", {"ROWS", "COLS", "BLOCK", "TRIANGULAR"});
        }
    }

    // Resolution against the model.
    const auto* p = m.find_param(b.param);
    if (!p) throw Error(ErrorKind::UnknownParam, "bindings line " + std::to_string(b.line) + ": '" + b.param + "'");
    if (direction == Direction::Output && p->role != ParamRole::Defined)
        throw Error(ErrorKind::NotDefinedParam, "OUTPUT " + b.param + " must be a defined parameter");
    if (direction == Direction::Input && p->role != ParamRole::Input)
        throw Error(ErrorKind::AssignToDefined, "INPUT " + b.param + " has a definition");
    if (b.indices != p->domain)
        throw Error(ErrorKind::DomainMismatch, b.param + ": binding lists " + format_tuple(b.indices) +
                                                   " but the parameter is declared over " + format_tuple(p->domain));

    std::vector<std::string> mapped;
    if (b.rows) mapped.push_back(b.rows->index);
    if (b.columns) mapped.push_back(b.columns->index);
    if (b.block) mapped.push_back(b.block->index);
    for (const auto& t : b.template_indices()) mapped.push_back(t);
    std::set<std::string> unique(mapped.begin(), mapped.end());
    if (unique.size() != mapped.size()) throw Error(ErrorKind::DomainMismatch, b.param + ": an index is mapped twice");
    for (const auto& i : p->domain)
        if (!unique.count(i)) throw Error(ErrorKind::DomainMismatch, b.param + ": index '" + i + "' is not mapped");
    for (const auto& i : mapped)
        if (std::find(p->domain.begin(), p->domain.end(), i) == p->domain.end())
            throw Error(ErrorKind::DomainMismatch, b.param + ": extra index '" + i + "' is not in the domain");

    auto check_axis = [&](const std::optional<Axis>& axis, int extent, const char* what) {
        if (!axis) {
            if (extent != 1)
                throw Error(ErrorKind::DomainMismatch, b.param + ": range spans " + std::to_string(extent) + " " + what +
                                                           " but no index maps them");
            return;
        }
        if (axis->labels) {
            if (static_cast<int>(axis->labels->size()) != extent)
                throw Error(ErrorKind::DomainMismatch, b.param + ": " + std::to_string(axis->labels->size()) + " labels for " +
                                                           std::to_string(extent) + " " + what);
            check_labels(m, b.param, axis->index, *axis->labels);
        } else {
            const auto& h = *axis->header;
            if (h.rows() * h.columns() != extent || (h.rows() != 1 && h.columns() != 1))
                throw Error(ErrorKind::DomainMismatch, b.param + ": header range must be one row or column of " +
                                                           std::to_string(extent) + " cells");
        }
    };
    check_axis(b.rows, b.range.rows(), "rows");
    check_axis(b.columns, b.range.columns(), "columns");

    if (b.block) {
        const auto& [index, labels] = *block_spec;
        b.block->labels = labels ? *labels : elements_of(m, index);
        check_labels(m, b.param, index, b.block->labels);
    }
    if (b.triangular_lower && (!b.rows || !b.columns || b.range.rows() != b.range.columns()))
        throw Error(ErrorKind::DomainMismatch, b.param + ": TRIANGULAR LOWER needs a square ROWS x COLS matrix");
    return b;
}

InputVar parse_var(LineParser& lp, const Model& m) {
    InputVar v;
    auto head = lp.raw();
    if (head.find('!') != std::string::npos) {
        try {
            v.target = CellAddress::parse(head);
        } catch (const Error&) {
            lp.fail("'" + head + "' is not a Sheet!A1 address");
        }
    } else {
        auto open = head.find('(');
        ParamTarget t;
        t.param = head.substr(0, open);
        if (open != std::string::npos) {
            auto close = head.find(')');
            if (close == std::string::npos) {
                // Labels separated by spaces: gather up to the closing paren.
                while (head.find(')') == std::string::npos) head += lp.raw();
                close = head.find(')');
            }
            for (auto l : split(std::string_view(head).substr(open + 1, close - open - 1), ',')) {
                auto label = trim(l);
                if (label.empty()) lp.fail("empty element label");
                t.tuple.emplace_back(label);
            }
        }
        const auto* p = m.find_param(t.param);
        if (!p) throw Error(ErrorKind::UnknownParam, "VAR " + t.param);
        if (p->role != ParamRole::Input) throw Error(ErrorKind::AssignToDefined, "VAR " + t.param + " has a definition");
        if (t.tuple.size() != p->domain.size())
            throw Error(ErrorKind::ArityMismatch, "VAR " + t.param + " takes " + std::to_string(p->domain.size()) + " labels");
        for (std::size_t i = 0; i < t.tuple.size(); ++i) check_labels(m, t.param, p->domain[i], {t.tuple[i]});
        v.target = std::move(t);
    }
    bool has_default = false, has_min = false, has_max = false;
    while (!lp.at_end()) {
        if (lp.keyword("DEFAULT")) v.default_value = lp.number(), has_default = true;
        else if (lp.keyword("MIN")) v.min = lp.number(), has_min = true;
        else if (lp.keyword("MAX")) v.max = lp.number(), has_max = true;
        else lp.fail("unexpected clause", {"DEFAULT", "MIN", "MAX"});
    }
    if (!has_default || !has_min || !has_max) lp.fail("VAR needs DEFAULT, MIN and MAX");
    validate(v);
    return v;
}

}  // namespace

BindingSet parse_bindings(std::string_view text, const Model& m) {
    BindingSet set;
    int line_no = 0;
    for (auto raw : split(text, '\n')) {
        ++line_no;
        auto line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        if (trim(line).empty()) continue;
        LineParser lp(line, line_no);
        if (lp.keyword("INPUT")) {
            auto b = parse_binding(lp, Direction::Input, m);
            if (set.input_for(b.param))
                throw Error(ErrorKind::DuplicateInputBinding, "bindings line " + std::to_string(line_no) + ": " + b.param);
            set.bindings.push_back(std::move(b));
        } else if (lp.keyword("OUTPUT")) {
            set.bindings.push_back(parse_binding(lp, Direction::Output, m));
        } else if (lp.keyword("VAR")) {
            auto v = parse_var(lp, m);
            for (const auto& other : set.vars)
                if (other.target == v.target) throw Error(ErrorKind::DuplicateName, "VAR " + v.name() + " declared twice");
            set.vars.push_back(std::move(v));
        } else {
            lp.fail("expected INPUT, OUTPUT or VAR", {"INPUT", "OUTPUT", "VAR"});
        }
    }
    for (const auto& v : set.vars)
        if (const auto* t = std::get_if<ParamTarget>(&v.target); t && !set.input_for(t->param))
            throw Error(ErrorKind::UnknownParam, "VAR " + v.name() + ": no INPUT binding for " + t->param);
    return set;
}

BindingSet load_bindings(const std::string& path, const Model& m) { return parse_bindings(read_file(path), m); }

namespace {

struct Placed {
    CellAddress address;
    Tuple tuple;
    int row_pos;
    int col_pos;
};

std::string label_of(const CellContent& c, const CellAddress& a) {
    switch (c.kind()) {
        case CellContent::Kind::Text: return c.as_text();
        case CellContent::Kind::Number: return format_number(c.as_number());
        default: throw Error(ErrorKind::UnknownElement, a.to_string() + ": header cell holds no label");
    }
}

std::vector<std::string> axis_labels(const Axis& axis, const std::string& sheet, const Model& m, const std::string& param,
                                     const Workbook& wb) {
    if (axis.labels) return *axis.labels;
    const auto& h = *axis.header;
    std::string hs = h.sheet.empty() ? sheet : h.sheet;
    const auto* s = wb.find_sheet(hs);
    if (!s) throw Error(ErrorKind::MissingSheet, "'" + hs + "' (header of " + param + ")");
    std::vector<std::string> out;
    for (int r = h.first_row; r <= h.last_row; ++r)
        for (int c = h.first_column; c <= h.last_column; ++c)
            out.push_back(label_of(s->at(c, r), CellAddress{hs, c, r}));
    check_labels(m, param, axis.index, out);
    return out;
}

std::vector<Placed> place(const Binding& b, const Model& m, const Workbook& wb) {
    const auto* p = m.find_param(b.param);
    auto tindices = b.template_indices();

    // Sheet instances: cartesian product over placeholder indices.
    std::vector<std::pair<std::string, std::map<std::string, std::string>>> sheets{{b.sheet_template, {}}};
    for (const auto& idx : tindices) {
        std::vector<std::pair<std::string, std::map<std::string, std::string>>> next;
        for (const auto& [name, bound] : sheets)
            for (const auto& e : elements_of(m, idx)) {
                auto n = name;
                auto key = "{" + idx + "}";
                for (auto pos = n.find(key); pos != std::string::npos; pos = n.find(key)) n.replace(pos, key.size(), e);
                auto bnd = bound;
                bnd[idx] = e;
                next.emplace_back(std::move(n), std::move(bnd));
            }
        sheets = std::move(next);
    }

    std::vector<Placed> out;
    std::set<Tuple> seen;
    for (const auto& [sheet_name, bound] : sheets) {
        if (!is_valid_sheet_name(sheet_name) || !wb.has_sheet(sheet_name))
            throw Error(ErrorKind::MissingSheet, "'" + sheet_name + "' (binding of " + b.param + ")");
        std::vector<std::string> row_labels = b.rows ? axis_labels(*b.rows, sheet_name, m, b.param, wb) : std::vector<std::string>{""};
        std::vector<std::string> col_labels =
            b.columns ? axis_labels(*b.columns, sheet_name, m, b.param, wb) : std::vector<std::string>{""};
        std::vector<std::string> block_labels = b.block ? b.block->labels : std::vector<std::string>{""};
        for (std::size_t k = 0; k < block_labels.size(); ++k) {
            for (std::size_t r = 0; r < row_labels.size(); ++r) {
                for (std::size_t c = 0; c < col_labels.size(); ++c) {
                    long row = b.range.first_row + static_cast<long>(r) + (b.block ? static_cast<long>(k) * b.block->row_step : 0);
                    long col = b.range.first_column + static_cast<long>(c) +
                               (b.block ? static_cast<long>(k) * b.block->column_step : 0);
                    if (row < 1 || col < 1 || row > kMaxRow || col > kMaxColumn)
                        throw Error(ErrorKind::RegionOutOfGrid, b.param + ": block " + block_labels[k] + " falls outside the grid");
                    Tuple t;
                    for (const auto& i : p->domain) {
                        if (b.rows && i == b.rows->index) t.push_back(row_labels[r]);
                        else if (b.columns && i == b.columns->index) t.push_back(col_labels[c]);
                        else if (b.block && i == b.block->index) t.push_back(block_labels[k]);
                        else t.push_back(bound.at(i));
                    }
                    if (!seen.insert(t).second)
                        throw Error(ErrorKind::DomainMismatch, b.param + format_tuple(t) + " is mapped to more than one cell");
                    out.push_back(Placed{CellAddress{sheet_name, static_cast<int>(col), static_cast<int>(row)}, std::move(t),
                                         static_cast<int>(r), static_cast<int>(c)});
                }
            }
        }
    }

    // Domain order: position of each label in its set, first index slowest.
    auto rank = [&](const Tuple& t) {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const auto& e = elements_of(m, p->domain[i]);
            out.push_back(static_cast<std::size_t>(std::find(e.begin(), e.end(), t[i]) - e.begin()));
        }
        return out;
    };
    std::stable_sort(out.begin(), out.end(), [&](const Placed& a, const Placed& z) { return rank(a.tuple) < rank(z.tuple); });
    return out;
}

}  // namespace

std::vector<MappedCell> expand(const Binding& binding, const Model& m, const Workbook& wb) {
    std::vector<MappedCell> out;
    for (auto& p : place(binding, m, wb)) out.push_back(MappedCell{std::move(p.address), std::move(p.tuple)});
    return out;
}

std::vector<Assignment> import_inputs(const Workbook& wb, const ValueGrid& values, const BindingSet& bindings, const Model& m) {
    std::vector<Assignment> out;
    for (const auto& b : bindings.bindings) {
        if (b.direction != Direction::Input) continue;
        for (auto& cell : expand(b, m, wb)) {
            const auto& content = wb.get_cell(cell.address);
            if (content.is_empty()) continue;
            if (content.kind() == CellContent::Kind::Text)
                throw Error(ErrorKind::Type, cell.address.to_string() + ": text in the input region of " + b.param);
            out.push_back(Assignment{b.param, std::move(cell.tuple), values.at(cell.address)});
        }
    }
    return out;
}

Workbook write_inputs(const Workbook& wb, const DataStore& store, const BindingSet& bindings) {
    Workbook out = wb;
    for (const auto& b : bindings.bindings) {
        if (b.direction != Direction::Input) continue;
        const auto& stored = store.values(b.param);
        for (const auto& cell : expand(b, store.model(), wb)) {
            auto it = stored.find(cell.tuple);
            out.set_cell(cell.address, it == stored.end() ? CellContent::empty() : CellContent::number(it->second));
        }
    }
    return out;
}

CellAddress resolve_target(const Target& target, const BindingSet& bindings, const Model& m, const Workbook& wb) {
    if (const auto* cell = std::get_if<CellAddress>(&target)) return *cell;
    const auto& t = std::get<ParamTarget>(target);
    const auto* b = bindings.input_for(t.param);
    if (!b) throw Error(ErrorKind::UnknownParam, t.param + " has no INPUT binding");
    for (const auto& cell : expand(*b, m, wb))
        if (cell.tuple == t.tuple) return cell.address;
    throw Error(ErrorKind::UnknownElement, target_name(target) + " is not covered by its INPUT binding");
}

Workbook inject_scenario(const Workbook& wb, const BindingSet& bindings, const Model& m, const Scenario& scenario) {
    Workbook out = wb;
    for (const auto& [target, value] : scenario.assignments) {
        auto addr = resolve_target(target, bindings, m, wb);
        if (!wb.has_sheet(addr.sheet)) throw Error(ErrorKind::MissingSheet, "'" + addr.sheet + "' (scenario target)");
        if (wb.get_cell(addr).kind() == CellContent::Kind::Formula)
            throw Error(ErrorKind::TargetIsFormula, addr.to_string() + " holds a formula, not an input");
        out.set_cell(addr, CellContent::number(value));
    }
    return out;
}

std::vector<OutputReading> read_outputs(const Workbook& wb, const ValueGrid& values, const BindingSet& bindings, const Model& m) {
    std::vector<OutputReading> out;
    for (const auto& b : bindings.bindings) {
        if (b.direction != Direction::Output) continue;
        for (auto& cell : expand(b, m, wb)) {
            OutputReading r{b.param, std::move(cell.tuple), cell.address, 0.0, false, std::nullopt};
            const auto& content = wb.get_cell(r.address);
            switch (content.kind()) {
                case CellContent::Kind::Empty: r.empty_cell = true; break;
                case CellContent::Kind::Text:
                    r.error = "TypeError: " + r.address.to_string() + " holds text '" + content.as_text() + "'";
                    break;
                default: r.value = values.at(r.address);
            }
            out.push_back(std::move(r));
        }
    }
    return out;
}

std::vector<std::string> check_triangular(const Workbook& wb, const BindingSet& bindings, const Model& m) {
    std::vector<std::string> out;
    for (const auto& b : bindings.bindings) {
        if (!b.triangular_lower) continue;
        for (const auto& p : place(b, m, wb))
            if (p.col_pos > p.row_pos && !wb.get_cell(p.address).is_empty())
                out.push_back(b.param + ": " + p.address.to_string() + " lies above the diagonal of a lower-triangular matrix");
    }
    return out;
}

}  // namespace shadow_audit
