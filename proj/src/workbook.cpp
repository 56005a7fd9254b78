#include "shadow_audit/workbook.hpp"

#include <algorithm>
#include <cmath>

#include "shadow_audit/error.hpp"
#include "shadow_audit/text.hpp"

namespace shadow_audit {

bool is_valid_sheet_name(std::string_view name) noexcept {
    if (name.empty()) return false;
    return std::all_of(name.begin(), name.end(), [](char c) {
        return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    });
}

int column_from_letters(std::string_view letters) noexcept {
    if (letters.empty() || letters.size() > 3) return 0;
    int col = 0;
    for (char c : letters) {
        if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
        if (c < 'A' || c > 'Z') return 0;
        col = col * 26 + (c - 'A' + 1);
    }
    return col <= kMaxColumn ? col : 0;
}

std::string column_to_letters(int column) {
    std::string out;
    while (column > 0) {
        int rem = (column - 1) % 26;
        out.insert(out.begin(), static_cast<char>('A' + rem));
        column = (column - 1) / 26;
    }
    return out;
}

std::string CellAddress::to_string() const {
    return sheet + "!" + column_to_letters(column) + std::to_string(row);
}

CellAddress CellAddress::parse(std::string_view text) {
    auto bang = text.find('!');
    auto fail = [&] { return Error(ErrorKind::InvalidAddress, "'" + std::string(text) + "' is not a Sheet!A1 address"); };
    if (bang == std::string_view::npos) throw fail();
    auto sheet = text.substr(0, bang);
    auto rest = text.substr(bang + 1);
    if (!is_valid_sheet_name(sheet)) throw fail();
    std::size_t i = 0;
    while (i < rest.size() && ((rest[i] >= 'A' && rest[i] <= 'Z') || (rest[i] >= 'a' && rest[i] <= 'z'))) ++i;
    int col = column_from_letters(rest.substr(0, i));
    auto digits = rest.substr(i);
    if (col == 0 || digits.empty() || digits.size() > 7 || digits.front() == '0') throw fail();
    int row = 0;
    for (char c : digits) {
        if (c < '0' || c > '9') throw fail();
        row = row * 10 + (c - '0');
    }
    if (row > kMaxRow) throw fail();
    return CellAddress{std::string(sheet), col, row};
}

CellContent CellContent::number(double value) {
    if (!std::isfinite(value)) throw Error(ErrorKind::InvalidArgument, "cell numbers must be finite");
    CellContent c;
    c.value_ = value;
    return c;
}

CellContent CellContent::text(std::string value) {
    CellContent c;
    c.value_ = Text{std::move(value)};
    return c;
}

CellContent CellContent::formula(std::string source) {
    if (source.empty() || source.front() != '=')
        throw Error(ErrorKind::InvalidArgument, "formula source must begin with '='");
    CellContent c;
    c.value_ = Formula{std::move(source)};
    return c;
}

CellContent CellContent::classify(std::string_view field) {
    field = trim(field);
    if (field.empty()) return empty();
    if (field.front() == '=') return formula(std::string(field));
    if (auto n = parse_decimal(field)) return number(*n);
    return text(std::string(field));
}

namespace {

const CellContent& empty_cell() {
    static const CellContent cell;
    return cell;
}

}  // namespace

Sheet::Sheet(std::string name) : name_(std::move(name)) {}

const CellContent& Sheet::at(int column, int row) const {
    if (row < 1 || row > rows() || column < 1 || column > columns_) return empty_cell();
    return grid_[row - 1][column - 1];
}

void Sheet::set(int column, int row, CellContent content) {
    if (column < 1 || row < 1 || column > kMaxColumn || row > kMaxRow)
        throw Error(ErrorKind::InvalidAddress, "cell position out of range");
    if (row > rows()) grid_.resize(row);
    if (column > columns_) columns_ = column;
    for (auto& r : grid_) r.resize(columns_);
    grid_[row - 1][column - 1] = std::move(content);
    normalize();
}

void Sheet::normalize() {
    while (!grid_.empty() &&
           std::all_of(grid_.back().begin(), grid_.back().end(), [](const auto& c) { return c.is_empty(); }))
        grid_.pop_back();
    int cols = 0;
    for (const auto& r : grid_)
        for (int c = static_cast<int>(r.size()); c > cols; --c)
            if (!r[c - 1].is_empty()) {
                cols = c;
                break;
            }
    columns_ = cols;
    for (auto& r : grid_) r.resize(columns_);
}

const Sheet* Workbook::find_sheet(std::string_view name) const noexcept {
    for (const auto& s : sheets_)
        if (s.name() == name) return &s;
    return nullptr;
}

Sheet* Workbook::find_sheet_mut(std::string_view name) noexcept {
    for (auto& s : sheets_)
        if (s.name() == name) return &s;
    return nullptr;
}

Sheet& Workbook::add_sheet(std::string name) {
    if (!is_valid_sheet_name(name)) throw Error(ErrorKind::InvalidAddress, "invalid sheet name '" + name + "'");
    if (has_sheet(name)) throw Error(ErrorKind::DuplicateSheet, "sheet '" + name + "' already exists");
    return sheets_.emplace_back(std::move(name));
}

const CellContent& Workbook::get_cell(const CellAddress& addr) const {
    const auto* sheet = find_sheet(addr.sheet);
    if (!sheet) throw Error(ErrorKind::UnknownSheet, "no sheet named '" + addr.sheet + "'");
    return sheet->at(addr.column, addr.row);
}

void Workbook::set_cell(const CellAddress& addr, CellContent content) {
    Sheet* sheet = find_sheet_mut(addr.sheet);
    if (!sheet) sheet = &add_sheet(addr.sheet);
    sheet->set(addr.column, addr.row, std::move(content));
}

Workbook parse_workbook(std::string_view text) {
    Workbook wb;
    Sheet* current = nullptr;
    std::vector<std::vector<CellContent>> rows;
    std::size_t line_no = 0;

    auto flush = [&] {
        if (!current) return;
        std::size_t width = 0;
        for (const auto& r : rows) width = std::max(width, r.size());
        for (auto& r : rows) r.resize(width);
        current->grid_ = std::move(rows);
        current->columns_ = static_cast<int>(width);
        current->normalize();
        rows.clear();
    };

    auto lines = split(text, '\n');
    if (!text.empty() && text.back() == '\n') lines.pop_back();
    for (auto raw : lines) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
        auto line = trim(raw);
        if (!line.empty() && line.front() == '#') continue;
        if (!line.empty() && line.front() == '[') {
            constexpr std::string_view prefix = "[sheet:";
            if (line.substr(0, prefix.size()) != prefix || line.back() != ']')
                throw Error(ErrorKind::MalformedHeader, "line " + std::to_string(line_no) + ": expected '[sheet: NAME]'");
            auto name = trim(line.substr(prefix.size(), line.size() - prefix.size() - 1));
            if (!is_valid_sheet_name(name))
                throw Error(ErrorKind::MalformedHeader,
                            "line " + std::to_string(line_no) + ": invalid sheet name '" + std::string(name) + "'");
            flush();
            if (wb.has_sheet(name))
                throw Error(ErrorKind::DuplicateSheet,
                            "line " + std::to_string(line_no) + ": sheet '" + std::string(name) + "' repeated");
            current = &wb.add_sheet(std::string(name));
            continue;
        }
        if (!current) {
            if (line.empty()) continue;
            throw Error(ErrorKind::MalformedHeader, "line " + std::to_string(line_no) + ": cell data before any sheet header");
        }
        auto& row = rows.emplace_back();
        for (auto field : split(raw, '|')) row.push_back(CellContent::classify(field));
    }
    flush();
    return wb;
}

namespace {

bool plain_field(std::string_view s) {
    return !s.empty() && s.find_first_of("|\n\r") == std::string_view::npos && trim(s) == s;
}

std::string encode_cell(const CellContent& cell, const CellAddress& addr) {
    auto unencodable = [&](const std::string& why) {
        return Error(ErrorKind::UnencodableCell, addr.to_string() + ": " + why);
    };
    switch (cell.kind()) {
        case CellContent::Kind::Empty: return {};
        case CellContent::Kind::Number: return format_number(cell.as_number());
        case CellContent::Kind::Formula: {
            const auto& src = cell.as_formula();
            if (!plain_field(src)) throw unencodable("formula contains '|', a line break or edge whitespace");
            return src;
        }
        case CellContent::Kind::Text: {
            const auto& s = cell.as_text();
            if (!plain_field(s)) throw unencodable("text is empty or contains '|', a line break or edge whitespace");
            if (s.front() == '=') throw unencodable("text would read back as a formula");
            if (parse_decimal(s)) throw unencodable("text would read back as a number");
            if (addr.column == 1 && (s.front() == '#' || s.front() == '['))
                throw unencodable("leading '#' or '[' in the first column");
            return s;
        }
    }
    return {};
}

}  // namespace

std::string serialize_workbook(const Workbook& wb) {
    std::string out;
    for (const auto& sheet : wb.sheets()) {
        out += "[sheet: " + sheet.name() + "]\n";
        for (int r = 1; r <= sheet.rows(); ++r) {
            int last = sheet.columns();
            while (last > 0 && sheet.at(last, r).is_empty()) --last;
            for (int c = 1; c <= last; ++c) {
                if (c > 1) out += '|';
                out += encode_cell(sheet.at(c, r), CellAddress{sheet.name(), c, r});
            }
            out += '\n';
        }
    }
    return out;
}

Workbook load_workbook(const std::string& path) { return parse_workbook(read_file(path)); }

void save_workbook(const Workbook& wb, const std::string& path) { write_file(path, serialize_workbook(wb)); }

}  // namespace shadow_audit
