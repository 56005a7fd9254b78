#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace shadow_audit {

/// "Sheet!C7". Columns and rows are 1-based.
struct CellAddress {
    std::string sheet;
    int column = 1;
    int row = 1;

    std::string to_string() const;
    /// Parses the qualified A1 form. Throws InvalidAddress.
    static CellAddress parse(std::string_view text);

    friend auto operator<=>(const CellAddress&, const CellAddress&) = default;
    friend bool operator==(const CellAddress&, const CellAddress&) = default;
};

bool is_valid_sheet_name(std::string_view name) noexcept;

/// "A" -> 1, "AA" -> 27. Returns 0 for anything that is not letters.
int column_from_letters(std::string_view letters) noexcept;
std::string column_to_letters(int column);

// Largest grid the engine addresses, same as common spreadsheet limits.
inline constexpr int kMaxColumn = 16384;
inline constexpr int kMaxRow = 1048576;

struct Text {
    std::string value;
    friend bool operator==(const Text&, const Text&) = default;
};

struct Formula {
    std::string source;  // begins with '='
    friend bool operator==(const Formula&, const Formula&) = default;
};

class CellContent {
public:
    enum class Kind { Empty, Number, Text, Formula };

    CellContent() = default;
    static CellContent empty() { return {}; }
    static CellContent number(double value);
    static CellContent text(std::string value);
    static CellContent formula(std::string source);

    /// Classifies one trimmed cell field of the text format.
    static CellContent classify(std::string_view field);

    Kind kind() const noexcept { return static_cast<Kind>(value_.index()); }
    bool is_empty() const noexcept { return kind() == Kind::Empty; }
    double as_number() const { return std::get<double>(value_); }
    const std::string& as_text() const { return std::get<Text>(value_).value; }
    const std::string& as_formula() const { return std::get<Formula>(value_).source; }

    friend bool operator==(const CellContent&, const CellContent&) = default;

private:
    std::variant<std::monostate, double, Text, Formula> value_;
};

/// One worksheet. The grid is kept rectangular and trimmed: the last row and
/// the last column each hold at least one non-empty cell.
class Workbook;

class Sheet {
public:
    explicit Sheet(std::string name);

    const std::string& name() const noexcept { return name_; }
    int rows() const noexcept { return static_cast<int>(grid_.size()); }
    int columns() const noexcept { return columns_; }

    /// Empty when outside the populated grid.
    const CellContent& at(int column, int row) const;
    void set(int column, int row, CellContent content);

    friend bool operator==(const Sheet&, const Sheet&) = default;

private:
    friend class Workbook;
    friend Workbook parse_workbook(std::string_view text);
    void normalize();

    std::string name_;
    std::vector<std::vector<CellContent>> grid_;
    int columns_ = 0;
};

class Workbook {
public:
    const std::vector<Sheet>& sheets() const noexcept { return sheets_; }
    const Sheet* find_sheet(std::string_view name) const noexcept;
    bool has_sheet(std::string_view name) const noexcept { return find_sheet(name) != nullptr; }

    /// Throws DuplicateSheet or InvalidAddress for a bad name.
    Sheet& add_sheet(std::string name);

    /// Throws UnknownSheet.
    const CellContent& get_cell(const CellAddress& addr) const;
    /// Creates the sheet and grows the grid as needed.
    void set_cell(const CellAddress& addr, CellContent content);

    /// Visits every non-empty cell in sheet order, then row-major.
    template <class F>
    void for_each_cell(F&& fn) const {
        for (const auto& sheet : sheets_)
            for (int r = 1; r <= sheet.rows(); ++r)
                for (int c = 1; c <= sheet.columns(); ++c) {
                    const auto& cell = sheet.at(c, r);
                    if (!cell.is_empty()) fn(CellAddress{sheet.name(), c, r}, cell);
                }
    }

    friend bool operator==(const Workbook&, const Workbook&) = default;

private:
    Sheet* find_sheet_mut(std::string_view name) noexcept;
    std::vector<Sheet> sheets_;
};

/// Plain-text workbook format: `[sheet: NAME]` headers, one row per line,
/// cells separated by `|`, `#` comment lines.
Workbook parse_workbook(std::string_view text);
std::string serialize_workbook(const Workbook& wb);

Workbook load_workbook(const std::string& path);
void save_workbook(const Workbook& wb, const std::string& path);

}  // namespace shadow_audit
