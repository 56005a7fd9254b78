#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "shadow_audit/model.hpp"

namespace shadow_audit {

/// Element labels, one per index of a parameter's domain.
using Tuple = std::vector<std::string>;

struct Assignment {
    std::string param;
    Tuple tuple;
    double value = 0.0;

    friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// Data file: one `Name(l1, l2) = number` or `Name = number` per line,
/// `#` comments.
std::vector<Assignment> parse_data(std::string_view text);
std::vector<Assignment> load_data_file(const std::string& path);
std::string format_tuple(const Tuple& tuple);

/// Input values and computed definitions for one model.
///
/// Input parameters are sparse: unstored tuples read as 0. Defined parameters
/// are computed over their full domain and carry a validity flag; changing an
/// input clears the flag on every definition downstream of it, and `evaluate`
/// recomputes only those.
class DataStore {
public:
    explicit DataStore(std::shared_ptr<const model::Model> model);

    const model::Model& model() const noexcept { return *model_; }
    const std::shared_ptr<const model::Model>& model_ptr() const noexcept { return model_; }

    /// Throws UnknownParam, ArityMismatch, UnknownElement or AssignToDefined.
    void set_input(const std::string& param, const Tuple& tuple, double value);

    /// Computes every invalid definition in dependency order. Throws Type,
    /// DivideByZero, EmptyAggregate or NonFinite; on error the failing
    /// parameter and its dependents stay invalid.
    void evaluate();

    /// Throws StaleValue for a defined parameter that needs evaluation.
    double query(const std::string& param, const Tuple& tuple) const;

    bool is_valid(const std::string& param) const;
    /// Definitions recomputed by the most recent `evaluate`.
    const std::vector<std::string>& last_recomputed() const noexcept { return last_recomputed_; }

    /// Stored input values or computed values of a definition.
    const std::map<Tuple, double>& values(const std::string& param) const;
    /// Every tuple of a parameter's domain, first index slowest.
    std::vector<Tuple> domain_tuples(const std::string& param) const;
    /// One line per input parameter with unstored tuples.
    std::vector<std::string> missing_input_warnings() const;

private:
    struct Slot {
        std::map<Tuple, double> values;
        bool valid = false;
    };

    const model::ParamDecl& param_or_throw(const std::string& name) const;
    void check_tuple(const model::ParamDecl& p, const Tuple& tuple) const;
    void compute(const model::ParamDecl& p);

    std::shared_ptr<const model::Model> model_;
    std::map<std::string, Slot, std::less<>> slots_;
    std::vector<std::string> last_recomputed_;
};

/// A fresh store holding `assignments`; all definitions start invalid.
DataStore load_data(std::shared_ptr<const model::Model> model, const std::vector<Assignment>& assignments);

}  // namespace shadow_audit
