#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace sgronwall {

inline constexpr const char* kReportSchema = "sgronwall.report/1";

using Cell = std::variant<double, std::int64_t, std::string, bool>;

/// Tabular result of one CLI experiment: its inputs, a table of results and
/// named pass/fail verdicts. The CSV and JSON forms carry the same columns.
struct Report {
    std::string command;
    nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::pair<std::string, bool>> verdicts;

    void add_row(std::vector<Cell> row);
    void add_verdict(std::string name, bool passed) { verdicts.emplace_back(std::move(name), passed); }
    bool all_passed() const;

    nlohmann::ordered_json to_json() const;

    /// Inputs and verdicts become leading/trailing `#` comment lines; numbers
    /// use 17 significant digits.
    std::string to_csv() const;

    /// Inverse of to_json; throws ConfigError listing schema problems.
    static Report from_json(const nlohmann::ordered_json& doc);
};

/// 17-significant-digit rendering used for every emitted number.
std::string format_number(double v);

/// Schema problems of a report document; empty when valid.
std::vector<std::string> validate_report(const nlohmann::ordered_json& doc);

}  // namespace sgronwall
