#include "sgronwall/report.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "sgronwall/errors.hpp"

namespace sgronwall {

namespace {

// Commands whose results depend on random draws and must record their seed.
const std::set<std::string> kSeededCommands = {"martingale sample-sup", "martingale wiener", "bem simulate",
                                               "verify theorem", "verify apriori"};

nlohmann::ordered_json cell_to_json(const Cell& c) {
    return std::visit([](const auto& v) { return nlohmann::ordered_json(v); }, c);
}

std::string cell_to_csv(const Cell& c) {
    struct Visitor {
        std::string operator()(double v) const { return format_number(v); }
        std::string operator()(std::int64_t v) const { return std::to_string(v); }
        std::string operator()(const std::string& v) const { return v; }
        std::string operator()(bool v) const { return v ? "true" : "false"; }
    };
    return std::visit(Visitor{}, c);
}

std::string json_scalar_to_csv(const nlohmann::ordered_json& v) {
    if (v.is_number_float()) return format_number(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

Cell cell_from_json(const nlohmann::ordered_json& v) {
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return v.get<std::string>();
    // Non-finite doubles are serialized as null by the JSON writer.
    if (v.is_null()) return std::nan("");
    throw ConfigError("unsupported cell type in report row");
}

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void Report::add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw ContractViolation("report row width does not match its columns");
    rows.push_back(std::move(row));
}

bool Report::all_passed() const {
    for (const auto& [name, ok] : verdicts) {
        if (!ok) return false;
    }
    return true;
}

nlohmann::ordered_json Report::to_json() const {
    nlohmann::ordered_json doc;
    doc["schema"] = kReportSchema;
    doc["command"] = command;
    doc["inputs"] = inputs;
    doc["columns"] = columns;
    auto& out_rows = doc["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < columns.size(); ++i) obj[columns[i]] = cell_to_json(row[i]);
        out_rows.push_back(std::move(obj));
    }
    auto& out_verdicts = doc["verdicts"] = nlohmann::ordered_json::object();
    for (const auto& [name, ok] : verdicts) out_verdicts[name] = ok;
    doc["all_passed"] = all_passed();
    return doc;
}

std::string Report::to_csv() const {
    std::ostringstream os;
    os << "# command=" << command << '\n';
    for (const auto& [key, value] : inputs.items()) {
        os << "# " << key << '=';
        if (value.is_array()) {
            for (std::size_t i = 0; i < value.size(); ++i) os << (i ? ";" : "") << json_scalar_to_csv(value[i]);
        } else {
            os << json_scalar_to_csv(value);
        }
        os << '\n';
    }
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_to_csv(row[i]);
        os << '\n';
    }
    for (const auto& [name, ok] : verdicts) os << "# verdict " << name << '=' << (ok ? "pass" : "fail") << '\n';
    return os.str();
}

std::vector<std::string> validate_report(const nlohmann::ordered_json& doc) {
    std::vector<std::string> problems;
    if (!doc.is_object()) return {"report must be a JSON object"};
    if (doc.value("schema", "") != kReportSchema) problems.push_back("schema must be \"" + std::string(kReportSchema) + "\"");
    if (!doc.contains("command") || !doc["command"].is_string()) problems.push_back("command must be a string");
    if (!doc.contains("inputs") || !doc["inputs"].is_object()) problems.push_back("inputs must be an object");
    if (!doc.contains("columns") || !doc["columns"].is_array()) {
        problems.push_back("columns must be an array");
        return problems;
    }
    std::vector<std::string> columns;
    for (const auto& c : doc["columns"]) {
        if (!c.is_string()) {
            problems.push_back("column names must be strings");
            return problems;
        }
        columns.push_back(c.get<std::string>());
    }
    if (!doc.contains("rows") || !doc["rows"].is_array()) {
        problems.push_back("rows must be an array");
    } else {
        for (std::size_t r = 0; r < doc["rows"].size(); ++r) {
            const auto& row = doc["rows"][r];
            if (!row.is_object() || row.size() != columns.size()) {
                problems.push_back("row " + std::to_string(r) + " does not match the column list");
                continue;
            }
            for (const auto& c : columns) {
                if (!row.contains(c)) problems.push_back("row " + std::to_string(r) + " lacks column " + c);
                else if (!row[c].is_primitive()) problems.push_back("row " + std::to_string(r) + " column " + c + " is not a scalar");
            }
        }
    }
    bool all = true;
    if (!doc.contains("verdicts") || !doc["verdicts"].is_object()) {
        problems.push_back("verdicts must be an object");
    } else {
        for (const auto& [name, v] : doc["verdicts"].items()) {
            if (!v.is_boolean()) problems.push_back("verdict " + name + " must be boolean");
            else all = all && v.get<bool>();
        }
    }
    if (!doc.contains("all_passed") || !doc["all_passed"].is_boolean()) {
        problems.push_back("all_passed must be boolean");
    } else if (doc["all_passed"].get<bool>() != all) {
        problems.push_back("all_passed disagrees with the verdicts");
    }
    if (doc.contains("command") && doc["command"].is_string() && kSeededCommands.count(doc["command"].get<std::string>()) &&
        doc.contains("inputs") && doc["inputs"].is_object() && !doc["inputs"].contains("seed")) {
        problems.push_back("stochastic report must record its seed");
    }
    return problems;
}

Report Report::from_json(const nlohmann::ordered_json& doc) {
    const auto problems = validate_report(doc);
    if (!problems.empty()) {
        std::string msg = "invalid report:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw ConfigError(msg);
    }
    Report rep;
    rep.command = doc["command"].get<std::string>();
    rep.inputs = doc["inputs"];
    for (const auto& c : doc["columns"]) rep.columns.push_back(c.get<std::string>());
    for (const auto& row : doc["rows"]) {
        std::vector<Cell> cells;
        for (const auto& c : rep.columns) cells.push_back(cell_from_json(row[c]));
        rep.rows.push_back(std::move(cells));
    }
    for (const auto& [name, v] : doc["verdicts"].items()) rep.verdicts.emplace_back(name, v.get<bool>());
    return rep;
}

}  // namespace sgronwall
