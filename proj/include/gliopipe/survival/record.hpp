#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gliopipe/text.hpp"

namespace gliopipe::survival {

enum class Resection { GTR, STR, NA };

inline Resection resection_from_string(const std::string& s) {
    if (s == "GTR") return Resection::GTR;
    if (s == "STR") return Resection::STR;
    if (s == "NA" || s.empty()) return Resection::NA;
    throw DataError("unknown resection status '" + s + "'");
}

inline const char* resection_to_string(Resection r) {
    switch (r) {
        case Resection::GTR: return "GTR";
        case Resection::STR: return "STR";
        case Resection::NA: return "NA";
    }
    return "NA";
}

struct SurvivalRecord {
    std::string case_id;
    double age = 0.0;                          // years
    std::optional<double> survival_days;       // ground truth, training only
    std::optional<Resection> resection_status;

    void validate() const {
        if (age <= 0) throw DataError("age must be positive for case " + case_id);
        if (survival_days && *survival_days < 0)
            throw DataError("survival_days must be >= 0 for case " + case_id);
    }
};

struct SurvivalTable {
    std::vector<SurvivalRecord> records;
    bool has_resection = false;

    const SurvivalRecord* find(const std::string& case_id) const {
        for (const auto& r : records)
            if (r.case_id == case_id) return &r;
        return nullptr;
    }
};

// Header: case_id,age,survival_days[,resection_status]. Days may be written
// as an integer or a real; an empty days cell means unknown (validation row).
inline SurvivalTable read_survival_csv(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw DataError("empty survival CSV: " + path);
    const auto header = split_csv_line(lines[0]);
    if (header.size() < 3 || header[0] != "case_id" || header[1] != "age" ||
        header[2] != "survival_days")
        throw DataError("survival CSV header must start with case_id,age,survival_days: " + path);
    SurvivalTable table;
    table.has_resection = header.size() >= 4 && header[3] == "resection_status";
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto cells = split_csv_line(lines[i]);
        if (cells.size() < 3)
            throw DataError("short row " + std::to_string(i + 1) + " in " + path);
        SurvivalRecord rec;
        rec.case_id = cells[0];
        rec.age = parse_double(cells[1], "age");
        if (!cells[2].empty())
            rec.survival_days = parse_double(cells[2], "survival_days");
        if (table.has_resection && cells.size() >= 4)
            rec.resection_status = resection_from_string(cells[3]);
        rec.validate();
        table.records.push_back(std::move(rec));
    }
    return table;
}

}  // namespace gliopipe::survival
