#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

namespace esr {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    /// Planner / experiment workers; 0 = hardware concurrency.
    std::size_t threads = 0;
    /// Damage the planned tables before checking (exercises the failure path).
    bool corrupt = false;
};

struct CriterionInfo {
    int id;
    const char* name;
};

/// Criteria 1..11 with their suite names.
const std::vector<CriterionInfo>& acceptance_criteria();

CriterionResult run_criterion(int id, const AcceptanceOptions& options = {});

/// Suite = criterion name, "all", or "corrupt" (criterion 1 on a damaged table).
std::vector<CriterionResult> run_suite(const std::string& suite, const AcceptanceOptions& options = {});

/// "PASS  1 figure1  (0.003 s)  detail"
std::string format_result(const CriterionResult& r);
nlohmann::json results_to_json(const std::vector<CriterionResult>& results);

}  // namespace esr
