#pragma once

#include <memory>
#include <string>
#include <vector>

namespace surfchaos {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0;
};

inline constexpr int kCriteria = 12;

// Runs criterion 1..12. Never throws: errors become a FAIL with the message as detail.
CriterionResult run_criterion(int id);
std::vector<CriterionResult> run_all_criteria();

std::string format_result(const CriterionResult& r);

}  // namespace surfchaos
