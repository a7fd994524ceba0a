#pragma once

#include "dcwave/io.hpp"

#include <string>
#include <vector>

namespace dcwave {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    double seconds = 0.0;
    double time_limit = 0.0;
    std::string detail;
    json data;
};

constexpr int kCriterionCount = 10;

CriterionResult run_criterion(int id);
std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids);
// One line: "PASS  3 formal-solution oracles  0.004s/1s  detail".
std::string format_line(const CriterionResult& r);

}  // namespace dcwave
