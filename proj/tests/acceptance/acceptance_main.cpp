// Runs acceptance criteria 1-11 and prints one line per criterion.
// Usage: acceptance [id ...]

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "esr/acceptance.hpp"

int main(int argc, char** argv) {
    std::vector<int> ids;
    for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
    if (ids.empty())
        for (const auto& c : esr::acceptance_criteria()) ids.push_back(c.id);

    esr::AcceptanceOptions opt;
    int failed = 0;
    for (int id : ids) {
        const auto r = esr::run_criterion(id, opt);
        std::cout << esr::format_result(r) << std::endl;
        if (!r.passed) ++failed;
    }
    std::cout << (ids.size() - failed) << "/" << ids.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
