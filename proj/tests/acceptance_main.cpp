#include <chrono>
#include <cstdlib>
#include <cstring>
#include <iomanip>
#include <iostream>

#include "covertime/acceptance.hpp"

int main(int argc, char** argv) {
    covertime::AcceptanceOptions options;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--quick") == 0) options.quick = true;
        else if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) options.only.insert(std::atoi(argv[++i]));
        else {
            std::cerr << "usage: acceptance [--quick] [--only N]...\n";
            return 2;
        }
    }
    const auto start = std::chrono::steady_clock::now();
    const auto results = covertime::run_acceptance(options, std::cout);
    std::size_t passed = 0;
    for (const auto& r : results) passed += r.passed;
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << passed << "/" << results.size() << " criteria passed in " << std::fixed << std::setprecision(1) << seconds << "s" << std::endl;
    return passed == results.size() ? 0 : 1;
}
