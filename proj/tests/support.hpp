#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <slicecast/slicecast.hpp>

namespace testing {

namespace fs = std::filesystem;

// Fresh scratch directory under the build tree.
inline fs::path scratch(const std::string& name) {
    const fs::path p = fs::path(SLICECAST_TEST_TMP) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

inline std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

// Random probability vector with sum in (0, 1].
inline std::vector<double> random_probs(std::mt19937_64& rng, std::size_t k) {
    std::uniform_real_distribution<double> u(0.001, 1.0);
    std::vector<double> p(k);
    double s = 0.0;
    for (auto& x : p) s += (x = u(rng));
    const double mass = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
    for (auto& x : p) x = x / s * mass;
    return p;
}

} // namespace testing
