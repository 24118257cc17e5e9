#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "capnav/types.hpp"

namespace testutil {

inline std::filesystem::path tmp_dir(const std::string& name) {
    const auto dir = std::filesystem::path(CAPNAV_TEST_TMP) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream(path) << text;
    return path.string();
}

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Fixed-seed generator: tests sample points, the library itself never draws.
inline std::mt19937_64& rng() {
    static std::mt19937_64 gen(20240611);
    return gen;
}

inline double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline capnav::Vec3 unit_vector() {
    std::normal_distribution<double> n;
    capnav::Vec3 v(n(rng()), n(rng()), n(rng()));
    return v.normalized();
}

}  // namespace testutil
