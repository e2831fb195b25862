#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maxlow/mesh.hpp"

namespace maxlow {

struct PropertyResult {
    std::string name;
    bool pass = false;
    double value = 0.0;      // measured defect or count
    double tolerance = 0.0;  // pass iff value <= tolerance
    std::string detail;
};

struct ValidateOptions {
    int stability_samples = 200;
    int random_samples = 20;
    std::uint64_t seed = 0x5eed2024u;
    bool flip_curl_sign = false;
    int threads = 1;
};

std::vector<PropertyResult> run_property_suite(const Triangulation& mesh, const ValidateOptions& opts = {});

}  // namespace maxlow
