#ifndef SPECPROXY_VERIFY_HPP
#define SPECPROXY_VERIFY_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace specproxy::verify {

struct PropertyResult {
    std::string name;
    long long checks = 0;
    long long violations = 0;
    double worst_slack = 0.0;   // most adverse margin seen (negative = headroom)
    std::string failing;        // serialized first failing instance, if any

    bool passed() const { return violations == 0; }
};

struct SuiteResult {
    std::string suite;
    std::vector<PropertyResult> properties;

    bool passed() const;
};

std::vector<std::string> suite_names();

/// Run one named property suite with the given trial count and seed.
/// Throws std::invalid_argument for an unknown suite name.
SuiteResult run_suite(const std::string& name, long long trials, std::uint64_t seed);

}  // namespace specproxy::verify

#endif
