#pragma once

#include <string>
#include <vector>

namespace fvn {

// One named property check. `detail` carries the measured values on failure
// (and occasionally a one-line summary on success).
struct SelftestCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct SelftestReport {
    std::vector<SelftestCheck> checks;
    bool all_passed() const;
};

// Deterministic, self-contained property battery: gradient checks against
// finite differences, quantization identities, RNG stream pins, metric and
// chi-square oracles, checkpoint round-trips, and sampler table invariants.
// Runs in seconds; never throws (failures are captured in the report).
SelftestReport run_selftest();

std::string format_selftest(const SelftestReport& r); // one line per check + verdict

} // namespace fvn
