#pragma once

#include <random>

#include "futmon/scenario.hpp"

// Seeded random scenarios for the property suites and the oracle fuzz
// command. Sampling avoids std distributions so identical seeds give
// identical scenarios on every platform.

namespace futmon {

struct GenOptions {
    bool monitorFree = false;  // restrict to kinds that never activate monitors
    int maxWindow = 4;
    int maxTxs = 8;
    int maxMonitored = 6;  // keeps the oracle enumeration within its cap
};

ScenarioFile randomScenario(std::mt19937_64& rng, const GenOptions& opts = {});

}  // namespace futmon
