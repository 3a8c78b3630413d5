#pragma once

#include "futmon/scenario.hpp"

// Bundled demo scenarios mirroring the worked lending and token-exchange
// examples. demoScenario throws ScenarioError on unknown names.

namespace futmon {

const std::vector<std::string>& demoNames();

ScenarioFile demoScenario(const std::string& name);

// m fully-branching monitored transactions followed by k - m unmonitored
// pings: realizes the maximal tree size 2^{m+1} - 1 + 2^m (k - m).
ScenarioFile sizeWorstCaseScenario(int window, int monitored);

}  // namespace futmon
