#pragma once

#include "futmon/runtime.hpp"

// Independent brute-force validators. The consistency computation works on
// linearly replayed paths only: it enumerates every future (branching
// exactly where a transaction pends), then closes monitoring windows in
// submission order, discarding futures that contradict what the surviving
// commit-side futures already determine. It shares nothing with the
// monitoring-tree module beyond core types and applyTx; the predicates over
// monitor states are re-derived locally.

namespace futmon {

// Hard cap on the number of branching (monitored) positions the oracle will
// enumerate; 2^6 futures is plenty for desk-scale validation.
inline constexpr int kOracleMonitoredCap = 6;

struct OracleCapExceeded : ScenarioError {
    using ScenarioError::ScenarioError;
};

// One complete future: an outcome per submitted transaction, with a flag
// marking the positions whose outcome hinged on a future monitor.
struct FutureAssignment {
    std::vector<TxStatus> outcomes;
    std::vector<bool> pending;
    bool operator==(const FutureAssignment&) const = default;
};

// All assignments that survive the consistency rule: at the end of every
// monitored transaction's window the monitor states (timeouts applied)
// determined by the surviving commit-side futures must agree with the
// assumed outcome. Exactly one assignment survives for a well-behaved
// scenario.
std::vector<FutureAssignment> enumerateConsistentFutures(const ExtendedConfiguration& root,
                                                         const std::vector<Transaction>& txs,
                                                         int window,
                                                         const ContractRegistry& reg);

struct OracleReport {
    bool ok = true;
    std::vector<std::string> problems;
    std::vector<TxStatus> engineStatuses;
    std::vector<TxStatus> oracleStatuses;
    std::size_t consistentCount = 0;
};

// Replays the scenario through the engine (step + drain) and through the
// oracle, requiring a unique consistent assignment whose outcomes match the
// engine's permanent statuses. Engine options exist so mutation tests can
// break the engine and watch this check catch it.
OracleReport checkDecisionsAgainstOracle(const ExtendedConfiguration& genesis,
                                         const std::vector<Transaction>& txs, int window,
                                         const ContractRegistry& reg,
                                         const StepOptions& engineOpts = {});

struct CheckReport {
    bool ok = true;
    std::vector<std::string> problems;
};

// For every window expiry: the node set removed by the engine's innerprune
// must equal the set of nodes that became impossible per the oracle's
// surviving futures, and the surviving shapes must agree.
CheckReport checkImpossibleNodes(const ExtendedConfiguration& genesis,
                                 const std::vector<Transaction>& txs, int window,
                                 const ContractRegistry& reg);

// size(tau) <= 2^{m+1} - 1 + 2^m (k - m)
CheckReport checkSizeBound(const MonitorTree& tau, int window);

// For monitor-free scenarios: the drained history must equal the fold of
// the pre-monitor engine over the same transactions.
CheckReport legacyDiff(const ExtendedConfiguration& genesis,
                       const std::vector<Transaction>& txs, int window,
                       const ContractRegistry& reg);

}  // namespace futmon
