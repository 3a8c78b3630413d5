#pragma once

#include "futmon/tree.hpp"

// Blockchain runs: permanent history plus pending monitoring tree, the step
// relation that drives them, and the pre-monitor baseline engine used for
// equivalence checks.

namespace futmon {

struct HistoryEntry {
    Transaction tx;
    TxStatus status;
    ExtendedConfiguration config;  // resulting consolidated configuration
};

struct History {
    ExtendedConfiguration genesis;
    std::vector<HistoryEntry> entries;
};

struct BlockchainRun {
    History history;
    MonitorTree tree;  // root payload equals the last consolidated configuration
    int window = 1;    // k
};

struct StepOptions {
    InnerpruneOptions prune;  // mutation hooks for the test suites
};

// Reserved identities used by drain's no-op transactions. Scenario loading
// installs both; hand-built configurations that want drain() must too.
const UserId& systemUser();
const Address& systemWallet();
// Adds the reserved zero-balance user and wallet when missing.
void ensureSystemAccounts(ExtendedConfiguration& cfg, ContractRegistry& reg);

// Single-node tree over the genesis configuration; k must be >= 1.
BlockchainRun initRun(ExtendedConfiguration genesis, int window);

// id expected for the next submitted transaction
TxId nextSubmissionIndex(const BlockchainRun& run);

// Extends the tree with the transaction; once the tree exceeds the window
// the root transaction is decided, its monitor entries are dropped from all
// retained configurations, and one history entry is appended.
BlockchainRun step(const BlockchainRun& run, const Transaction& tx,
                   const ContractRegistry& reg, const StepOptions& opts = {});

// Feeds `window` zero-cost wallet pings from the reserved user so every
// submitted transaction becomes permanent; returns the completed history.
History drain(const BlockchainRun& run, const ContractRegistry& reg,
              const StepOptions& opts = {});
BlockchainRun drainRun(const BlockchainRun& run, const ContractRegistry& reg,
                       const StepOptions& opts = {});

// no-op transaction used by drain
Transaction drainPing(TxId id);

struct LegacyResult {
    LedgerState ledger;
    ExternalBalances users;
    TxStatus status;
};

// The pre-monitor model: same contract engine with monitor writes rejected;
// a failing transaction preserves the ledger and charges the source.
LegacyResult legacyApply(const Transaction& tx, const LedgerState& ledger,
                         const ExternalBalances& users, const ContractRegistry& reg);

}  // namespace futmon
