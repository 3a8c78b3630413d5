#include "futmon/runtime.hpp"

#include "futmon/builtins.hpp"

namespace futmon {

const UserId& systemUser() {
    static const UserId u{"__system__"};
    return u;
}

const Address& systemWallet() {
    static const Address a{"__system__"};
    return a;
}

void ensureSystemAccounts(ExtendedConfiguration& cfg, ContractRegistry& reg) {
    cfg.users.users.emplace(systemUser(), 0);
    if (!cfg.ledger.contracts.count(systemWallet())) {
        cfg.ledger.contracts.emplace(systemWallet(), ContractState{});
        reg.behaviors.emplace(systemWallet(), makeBehavior("wallet"));
    }
}

BlockchainRun initRun(ExtendedConfiguration genesis, int window) {
    if (window < 1) throw ScenarioError("monitoring window must be at least 1");
    BlockchainRun run;
    run.history.genesis = genesis;
    run.tree = MonitorTree::leaf(std::move(genesis));
    run.window = window;
    return run;
}

TxId nextSubmissionIndex(const BlockchainRun& run) {
    return TxId{run.history.entries.size() + static_cast<std::uint64_t>(heightOf(run.tree))};
}

BlockchainRun step(const BlockchainRun& run, const Transaction& tx,
                   const ContractRegistry& reg, const StepOptions& opts) {
    if (tx.id != nextSubmissionIndex(run))
        throw ScenarioError("transaction id " + std::to_string(tx.id.value) +
                            " out of submission order");

    MonitorTree extended = extend(run.tree, tx, reg);
    if (heightOf(extended) <= run.window)
        return BlockchainRun{run.history, std::move(extended), run.window};

    RootDecision decision = decideRoot(extended, run.window, opts.prune);
    MonitorTree settled = stripMonitorEntries(decision.tree, decision.tx.id);

    History history = run.history;
    history.entries.push_back(
        HistoryEntry{decision.tx, decision.status, settled.rootConfig()});
    return BlockchainRun{std::move(history), std::move(settled), run.window};
}

Transaction drainPing(TxId id) {
    return Transaction{id, systemUser(),
                       Operation{CallerRef{systemUser()}, systemWallet(), "deposit", {}, 0}, 0};
}

BlockchainRun drainRun(const BlockchainRun& run, const ContractRegistry& reg,
                       const StepOptions& opts) {
    BlockchainRun cur = run;
    for (int i = 0; i < run.window; ++i)
        cur = step(cur, drainPing(nextSubmissionIndex(cur)), reg, opts);
    return cur;
}

History drain(const BlockchainRun& run, const ContractRegistry& reg, const StepOptions& opts) {
    return drainRun(run, reg, opts).history;
}

LegacyResult legacyApply(const Transaction& tx, const LedgerState& ledger,
                         const ExternalBalances& users, const ContractRegistry& reg) {
    ExtendedConfiguration cfg{ledger, {}, users};
    TransactionOutcome out = applyTx(tx, cfg, reg, ExecMode::Legacy);
    if (auto* c = std::get_if<CommitOutcome>(&out))
        return LegacyResult{std::move(c->cfg.ledger), std::move(c->cfg.users),
                            TxStatus::Committed};
    auto& f = std::get<FailOutcome>(out);  // Legacy mode never pends
    return LegacyResult{std::move(f.cfg.ledger), std::move(f.cfg.users), TxStatus::Failed};
}

}  // namespace futmon
