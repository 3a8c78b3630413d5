#include "futmon/engine.hpp"

#include <deque>
#include <set>

namespace futmon {

namespace {

// Thrown to unwind execution on any in-model failure.
struct TxAbort {
    std::string reason;
};

}  // namespace

std::optional<MonitorViolation> validateMonitorWrites(const MonitorWriteLog& log,
                                                      const MonitorContext& pre,
                                                      TxId current) {
    // last write per (contract, tx) wins
    std::map<std::pair<Address, TxId>, MonitorState> net;
    for (const auto& w : log) net[{w.contract, w.tx}] = w.state;

    for (const auto& w : log) {
        MonitorState target = net.at({w.contract, w.tx});
        MonitorState from = pre.stateOf(w.contract, w.tx);
        if (!monitorTransitionLegal(from, target, w.tx == current))
            return MonitorViolation{w.contract, w.tx};
    }
    return std::nullopt;
}

TimeoutDecision evalTimeout(const MonitorContext& delta, const Address& c, TxId t) {
    if (delta.stateOf(c, t) == MonitorState::None)
        throw ModelViolation("evalTimeout: no monitor entry for t" + std::to_string(t.value) +
                             " at " + c.value);
    auto it = delta.byContract.find(c);
    auto jt = it->second.timeoutmap.find(t);
    if (jt == it->second.timeoutmap.end()) return TimeoutDecision::Commit;
    return jt->second;
}

// Mutable transaction-scoped state threaded through ExecutionContext.
class Executor {
  public:
    Executor(const Transaction& tx, const ExtendedConfiguration& pre,
             const ContractRegistry& reg, ExecMode mode)
        : tx_(tx), pre_(pre), reg_(reg), mode_(mode), ledger_(pre.ledger), users_(pre.users) {}

    TransactionOutcome run();

    // --- primitives used by ExecutionContext ---
    const Transaction& tx() const { return tx_; }
    const Address& self() const { return current_->target; }
    const CallerRef& caller() const { return current_->caller; }
    Tokens amount() const { return current_->amount; }
    const std::vector<Scalar>& args() const { return current_->args; }
    bool first() const { return first_; }

    Storage& storage() { return ledger_.contracts.at(self()).storage; }
    Tokens balance() const { return ledger_.contracts.at(self()).balance; }

    void emitOperation(Address target, std::string entrypoint, std::vector<Scalar> args,
                       Tokens amount) {
        debitSelf(amount);
        queue_.push_back(Operation{CallerRef{self()}, std::move(target), std::move(entrypoint),
                                   std::move(args), amount});
    }

    void transferToUser(const UserId& user, Tokens amount) {
        debitSelf(amount);
        auto it = users_.users.find(user);
        if (it == users_.users.end()) abort("transfer to unknown user " + user.value);
        it->second += amount;
    }

    void setFailBit(bool value) { failBits_[self()] = value; }

    void monitorActivate(MonitorState state, std::optional<TimeoutDecision> timeout) {
        if (mode_ == ExecMode::Legacy) abort("future monitors unavailable");
        if (state == MonitorState::None) abort("monitor activated to None");
        if (!timeout) {
            const ContractBehavior* b = reg_.find(self());
            timeout = b ? b->timeoutPolicy(tx_.id, storage()) : TimeoutDecision::Commit;
        }
        log_.push_back(MonitorWrite{self(), tx_.id, state, timeout});
    }

    void monitorDecide(TxId t, MonitorState decision) {
        if (mode_ == ExecMode::Legacy) abort("future monitors unavailable");
        if (decision != MonitorState::Fail && decision != MonitorState::Commit)
            abort("monitor decision must be Fail or Commit");
        log_.push_back(MonitorWrite{self(), t, decision, std::nullopt});
    }

    [[noreturn]] void abort(const std::string& reason) { throw TxAbort{reason}; }

  private:
    void debitSelf(Tokens amount) {
        if (amount < 0) abort("negative transfer amount");
        Tokens& bal = ledger_.contracts.at(self()).balance;
        if (amount > bal) abort("insufficient balance at " + self().value);
        bal -= amount;
    }

    void executeQueue();
    TransactionOutcome classify();
    ExtendedConfiguration failedConfig() const {
        return ExtendedConfiguration{pre_.ledger, pre_.monitors,
                                     discount(pre_.users, tx_.source, tx_.cost)};
    }

    const Transaction& tx_;
    const ExtendedConfiguration& pre_;
    const ContractRegistry& reg_;
    ExecMode mode_;

    LedgerState ledger_;
    ExternalBalances users_;
    MonitorWriteLog log_;
    std::map<Address, bool> failBits_;
    std::deque<Operation> queue_;
    std::set<Address> invoked_;
    const Operation* current_ = nullptr;
    bool first_ = false;
};

const Address& ExecutionContext::self() const { return exec_.self(); }
TxId ExecutionContext::txid() const { return exec_.tx().id; }
bool ExecutionContext::first() const { return exec_.first(); }
const CallerRef& ExecutionContext::caller() const { return exec_.caller(); }
Tokens ExecutionContext::amount() const { return exec_.amount(); }
const std::vector<Scalar>& ExecutionContext::args() const { return exec_.args(); }
Storage& ExecutionContext::storage() { return exec_.storage(); }
Tokens ExecutionContext::balance() const { return exec_.balance(); }

std::optional<Address> ExecutionContext::callerContract() const {
    const CallerRef& c = exec_.caller();
    if (std::holds_alternative<Address>(c)) return std::get<Address>(c);
    return std::nullopt;
}

void ExecutionContext::emitOperation(Address target, std::string entrypoint,
                                     std::vector<Scalar> args, Tokens amount) {
    exec_.emitOperation(std::move(target), std::move(entrypoint), std::move(args), amount);
}
void ExecutionContext::transferToUser(const UserId& user, Tokens amount) {
    exec_.transferToUser(user, amount);
}
void ExecutionContext::setFailBit(bool value) { exec_.setFailBit(value); }
void ExecutionContext::monitorActivate(MonitorState state,
                                       std::optional<TimeoutDecision> timeout) {
    exec_.monitorActivate(state, timeout);
}
void ExecutionContext::monitorDecide(TxId tx, MonitorState decision) {
    exec_.monitorDecide(tx, decision);
}
void ExecutionContext::abortTx(const std::string& reason) { exec_.abort(reason); }

std::int64_t ExecutionContext::getInt(const std::string& key, std::int64_t fallback) const {
    const Storage& st = exec_.storage();
    auto it = st.find(key);
    if (it == st.end() || !std::holds_alternative<std::int64_t>(it->second)) return fallback;
    return std::get<std::int64_t>(it->second);
}
void ExecutionContext::putInt(const std::string& key, std::int64_t value) {
    exec_.storage()[key] = value;
}
std::optional<std::string> ExecutionContext::getStr(const std::string& key) const {
    const Storage& st = exec_.storage();
    auto it = st.find(key);
    if (it == st.end() || !std::holds_alternative<std::string>(it->second)) return std::nullopt;
    return std::get<std::string>(it->second);
}
void ExecutionContext::putStr(const std::string& key, std::string value) {
    exec_.storage()[key] = std::move(value);
}
void ExecutionContext::erase(const std::string& key) { exec_.storage().erase(key); }

void Executor::executeQueue() {
    while (!queue_.empty()) {
        Operation op = std::move(queue_.front());
        queue_.pop_front();

        auto ct = ledger_.contracts.find(op.target);
        if (ct == ledger_.contracts.end()) abort("unknown target " + op.target.value);
        const ContractBehavior* behavior = reg_.find(op.target);
        if (!behavior) abort("no behavior installed at " + op.target.value);

        ct->second.balance += op.amount;
        first_ = invoked_.insert(op.target).second;
        current_ = &op;
        ExecutionContext ctx(*this);
        behavior->invoke(ctx, op.entrypoint);
        current_ = nullptr;
    }
}

TransactionOutcome Executor::classify() {
    if (validateMonitorWrites(log_, pre_.monitors, tx_.id))
        return FailOutcome{failedConfig()};

    for (const auto& [addr, bit] : failBits_)
        if (bit) return FailOutcome{failedConfig()};

    // net monitor effects, last write per key wins
    MonitorContext applied = pre_.monitors;
    std::map<std::pair<Address, TxId>, const MonitorWrite*> net;
    for (const auto& w : log_) net[{w.contract, w.tx}] = &w;
    for (const auto& [key, w] : net) {
        ContractMonitors& mon = applied.byContract[w->contract];
        mon.failmap[w->tx] = w->state;
        if (w->timeout) mon.timeoutmap[w->tx] = *w->timeout;
    }
    applied.normalize();

    bool currentUndecided = false;
    for (const auto& [key, w] : net) {
        if (w->tx != tx_.id) continue;
        if (w->state == MonitorState::Fail) return FailOutcome{failedConfig()};
        if (w->state == MonitorState::Undecided) currentUndecided = true;
    }

    LedgerState committedLedger = std::move(ledger_);
    committedLedger.height += 1;
    ExtendedConfiguration committed{std::move(committedLedger), std::move(applied),
                                    std::move(users_)};
    if (currentUndecided)
        return PendingOutcome{std::move(committed), failedConfig()};
    return CommitOutcome{std::move(committed)};
}

TransactionOutcome Executor::run() {
    auto src = users_.users.find(tx_.source);
    if (src == users_.users.end())
        throw ScenarioError("applyTx: unknown source user '" + tx_.source.value + "'");

    try {
        // the initial operation spends from the external user's balance
        if (tx_.initial.amount < 0) abort("negative transaction amount");
        if (tx_.initial.amount > src->second) abort("source underfunded");
        src->second -= tx_.initial.amount;
        queue_.push_back(tx_.initial);
        executeQueue();
    } catch (const TxAbort&) {
        return FailOutcome{failedConfig()};
    }
    return classify();
}

TransactionOutcome applyTx(const Transaction& tx, const ExtendedConfiguration& cfg,
                           const ContractRegistry& reg, ExecMode mode) {
    for (const auto& [addr, mon] : cfg.monitors.byContract)
        if (!mon.failmap.empty() && mon.failmap.rbegin()->first >= tx.id)
            throw ModelViolation("applyTx: transaction id not above monitor context");
    if (!std::holds_alternative<UserId>(tx.initial.caller) ||
        std::get<UserId>(tx.initial.caller) != tx.source)
        throw ModelViolation("applyTx: initial caller must be the source user");

    Executor exec(tx, cfg, reg, mode);
    return exec.run();
}

bool isCommit(const TransactionOutcome& o) { return std::holds_alternative<CommitOutcome>(o); }
bool isFail(const TransactionOutcome& o) { return std::holds_alternative<FailOutcome>(o); }
bool isPending(const TransactionOutcome& o) { return std::holds_alternative<PendingOutcome>(o); }

}  // namespace futmon
