#pragma once

#include <memory>
#include <optional>

#include "futmon/model.hpp"

// Transaction execution: realizes the three-way outcome (commit, fail,
// pending) against an extended configuration through a pluggable,
// deterministic contract-behavior interface.

namespace futmon {

class Executor;

// One failmap write captured during execution. Activation writes carry the
// timeout decision recorded alongside; decision writes leave it empty.
struct MonitorWrite {
    Address contract;
    TxId tx;
    MonitorState state;  // never None
    std::optional<TimeoutDecision> timeout;
    auto operator<=>(const MonitorWrite&) const = default;
};
using MonitorWriteLog = std::vector<MonitorWrite>;

struct MonitorViolation {
    Address contract;
    TxId tx;
};

// ok when every net write (last write per (contract, tx) key) is a legal
// transition against the pre-transaction monitor context; otherwise carries
// the first offending write in execution order.
std::optional<MonitorViolation> validateMonitorWrites(const MonitorWriteLog& log,
                                                      const MonitorContext& pre,
                                                      TxId current);

// Timeout recorded for an activated monitor; Commit when nothing was
// recorded. Requires the failmap entry to exist.
TimeoutDecision evalTimeout(const MonitorContext& delta, const Address& c, TxId t);

// View handed to contract entrypoints. Gives access to the contract's own
// storage and balance plus the effect primitives; nothing else is visible
// (no other contracts' storage, no failing maps, no tree).
class ExecutionContext {
  public:
    const Address& self() const;
    TxId txid() const;
    bool first() const;  // first invocation of self within this transaction
    const CallerRef& caller() const;
    Tokens amount() const;
    const std::vector<Scalar>& args() const;

    Storage& storage();              // own storage, read/write
    Tokens balance() const;          // own balance, read only
    std::optional<Address> callerContract() const;

    // Enqueues an internal operation; transfers `amount` from self to the
    // target. Debits now, aborts the transaction when underfunded.
    void emitOperation(Address target, std::string entrypoint, std::vector<Scalar> args,
                       Tokens amount);
    // Direct credit to an external user's balance (debit rules as above).
    void transferToUser(const UserId& user, Tokens amount);
    // Transaction-scoped Fail/NoFail bit; any bit left true fails the
    // transaction at its end.
    void setFailBit(bool value);
    // Activates the future monitor of the current transaction. When no
    // timeout is given the behavior's timeoutPolicy is recorded.
    void monitorActivate(MonitorState state, std::optional<TimeoutDecision> timeout = {});
    // Decides an undecided monitor of a past transaction of this contract.
    void monitorDecide(TxId tx, MonitorState decision);
    // Fails the whole transaction immediately.
    [[noreturn]] void abortTx(const std::string& reason);

    // convenience storage accessors
    std::int64_t getInt(const std::string& key, std::int64_t fallback = 0) const;
    void putInt(const std::string& key, std::int64_t value);
    std::optional<std::string> getStr(const std::string& key) const;
    void putStr(const std::string& key, std::string value);
    void erase(const std::string& key);

    explicit ExecutionContext(Executor& exec) : exec_(exec) {}

  private:
    Executor& exec_;
};

// Deterministic, stateless contract code: all state lives in storage.
struct ContractBehavior {
    virtual ~ContractBehavior() = default;
    // Dispatch on entrypoint name; unknown entrypoints must abort.
    virtual void invoke(ExecutionContext& ctx, const std::string& entrypoint) const = 0;
    // Decision applied if the monitor is still undecided at window expiry.
    virtual TimeoutDecision timeoutPolicy(TxId, const Storage&) const {
        return TimeoutDecision::Commit;
    }
};

// Immutable map from addresses to installed behaviors.
struct ContractRegistry {
    std::map<Address, std::shared_ptr<const ContractBehavior>> behaviors;

    const ContractBehavior* find(const Address& a) const {
        auto it = behaviors.find(a);
        return it == behaviors.end() ? nullptr : it->second.get();
    }
};

enum class ExecMode {
    Monitored,  // full semantics with future monitors
    Legacy,     // monitor effects rejected as violations (pre-monitor model)
};

// Executes the transaction's initial operation and all emitted operations
// FIFO until the queue drains or something aborts, then classifies:
//   Fail    - abort, underfunded emit, unknown target/entrypoint, invalid
//             monitor write, a set fail bit, or an activation to Fail;
//             configuration preserved, source pays the cost.
//   Pending - some contract left the current monitor Undecided; carries the
//             committed effects plus the preserved pre-state.
//   Commit  - no activation, or all activations already Commit.
TransactionOutcome applyTx(const Transaction& tx, const ExtendedConfiguration& cfg,
                           const ContractRegistry& reg,
                           ExecMode mode = ExecMode::Monitored);

bool isCommit(const TransactionOutcome& o);
bool isFail(const TransactionOutcome& o);
bool isPending(const TransactionOutcome& o);

}  // namespace futmon
