#pragma once

#include <cstdint>
#include <compare>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

// Domain value types shared by every module: ledger state, monitor context,
// transactions and their outcomes. Everything here is an immutable value
// after construction; copies are cheap enough for the tree sizes we handle
// (O(2^m * k) nodes, small maps).

namespace futmon {

// Raised for malformed scenarios (unknown users, bad files, k < 1).
// Distinct from an in-model transaction failure, which is a value.
struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when an internal precondition is broken (caller bug, not input).
struct ModelViolation : std::logic_error {
    using std::logic_error::logic_error;
};

using Tokens = std::int64_t;

struct Address {
    std::string value;
    auto operator<=>(const Address&) const = default;
};

struct UserId {
    std::string value;
    auto operator<=>(const UserId&) const = default;
};

// Sequential submission index, unique and strictly increasing per run.
struct TxId {
    std::uint64_t value = 0;
    auto operator<=>(const TxId&) const = default;
};

enum class MonitorState { None, Undecided, Fail, Commit };

enum class TimeoutDecision { Fail, Commit };

const char* to_string(MonitorState s);
const char* to_string(TimeoutDecision d);

// Contract storage is an opaque sorted key/value map so that configuration
// equality stays decidable and serialization canonical.
using StorageValue = std::variant<std::int64_t, std::string>;
using Storage = std::map<std::string, StorageValue>;

struct ContractState {
    Storage storage;
    Tokens balance = 0;
    auto operator<=>(const ContractState&) const = default;
};

struct LedgerState {
    std::map<Address, ContractState> contracts;
    std::uint64_t height = 0;  // bare block/step counter, bumped on commit
    auto operator<=>(const LedgerState&) const = default;
};

struct ExternalBalances {
    std::map<UserId, Tokens> users;
    auto operator<=>(const ExternalBalances&) const = default;
};

// Per-contract monitor bookkeeping. An absent failmap entry means None.
// timeoutmap carries an entry for every transaction the contract activated.
struct ContractMonitors {
    std::map<TxId, MonitorState> failmap;
    std::map<TxId, TimeoutDecision> timeoutmap;
    auto operator<=>(const ContractMonitors&) const = default;
    bool empty() const { return failmap.empty() && timeoutmap.empty(); }
};

struct MonitorContext {
    std::map<Address, ContractMonitors> byContract;
    auto operator<=>(const MonitorContext&) const = default;

    MonitorState stateOf(const Address& c, TxId t) const;
    // Drops per-contract entries whose maps are both empty so that equality
    // is canonical regardless of write history.
    void normalize();
    // Removes every entry keyed by t (used once t is permanent).
    void dropEntriesFor(TxId t);
};

struct ExtendedConfiguration {
    LedgerState ledger;
    MonitorContext monitors;
    ExternalBalances users;
    auto operator<=>(const ExtendedConfiguration&) const = default;
};

// Caller of an operation: the originating external user for the initial
// operation, the emitting contract for internal ones.
using CallerRef = std::variant<UserId, Address>;

// Scalar argument values accepted by contract entrypoints.
using Scalar = std::variant<std::int64_t, TxId, Address>;

struct Operation {
    CallerRef caller;
    Address target;
    std::string entrypoint;
    std::vector<Scalar> args;
    Tokens amount = 0;
    auto operator<=>(const Operation&) const = default;
};

struct Transaction {
    TxId id;
    UserId source;
    Operation initial;  // caller == source
    Tokens cost = 0;    // resources charged on failure; 0 by default
    auto operator<=>(const Transaction&) const = default;
};

struct CommitOutcome {
    ExtendedConfiguration cfg;
};
struct FailOutcome {
    ExtendedConfiguration cfg;
};
struct PendingOutcome {
    ExtendedConfiguration commitCfg;
    ExtendedConfiguration failCfg;
};
using TransactionOutcome = std::variant<CommitOutcome, FailOutcome, PendingOutcome>;

// Deducts min(cost, balance) from the user's external balance; balances
// never go negative. Unknown user is a malformed scenario.
ExternalBalances discount(const ExternalBalances& u, const UserId& user, Tokens cost);

// Legal failmap transitions: activation (from None, current transaction
// only) or decision (Undecided -> Fail/Commit, past transactions only).
bool monitorTransitionLegal(MonitorState from, MonitorState to, bool isCurrentTx);

// Canonical textual form of a configuration: sorted keys, one stable line
// layout. Used for digests, golden traces and the CLI JSON payloads.
std::string canonicalText(const ExtendedConfiguration& cfg);

// Stable 64-bit FNV-1a digest of canonicalText, hex encoded.
std::string digestOf(const ExtendedConfiguration& cfg);
std::uint64_t fnv1a64(std::string_view bytes);

std::string to_string(const Scalar& s);
std::string to_string(const CallerRef& c);
// "t3 u->a.send(@c,#0,5) amount=2" style one-liner for traces.
std::string summary(const Transaction& tx);

}  // namespace futmon
