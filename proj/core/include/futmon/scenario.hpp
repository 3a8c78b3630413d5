#pragma once

#include <iosfwd>

#include "futmon/oracle.hpp"

// Scenario files: a line-oriented JSON description of genesis balances,
// installed contracts and the submitted transactions. Field order is
// canonicalized on write so golden files diff cleanly.

namespace futmon {

struct Diagnostic {
    std::string field;  // dotted path into the document ("contracts.L.kind")
    std::string message;
};

struct ParseError : ScenarioError {
    explicit ParseError(std::vector<Diagnostic> diags);
    std::vector<Diagnostic> diagnostics;
};

enum class EngineChoice { Monitored, Legacy };

struct ContractSpec {
    std::string kind;
    std::map<std::string, std::int64_t> params;
    Tokens balance = 0;
    auto operator<=>(const ContractSpec&) const = default;
};

struct TxSpec {
    std::string source;
    std::string target;
    std::string entrypoint;
    std::vector<Scalar> args;
    Tokens amount = 0;
    auto operator<=>(const TxSpec&) const = default;
};

struct ScenarioFile {
    int window = 1;   // "k"
    Tokens cost = 0;  // charged per failing transaction
    EngineChoice engine = EngineChoice::Monitored;
    std::map<std::string, Tokens> users;
    std::map<std::string, ContractSpec> contracts;
    std::vector<TxSpec> transactions;
    auto operator<=>(const ScenarioFile&) const = default;
};

// Parses and validates; aggregates all diagnostics before throwing.
ScenarioFile parseScenario(const std::string& path);
ScenarioFile parseScenarioText(const std::string& text, const std::string& origin = "<text>");

// Canonical serialization; parse(serialize(sc)) == sc.
std::string serializeScenario(const ScenarioFile& sc);

struct CompiledScenario {
    ExtendedConfiguration genesis;
    ContractRegistry registry;
    std::vector<Transaction> txs;
    int window = 1;
    EngineChoice engine = EngineChoice::Monitored;
};

// Resolves names to addresses, assigns transaction ids by position, applies
// the per-transaction cost, and installs the reserved drain accounts.
CompiledScenario compileScenario(const ScenarioFile& sc);

// One trace record per step, mirroring the figures' annotations.
struct TraceEvent {
    std::size_t stepIndex = 0;
    std::optional<std::pair<Transaction, TxStatus>> consolidated;
    int treeHeight = 0;
    std::size_t treeSize = 0;
    std::string treeDigest;
    std::string treeText;  // one node per line with monitor annotations
};

struct RunOptions {
    std::optional<std::string> emitDotDir;    // step-NNN.dot per stage
    std::optional<std::string> emitJsonPath;  // run-state document
    std::vector<std::pair<std::size_t, TxStatus>> asserts;
    bool verboseTree = false;
};

struct RunArtifacts {
    int exitCode = 0;
    std::vector<HistoryEntry> finalEntries;  // statuses after drain
    MonitorTree preDrainTree;                // empty for the legacy engine
    LedgerState finalLedger;
    ExternalBalances finalUsers;
    std::vector<TraceEvent> trace;
};

// Folds step over the transactions, drains, and writes the trace plus any
// requested artifacts. Returns exit code 1 when an --assert fails.
RunArtifacts runScenario(const ScenarioFile& sc, const RunOptions& opts, std::ostream& out);

// "t3=Committed" / "t0=Failed"
std::pair<std::size_t, TxStatus> parseAssert(const std::string& text);

}  // namespace futmon
