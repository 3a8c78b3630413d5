#include "futmon/oracle.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace futmon {

namespace {

// ----- local monitor-state predicates (re-derived, see header note) -----

std::vector<Address> watchers(const ExtendedConfiguration& cfg, TxId t) {
    std::vector<Address> out;
    for (const auto& [addr, mon] : cfg.monitors.byContract)
        if (mon.failmap.count(t)) out.push_back(addr);
    return out;
}

MonitorState watcherState(const ExtendedConfiguration& cfg, const Address& c, TxId t) {
    return cfg.monitors.byContract.at(c).failmap.at(t);
}

TimeoutDecision watcherTimeout(const ExtendedConfiguration& cfg, const Address& c, TxId t) {
    const auto& tm = cfg.monitors.byContract.at(c).timeoutmap;
    auto it = tm.find(t);
    return it == tm.end() ? TimeoutDecision::Commit : it->second;
}

bool knownCommitEverywhere(const ExtendedConfiguration& cfg, TxId t) {
    for (const auto& c : watchers(cfg, t))
        if (watcherState(cfg, c, t) != MonitorState::Commit) return false;
    return true;
}

bool knownFailSomewhere(const ExtendedConfiguration& cfg, TxId t) {
    for (const auto& c : watchers(cfg, t))
        if (watcherState(cfg, c, t) == MonitorState::Fail) return true;
    return false;
}

bool commitsAtExpiry(const ExtendedConfiguration& cfg, TxId t) {
    for (const auto& c : watchers(cfg, t)) {
        MonitorState s = watcherState(cfg, c, t);
        if (s == MonitorState::Commit) continue;
        if (s == MonitorState::Undecided && watcherTimeout(cfg, c, t) == TimeoutDecision::Commit)
            continue;
        return false;
    }
    return true;
}

// ----- path enumeration by linear replay -----

struct OraclePath {
    std::vector<TxStatus> outcomes;              // per replayed transaction
    std::vector<bool> pended;                    // position branched here
    std::vector<ExtendedConfiguration> configs;  // configuration after each tx
    bool alive = true;
};

void enumeratePaths(const ExtendedConfiguration& cfg, const std::vector<Transaction>& seq,
                    std::size_t i, const ContractRegistry& reg, OraclePath& cur,
                    std::vector<OraclePath>& out) {
    if (i == seq.size()) {
        out.push_back(cur);
        return;
    }
    auto push = [&](TxStatus st, bool pended, const ExtendedConfiguration& next) {
        cur.outcomes.push_back(st);
        cur.pended.push_back(pended);
        cur.configs.push_back(next);
        enumeratePaths(next, seq, i + 1, reg, cur, out);
        cur.outcomes.pop_back();
        cur.pended.pop_back();
        cur.configs.pop_back();
    };
    TransactionOutcome o = applyTx(seq[i], cfg, reg);
    if (auto* c = std::get_if<CommitOutcome>(&o)) {
        push(TxStatus::Committed, false, c->cfg);
    } else if (auto* f = std::get_if<FailOutcome>(&o)) {
        push(TxStatus::Failed, false, f->cfg);
    } else {
        auto& p = std::get<PendingOutcome>(o);
        push(TxStatus::Committed, true, p.commitCfg);
        push(TxStatus::Failed, true, p.failCfg);
    }
}

char statusLetter(TxStatus s) { return s == TxStatus::Committed ? 'c' : 'f'; }

// window segment (letters for transactions from..to inclusive)
std::string segmentOf(const OraclePath& p, std::size_t from, std::size_t to) {
    std::string s;
    for (std::size_t l = from; l <= to; ++l) s += statusLetter(p.outcomes[l]);
    return s;
}

std::set<std::string> nodeSetOf(const std::set<std::string>& segments) {
    std::set<std::string> nodes;
    for (const auto& s : segments)
        for (std::size_t len = 0; len <= s.size(); ++len) nodes.insert(s.substr(0, len));
    return nodes;
}

// Per expiry step: the window shapes before pruning, after pruning, and
// after the root decision.
struct ExpiryTrace {
    std::size_t decided;
    std::set<std::string> before;
    std::set<std::string> afterPrune;
    std::set<std::string> afterDecide;
};

struct OracleRun {
    std::vector<OraclePath> paths;   // alive flags mark the survivors
    std::vector<TxStatus> statuses;  // per replayed transaction
    std::vector<ExpiryTrace> expiries;
};

// Closes windows in submission order over the enumerated paths. At the
// expiry of transaction j (after transaction i = j + window was applied):
// first discard futures already contradicted inside the window, deepest
// position first, judging each branch by the monitor states its surviving
// commit-side futures show now; then fix j's outcome, applying recorded
// timeouts to still-undecided monitors.
OracleRun decideWindows(std::vector<OraclePath> paths, const std::vector<Transaction>& seq,
                        int window, bool wantTraces) {
    OracleRun run;
    run.statuses.assign(seq.size(), TxStatus::Failed);

    auto segments = [&](std::size_t from, std::size_t to) {
        std::set<std::string> out;
        for (const auto& p : paths)
            if (p.alive) out.insert(segmentOf(p, from, to));
        return out;
    };

    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (i < static_cast<std::size_t>(window)) continue;
        std::size_t j = i - static_cast<std::size_t>(window);

        ExpiryTrace trace;
        trace.decided = j;
        if (wantTraces) trace.before = segments(j, i);

        // prune impossible futures, deepest window position first
        for (std::size_t l = i; l > j; --l) {
            std::map<std::string, std::vector<OraclePath*>> groups;
            for (auto& p : paths)
                if (p.alive) groups[segmentOf(p, 0, l - 1)].push_back(&p);
            for (auto& [prefix, group] : groups) {
                if (!group.front()->pended[l]) continue;
                std::vector<OraclePath*> commitSide, failSide;
                for (auto* p : group)
                    (p->outcomes[l] == TxStatus::Committed ? commitSide : failSide).push_back(p);
                if (commitSide.empty() || failSide.empty()) continue;
                auto allCommitSide = [&](auto pred) {
                    return std::all_of(commitSide.begin(), commitSide.end(), [&](OraclePath* p) {
                        return pred(p->configs[i], seq[l].id);
                    });
                };
                if (allCommitSide(knownCommitEverywhere)) {
                    for (auto* p : failSide) p->alive = false;
                } else if (allCommitSide(knownFailSomewhere)) {
                    for (auto* p : commitSide) p->alive = false;
                }
            }
        }
        // root-level early decision works the same way, one group only
        {
            std::vector<OraclePath*> commitSide, failSide;
            bool pended = false;
            for (auto& p : paths) {
                if (!p.alive) continue;
                pended = p.pended[j];
                (p.outcomes[j] == TxStatus::Committed ? commitSide : failSide).push_back(&p);
            }
            if (pended && !commitSide.empty() && !failSide.empty()) {
                auto allCommitSide = [&](auto pred) {
                    return std::all_of(commitSide.begin(), commitSide.end(), [&](OraclePath* p) {
                        return pred(p->configs[i], seq[j].id);
                    });
                };
                if (allCommitSide(knownCommitEverywhere)) {
                    for (auto* p : failSide) p->alive = false;
                } else if (allCommitSide(knownFailSomewhere)) {
                    for (auto* p : commitSide) p->alive = false;
                }
            }
        }
        if (wantTraces) trace.afterPrune = segments(j, i);

        // decide j: forced when only one side is left, timeouts otherwise
        std::vector<OraclePath*> commitSide, failSide;
        for (auto& p : paths) {
            if (!p.alive) continue;
            (p.outcomes[j] == TxStatus::Committed ? commitSide : failSide).push_back(&p);
        }
        TxStatus st;
        if (commitSide.empty()) {
            st = TxStatus::Failed;
        } else if (failSide.empty()) {
            st = TxStatus::Committed;
        } else {
            bool commits = std::all_of(commitSide.begin(), commitSide.end(), [&](OraclePath* p) {
                return commitsAtExpiry(p->configs[i], seq[j].id);
            });
            st = commits ? TxStatus::Committed : TxStatus::Failed;
        }
        for (auto& p : paths)
            if (p.alive && p.outcomes[j] != st) p.alive = false;
        run.statuses[j] = st;

        if (wantTraces) {
            trace.afterDecide = segments(j, i);
            run.expiries.push_back(std::move(trace));
        }
    }

    run.paths = std::move(paths);
    return run;
}

std::vector<Transaction> withDrainPings(const std::vector<Transaction>& txs, int window) {
    std::vector<Transaction> seq = txs;
    for (int i = 0; i < window; ++i)
        seq.push_back(drainPing(TxId{txs.size() + static_cast<std::uint64_t>(i)}));
    return seq;
}

OracleRun runOracle(const ExtendedConfiguration& root, const std::vector<Transaction>& txs,
                    int window, const ContractRegistry& reg, bool wantTraces) {
    std::vector<Transaction> seq = withDrainPings(txs, window);
    std::vector<OraclePath> paths;
    OraclePath cur;
    enumeratePaths(root, seq, 0, reg, cur, paths);

    std::set<std::size_t> branched;
    for (const auto& p : paths)
        for (std::size_t l = 0; l < p.pended.size(); ++l)
            if (p.pended[l]) branched.insert(l);
    if (branched.size() > kOracleMonitoredCap)
        throw OracleCapExceeded("oracle: " + std::to_string(branched.size()) +
                                " monitored transactions exceed the cap of " +
                                std::to_string(kOracleMonitoredCap));

    return decideWindows(std::move(paths), seq, window, wantTraces);
}

std::string statusLine(const std::vector<TxStatus>& sts) {
    std::ostringstream os;
    for (std::size_t i = 0; i < sts.size(); ++i)
        os << (i ? " " : "") << 't' << i << '=' << to_string(sts[i]);
    return os.str();
}

}  // namespace

std::vector<FutureAssignment> enumerateConsistentFutures(const ExtendedConfiguration& root,
                                                         const std::vector<Transaction>& txs,
                                                         int window,
                                                         const ContractRegistry& reg) {
    OracleRun run = runOracle(root, txs, window, reg, false);
    std::vector<FutureAssignment> out;
    for (const auto& p : run.paths) {
        if (!p.alive) continue;
        FutureAssignment fa;
        fa.outcomes.assign(p.outcomes.begin(), p.outcomes.begin() + static_cast<long>(txs.size()));
        fa.pending.assign(p.pended.begin(), p.pended.begin() + static_cast<long>(txs.size()));
        if (std::find(out.begin(), out.end(), fa) == out.end()) out.push_back(std::move(fa));
    }
    return out;
}

OracleReport checkDecisionsAgainstOracle(const ExtendedConfiguration& genesis,
                                         const std::vector<Transaction>& txs, int window,
                                         const ContractRegistry& reg,
                                         const StepOptions& engineOpts) {
    OracleReport report;

    std::vector<FutureAssignment> consistent =
        enumerateConsistentFutures(genesis, txs, window, reg);
    report.consistentCount = consistent.size();
    if (consistent.size() != 1) {
        report.ok = false;
        report.problems.push_back("expected exactly one consistent future assignment, found " +
                                  std::to_string(consistent.size()));
        if (consistent.empty()) return report;
    }
    report.oracleStatuses = consistent.front().outcomes;

    BlockchainRun run = initRun(genesis, window);
    for (const auto& tx : txs) run = step(run, tx, reg, engineOpts);
    History history = drain(run, reg, engineOpts);

    if (history.entries.size() != txs.size()) {
        report.ok = false;
        report.problems.push_back("engine consolidated " +
                                  std::to_string(history.entries.size()) + " of " +
                                  std::to_string(txs.size()) + " transactions");
        return report;
    }
    for (const auto& e : history.entries) report.engineStatuses.push_back(e.status);

    for (std::size_t i = 0; i < txs.size(); ++i) {
        if (report.engineStatuses[i] != report.oracleStatuses[i]) {
            report.ok = false;
            report.problems.push_back("t" + std::to_string(i) + ": engine says " +
                                      to_string(report.engineStatuses[i]) + ", oracle says " +
                                      to_string(report.oracleStatuses[i]));
        }
    }
    if (!report.ok && report.problems.size() > 1) {
        report.problems.push_back("engine trace: " + statusLine(report.engineStatuses));
        report.problems.push_back("oracle trace: " + statusLine(report.oracleStatuses));
    }
    return report;
}

namespace {

std::set<std::string> engineNodePaths(const MonitorTree& tau) {
    std::set<std::string> out;
    std::function<void(const MonitorTree::NodePtr&, std::string)> walk =
        [&](const MonitorTree::NodePtr& n, std::string path) {
            out.insert(path);
            if (n->isLeaf()) return;
            if (n->one) {
                walk(n->one->child, path + edgeLetter(n->one->kind));
            } else {
                walk(n->two->commitChild, path + 'c');
                walk(n->two->failChild, path + 'f');
            }
        };
    if (!tau.empty()) walk(tau.root(), "");
    return out;
}

std::string joinSet(const std::set<std::string>& s) {
    std::string out;
    for (const auto& e : s) {
        if (!out.empty()) out += ',';
        out += e.empty() ? "root" : e;
    }
    return out.empty() ? "(none)" : out;
}

}  // namespace

CheckReport checkImpossibleNodes(const ExtendedConfiguration& genesis,
                                 const std::vector<Transaction>& txs, int window,
                                 const ContractRegistry& reg) {
    CheckReport report;
    OracleRun oracle = runOracle(genesis, txs, window, reg, true);
    std::vector<Transaction> seq = withDrainPings(txs, window);

    BlockchainRun run = initRun(genesis, window);
    std::size_t expiryIndex = 0;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        MonitorTree extended = extend(run.tree, seq[i], reg);
        if (heightOf(extended) <= window) {
            run = BlockchainRun{run.history, extended, window};
            continue;
        }
        const ExpiryTrace& trace = oracle.expiries.at(expiryIndex++);

        std::set<std::string> engineBefore = engineNodePaths(extended);
        std::set<std::string> oracleBefore = nodeSetOf(trace.before);
        if (engineBefore != oracleBefore) {
            report.ok = false;
            report.problems.push_back("t" + std::to_string(trace.decided) +
                                      " expiry: tree shape " + joinSet(engineBefore) +
                                      " vs oracle futures " + joinSet(oracleBefore));
        }

        MonitorTree pruned = innerprune(extended);
        std::set<std::string> engineAfter = engineNodePaths(pruned);
        std::set<std::string> oracleAfter = nodeSetOf(trace.afterPrune);

        std::set<std::string> removedEngine, removedOracle;
        std::set_difference(engineBefore.begin(), engineBefore.end(), engineAfter.begin(),
                            engineAfter.end(), std::inserter(removedEngine, removedEngine.end()));
        std::set_difference(oracleBefore.begin(), oracleBefore.end(), oracleAfter.begin(),
                            oracleAfter.end(), std::inserter(removedOracle, removedOracle.end()));
        if (removedEngine != removedOracle) {
            report.ok = false;
            report.problems.push_back(
                "t" + std::to_string(trace.decided) + " expiry: innerprune removed " +
                joinSet(removedEngine) + " but impossible nodes are " + joinSet(removedOracle));
        }

        run = step(run, seq[i], reg);
    }
    return report;
}

CheckReport checkSizeBound(const MonitorTree& tau, int window) {
    CheckReport report;
    int m = monitoredCount(tau);
    if (m > window) {
        report.ok = false;
        report.problems.push_back("tree has " + std::to_string(m) +
                                  " branching levels for window " + std::to_string(window));
        return report;
    }
    std::size_t bound = sizeBound(window, m);
    if (sizeOf(tau) > bound) {
        report.ok = false;
        report.problems.push_back("tree size " + std::to_string(sizeOf(tau)) +
                                  " exceeds bound " + std::to_string(bound) + " (m=" +
                                  std::to_string(m) + ", k=" + std::to_string(window) + ")");
    }
    return report;
}

CheckReport legacyDiff(const ExtendedConfiguration& genesis,
                       const std::vector<Transaction>& txs, int window,
                       const ContractRegistry& reg) {
    CheckReport report;

    BlockchainRun run = initRun(genesis, window);
    for (const auto& tx : txs) run = step(run, tx, reg);
    History history = drain(run, reg);
    if (history.entries.size() != txs.size()) {
        report.ok = false;
        report.problems.push_back("engine consolidated " +
                                  std::to_string(history.entries.size()) + " of " +
                                  std::to_string(txs.size()) + " transactions");
        return report;
    }

    LedgerState ledger = genesis.ledger;
    ExternalBalances users = genesis.users;
    for (std::size_t i = 0; i < txs.size(); ++i) {
        LegacyResult legacy = legacyApply(txs[i], ledger, users, reg);
        const HistoryEntry& entry = history.entries[i];
        if (entry.status != legacy.status) {
            report.ok = false;
            report.problems.push_back("t" + std::to_string(i) + ": engine " +
                                      to_string(entry.status) + ", legacy " +
                                      to_string(legacy.status));
        }
        ExtendedConfiguration expected{legacy.ledger, {}, legacy.users};
        if (entry.config != expected) {
            report.ok = false;
            report.problems.push_back("t" + std::to_string(i) +
                                      ": configurations diverge\nengine:\n" +
                                      canonicalText(entry.config) + "legacy:\n" +
                                      canonicalText(expected));
        }
        ledger = std::move(legacy.ledger);
        users = std::move(legacy.users);
    }
    return report;
}

}  // namespace futmon
