#pragma once

#include <functional>
#include <memory>

#include "futmon/engine.hpp"

// The monitoring tree: a persistent directed tree of extended
// configurations whose edges are labeled by pending transactions. Internal
// nodes carry one child (the transaction's outcome there is already known)
// or two (committing successor first, failing successor second). All
// operations return new trees; unchanged subtrees are shared.

namespace futmon {

// How a child relates to its parent's labeled transaction. Immediate kinds
// come straight out of applyTx; Assumed kinds are the two halves of a
// pending outcome (a pruned branching node keeps the surviving half with
// its Assumed kind).
enum class EdgeKind { ImmediateCommit, ImmediateFail, AssumedCommit, AssumedFail };

inline bool isCommitSide(EdgeKind k) {
    return k == EdgeKind::ImmediateCommit || k == EdgeKind::AssumedCommit;
}
char edgeLetter(EdgeKind k);  // 'c' or 'f'

enum class TxStatus { Committed, Failed };
const char* to_string(TxStatus s);

class MonitorTree {
  public:
    struct Node;
    using NodePtr = std::shared_ptr<const Node>;

    struct OneChild {
        Transaction label;
        EdgeKind kind;
        NodePtr child;
    };
    struct TwoChildren {
        Transaction label;
        NodePtr commitChild;
        NodePtr failChild;
    };
    struct Node {
        ExtendedConfiguration cfg;
        // leaf when neither is set
        std::optional<OneChild> one;
        std::optional<TwoChildren> two;

        bool isLeaf() const { return !one && !two; }
        const Transaction& label() const;
    };

    MonitorTree() = default;
    explicit MonitorTree(NodePtr root) : root_(std::move(root)) {}

    static MonitorTree leaf(ExtendedConfiguration cfg);
    // construction helpers for hand-built fixtures and extend()
    static NodePtr leafNode(ExtendedConfiguration cfg);
    static NodePtr oneNode(ExtendedConfiguration cfg, Transaction label, EdgeKind kind,
                           NodePtr child);
    static NodePtr twoNode(ExtendedConfiguration cfg, Transaction label, NodePtr commitChild,
                           NodePtr failChild);

    const NodePtr& root() const { return root_; }
    const ExtendedConfiguration& rootConfig() const;
    bool empty() const { return root_ == nullptr; }

  private:
    NodePtr root_;
};

// edge count of the longest root-to-leaf path
int heightOf(const MonitorTree& tau);
// node count
std::size_t sizeOf(const MonitorTree& tau);
// number of levels containing a branching node (m in the size bound)
int monitoredCount(const MonitorTree& tau);
// 2^{m+1} - 1 + 2^m * (k - m), the maximal size for window k with m
// branching levels
std::size_t sizeBound(int k, int m);

// the transaction labeling the root's outgoing edges
const Transaction& nextTx(const MonitorTree& tau);

// true when every leaf sits at the same depth (they must, after extend)
bool leavesAtSameDepth(const MonitorTree& tau);

// Depth-first leaves, committing side before failing side.
std::vector<MonitorTree::NodePtr> leavesOf(const MonitorTree& tau);

// structural equality (configurations, labels, kinds)
bool treeEquals(const MonitorTree& a, const MonitorTree& b);

// Attaches the transaction to every leaf per its applyTx outcome there:
// one child for an immediate commit/fail, two children for pending. Height
// grows by exactly one.
MonitorTree extend(const MonitorTree& tau, const Transaction& tx, const ContractRegistry& reg);

// --- predicates over leaf configurations (window bookkeeping) ---

// contracts whose failmap entry for t is not None, in address order
std::vector<Address> monitoringContracts(const ExtendedConfiguration& cfg, TxId t);
bool allMonitoringCommit(const ExtendedConfiguration& cfg, TxId t);
bool oneMonitoringFail(const ExtendedConfiguration& cfg, TxId t);
// Commit, or still Undecided with a recorded timeout of Commit
bool commitWithTimeout(const MonitorContext& delta, const Address& c, TxId t);
bool allMonitoringCommitWithTimeout(const ExtendedConfiguration& cfg, TxId t);

struct InnerpruneOptions {
    // The guard that collapses a branching node onto its committing side
    // when the monitor is already known to commit in all of its futures.
    // Only ever disabled by mutation tests.
    bool commitGuard = true;
};

// Removes impossible subtrees bottom-up: at each branching node, if the
// labeled transaction is known to commit in every future of the (pruned)
// committing side, the failing side is impossible; if it is known to fail
// in every such future, the committing side is impossible. Root, height and
// all surviving leaves are preserved. Idempotent.
MonitorTree innerprune(const MonitorTree& tau, const InnerpruneOptions& opts = {});

struct RootDecision {
    MonitorTree tree;    // surviving subtree, height k
    Transaction tx;      // the transaction decided
    TxStatus status;
};

// Decides the root transaction of a tree whose height is exactly k + 1:
// innerprunes, then keeps the committing successor iff the monitor commits
// (applying timeouts to still-undecided entries) in every remaining future
// of the committing side.
RootDecision decideRoot(const MonitorTree& tau, int k, const InnerpruneOptions& opts = {});

// Drops monitor entries keyed by a now-permanent transaction from every
// node configuration.
MonitorTree stripMonitorEntries(const MonitorTree& tau, TxId t);

// --- trace output ---

// Per-node monitor annotation over the transactions on the path above the
// node: '?' undecided, tick known-commit, cross known-fail, '-' unmonitored.
std::string nodeAnnotations(const MonitorTree::NodePtr& node,
                            const std::vector<TxId>& pathTxs);

// One line per node: path letters, balances, configuration digest, monitor
// annotations. Deterministic depth-first order, commit side first.
std::string treeToText(const MonitorTree& tau);

// Graphviz rendering with the same naming (nodes keyed by their
// commit/fail path string).
std::string treeToDot(const MonitorTree& tau);

// digest of treeToText, for trace lines
std::string treeDigest(const MonitorTree& tau);

}  // namespace futmon
