#include "futmon/tree.hpp"

#include <algorithm>
#include <sstream>

namespace futmon {

char edgeLetter(EdgeKind k) { return isCommitSide(k) ? 'c' : 'f'; }

const char* to_string(TxStatus s) { return s == TxStatus::Committed ? "Committed" : "Failed"; }

const Transaction& MonitorTree::Node::label() const {
    if (one) return one->label;
    if (two) return two->label;
    throw ModelViolation("label() on a leaf node");
}

MonitorTree MonitorTree::leaf(ExtendedConfiguration cfg) {
    return MonitorTree(leafNode(std::move(cfg)));
}

MonitorTree::NodePtr MonitorTree::leafNode(ExtendedConfiguration cfg) {
    auto n = std::make_shared<Node>();
    n->cfg = std::move(cfg);
    return n;
}

MonitorTree::NodePtr MonitorTree::oneNode(ExtendedConfiguration cfg, Transaction label,
                                          EdgeKind kind, NodePtr child) {
    auto n = std::make_shared<Node>();
    n->cfg = std::move(cfg);
    n->one = OneChild{std::move(label), kind, std::move(child)};
    return n;
}

MonitorTree::NodePtr MonitorTree::twoNode(ExtendedConfiguration cfg, Transaction label,
                                          NodePtr commitChild, NodePtr failChild) {
    auto n = std::make_shared<Node>();
    n->cfg = std::move(cfg);
    n->two = TwoChildren{std::move(label), std::move(commitChild), std::move(failChild)};
    return n;
}

const ExtendedConfiguration& MonitorTree::rootConfig() const {
    if (!root_) throw ModelViolation("rootConfig() on an empty tree");
    return root_->cfg;
}

namespace {

using NodePtr = MonitorTree::NodePtr;

int heightOfNode(const NodePtr& n) {
    if (n->isLeaf()) return 0;
    if (n->one) return 1 + heightOfNode(n->one->child);
    return 1 + std::max(heightOfNode(n->two->commitChild), heightOfNode(n->two->failChild));
}

std::size_t sizeOfNode(const NodePtr& n) {
    if (n->isLeaf()) return 1;
    if (n->one) return 1 + sizeOfNode(n->one->child);
    return 1 + sizeOfNode(n->two->commitChild) + sizeOfNode(n->two->failChild);
}

void depths(const NodePtr& n, int d, int& minD, int& maxD) {
    if (n->isLeaf()) {
        minD = std::min(minD, d);
        maxD = std::max(maxD, d);
        return;
    }
    if (n->one) {
        depths(n->one->child, d + 1, minD, maxD);
    } else {
        depths(n->two->commitChild, d + 1, minD, maxD);
        depths(n->two->failChild, d + 1, minD, maxD);
    }
}

void markBranchingLevels(const NodePtr& n, int level, std::vector<bool>& branching) {
    if (n->isLeaf()) return;
    if (static_cast<std::size_t>(level) >= branching.size()) branching.resize(level + 1, false);
    if (n->one) {
        markBranchingLevels(n->one->child, level + 1, branching);
    } else {
        branching[static_cast<std::size_t>(level)] = true;
        markBranchingLevels(n->two->commitChild, level + 1, branching);
        markBranchingLevels(n->two->failChild, level + 1, branching);
    }
}

void collectLeaves(const NodePtr& n, std::vector<NodePtr>& out) {
    if (n->isLeaf()) {
        out.push_back(n);
        return;
    }
    if (n->one) {
        collectLeaves(n->one->child, out);
    } else {
        collectLeaves(n->two->commitChild, out);
        collectLeaves(n->two->failChild, out);
    }
}

bool nodeEquals(const NodePtr& a, const NodePtr& b) {
    if (a->cfg != b->cfg) return false;
    if (a->one.has_value() != b->one.has_value() || a->two.has_value() != b->two.has_value())
        return false;
    if (a->one)
        return a->one->label == b->one->label && a->one->kind == b->one->kind &&
               nodeEquals(a->one->child, b->one->child);
    if (a->two)
        return a->two->label == b->two->label &&
               nodeEquals(a->two->commitChild, b->two->commitChild) &&
               nodeEquals(a->two->failChild, b->two->failChild);
    return true;
}

NodePtr extendNode(const NodePtr& n, const Transaction& tx, const ContractRegistry& reg) {
    if (n->isLeaf()) {
        TransactionOutcome out = applyTx(tx, n->cfg, reg);
        if (auto* c = std::get_if<CommitOutcome>(&out))
            return MonitorTree::oneNode(n->cfg, tx, EdgeKind::ImmediateCommit,
                                        MonitorTree::leafNode(std::move(c->cfg)));
        if (auto* f = std::get_if<FailOutcome>(&out))
            return MonitorTree::oneNode(n->cfg, tx, EdgeKind::ImmediateFail,
                                        MonitorTree::leafNode(std::move(f->cfg)));
        auto& p = std::get<PendingOutcome>(out);
        return MonitorTree::twoNode(n->cfg, tx, MonitorTree::leafNode(std::move(p.commitCfg)),
                                    MonitorTree::leafNode(std::move(p.failCfg)));
    }
    if (n->one)
        return MonitorTree::oneNode(n->cfg, n->one->label, n->one->kind,
                                    extendNode(n->one->child, tx, reg));
    return MonitorTree::twoNode(n->cfg, n->two->label,
                                extendNode(n->two->commitChild, tx, reg),
                                extendNode(n->two->failChild, tx, reg));
}

bool allLeaves(const NodePtr& n, TxId t, bool (*pred)(const ExtendedConfiguration&, TxId)) {
    std::vector<NodePtr> ls;
    collectLeaves(n, ls);
    return std::all_of(ls.begin(), ls.end(),
                       [&](const NodePtr& l) { return pred(l->cfg, t); });
}

NodePtr innerpruneNode(const NodePtr& n, const InnerpruneOptions& opts) {
    if (n->isLeaf()) return n;
    if (n->one)
        return MonitorTree::oneNode(n->cfg, n->one->label, n->one->kind,
                                    innerpruneNode(n->one->child, opts));

    const Transaction& t = n->two->label;
    NodePtr prunedCommit = innerpruneNode(n->two->commitChild, opts);
    NodePtr prunedFail = innerpruneNode(n->two->failChild, opts);

    if (opts.commitGuard && allLeaves(prunedCommit, t.id, allMonitoringCommit))
        return MonitorTree::oneNode(n->cfg, t, EdgeKind::AssumedCommit, prunedCommit);
    if (allLeaves(prunedCommit, t.id, oneMonitoringFail))
        return MonitorTree::oneNode(n->cfg, t, EdgeKind::AssumedFail, prunedFail);
    return MonitorTree::twoNode(n->cfg, t, prunedCommit, prunedFail);
}

NodePtr stripNode(const NodePtr& n, TxId t) {
    auto out = std::make_shared<MonitorTree::Node>(*n);
    out->cfg.monitors.dropEntriesFor(t);
    if (out->one) out->one->child = stripNode(out->one->child, t);
    if (out->two) {
        out->two->commitChild = stripNode(out->two->commitChild, t);
        out->two->failChild = stripNode(out->two->failChild, t);
    }
    return out;
}

}  // namespace

int heightOf(const MonitorTree& tau) {
    if (tau.empty()) throw ModelViolation("heightOf: empty tree");
    return heightOfNode(tau.root());
}

std::size_t sizeOf(const MonitorTree& tau) {
    if (tau.empty()) return 0;
    return sizeOfNode(tau.root());
}

int monitoredCount(const MonitorTree& tau) {
    if (tau.empty()) return 0;
    std::vector<bool> branching;
    markBranchingLevels(tau.root(), 0, branching);
    return static_cast<int>(std::count(branching.begin(), branching.end(), true));
}

std::size_t sizeBound(int k, int m) {
    if (k < 0 || m < 0 || m > k) throw ModelViolation("sizeBound: need 0 <= m <= k");
    return (std::size_t{2} << m) - 1 + (std::size_t{1} << m) * static_cast<std::size_t>(k - m);
}

const Transaction& nextTx(const MonitorTree& tau) {
    if (tau.empty() || tau.root()->isLeaf())
        throw ModelViolation("nextTx: tree has no pending transaction");
    return tau.root()->label();
}

bool leavesAtSameDepth(const MonitorTree& tau) {
    if (tau.empty()) return true;
    int minD = 1 << 30, maxD = 0;
    depths(tau.root(), 0, minD, maxD);
    return minD == maxD;
}

std::vector<MonitorTree::NodePtr> leavesOf(const MonitorTree& tau) {
    std::vector<NodePtr> out;
    if (!tau.empty()) collectLeaves(tau.root(), out);
    return out;
}

bool treeEquals(const MonitorTree& a, const MonitorTree& b) {
    if (a.empty() || b.empty()) return a.empty() == b.empty();
    return nodeEquals(a.root(), b.root());
}

MonitorTree extend(const MonitorTree& tau, const Transaction& tx, const ContractRegistry& reg) {
    if (tau.empty()) throw ModelViolation("extend: empty tree");
    return MonitorTree(extendNode(tau.root(), tx, reg));
}

std::vector<Address> monitoringContracts(const ExtendedConfiguration& cfg, TxId t) {
    std::vector<Address> out;
    for (const auto& [addr, mon] : cfg.monitors.byContract)
        if (mon.failmap.count(t)) out.push_back(addr);
    return out;
}

bool allMonitoringCommit(const ExtendedConfiguration& cfg, TxId t) {
    for (const auto& c : monitoringContracts(cfg, t))
        if (cfg.monitors.stateOf(c, t) != MonitorState::Commit) return false;
    return true;
}

bool oneMonitoringFail(const ExtendedConfiguration& cfg, TxId t) {
    for (const auto& c : monitoringContracts(cfg, t))
        if (cfg.monitors.stateOf(c, t) == MonitorState::Fail) return true;
    return false;
}

bool commitWithTimeout(const MonitorContext& delta, const Address& c, TxId t) {
    MonitorState s = delta.stateOf(c, t);
    if (s == MonitorState::Commit) return true;
    return s == MonitorState::Undecided && evalTimeout(delta, c, t) == TimeoutDecision::Commit;
}

bool allMonitoringCommitWithTimeout(const ExtendedConfiguration& cfg, TxId t) {
    for (const auto& c : monitoringContracts(cfg, t))
        if (!commitWithTimeout(cfg.monitors, c, t)) return false;
    return true;
}

MonitorTree innerprune(const MonitorTree& tau, const InnerpruneOptions& opts) {
    if (tau.empty()) return tau;
    return MonitorTree(innerpruneNode(tau.root(), opts));
}

RootDecision decideRoot(const MonitorTree& tau, int k, const InnerpruneOptions& opts) {
    if (heightOf(tau) != k + 1)
        throw ModelViolation("decideRoot: height must be exactly k + 1");
    MonitorTree pruned = innerprune(tau, opts);
    const Transaction& t = nextTx(pruned);

    const auto& root = pruned.root();
    if (root->one) {
        TxStatus st = isCommitSide(root->one->kind) ? TxStatus::Committed : TxStatus::Failed;
        return RootDecision{MonitorTree(root->one->child), t, st};
    }
    if (allLeaves(root->two->commitChild, t.id, allMonitoringCommitWithTimeout))
        return RootDecision{MonitorTree(root->two->commitChild), t, TxStatus::Committed};
    return RootDecision{MonitorTree(root->two->failChild), t, TxStatus::Failed};
}

MonitorTree stripMonitorEntries(const MonitorTree& tau, TxId t) {
    if (tau.empty()) return tau;
    return MonitorTree(stripNode(tau.root(), t));
}

// --- trace output ---

std::string nodeAnnotations(const MonitorTree::NodePtr& node, const std::vector<TxId>& pathTxs) {
    if (pathTxs.empty()) return "-";
    std::string out;
    for (TxId t : pathTxs) {
        if (!out.empty()) out += ' ';
        auto contracts = monitoringContracts(node->cfg, t);
        if (contracts.empty()) {
            out += '-';
        } else if (oneMonitoringFail(node->cfg, t)) {
            out += "✗";  // known to fail
        } else if (allMonitoringCommit(node->cfg, t)) {
            out += "✓";  // known to commit
        } else {
            out += '?';
        }
    }
    return out;
}

namespace {

struct FlatNode {
    std::string path;
    NodePtr node;
    std::vector<TxId> above;
};

void flatten(const NodePtr& n, std::string path, std::vector<TxId> above,
             std::vector<FlatNode>& out) {
    out.push_back(FlatNode{path, n, above});
    if (n->isLeaf()) return;
    std::vector<TxId> below = above;
    below.push_back(n->label().id);
    if (n->one) {
        flatten(n->one->child, path + edgeLetter(n->one->kind), below, out);
    } else {
        flatten(n->two->commitChild, path + 'c', below, out);
        flatten(n->two->failChild, path + 'f', below, out);
    }
}

bool reservedName(const std::string& name) { return name.rfind("__", 0) == 0; }

std::string balancesLine(const ExtendedConfiguration& cfg) {
    std::ostringstream os;
    bool first = true;
    for (const auto& [addr, st] : cfg.ledger.contracts) {
        if (reservedName(addr.value)) continue;
        if (!first) os << ',';
        first = false;
        os << addr.value << '=' << st.balance;
    }
    for (const auto& [user, bal] : cfg.users.users) {
        if (reservedName(user.value)) continue;
        if (!first) os << ',';
        first = false;
        os << user.value << '=' << bal;
    }
    return os.str();
}

}  // namespace

std::string treeToText(const MonitorTree& tau) {
    if (tau.empty()) return "";
    std::vector<FlatNode> flat;
    flatten(tau.root(), "", {}, flat);
    std::ostringstream os;
    for (const auto& f : flat) {
        os << (f.path.empty() ? "root" : f.path) << ' ' << balancesLine(f.node->cfg) << ' '
           << digestOf(f.node->cfg) << " [" << nodeAnnotations(f.node, f.above) << "]\n";
    }
    return os.str();
}

std::string treeToDot(const MonitorTree& tau) {
    std::ostringstream os;
    os << "digraph monitoring_tree {\n  rankdir=LR;\n  node [shape=box, fontname=\"monospace\"];\n";
    if (!tau.empty()) {
        std::vector<FlatNode> flat;
        flatten(tau.root(), "", {}, flat);
        for (const auto& f : flat) {
            std::string id = f.path.empty() ? "root" : f.path;
            os << "  \"" << id << "\" [label=\"" << (f.path.empty() ? "N" : "N^" + f.path)
               << "\\n" << balancesLine(f.node->cfg) << "\\n["
               << nodeAnnotations(f.node, f.above) << "]\"];\n";
        }
        for (const auto& f : flat) {
            if (f.node->isLeaf()) continue;
            std::string id = f.path.empty() ? "root" : f.path;
            std::string tx = "t" + std::to_string(f.node->label().id.value);
            if (f.node->one) {
                os << "  \"" << id << "\" -> \"" << f.path + edgeLetter(f.node->one->kind)
                   << "\" [label=\"" << tx << "\"];\n";
            } else {
                os << "  \"" << id << "\" -> \"" << f.path + 'c' << "\" [label=\"" << tx
                   << " commit\"];\n";
                os << "  \"" << id << "\" -> \"" << f.path + 'f' << "\" [label=\"" << tx
                   << " fail\"];\n";
            }
        }
    }
    os << "}\n";
    return os.str();
}

std::string treeDigest(const MonitorTree& tau) {
    static const char* hex = "0123456789abcdef";
    std::uint64_t h = fnv1a64(treeToText(tau));
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = hex[h & 0xf];
        h >>= 4;
    }
    return out;
}

}  // namespace futmon
