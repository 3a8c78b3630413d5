#include "doctest.h"
#include "futmon/oracle.hpp"
#include "testutil.hpp"

using namespace futmon;
using namespace futmon::testutil;

namespace {

World exchangeWorld() {
    World w;
    w.withUser("u", 0)
        .withContract("a", "conditional-sender", 1)
        .withContract("b", "conditional-sender", 1)
        .withContract("c", "splitter", 0)
        .withSystemAccounts();
    return w;
}

std::vector<Transaction> exchangeTxs() {
    return {
        call(0, "u", "a", "send", {Scalar{Address{"c"}}}),
        call(1, "u", "b", "send", {Scalar{Address{"c"}}}),
        call(2, "u", "c", "payout", {Scalar{Address{"a"}}, Scalar{Address{"b"}}}),
    };
}

World lenderWorld(const std::string& clientKind, const std::string& lenderKind) {
    World w;
    w.withUser("u", 0)
        .withContract("NC", clientKind, 100)
        .withContract("L", lenderKind, 1000)
        .withContract("M", "market", 500)
        .withSystemAccounts();
    return w;
}

std::vector<Transaction> loanTxs() {
    return {
        call(0, "u", "NC", "borrow", {Scalar{Address{"L"}}, Scalar{std::int64_t{100}}}),
        call(1, "u", "NC", "invest", {Scalar{Address{"M"}}}),
        call(2, "u", "NC", "payBack",
             {Scalar{Address{"L"}}, Scalar{TxId{0}}, Scalar{std::int64_t{100}}}),
    };
}

}  // namespace

TEST_CASE("the exchange scenario has exactly one consistent future: all commits") {
    World w = exchangeWorld();
    auto consistent = enumerateConsistentFutures(w.genesis, exchangeTxs(), 2, w.registry);
    REQUIRE(consistent.size() == 1);
    CHECK(consistent[0].outcomes ==
          std::vector<TxStatus>{TxStatus::Committed, TxStatus::Committed, TxStatus::Committed});
    CHECK(consistent[0].pending == std::vector<bool>{true, true, false});
}

TEST_CASE("the malicious lender's unique future fails the loan") {
    World w = lenderWorld("naive-client", "malicious-lender");
    auto consistent = enumerateConsistentFutures(w.genesis, loanTxs(), 2, w.registry);
    REQUIRE(consistent.size() == 1);
    CHECK(consistent[0].outcomes ==
          std::vector<TxStatus>{TxStatus::Failed, TxStatus::Failed, TxStatus::Committed});
    CHECK(consistent[0].pending == std::vector<bool>{true, false, false});
}

TEST_CASE("unmonitored scenarios have a single trivial future") {
    World w;
    w.withUser("u", 20).withContract("wlt", "wallet", 0).withSystemAccounts();
    std::vector<Transaction> txs = {call(0, "u", "wlt", "deposit", {}, 5),
                                    call(1, "u", "wlt", "deposit", {}, 3)};
    auto consistent = enumerateConsistentFutures(w.genesis, txs, 2, w.registry);
    REQUIRE(consistent.size() == 1);
    CHECK(consistent[0].pending == std::vector<bool>{false, false});
    CHECK(consistent[0].outcomes ==
          std::vector<TxStatus>{TxStatus::Committed, TxStatus::Committed});
}

TEST_CASE("engine decisions match the oracle on the worked scenarios") {
    {
        World w = exchangeWorld();
        OracleReport r = checkDecisionsAgainstOracle(w.genesis, exchangeTxs(), 2, w.registry);
        CHECK(r.ok);
        CHECK(r.consistentCount == 1);
    }
    for (const char* lender : {"lender", "malicious-lender"}) {
        for (const char* client : {"naive-client", "client"}) {
            World w = lenderWorld(client, lender);
            OracleReport r = checkDecisionsAgainstOracle(w.genesis, loanTxs(), 2, w.registry);
            INFO(client << " vs " << lender);
            CHECK(r.ok);
        }
    }
}

TEST_CASE("a broken commit guard is caught with a counterexample") {
    World w = exchangeWorld();
    StepOptions broken;
    broken.prune.commitGuard = false;
    OracleReport r = checkDecisionsAgainstOracle(w.genesis, exchangeTxs(), 2, w.registry, broken);
    CHECK_FALSE(r.ok);
    REQUIRE(!r.engineStatuses.empty());
    CHECK(r.engineStatuses[0] == TxStatus::Failed);    // the mutant wrongly fails t0
    CHECK(r.oracleStatuses[0] == TxStatus::Committed);
    CHECK(!r.problems.empty());
}

TEST_CASE("innerprune removals equal the oracle's impossible nodes") {
    World w = exchangeWorld();
    CheckReport r = checkImpossibleNodes(w.genesis, exchangeTxs(), 2, w.registry);
    CHECK(r.ok);

    World m = lenderWorld("client", "malicious-lender");
    CHECK(checkImpossibleNodes(m.genesis, loanTxs(), 2, m.registry).ok);
}

TEST_CASE("revoking lender: an explicit Fail decision reverts the loan") {
    World w;
    w.withUser("u", 0)
        .withContract("NC", "naive-client", 100)
        .withContract("L", "revoking-lender", 1000)
        .withSystemAccounts();
    std::vector<Transaction> txs = {
        call(0, "u", "NC", "borrow", {Scalar{Address{"L"}}, Scalar{std::int64_t{100}}}),
        call(1, "u", "L", "revoke", {Scalar{TxId{0}}}),
    };
    BlockchainRun run = playAll(w, txs, 2);
    History history = drain(run, w.registry);
    REQUIRE(history.entries.size() == 2);
    CHECK(history.entries[0].status == TxStatus::Failed);
    CHECK(balanceOf(history.entries.back().config, "L") == 1000);

    OracleReport r = checkDecisionsAgainstOracle(w.genesis, txs, 2, w.registry);
    CHECK(r.ok);
    CHECK(checkImpossibleNodes(w.genesis, txs, 2, w.registry).ok);
}

TEST_CASE("size bound check accepts reachable trees and reports breaches") {
    World w = exchangeWorld();
    BlockchainRun run = playAll(w, exchangeTxs(), 2);
    CHECK(checkSizeBound(run.tree, 2).ok);

    // a fabricated over-wide tree is rejected: three branching levels, k = 2
    CHECK_FALSE(checkSizeBound(run.tree, 0).ok);
}

TEST_CASE("legacyDiff reports zero differences on monitor-free runs") {
    World w;
    w.withUser("u", 40)
        .withContract("a", "wallet", 10)
        .withContract("b", "wallet", 5)
        .withSystemAccounts();
    std::vector<Transaction> txs = {
        call(0, "u", "a", "deposit", {}, 7),
        call(1, "u", "a", "send", {Scalar{Address{"b"}}, Scalar{std::int64_t{17}}}),
        call(2, "u", "b", "send", {Scalar{Address{"a"}}, Scalar{std::int64_t{999}}}),
    };
    CheckReport r = legacyDiff(w.genesis, txs, 2, w.registry);
    CHECK(r.ok);
    CHECK(r.problems.empty());
}

TEST_CASE("the enumeration refuses more monitored transactions than the cap") {
    World w;
    w.withUser("u", 0).withSystemAccounts();
    std::vector<Transaction> txs;
    for (int i = 0; i < 7; ++i) {
        std::string name = "s" + std::to_string(i);
        w.withContract(name, "conditional-sender", 1);
    }
    w.withContract("sink", "wallet", 0);
    for (std::uint64_t i = 0; i < 7; ++i)
        txs.push_back(call(i, "u", "s" + std::to_string(i), "send", {Scalar{Address{"sink"}}}));
    CHECK_THROWS_AS(enumerateConsistentFutures(w.genesis, txs, 4, w.registry),
                    OracleCapExceeded);
}
