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

TEST_CASE("initRun builds a single-node tree and validates the window") {
    World w = exchangeWorld();
    BlockchainRun run = initRun(w.genesis, 2);
    CHECK(sizeOf(run.tree) == 1);
    CHECK(heightOf(run.tree) == 0);
    CHECK(run.history.entries.empty());
    CHECK(run.tree.rootConfig() == w.genesis);

    World five = lenderWorld("naive-client", "lender");
    BlockchainRun run5 = initRun(five.genesis, 2);
    CHECK(balanceOf(run5.tree.rootConfig(), "NC") == 100);
    CHECK(balanceOf(run5.tree.rootConfig(), "L") == 1000);

    CHECK_THROWS_AS(initRun(w.genesis, 0), ScenarioError);
}

TEST_CASE("step keeps history fixed for the first k steps, then appends one entry per step") {
    World w = exchangeWorld();
    auto txs = exchangeTxs();
    BlockchainRun run = initRun(w.genesis, 2);

    run = step(run, txs[0], w.registry);
    CHECK(run.history.entries.empty());
    CHECK(heightOf(run.tree) == 1);

    run = step(run, txs[1], w.registry);
    CHECK(run.history.entries.empty());
    CHECK(heightOf(run.tree) == 2);

    run = step(run, txs[2], w.registry);
    REQUIRE(run.history.entries.size() == 1);
    CHECK(run.history.entries[0].tx.id == TxId{0});
    CHECK(run.history.entries[0].status == TxStatus::Committed);
    CHECK(heightOf(run.tree) == 2);

    // the consolidated configuration is the new tree root
    CHECK(run.history.entries[0].config == run.tree.rootConfig());

    // consolidated entries carry no monitor bookkeeping for the permanent tx
    CHECK(run.history.entries[0].config.monitors.stateOf(Address{"a"}, TxId{0}) ==
          MonitorState::None);

    CHECK_THROWS_AS(step(run, call(9, "u", "a", "send", {Scalar{Address{"c"}}}), w.registry),
                    ScenarioError);
}

TEST_CASE("drain consolidates every submitted transaction") {
    World w = exchangeWorld();
    BlockchainRun run = playAll(w, exchangeTxs(), 2);
    History history = drain(run, w.registry);
    REQUIRE(history.entries.size() == 3);
    for (const auto& e : history.entries) CHECK(e.status == TxStatus::Committed);

    // both tokens made it home
    const auto& last = history.entries.back().config;
    CHECK(balanceOf(last, "a") == 1);
    CHECK(balanceOf(last, "b") == 1);
    CHECK(balanceOf(last, "c") == 0);

    // draining an empty run leaves the history empty
    History empty = drain(initRun(w.genesis, 2), w.registry);
    CHECK(empty.entries.empty());
}

TEST_CASE("malicious lender ends with a failed loan and a kept repayment") {
    World w = lenderWorld("naive-client", "malicious-lender");
    BlockchainRun run = playAll(w, loanTxs(), 2);
    History history = drain(run, w.registry);
    REQUIRE(history.entries.size() == 3);
    CHECK(history.entries[0].status == TxStatus::Failed);
    CHECK(history.entries[1].status == TxStatus::Failed);
    CHECK(history.entries[2].status == TxStatus::Committed);

    const auto& last = history.entries.back().config;
    CHECK(balanceOf(last, "NC") == 0);
    CHECK(balanceOf(last, "L") == 1100);
}

TEST_CASE("window longer than the run still drains everything") {
    World w;
    w.withUser("u", 10).withContract("wlt", "wallet", 0).withSystemAccounts();
    BlockchainRun run = initRun(w.genesis, 4);
    run = step(run, call(0, "u", "wlt", "deposit", {}, 5), w.registry);
    History history = drain(run, w.registry);
    REQUIRE(history.entries.size() == 1);
    CHECK(history.entries[0].status == TxStatus::Committed);
    CHECK(balanceOf(history.entries[0].config, "wlt") == 5);
}

TEST_CASE("legacyApply commits plain transfers and preserves state on failure") {
    World w;
    w.withUser("u", 0).withContract("a", "wallet", 10).withContract("b", "wallet", 0);

    LegacyResult ok = legacyApply(call(0, "u", "a", "send",
                                       {Scalar{Address{"b"}}, Scalar{std::int64_t{4}}}),
                                  w.genesis.ledger, w.genesis.users, w.registry);
    CHECK(ok.status == TxStatus::Committed);
    CHECK(ok.ledger.contracts.at(Address{"b"}).balance == 4);

    LegacyResult no = legacyApply(call(0, "u", "a", "send",
                                       {Scalar{Address{"b"}}, Scalar{std::int64_t{40}}}),
                                  w.genesis.ledger, w.genesis.users, w.registry);
    CHECK(no.status == TxStatus::Failed);
    CHECK(no.ledger == w.genesis.ledger);
}

TEST_CASE("legacy engine: fail bit guards flash loans, future monitors are violations") {
    World w;
    w.withUser("u", 0)
        .withContract("FL", "flashloan-lender", 500)
        .withContract("B", "flash-borrower", 0)
        .withContract("L", "lender", 500);

    // lend without a same-transaction return fails via the fail bit
    LegacyResult kept = legacyApply(call(0, "u", "B", "borrowOnly",
                                         {Scalar{Address{"FL"}}, Scalar{std::int64_t{50}}}),
                                    w.genesis.ledger, w.genesis.users, w.registry);
    CHECK(kept.status == TxStatus::Failed);

    LegacyResult repaid = legacyApply(call(0, "u", "B", "borrowAndRepay",
                                           {Scalar{Address{"FL"}}, Scalar{std::int64_t{50}}}),
                                      w.genesis.ledger, w.genesis.users, w.registry);
    CHECK(repaid.status == TxStatus::Committed);

    // a future-monitor activation is rejected outright
    LegacyResult monitored = legacyApply(call(0, "u", "L", "lend", {Scalar{std::int64_t{10}}}),
                                         w.genesis.ledger, w.genesis.users, w.registry);
    CHECK(monitored.status == TxStatus::Failed);
    CHECK(monitored.ledger == w.genesis.ledger);
}

TEST_CASE("monitor-free runs stay chains and match the legacy fold") {
    World w;
    w.withUser("u", 30)
        .withContract("a", "wallet", 10)
        .withContract("b", "wallet", 0)
        .withSystemAccounts();
    std::vector<Transaction> txs = {
        call(0, "u", "a", "deposit", {}, 5),
        call(1, "u", "a", "send", {Scalar{Address{"b"}}, Scalar{std::int64_t{12}}}),
        call(2, "u", "b", "send", {Scalar{Address{"a"}}, Scalar{std::int64_t{99}}}),  // fails
        call(3, "u", "b", "deposit", {}, 1),
    };

    BlockchainRun run = initRun(w.genesis, 3);
    for (const auto& tx : txs) {
        run = step(run, tx, w.registry);
        CHECK(run.tree.root()->two.has_value() == false);  // always a chain
    }
    History history = drain(run, w.registry);

    LedgerState ledger = w.genesis.ledger;
    ExternalBalances users = w.genesis.users;
    for (std::size_t i = 0; i < txs.size(); ++i) {
        LegacyResult legacy = legacyApply(txs[i], ledger, users, w.registry);
        CHECK(history.entries[i].status == legacy.status);
        CHECK(history.entries[i].config ==
              ExtendedConfiguration{legacy.ledger, {}, legacy.users});
        ledger = legacy.ledger;
        users = legacy.users;
    }
}

namespace {

// borrows the same amount from two lenders within one transaction, so both
// monitor it
struct DualBorrower final : ContractBehavior {
    void invoke(ExecutionContext& ctx, const std::string& ep) const override {
        if (ep == "borrow") {
            if (ctx.args().size() != 3) ctx.abortTx("borrow(l1, l2, amount)");
            Address l1 = std::get<Address>(ctx.args()[0]);
            Address l2 = std::get<Address>(ctx.args()[1]);
            Scalar amount = ctx.args()[2];
            ctx.emitOperation(l1, "lend", {amount}, 0);
            ctx.emitOperation(l2, "lend", {amount}, 0);
        } else if (ep == "deposit") {
        } else {
            ctx.abortTx("unknown entrypoint " + ep);
        }
    }
};

// activates an undecided monitor and never decides it; the default timeout
// policy (Commit) resolves it at window expiry
struct Optimist final : ContractBehavior {
    void invoke(ExecutionContext& ctx, const std::string& ep) const override {
        if (ep == "watch")
            ctx.monitorActivate(MonitorState::Undecided);
        else if (ep != "deposit")
            ctx.abortTx("unknown entrypoint " + ep);
    }
};

}  // namespace

TEST_CASE("a transaction monitored by two lenders commits only when both are repaid") {
    auto world = [] {
        World w;
        w.withBehavior("B", std::make_shared<DualBorrower>(), 300)
            .withUser("u", 0)
            .withContract("L1", "lender", 500)
            .withContract("L2", "lender", 500)
            .withSystemAccounts();
        return w;
    };
    Transaction borrow = call(0, "u", "B", "borrow",
                              {Scalar{Address{"L1"}}, Scalar{Address{"L2"}},
                               Scalar{std::int64_t{100}}});

    {  // only one lender repaid: the other's timeout fails the loan
        World w = world();
        w.genesis.users.users[UserId{"u"}] = 200;  // funds the repayments
        std::vector<Transaction> txs = {borrow,
                                        call(1, "u", "L1", "returnLoan", {Scalar{TxId{0}}}, 100)};
        History history = drain(playAll(w, txs, 2), w.registry);
        CHECK(history.entries[0].status == TxStatus::Failed);
        CHECK(balanceOf(history.entries.back().config, "L1") == 600);  // kept repayment
        CHECK(balanceOf(history.entries.back().config, "L2") == 500);

        auto pending = applyTx(borrow, w.genesis, w.registry);
        REQUIRE(isPending(pending));
        CHECK(monitoringContracts(std::get<PendingOutcome>(pending).commitCfg, TxId{0}) ==
              std::vector<Address>{Address{"L1"}, Address{"L2"}});

        CHECK(checkDecisionsAgainstOracle(w.genesis, txs, 2, w.registry).ok);
    }
    {  // both repaid inside the window: the loan commits
        World w = world();
        w.genesis.users.users[UserId{"u"}] = 200;
        std::vector<Transaction> txs = {borrow,
                                        call(1, "u", "L1", "returnLoan", {Scalar{TxId{0}}}, 100),
                                        call(2, "u", "L2", "returnLoan", {Scalar{TxId{0}}}, 100)};
        History history = drain(playAll(w, txs, 2), w.registry);
        CHECK(history.entries[0].status == TxStatus::Committed);
        CHECK(balanceOf(history.entries.back().config, "B") == 500);  // two loans kept
        CHECK(checkDecisionsAgainstOracle(w.genesis, txs, 2, w.registry).ok);
    }
}

TEST_CASE("an undecided monitor with the default timeout commits at window expiry") {
    World w;
    w.withBehavior("O", std::make_shared<Optimist>(), 0)
        .withUser("u", 0)
        .withSystemAccounts();
    std::vector<Transaction> txs = {call(0, "u", "O", "watch")};
    History history = drain(playAll(w, txs, 3), w.registry);
    REQUIRE(history.entries.size() == 1);
    CHECK(history.entries[0].status == TxStatus::Committed);
    CHECK(checkDecisionsAgainstOracle(w.genesis, txs, 3, w.registry).ok);
}

TEST_CASE("tree root always equals the last consolidated configuration") {
    World w = lenderWorld("client", "lender");
    BlockchainRun run = initRun(w.genesis, 2);
    for (const auto& tx : loanTxs()) {
        run = step(run, tx, w.registry);
        const ExtendedConfiguration& expected = run.history.entries.empty()
                                                    ? run.history.genesis
                                                    : run.history.entries.back().config;
        CHECK(run.tree.rootConfig() == expected);
    }
}
