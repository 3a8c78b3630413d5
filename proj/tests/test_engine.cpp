#include <future>

#include "doctest.h"
#include "testutil.hpp"

using namespace futmon;
using namespace futmon::testutil;

namespace {

// test-only behavior: decides a foreign/unactivated monitor entry
struct BadDecider final : ContractBehavior {
    void invoke(ExecutionContext& ctx, const std::string&) const override {
        ctx.monitorDecide(TxId{0}, MonitorState::Fail);
    }
};

struct FailActivator final : ContractBehavior {
    void invoke(ExecutionContext& ctx, const std::string&) const override {
        ctx.monitorActivate(MonitorState::Fail);
    }
};

struct FirstProbe final : ContractBehavior {
    void invoke(ExecutionContext& ctx, const std::string& ep) const override {
        if (ep == "start") {
            ctx.putInt("first-start", ctx.first() ? 1 : 0);
            ctx.emitOperation(ctx.self(), "again", {}, 0);
        } else if (ep == "again") {
            ctx.putInt("first-again", ctx.first() ? 1 : 0);
        }
    }
};

}  // namespace

TEST_CASE("wallet transfer with sufficient balance commits") {
    World w;
    w.withUser("u", 0).withContract("a", "wallet", 10).withContract("b", "wallet", 0);
    auto out = applyTx(call(0, "u", "a", "send", {Scalar{Address{"b"}}, Scalar{std::int64_t{4}}}),
                       w.genesis, w.registry);
    REQUIRE(isCommit(out));
    const auto& cfg = std::get<CommitOutcome>(out).cfg;
    CHECK(balanceOf(cfg, "a") == 6);
    CHECK(balanceOf(cfg, "b") == 4);
    CHECK(cfg.ledger.height == 1);
    CHECK(cfg.monitors.byContract.empty());
}

TEST_CASE("lending transaction pends with the documented balances") {
    World w;
    w.withUser("u", 0)
        .withContract("NC", "naive-client", 100)
        .withContract("L", "lender", 1000);
    auto out = applyTx(call(0, "u", "NC", "borrow",
                            {Scalar{Address{"L"}}, Scalar{std::int64_t{100}}}),
                       w.genesis, w.registry);
    REQUIRE(isPending(out));
    const auto& pending = std::get<PendingOutcome>(out);

    CHECK(balanceOf(pending.commitCfg, "NC") == 200);
    CHECK(balanceOf(pending.commitCfg, "L") == 900);
    CHECK(pending.commitCfg.monitors.stateOf(Address{"L"}, TxId{0}) == MonitorState::Undecided);
    CHECK(pending.commitCfg.monitors.byContract.at(Address{"L"}).timeoutmap.at(TxId{0}) ==
          TimeoutDecision::Fail);

    // the failing configuration is the pre-state (zero cost here)
    CHECK(pending.failCfg == w.genesis);
}

TEST_CASE("deciding a never-activated monitor fails the transaction") {
    World w;
    w.withUser("u", 0).withBehavior("bad", std::make_shared<BadDecider>());
    auto out = applyTx(call(5, "u", "bad", "poke"), w.genesis, w.registry);
    REQUIRE(isFail(out));
    CHECK(std::get<FailOutcome>(out).cfg == w.genesis);
}

TEST_CASE("activation straight to Fail fails immediately") {
    World w;
    w.withUser("u", 0).withBehavior("grim", std::make_shared<FailActivator>());
    auto out = applyTx(call(0, "u", "grim", "poke"), w.genesis, w.registry);
    CHECK(isFail(out));
}

TEST_CASE("underfunded lender refuses and the transaction still commits") {
    World w;
    w.withUser("u", 0)
        .withContract("NC", "naive-client", 100)
        .withContract("L", "lender", 50);
    auto out = applyTx(call(0, "u", "NC", "borrow",
                            {Scalar{Address{"L"}}, Scalar{std::int64_t{100}}}),
                       w.genesis, w.registry);
    REQUIRE(isCommit(out));
    const auto& cfg = std::get<CommitOutcome>(out).cfg;
    CHECK(balanceOf(cfg, "L") == 50);
    CHECK(balanceOf(cfg, "NC") == 100);
    CHECK(cfg.monitors.byContract.empty());
}

TEST_CASE("validateMonitorWrites accepts activations and decisions, flags the rest") {
    MonitorContext pre;
    pre.byContract[Address{"L"}].failmap[TxId{1}] = MonitorState::Undecided;

    MonitorWriteLog activation = {{Address{"L"}, TxId{4}, MonitorState::Undecided,
                                   TimeoutDecision::Fail}};
    CHECK_FALSE(validateMonitorWrites(activation, pre, TxId{4}).has_value());

    MonitorWriteLog decision = {{Address{"L"}, TxId{1}, MonitorState::Commit, {}}};
    CHECK_FALSE(validateMonitorWrites(decision, pre, TxId{4}).has_value());

    MonitorWriteLog bad = {{Address{"C"}, TxId{2}, MonitorState::Fail, {}}};
    auto violation = validateMonitorWrites(bad, pre, TxId{4});
    REQUIRE(violation.has_value());
    CHECK(violation->contract == Address{"C"});
    CHECK(violation->tx == TxId{2});

    // last write per key wins: activate then decide the current transaction
    MonitorWriteLog rewrite = {
        {Address{"L"}, TxId{4}, MonitorState::Undecided, TimeoutDecision::Fail},
        {Address{"L"}, TxId{4}, MonitorState::Commit, {}},
    };
    CHECK_FALSE(validateMonitorWrites(rewrite, pre, TxId{4}).has_value());
}

TEST_CASE("evalTimeout reads the recorded decision, Commit by default") {
    MonitorContext delta;
    delta.byContract[Address{"L"}].failmap[TxId{0}] = MonitorState::Undecided;
    delta.byContract[Address{"L"}].timeoutmap[TxId{0}] = TimeoutDecision::Fail;
    delta.byContract[Address{"M"}].failmap[TxId{1}] = MonitorState::Undecided;

    CHECK(evalTimeout(delta, Address{"L"}, TxId{0}) == TimeoutDecision::Fail);
    CHECK(evalTimeout(delta, Address{"M"}, TxId{1}) == TimeoutDecision::Commit);
    CHECK_THROWS_AS(evalTimeout(delta, Address{"L"}, TxId{7}), ModelViolation);
}

TEST_CASE("applyTx is deterministic") {
    World w;
    w.withUser("u", 0)
        .withContract("NC", "client", 100)
        .withContract("L", "lender", 1000);
    Transaction tx = call(0, "u", "NC", "borrow", {Scalar{Address{"L"}}, Scalar{std::int64_t{100}}});
    auto a = applyTx(tx, w.genesis, w.registry);
    auto b = applyTx(tx, w.genesis, w.registry);
    REQUIRE(isPending(a));
    REQUIRE(isPending(b));
    CHECK(std::get<PendingOutcome>(a).commitCfg == std::get<PendingOutcome>(b).commitCfg);
    CHECK(std::get<PendingOutcome>(a).failCfg == std::get<PendingOutcome>(b).failCfg);
}

TEST_CASE("committed outcomes conserve tokens") {
    World w;
    w.withUser("u", 50)
        .withContract("a", "wallet", 10)
        .withContract("b", "splitter", 3)
        .withContract("m", "market", 100);
    Tokens before = totalTokens(w.genesis);

    auto deposit = applyTx(call(0, "u", "a", "deposit", {}, 20), w.genesis, w.registry);
    REQUIRE(isCommit(deposit));
    CHECK(totalTokens(std::get<CommitOutcome>(deposit).cfg) == before);

    auto payout = applyTx(call(0, "u", "b", "payout",
                               {Scalar{Address{"a"}}, Scalar{Address{"m"}}}),
                          w.genesis, w.registry);
    REQUIRE(isCommit(payout));
    CHECK(totalTokens(std::get<CommitOutcome>(payout).cfg) == before);
}

TEST_CASE("failing transactions charge the source its cost") {
    World w;
    w.withUser("u", 10).withContract("a", "wallet", 0);
    // sending more than the wallet holds aborts
    Transaction tx = call(0, "u", "a", "send", {Scalar{Address{"a"}}, Scalar{std::int64_t{5}}},
                          0, 3);
    auto out = applyTx(tx, w.genesis, w.registry);
    REQUIRE(isFail(out));
    const auto& cfg = std::get<FailOutcome>(out).cfg;
    CHECK(userBalance(cfg, "u") == 7);
    CHECK(cfg.ledger == w.genesis.ledger);
    CHECK(cfg.monitors == w.genesis.monitors);

    // committed transactions do not pay the cost
    Transaction ok = call(0, "u", "a", "deposit", {}, 2, 3);
    auto committed = applyTx(ok, w.genesis, w.registry);
    REQUIRE(isCommit(committed));
    CHECK(userBalance(std::get<CommitOutcome>(committed).cfg, "u") == 8);
}

TEST_CASE("unknown target or entrypoint fails in-model, unknown source is a scenario error") {
    World w;
    w.withUser("u", 5).withContract("a", "wallet", 0);
    CHECK(isFail(applyTx(call(0, "u", "nope", "deposit"), w.genesis, w.registry)));
    CHECK(isFail(applyTx(call(0, "u", "a", "frobnicate"), w.genesis, w.registry)));
    CHECK_THROWS_AS(applyTx(call(0, "ghost", "a", "deposit"), w.genesis, w.registry),
                    ScenarioError);
}

TEST_CASE("transaction amount moves from the user to the target") {
    World w;
    w.withUser("u", 10).withContract("a", "wallet", 1);
    auto out = applyTx(call(0, "u", "a", "deposit", {}, 6), w.genesis, w.registry);
    REQUIRE(isCommit(out));
    CHECK(userBalance(std::get<CommitOutcome>(out).cfg, "u") == 4);
    CHECK(balanceOf(std::get<CommitOutcome>(out).cfg, "a") == 7);

    CHECK(isFail(applyTx(call(0, "u", "a", "deposit", {}, 11), w.genesis, w.registry)));
}

TEST_CASE("flash loans: repaid commits, unrepaid fails via the fail bit") {
    World w;
    w.withUser("u", 0)
        .withContract("B", "flash-borrower", 0)
        .withContract("FL", "flashloan-lender", 1000);

    auto repaid = applyTx(call(0, "u", "B", "borrowAndRepay",
                               {Scalar{Address{"FL"}}, Scalar{std::int64_t{100}}}),
                          w.genesis, w.registry);
    REQUIRE(isCommit(repaid));
    CHECK(balanceOf(std::get<CommitOutcome>(repaid).cfg, "FL") == 1000);

    auto kept = applyTx(call(0, "u", "B", "borrowOnly",
                             {Scalar{Address{"FL"}}, Scalar{std::int64_t{100}}}),
                        w.genesis, w.registry);
    REQUIRE(isFail(kept));
    CHECK(std::get<FailOutcome>(kept).cfg == w.genesis);
}

TEST_CASE("first is true exactly on the first invocation of a contract") {
    World w;
    w.withUser("u", 0).withBehavior("p", std::make_shared<FirstProbe>());
    auto out = applyTx(call(0, "u", "p", "start"), w.genesis, w.registry);
    REQUIRE(isCommit(out));
    const Storage& st =
        std::get<CommitOutcome>(out).cfg.ledger.contracts.at(Address{"p"}).storage;
    CHECK(std::get<std::int64_t>(st.at("first-start")) == 1);
    CHECK(std::get<std::int64_t>(st.at("first-again")) == 0);
}

TEST_CASE("pending outcomes carry an undecided entry, commits carry none") {
    World w;
    w.withUser("u", 0).withContract("s", "conditional-sender", 1).withContract("w", "wallet", 0);

    auto pending = applyTx(call(0, "u", "s", "send", {Scalar{Address{"w"}}}), w.genesis,
                           w.registry);
    REQUIRE(isPending(pending));
    CHECK(std::get<PendingOutcome>(pending).commitCfg.monitors.stateOf(Address{"s"}, TxId{0}) ==
          MonitorState::Undecided);

    auto plain = applyTx(call(0, "u", "w", "deposit"), w.genesis, w.registry);
    REQUIRE(isCommit(plain));
    for (const auto& [a, mon] : std::get<CommitOutcome>(plain).cfg.monitors.byContract)
        CHECK(mon.failmap.count(TxId{0}) == 0);
}

TEST_CASE("pending frame with a nonzero cost: pre-state plus the discount") {
    World w;
    w.withUser("u", 10)
        .withContract("NC", "naive-client", 100)
        .withContract("L", "lender", 1000);
    Transaction tx = call(0, "u", "NC", "borrow",
                          {Scalar{Address{"L"}}, Scalar{std::int64_t{100}}}, 0, 4);
    auto out = applyTx(tx, w.genesis, w.registry);
    REQUIRE(isPending(out));
    const auto& p = std::get<PendingOutcome>(out);
    CHECK(p.failCfg.ledger == w.genesis.ledger);
    CHECK(p.failCfg.monitors == w.genesis.monitors);
    CHECK(userBalance(p.failCfg, "u") == 6);       // charged on the failing branch
    CHECK(userBalance(p.commitCfg, "u") == 10);    // not on the committing one
}

TEST_CASE("every builtin entrypoint is total on arbitrary well-typed arguments") {
    const std::vector<std::string> entrypoints = {
        "deposit", "send",   "payout",  "lend",          "returnLoan", "revoke",
        "borrow",  "invest", "payBack", "borrowAndRepay", "borrowOnly", "bogus"};
    const std::vector<std::vector<Scalar>> argSets = {
        {},
        {Scalar{std::int64_t{5}}},
        {Scalar{Address{"other"}}},
        {Scalar{TxId{0}}},
        {Scalar{Address{"other"}}, Scalar{std::int64_t{50}}},
        {Scalar{Address{"x"}}, Scalar{TxId{1}}, Scalar{std::int64_t{10}}},
        {Scalar{std::int64_t{-3}}, Scalar{std::int64_t{7}}},
        {Scalar{Address{"other"}}, Scalar{Address{"x"}}},
    };
    for (const auto& kind : builtinKinds()) {
        World w;
        w.withUser("u", 40)
            .withContract("x", kind, 120)
            .withContract("other", "wallet", 5);
        for (const auto& ep : entrypoints) {
            for (const auto& args : argSets) {
                for (Tokens amount : {Tokens{0}, Tokens{1}, Tokens{30}}) {
                    INFO(kind << "." << ep << " with " << args.size() << " args, amount "
                              << amount);
                    Transaction tx = call(0, "u", "x", ep, args, amount);
                    TransactionOutcome out = applyTx(tx, w.genesis, w.registry);
                    CHECK((isCommit(out) || isFail(out) || isPending(out)));
                    // pending iff an undecided entry for the transaction exists
                    if (isPending(out)) {
                        const auto& cfg = std::get<PendingOutcome>(out).commitCfg;
                        bool undecided = false;
                        for (const auto& [a, mon] : cfg.monitors.byContract) {
                            auto it = mon.failmap.find(TxId{0});
                            undecided = undecided ||
                                        (it != mon.failmap.end() &&
                                         it->second == MonitorState::Undecided);
                        }
                        CHECK(undecided);
                    }
                    if (isCommit(out)) {
                        const auto& cfg = std::get<CommitOutcome>(out).cfg;
                        for (const auto& [a, mon] : cfg.monitors.byContract) {
                            auto it = mon.failmap.find(TxId{0});
                            CHECK((it == mon.failmap.end() ||
                                   it->second == MonitorState::Commit));
                        }
                    }
                }
            }
        }
    }
}

TEST_CASE("concurrent applyTx calls on shared configurations agree") {
    World w;
    w.withUser("u", 0)
        .withContract("NC", "client", 100)
        .withContract("L", "lender", 1000);
    Transaction tx = call(0, "u", "NC", "borrow",
                          {Scalar{Address{"L"}}, Scalar{std::int64_t{100}}});

    std::vector<std::future<TransactionOutcome>> futures;
    for (int i = 0; i < 8; ++i)
        futures.push_back(std::async(std::launch::async, [&] {
            return applyTx(tx, w.genesis, w.registry);
        }));
    TransactionOutcome reference = applyTx(tx, w.genesis, w.registry);
    REQUIRE(isPending(reference));
    for (auto& f : futures) {
        TransactionOutcome out = f.get();
        REQUIRE(isPending(out));
        CHECK(std::get<PendingOutcome>(out).commitCfg ==
              std::get<PendingOutcome>(reference).commitCfg);
        CHECK(std::get<PendingOutcome>(out).failCfg ==
              std::get<PendingOutcome>(reference).failCfg);
    }
}

TEST_CASE("applyTx rejects ids at or below existing monitor entries") {
    World w;
    w.withUser("u", 0).withContract("w", "wallet", 0);
    ExtendedConfiguration cfg = w.genesis;
    cfg.monitors.byContract[Address{"w"}].failmap[TxId{3}] = MonitorState::Undecided;
    cfg.monitors.byContract[Address{"w"}].timeoutmap[TxId{3}] = TimeoutDecision::Commit;
    CHECK_THROWS_AS(applyTx(call(3, "u", "w", "deposit"), cfg, w.registry), ModelViolation);
    CHECK(isCommit(applyTx(call(4, "u", "w", "deposit"), cfg, w.registry)));
}
