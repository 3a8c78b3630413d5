#include "futmon/builtins.hpp"

#include <algorithm>

namespace futmon {

std::string txKey(const std::string& prefix, TxId t) {
    std::string digits = std::to_string(t.value);
    std::string out = prefix;
    out += '/';
    out.append(10 - std::min<std::size_t>(10, digits.size()), '0');
    out += digits;
    return out;
}

namespace {

std::int64_t argInt(ExecutionContext& ctx, std::size_t i) {
    if (i >= ctx.args().size() || !std::holds_alternative<std::int64_t>(ctx.args()[i]))
        ctx.abortTx("expected integer argument");
    return std::get<std::int64_t>(ctx.args()[i]);
}

Address argAddress(ExecutionContext& ctx, std::size_t i) {
    if (i >= ctx.args().size() || !std::holds_alternative<Address>(ctx.args()[i]))
        ctx.abortTx("expected address argument");
    return std::get<Address>(ctx.args()[i]);
}

TxId argTxId(ExecutionContext& ctx, std::size_t i) {
    if (i >= ctx.args().size() || !std::holds_alternative<TxId>(ctx.args()[i]))
        ctx.abortTx("expected transaction-id argument");
    return std::get<TxId>(ctx.args()[i]);
}

// Sends tokens to either a contract (via its deposit entrypoint) or an
// external user.
void payTo(ExecutionContext& ctx, const CallerRef& to, Tokens amount) {
    if (std::holds_alternative<Address>(to))
        ctx.emitOperation(std::get<Address>(to), "deposit", {}, amount);
    else
        ctx.transferToUser(std::get<UserId>(to), amount);
}

struct Wallet final : ContractBehavior {
    void invoke(ExecutionContext& ctx, const std::string& ep) const override {
        if (ep == "send") {
            Address to = argAddress(ctx, 0);
            Tokens amount = argInt(ctx, 1);
            ctx.emitOperation(to, "deposit", {}, amount);
        } else if (ep == "deposit") {
            // plain receive
        } else {
            ctx.abortTx("wallet: unknown entrypoint " + ep);
        }
    }
};

// Appendix contracts a and b: part with a token only if it comes back
// within the monitoring window.
struct ConditionalSender final : ContractBehavior {
    void invoke(ExecutionContext& ctx, const std::string& ep) const override {
        if (ep == "send") {
            Address to = argAddress(ctx, 0);
            if (ctx.balance() < 1) return;  // nothing to send
            ctx.emitOperation(to, "deposit", {}, 1);
            ctx.putInt(txKey("sent", ctx.txid()), 1);
            ctx.monitorActivate(MonitorState::Undecided);
        } else if (ep == "deposit") {
            if (ctx.amount() < 1) return;
            // a returned token commits the oldest outstanding send
            const Storage& st = ctx.storage();
            auto it = st.lower_bound("sent/");
            if (it == st.end() || it->first.rfind("sent/", 0) != 0) return;
            std::string key = it->first;
            TxId t{std::stoull(key.substr(5))};
            ctx.monitorDecide(t, MonitorState::Commit);
            ctx.erase(key);
        } else {
            ctx.abortTx("conditional-sender: unknown entrypoint " + ep);
        }
    }
    TimeoutDecision timeoutPolicy(TxId, const Storage&) const override {
        return TimeoutDecision::Fail;
    }
};

struct Splitter final : ContractBehavior {
    void invoke(ExecutionContext& ctx, const std::string& ep) const override {
        if (ep == "payout") {
            Address a = argAddress(ctx, 0);
            Address b = argAddress(ctx, 1);
            ctx.emitOperation(a, "deposit", {}, 1);
            ctx.emitOperation(b, "deposit", {}, 1);
        } else if (ep == "deposit") {
        } else {
            ctx.abortTx("splitter: unknown entrypoint " + ep);
        }
    }
};

// Same-transaction loans: the fail bit is set while a loan is open, so the
// transaction can only commit once everything is repaid.
struct FlashLoanLender final : ContractBehavior {
    void invoke(ExecutionContext& ctx, const std::string& ep) const override {
        std::string key = txKey("pending", ctx.txid());
        if (ep == "lend") {
            Tokens amount = argInt(ctx, 0);
            if (amount <= 0 || ctx.balance() < amount) return;
            payTo(ctx, ctx.caller(), amount);
            std::int64_t pending = ctx.getInt(key) + amount;
            ctx.putInt(key, pending);
            ctx.setFailBit(pending != 0);
        } else if (ep == "returnLoan") {
            std::int64_t pending = ctx.getInt(key) - ctx.amount();
            if (pending == 0)
                ctx.erase(key);
            else
                ctx.putInt(key, pending);
            ctx.setFailBit(pending != 0);
        } else if (ep == "deposit") {
        } else {
            ctx.abortTx("flashloan-lender: unknown entrypoint " + ep);
        }
    }
};

// Future-monitored lender: grants loans freely, records the amount owed per
// lending transaction, and commits the monitor only when a loan is fully
// repaid. Undecided loans time out to Fail.
struct Lender : ContractBehavior {
    void invoke(ExecutionContext& ctx, const std::string& ep) const override {
        if (ep == "lend") {
            Tokens amount = argInt(ctx, 0);
            if (amount <= 0 || ctx.balance() < amount) return;
            payTo(ctx, ctx.caller(), amount);
            std::string key = txKey("pending_returns", ctx.txid());
            ctx.putInt(key, ctx.getInt(key) + amount);
            ctx.monitorActivate(MonitorState::Undecided);
        } else if (ep == "returnLoan") {
            TxId t = argTxId(ctx, 0);
            onRepayment(ctx, t);
        } else if (ep == "deposit") {
        } else {
            ctx.abortTx("lender: unknown entrypoint " + ep);
        }
    }
    virtual void onRepayment(ExecutionContext& ctx, TxId t) const {
        std::string key = txKey("pending_returns", t);
        std::int64_t pending = ctx.getInt(key) - ctx.amount();
        ctx.putInt(key, pending);
        if (pending == 0) ctx.monitorDecide(t, MonitorState::Commit);
    }
    TimeoutDecision timeoutPolicy(TxId, const Storage&) const override {
        return TimeoutDecision::Fail;
    }
};

// Accepts repayments without ever updating its failing map; the timeout
// then reverts the lending transaction while the repayment stands.
struct MaliciousLender final : Lender {
    void onRepayment(ExecutionContext& ctx, TxId t) const override {
        std::string key = txKey("pending_returns", t);
        ctx.putInt(key, ctx.getInt(key) - ctx.amount());
    }
};

// Lender that can also fail an open loan outright.
struct RevokingLender final : Lender {
    void invoke(ExecutionContext& ctx, const std::string& ep) const override {
        if (ep == "revoke") {
            TxId t = argTxId(ctx, 0);
            std::string key = txKey("pending_returns", t);
            if (ctx.storage().count(key) == 0) return;  // nothing lent on this timeline
            ctx.monitorDecide(t, MonitorState::Fail);
            ctx.erase(key);
        } else {
            Lender::invoke(ctx, ep);
        }
    }
};

struct NaiveClient : ContractBehavior {
    void invoke(ExecutionContext& ctx, const std::string& ep) const override {
        if (ep == "borrow") {
            Address lender = argAddress(ctx, 0);
            Tokens amount = argInt(ctx, 1);
            onBorrow(ctx, lender);
            ctx.emitOperation(lender, "lend", {Scalar{amount}}, 0);
        } else if (ep == "invest") {
            Address market = argAddress(ctx, 0);
            if (ctx.balance() < kClientInvestThreshold)
                ctx.abortTx("client: not enough tokens to invest");
            ctx.emitOperation(market, "invest", {}, ctx.balance());
        } else if (ep == "payBack") {
            Address lender = argAddress(ctx, 0);
            TxId t = argTxId(ctx, 1);
            Tokens amount = argInt(ctx, 2);
            onPayBack(ctx, lender, t, amount);
        } else if (ep == "deposit") {
            onDeposit(ctx);
        } else {
            ctx.abortTx("client: unknown entrypoint " + ep);
        }
    }
    virtual void onBorrow(ExecutionContext&, const Address&) const {}
    virtual void onDeposit(ExecutionContext&) const {}
    // pays unconditionally, even on timelines where no loan arrived
    virtual void onPayBack(ExecutionContext& ctx, const Address& lender, TxId t,
                           Tokens amount) const {
        ctx.emitOperation(lender, "returnLoan", {Scalar{t}}, amount);
    }
};

// Tracks what is actually owed per lending transaction, so repayments only
// happen on the timeline where the loan arrived.
struct Client final : NaiveClient {
    void onBorrow(ExecutionContext& ctx, const Address& lender) const override {
        ctx.putStr("awaiting-lender", lender.value);
    }
    void onDeposit(ExecutionContext& ctx) const override {
        auto awaiting = ctx.getStr("awaiting-lender");
        auto from = ctx.callerContract();
        if (!awaiting || !from || from->value != *awaiting) return;
        std::string key = txKey("owed", ctx.txid());
        ctx.putInt(key, ctx.getInt(key) + ctx.amount());
        ctx.erase("awaiting-lender");
    }
    void onPayBack(ExecutionContext& ctx, const Address& lender, TxId t,
                   Tokens amount) const override {
        std::string key = txKey("owed", t);
        std::int64_t owed = ctx.getInt(key);
        if (owed <= 0) return;  // this debt never existed on this timeline
        ctx.emitOperation(lender, "returnLoan", {Scalar{t}}, amount);
        if (owed - amount == 0)
            ctx.erase(key);
        else
            ctx.putInt(key, owed - amount);
    }
};

struct Market final : ContractBehavior {
    Tokens profit;
    explicit Market(Tokens p) : profit(p) {}
    void invoke(ExecutionContext& ctx, const std::string& ep) const override {
        if (ep == "invest") {
            payTo(ctx, ctx.caller(), ctx.amount() + profit);
        } else if (ep == "deposit") {
        } else {
            ctx.abortTx("market: unknown entrypoint " + ep);
        }
    }
};

// Exercises the flash-loan protocol from the borrower side.
struct FlashBorrower final : ContractBehavior {
    void invoke(ExecutionContext& ctx, const std::string& ep) const override {
        if (ep == "borrowAndRepay") {
            Address lender = argAddress(ctx, 0);
            Tokens amount = argInt(ctx, 1);
            ctx.putStr("repay-to", lender.value);
            ctx.emitOperation(lender, "lend", {Scalar{amount}}, 0);
        } else if (ep == "borrowOnly") {
            Address lender = argAddress(ctx, 0);
            Tokens amount = argInt(ctx, 1);
            ctx.emitOperation(lender, "lend", {Scalar{amount}}, 0);
        } else if (ep == "deposit") {
            auto repayTo = ctx.getStr("repay-to");
            auto from = ctx.callerContract();
            if (!repayTo || !from || from->value != *repayTo) return;
            ctx.erase("repay-to");
            ctx.emitOperation(*from, "returnLoan", {}, ctx.amount());
        } else {
            ctx.abortTx("flash-borrower: unknown entrypoint " + ep);
        }
    }
};

}  // namespace

std::shared_ptr<const ContractBehavior> makeBehavior(
    const std::string& kind, const std::map<std::string, std::int64_t>& params) {
    auto param = [&](const std::string& name, std::int64_t fallback) {
        auto it = params.find(name);
        return it == params.end() ? fallback : it->second;
    };
    if (kind == "wallet") return std::make_shared<Wallet>();
    if (kind == "conditional-sender") return std::make_shared<ConditionalSender>();
    if (kind == "splitter") return std::make_shared<Splitter>();
    if (kind == "flashloan-lender") return std::make_shared<FlashLoanLender>();
    if (kind == "lender") return std::make_shared<Lender>();
    if (kind == "malicious-lender") return std::make_shared<MaliciousLender>();
    if (kind == "revoking-lender") return std::make_shared<RevokingLender>();
    if (kind == "naive-client") return std::make_shared<NaiveClient>();
    if (kind == "client") return std::make_shared<Client>();
    if (kind == "market") return std::make_shared<Market>(param("profit", kDefaultMarketProfit));
    if (kind == "flash-borrower") return std::make_shared<FlashBorrower>();
    throw ScenarioError("unknown contract kind '" + kind + "'");
}

const std::vector<std::string>& builtinKinds() {
    static const std::vector<std::string> kinds = {
        "wallet",         "conditional-sender", "splitter",
        "flashloan-lender", "lender",           "malicious-lender",
        "revoking-lender", "naive-client",      "client",
        "market",          "flash-borrower",
    };
    return kinds;
}

}  // namespace futmon
