#include "futmon/generate.hpp"

namespace futmon {

namespace {

std::uint64_t pick(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

std::int64_t amountUpTo(std::mt19937_64& rng, std::int64_t hi) {
    if (hi <= 0) return 0;
    return static_cast<std::int64_t>(pick(rng, static_cast<std::uint64_t>(hi) + 1));
}

template <typename T>
const T& choose(std::mt19937_64& rng, const std::vector<T>& xs) {
    return xs[pick(rng, xs.size())];
}

struct OpenLoan {
    std::uint64_t tx;
    std::string lender;
    std::string borrower;  // empty when the loan went to a user
    std::int64_t amount;
};

}  // namespace

ScenarioFile randomScenario(std::mt19937_64& rng, const GenOptions& opts) {
    static const std::vector<std::string> quietKinds = {"wallet", "splitter", "market",
                                                        "flashloan-lender", "flash-borrower"};
    static const std::vector<std::string> monitorKinds = {
        "conditional-sender", "lender", "malicious-lender", "revoking-lender",
        "naive-client",       "client"};

    ScenarioFile sc;
    sc.window = 1 + static_cast<int>(pick(rng, static_cast<std::uint64_t>(opts.maxWindow)));
    if (pick(rng, 5) == 0) sc.cost = 1 + amountUpTo(rng, 3);

    std::vector<std::string> users;
    for (std::uint64_t i = 0, n = 1 + pick(rng, 2); i < n; ++i) {
        std::string name = "u" + std::to_string(i);
        sc.users[name] = amountUpTo(rng, 300);
        users.push_back(name);
    }

    std::uint64_t contractCount = 2 + pick(rng, 4);
    std::vector<std::string> names;
    for (std::uint64_t i = 0; i < contractCount; ++i) {
        std::string kind;
        if (opts.monitorFree || pick(rng, 3) == 0)
            kind = choose(rng, quietKinds);
        else
            kind = choose(rng, monitorKinds);
        Tokens balance = kind.find("lender") != std::string::npos ? 100 + amountUpTo(rng, 900)
                                                                  : amountUpTo(rng, 300);
        if (kind == "market") balance = 200 + amountUpTo(rng, 300);
        std::string name = "c" + std::to_string(i);
        sc.contracts[name] = ContractSpec{kind, {}, balance};
        names.push_back(name);
    }

    auto ofKind = [&](auto match) {
        std::vector<std::string> out;
        for (const auto& [name, c] : sc.contracts)
            if (match(c.kind)) out.push_back(name);
        return out;
    };
    std::vector<std::string> lenders =
        ofKind([](const std::string& k) { return k.find("lender") != std::string::npos &&
                                                 k != "flashloan-lender"; });
    std::vector<std::string> flashLenders =
        ofKind([](const std::string& k) { return k == "flashloan-lender"; });
    std::vector<std::string> markets = ofKind([](const std::string& k) { return k == "market"; });

    std::vector<OpenLoan> loans;       // monitored loans handed out so far
    std::vector<std::uint64_t> sends;  // conditional-sender transactions
    std::vector<std::string> sentFrom;

    int monitoredBudget = opts.maxMonitored;
    std::uint64_t txCount = 1 + pick(rng, static_cast<std::uint64_t>(opts.maxTxs));
    for (std::uint64_t i = 0; i < txCount; ++i) {
        const std::string& source = choose(rng, users);
        const std::string& target = choose(rng, names);
        const std::string& kind = sc.contracts[target].kind;
        TxSpec tx;
        tx.source = source;
        tx.target = target;
        tx.entrypoint = "deposit";
        tx.amount = amountUpTo(rng, std::min<Tokens>(50, sc.users[source]));

        auto mayActivate = [&](TxSpec candidate) {
            if (monitoredBudget <= 0) return;  // keep the ping instead
            monitoredBudget -= 1;
            tx = std::move(candidate);
        };

        // repaying an open loan exactly makes early decisions reachable; do
        // it often when one exists
        if (!loans.empty() && pick(rng, 3) == 0) {
            const OpenLoan& loan = loans[pick(rng, loans.size())];
            TxSpec repay;
            repay.source = source;
            if (!loan.borrower.empty() &&
                (sc.contracts[loan.borrower].kind == "naive-client" ||
                 sc.contracts[loan.borrower].kind == "client")) {
                repay.target = loan.borrower;
                repay.entrypoint = "payBack";
                repay.args = {Scalar{Address{loan.lender}}, Scalar{TxId{loan.tx}},
                              Scalar{loan.amount}};
            } else {
                repay.target = loan.lender;
                repay.entrypoint = "returnLoan";
                repay.args = {Scalar{TxId{loan.tx}}};
                repay.amount = pick(rng, 4) == 0 ? amountUpTo(rng, loan.amount)  // partial
                                                 : loan.amount;
                if (repay.amount > sc.users[source]) repay.amount = 0;
            }
            sc.transactions.push_back(std::move(repay));
            continue;
        }
        // a deposit into a pending conditional send commits it early
        if (!sends.empty() && pick(rng, 4) == 0) {
            TxSpec bounce;
            bounce.source = source;
            bounce.target = sentFrom[pick(rng, sentFrom.size())];
            bounce.entrypoint = "deposit";
            bounce.amount = sc.users[source] >= 1 ? 1 + amountUpTo(rng, 2) : 0;
            sc.transactions.push_back(std::move(bounce));
            continue;
        }

        if (kind == "wallet" && pick(rng, 2) == 0) {
            tx.entrypoint = "send";
            tx.args = {Scalar{Address{choose(rng, names)}}, Scalar{amountUpTo(rng, 60)}};
            tx.amount = 0;
        } else if (kind == "splitter" && pick(rng, 2) == 0) {
            tx.entrypoint = "payout";
            tx.args = {Scalar{Address{choose(rng, names)}}, Scalar{Address{choose(rng, names)}}};
        } else if (kind == "market") {
            tx.entrypoint = "invest";
            tx.args = {};
        } else if (kind == "conditional-sender" && pick(rng, 2) == 0) {
            TxSpec send = tx;
            send.entrypoint = "send";
            send.args = {Scalar{Address{choose(rng, names)}}};
            send.amount = 0;
            mayActivate(std::move(send));
            if (tx.entrypoint == "send") {
                sends.push_back(i);
                sentFrom.push_back(target);
            }
        } else if (kind == "flashloan-lender") {
            tx.entrypoint = "lend";
            tx.args = {Scalar{amountUpTo(rng, 120)}};
            tx.amount = 0;
        } else if (kind == "flash-borrower" && !flashLenders.empty()) {
            tx.entrypoint = pick(rng, 2) == 0 ? "borrowAndRepay" : "borrowOnly";
            tx.args = {Scalar{Address{choose(rng, flashLenders)}}, Scalar{amountUpTo(rng, 120)}};
            tx.amount = 0;
        } else if (kind.find("lender") != std::string::npos && kind != "flashloan-lender") {
            if (kind == "revoking-lender" && !loans.empty() && pick(rng, 2) == 0) {
                tx.entrypoint = "revoke";
                tx.args = {Scalar{TxId{loans[pick(rng, loans.size())].tx}}};
                tx.amount = 0;
            } else {
                std::int64_t amount = 10 + amountUpTo(rng, 110);
                TxSpec lend = tx;
                lend.entrypoint = "lend";
                lend.args = {Scalar{amount}};
                lend.amount = 0;
                mayActivate(std::move(lend));
                if (tx.entrypoint == "lend") loans.push_back(OpenLoan{i, target, "", amount});
            }
        } else if ((kind == "naive-client" || kind == "client")) {
            std::uint64_t which = pick(rng, 2);
            if (which == 0 && !lenders.empty()) {
                std::int64_t amount = 50 + amountUpTo(rng, 100);
                std::string lender = choose(rng, lenders);
                TxSpec borrow = tx;
                borrow.entrypoint = "borrow";
                borrow.args = {Scalar{Address{lender}}, Scalar{amount}};
                borrow.amount = 0;
                mayActivate(std::move(borrow));
                if (tx.entrypoint == "borrow")
                    loans.push_back(OpenLoan{i, lender, target, amount});
            } else if (!markets.empty()) {
                tx.entrypoint = "invest";
                tx.args = {Scalar{Address{choose(rng, markets)}}};
                tx.amount = 0;
            }
        }
        sc.transactions.push_back(std::move(tx));
    }
    return sc;
}

}  // namespace futmon
