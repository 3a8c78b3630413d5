#include "futmon/demos.hpp"

namespace futmon {

namespace {

TxSpec call(std::string source, std::string target, std::string entrypoint,
            std::vector<Scalar> args = {}, Tokens amount = 0) {
    return TxSpec{std::move(source), std::move(target), std::move(entrypoint), std::move(args),
                  amount};
}

Scalar at(const std::string& name) { return Scalar{Address{name}}; }
Scalar ref(std::uint64_t tx) { return Scalar{TxId{tx}}; }

// Two token holders that only part with their token if it comes back within
// the window, plus the contract that eventually pays both back.
ScenarioFile appendixExchange() {
    ScenarioFile sc;
    sc.window = 2;
    sc.users = {{"u", 0}};
    sc.contracts["a"] = ContractSpec{"conditional-sender", {}, 1};
    sc.contracts["b"] = ContractSpec{"conditional-sender", {}, 1};
    sc.contracts["c"] = ContractSpec{"splitter", {}, 0};
    sc.transactions = {
        call("u", "a", "send", {at("c")}),
        call("u", "b", "send", {at("c")}),
        call("u", "c", "payout", {at("a"), at("b")}),
    };
    return sc;
}

// Same-transaction loans on the pre-monitor engine: one repaid, one not.
ScenarioFile flashloan() {
    ScenarioFile sc;
    sc.window = 1;
    sc.engine = EngineChoice::Legacy;
    sc.users = {{"u", 0}};
    sc.contracts["B"] = ContractSpec{"flash-borrower", {}, 0};
    sc.contracts["FL"] = ContractSpec{"flashloan-lender", {}, 1000};
    sc.transactions = {
        call("u", "B", "borrowAndRepay", {at("FL"), Scalar{std::int64_t{100}}}),
        call("u", "B", "borrowOnly", {at("FL"), Scalar{std::int64_t{100}}}),
    };
    return sc;
}

std::vector<TxSpec> loanRound(const std::string& client, const std::string& lender) {
    return {
        call("u", client, "borrow", {at(lender), Scalar{std::int64_t{100}}}),
        call("u", client, "invest", {at("M")}),
        call("u", client, "payBack", {at(lender), ref(0), Scalar{std::int64_t{100}}}),
    };
}

ScenarioFile lenderScenario(const std::string& clientKind, const std::string& lenderKind) {
    ScenarioFile sc;
    sc.window = 2;
    sc.users = {{"u", 0}};
    sc.contracts["NC"] = ContractSpec{clientKind, {}, 100};
    sc.contracts["L"] = ContractSpec{lenderKind, {}, 1000};
    sc.contracts["M"] = ContractSpec{"market", {}, 500};
    sc.transactions = loanRound("NC", "L");
    return sc;
}

}  // namespace

ScenarioFile sizeWorstCaseScenario(int window, int monitored) {
    if (window < 1 || monitored < 0 || monitored > window)
        throw ScenarioError("size-worst-case needs 0 <= m <= k, k >= 1");
    ScenarioFile sc;
    sc.window = window;
    sc.users = {{"u", 0}};
    sc.contracts["sink"] = ContractSpec{"wallet", {}, 0};
    for (int i = 0; i < monitored; ++i)
        sc.contracts["s" + std::to_string(i)] = ContractSpec{"conditional-sender", {}, 1};
    for (int i = 0; i < monitored; ++i)
        sc.transactions.push_back(call("u", "s" + std::to_string(i), "send", {at("sink")}));
    for (int i = monitored; i < window; ++i)
        sc.transactions.push_back(call("u", "sink", "deposit"));
    return sc;
}

const std::vector<std::string>& demoNames() {
    static const std::vector<std::string> names = {
        "appendix-exchange",    "flashloan",       "lender-naive-client",
        "lender-malicious",     "lender-correct-client", "size-worst-case",
    };
    return names;
}

ScenarioFile demoScenario(const std::string& name) {
    if (name == "appendix-exchange") return appendixExchange();
    if (name == "flashloan") return flashloan();
    if (name == "lender-naive-client") return lenderScenario("naive-client", "lender");
    if (name == "lender-malicious") return lenderScenario("naive-client", "malicious-lender");
    if (name == "lender-correct-client") return lenderScenario("client", "lender");
    if (name == "size-worst-case") return sizeWorstCaseScenario(2, 2);
    throw ScenarioError("unknown demo '" + name + "'");
}

}  // namespace futmon
