#pragma once

#include "futmon/builtins.hpp"
#include "futmon/runtime.hpp"

// Small builders shared by the suites.

namespace futmon::testutil {

inline Address addr(const std::string& a) { return Address{a}; }
inline UserId user(const std::string& u) { return UserId{u}; }

struct World {
    ExtendedConfiguration genesis;
    ContractRegistry registry;

    World& withUser(const std::string& name, Tokens balance) {
        genesis.users.users[UserId{name}] = balance;
        return *this;
    }
    World& withContract(const std::string& name, const std::string& kind, Tokens balance,
                        std::map<std::string, std::int64_t> params = {}) {
        genesis.ledger.contracts[Address{name}] = ContractState{{}, balance};
        registry.behaviors[Address{name}] = makeBehavior(kind, params);
        return *this;
    }
    World& withBehavior(const std::string& name, std::shared_ptr<const ContractBehavior> b,
                        Tokens balance = 0) {
        genesis.ledger.contracts[Address{name}] = ContractState{{}, balance};
        registry.behaviors[Address{name}] = std::move(b);
        return *this;
    }
    World& withSystemAccounts() {
        ensureSystemAccounts(genesis, registry);
        return *this;
    }
};

inline Transaction call(std::uint64_t id, const std::string& source, const std::string& target,
                        const std::string& entrypoint, std::vector<Scalar> args = {},
                        Tokens amount = 0, Tokens cost = 0) {
    UserId src{source};
    return Transaction{TxId{id}, src,
                       Operation{CallerRef{src}, Address{target}, entrypoint, std::move(args),
                                 amount},
                       cost};
}

inline Tokens balanceOf(const ExtendedConfiguration& cfg, const std::string& contract) {
    return cfg.ledger.contracts.at(Address{contract}).balance;
}

inline Tokens userBalance(const ExtendedConfiguration& cfg, const std::string& u) {
    return cfg.users.users.at(UserId{u});
}

inline Tokens totalTokens(const ExtendedConfiguration& cfg) {
    Tokens sum = 0;
    for (const auto& [a, st] : cfg.ledger.contracts) sum += st.balance;
    for (const auto& [u, b] : cfg.users.users) sum += b;
    return sum;
}

// runs every transaction through step and returns the run
inline BlockchainRun playAll(const World& w, const std::vector<Transaction>& txs, int window,
                             const StepOptions& opts = {}) {
    BlockchainRun run = initRun(w.genesis, window);
    for (const auto& tx : txs) run = step(run, tx, w.registry, opts);
    return run;
}

}  // namespace futmon::testutil
