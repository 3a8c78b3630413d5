#include "futmon/model.hpp"

#include <algorithm>
#include <sstream>

namespace futmon {

const char* to_string(MonitorState s) {
    switch (s) {
        case MonitorState::None: return "None";
        case MonitorState::Undecided: return "Undecided";
        case MonitorState::Fail: return "Fail";
        case MonitorState::Commit: return "Commit";
    }
    return "?";
}

const char* to_string(TimeoutDecision d) {
    return d == TimeoutDecision::Commit ? "Commit" : "Fail";
}

MonitorState MonitorContext::stateOf(const Address& c, TxId t) const {
    auto it = byContract.find(c);
    if (it == byContract.end()) return MonitorState::None;
    auto jt = it->second.failmap.find(t);
    if (jt == it->second.failmap.end()) return MonitorState::None;
    return jt->second;
}

void MonitorContext::normalize() {
    std::erase_if(byContract, [](const auto& kv) { return kv.second.empty(); });
}

void MonitorContext::dropEntriesFor(TxId t) {
    for (auto& [addr, mon] : byContract) {
        mon.failmap.erase(t);
        mon.timeoutmap.erase(t);
    }
    normalize();
}

ExternalBalances discount(const ExternalBalances& u, const UserId& user, Tokens cost) {
    auto it = u.users.find(user);
    if (it == u.users.end())
        throw ScenarioError("discount: unknown user '" + user.value + "'");
    if (cost < 0) throw ModelViolation("discount: negative cost");
    ExternalBalances out = u;
    out.users[user] = it->second - std::min(cost, it->second);
    return out;
}

bool monitorTransitionLegal(MonitorState from, MonitorState to, bool isCurrentTx) {
    if (isCurrentTx)
        return from == MonitorState::None &&
               (to == MonitorState::Undecided || to == MonitorState::Fail ||
                to == MonitorState::Commit);
    return from == MonitorState::Undecided &&
           (to == MonitorState::Fail || to == MonitorState::Commit);
}

namespace {

void appendStorage(std::ostringstream& os, const Storage& st) {
    os << '{';
    bool first = true;
    for (const auto& [k, v] : st) {
        if (!first) os << ',';
        first = false;
        os << k << '=';
        if (std::holds_alternative<std::int64_t>(v))
            os << std::get<std::int64_t>(v);
        else
            os << '"' << std::get<std::string>(v) << '"';
    }
    os << '}';
}

}  // namespace

std::string canonicalText(const ExtendedConfiguration& cfg) {
    std::ostringstream os;
    os << "height=" << cfg.ledger.height << '\n';
    for (const auto& [addr, st] : cfg.ledger.contracts) {
        os << "contract " << addr.value << " balance=" << st.balance << " storage";
        appendStorage(os, st.storage);
        os << '\n';
    }
    for (const auto& [addr, mon] : cfg.monitors.byContract) {
        os << "monitors " << addr.value << " failmap{";
        bool first = true;
        for (const auto& [t, s] : mon.failmap) {
            if (!first) os << ',';
            first = false;
            os << t.value << ':' << to_string(s);
        }
        os << "} timeout{";
        first = true;
        for (const auto& [t, d] : mon.timeoutmap) {
            if (!first) os << ',';
            first = false;
            os << t.value << ':' << to_string(d);
        }
        os << "}\n";
    }
    for (const auto& [user, bal] : cfg.users.users)
        os << "user " << user.value << '=' << bal << '\n';
    return os.str();
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string digestOf(const ExtendedConfiguration& cfg) {
    static const char* hex = "0123456789abcdef";
    std::uint64_t h = fnv1a64(canonicalText(cfg));
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = hex[h & 0xf];
        h >>= 4;
    }
    return out;
}

std::string to_string(const Scalar& s) {
    if (std::holds_alternative<std::int64_t>(s))
        return std::to_string(std::get<std::int64_t>(s));
    if (std::holds_alternative<TxId>(s))
        return "#" + std::to_string(std::get<TxId>(s).value);
    return "@" + std::get<Address>(s).value;
}

std::string to_string(const CallerRef& c) {
    if (std::holds_alternative<UserId>(c)) return std::get<UserId>(c).value;
    return "@" + std::get<Address>(c).value;
}

std::string summary(const Transaction& tx) {
    std::ostringstream os;
    os << 't' << tx.id.value << ' ' << tx.source.value << "->" << tx.initial.target.value
       << '.' << tx.initial.entrypoint << '(';
    bool first = true;
    for (const auto& a : tx.initial.args) {
        if (!first) os << ',';
        first = false;
        os << to_string(a);
    }
    os << ") amount=" << tx.initial.amount;
    if (tx.cost != 0) os << " cost=" << tx.cost;
    return os.str();
}

}  // namespace futmon
