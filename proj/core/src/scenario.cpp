#include "futmon/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "futmon/builtins.hpp"
#include "json.hpp"

namespace futmon {

using nlohmann::json;

namespace {

std::string render(const std::vector<Diagnostic>& diags) {
    std::ostringstream os;
    os << "invalid scenario:";
    for (const auto& d : diags) os << "\n  " << d.field << ": " << d.message;
    return os.str();
}

}  // namespace

ParseError::ParseError(std::vector<Diagnostic> diags)
    : ScenarioError(render(diags)), diagnostics(std::move(diags)) {}

namespace {

constexpr const char* kReservedPrefix = "__";

std::optional<Scalar> parseArg(const json& a) {
    if (a.is_number_integer()) return Scalar{a.get<std::int64_t>()};
    if (a.is_string()) {
        std::string s = a.get<std::string>();
        if (s.size() > 1 && s[0] == '@') return Scalar{Address{s.substr(1)}};
        if (s.size() > 1 && s[0] == '#') {
            for (std::size_t i = 1; i < s.size(); ++i)
                if (!isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
            try {
                return Scalar{TxId{std::stoull(s.substr(1))}};
            } catch (const std::out_of_range&) {
                return std::nullopt;
            }
        }
    }
    return std::nullopt;
}

json argToJson(const Scalar& s) {
    if (std::holds_alternative<std::int64_t>(s)) return std::get<std::int64_t>(s);
    if (std::holds_alternative<TxId>(s)) return "#" + std::to_string(std::get<TxId>(s).value);
    return "@" + std::get<Address>(s).value;
}

struct Validator {
    std::vector<Diagnostic> diags;
    void add(std::string field, std::string message) {
        diags.push_back(Diagnostic{std::move(field), std::move(message)});
    }
};

ScenarioFile fromJson(const json& doc, Validator& v) {
    ScenarioFile sc;
    if (!doc.is_object()) {
        v.add("$", "document must be a JSON object");
        return sc;
    }
    for (const auto& [key, val] : doc.items()) {
        if (key != "k" && key != "cost" && key != "engine" && key != "users" &&
            key != "contracts" && key != "transactions")
            v.add(key, "unknown field");
        (void)val;
    }

    if (!doc.contains("k") || !doc["k"].is_number_integer())
        v.add("k", "required integer monitoring window");
    else {
        std::int64_t k = doc["k"].get<std::int64_t>();
        if (k < 1 || k > 64)
            v.add("k", "monitoring window must be between 1 and 64");
        else
            sc.window = static_cast<int>(k);
    }
    if (doc.contains("cost")) {
        if (!doc["cost"].is_number_integer() || doc["cost"].get<std::int64_t>() < 0)
            v.add("cost", "must be a non-negative integer");
        else
            sc.cost = doc["cost"].get<std::int64_t>();
    }
    if (doc.contains("engine")) {
        std::string e = doc["engine"].is_string() ? doc["engine"].get<std::string>() : "";
        if (e == "legacy")
            sc.engine = EngineChoice::Legacy;
        else if (e == "monitored")
            sc.engine = EngineChoice::Monitored;
        else
            v.add("engine", "must be \"monitored\" or \"legacy\"");
    }

    if (doc.contains("users") && doc["users"].is_object()) {
        for (const auto& [name, bal] : doc["users"].items()) {
            std::string field = "users." + name;
            if (name.rfind(kReservedPrefix, 0) == 0) v.add(field, "reserved name");
            if (!bal.is_number_integer() || bal.get<std::int64_t>() < 0)
                v.add(field, "balance must be a non-negative integer");
            else
                sc.users[name] = bal.get<std::int64_t>();
        }
    } else {
        v.add("users", "required object of user balances");
    }

    if (doc.contains("contracts") && doc["contracts"].is_object()) {
        const auto& kinds = builtinKinds();
        for (const auto& [name, c] : doc["contracts"].items()) {
            std::string field = "contracts." + name;
            if (name.rfind(kReservedPrefix, 0) == 0) v.add(field, "reserved name");
            if (!c.is_object()) {
                v.add(field, "must be an object");
                continue;
            }
            ContractSpec spec;
            if (!c.contains("kind") || !c["kind"].is_string()) {
                v.add(field + ".kind", "required string");
            } else {
                spec.kind = c["kind"].get<std::string>();
                if (std::find(kinds.begin(), kinds.end(), spec.kind) == kinds.end())
                    v.add(field + ".kind", "unknown contract kind '" + spec.kind + "'");
            }
            if (c.contains("balance")) {
                if (!c["balance"].is_number_integer() || c["balance"].get<std::int64_t>() < 0)
                    v.add(field + ".balance", "must be a non-negative integer");
                else
                    spec.balance = c["balance"].get<std::int64_t>();
            }
            if (c.contains("params")) {
                if (!c["params"].is_object())
                    v.add(field + ".params", "must be an object of integers");
                else
                    for (const auto& [pk, pv] : c["params"].items()) {
                        if (!pv.is_number_integer())
                            v.add(field + ".params." + pk, "must be an integer");
                        else
                            spec.params[pk] = pv.get<std::int64_t>();
                    }
            }
            sc.contracts[name] = std::move(spec);
        }
    } else {
        v.add("contracts", "required object of contract definitions");
    }

    if (doc.contains("transactions") && doc["transactions"].is_array()) {
        std::size_t i = 0;
        for (const auto& t : doc["transactions"]) {
            std::string field = "transactions[" + std::to_string(i) + "]";
            TxSpec spec;
            if (!t.is_object()) {
                v.add(field, "must be an object");
                ++i;
                continue;
            }
            auto str = [&](const char* key) -> std::string {
                if (!t.contains(key) || !t[key].is_string()) {
                    v.add(field + "." + key, "required string");
                    return "";
                }
                return t[key].get<std::string>();
            };
            spec.source = str("source");
            spec.target = str("target");
            spec.entrypoint = str("entrypoint");
            if (t.contains("amount")) {
                if (!t["amount"].is_number_integer() || t["amount"].get<std::int64_t>() < 0)
                    v.add(field + ".amount", "must be a non-negative integer");
                else
                    spec.amount = t["amount"].get<std::int64_t>();
            }
            if (t.contains("args")) {
                if (!t["args"].is_array()) {
                    v.add(field + ".args", "must be an array of scalars");
                } else {
                    std::size_t ai = 0;
                    for (const auto& a : t["args"]) {
                        auto parsed = parseArg(a);
                        if (!parsed)
                            v.add(field + ".args[" + std::to_string(ai) + "]",
                                  "expected integer, \"@contract\" or \"#txid\"");
                        else
                            spec.args.push_back(*parsed);
                        ++ai;
                    }
                }
            }
            sc.transactions.push_back(std::move(spec));
            ++i;
        }
    } else {
        v.add("transactions", "required array");
    }

    // cross references
    for (std::size_t i = 0; i < sc.transactions.size(); ++i) {
        const TxSpec& t = sc.transactions[i];
        std::string field = "transactions[" + std::to_string(i) + "]";
        if (!t.source.empty() && !sc.users.count(t.source))
            v.add(field + ".source", "unknown user '" + t.source + "'");
        if (!t.target.empty() && !sc.contracts.count(t.target))
            v.add(field + ".target", "unknown contract '" + t.target + "'");
        for (std::size_t ai = 0; ai < t.args.size(); ++ai)
            if (const Address* a = std::get_if<Address>(&t.args[ai]))
                if (!sc.contracts.count(a->value))
                    v.add(field + ".args[" + std::to_string(ai) + "]",
                          "unknown contract '" + a->value + "'");
    }
    return sc;
}

}  // namespace

ScenarioFile parseScenarioText(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError({Diagnostic{origin, e.what()}});
    }
    Validator v;
    ScenarioFile sc = fromJson(doc, v);
    if (!v.diags.empty()) throw ParseError(std::move(v.diags));
    return sc;
}

ScenarioFile parseScenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError({Diagnostic{path, "cannot open file"}});
    std::stringstream buf;
    buf << in.rdbuf();
    return parseScenarioText(buf.str(), path);
}

std::string serializeScenario(const ScenarioFile& sc) {
    json doc;  // nlohmann sorts object keys, which is our canonical order
    doc["k"] = sc.window;
    doc["cost"] = sc.cost;
    doc["engine"] = sc.engine == EngineChoice::Legacy ? "legacy" : "monitored";
    doc["users"] = json::object();
    for (const auto& [name, bal] : sc.users) doc["users"][name] = bal;
    doc["contracts"] = json::object();
    for (const auto& [name, c] : sc.contracts) {
        json jc;
        jc["kind"] = c.kind;
        jc["balance"] = c.balance;
        if (!c.params.empty()) {
            jc["params"] = json::object();
            for (const auto& [pk, pv] : c.params) jc["params"][pk] = pv;
        }
        doc["contracts"][name] = std::move(jc);
    }
    doc["transactions"] = json::array();
    for (const auto& t : sc.transactions) {
        json jt;
        jt["source"] = t.source;
        jt["target"] = t.target;
        jt["entrypoint"] = t.entrypoint;
        jt["amount"] = t.amount;
        jt["args"] = json::array();
        for (const auto& a : t.args) jt["args"].push_back(argToJson(a));
        doc["transactions"].push_back(std::move(jt));
    }
    return doc.dump(2) + "\n";
}

CompiledScenario compileScenario(const ScenarioFile& sc) {
    CompiledScenario out;
    out.window = sc.window;
    out.engine = sc.engine;
    for (const auto& [name, bal] : sc.users) out.genesis.users.users[UserId{name}] = bal;
    for (const auto& [name, c] : sc.contracts) {
        out.genesis.ledger.contracts[Address{name}] = ContractState{{}, c.balance};
        out.registry.behaviors[Address{name}] = makeBehavior(c.kind, c.params);
    }
    ensureSystemAccounts(out.genesis, out.registry);
    for (std::size_t i = 0; i < sc.transactions.size(); ++i) {
        const TxSpec& t = sc.transactions[i];
        Transaction tx;
        tx.id = TxId{i};
        tx.source = UserId{t.source};
        tx.cost = sc.cost;
        tx.initial = Operation{CallerRef{tx.source}, Address{t.target}, t.entrypoint, t.args,
                               t.amount};
        out.txs.push_back(std::move(tx));
    }
    return out;
}

namespace {

void printBalances(std::ostream& out, const LedgerState& ledger, const ExternalBalances& users) {
    out << "final contracts:";
    for (const auto& [addr, st] : ledger.contracts) {
        if (addr == systemWallet()) continue;
        out << ' ' << addr.value << '=' << st.balance;
    }
    out << "\nfinal users:";
    for (const auto& [user, bal] : users.users) {
        if (user == systemUser()) continue;
        out << ' ' << user.value << '=' << bal;
    }
    out << '\n';
}

json configToJson(const ExtendedConfiguration& cfg) {
    json jc;
    jc["height"] = cfg.ledger.height;
    jc["contracts"] = json::object();
    for (const auto& [addr, st] : cfg.ledger.contracts) {
        json js;
        js["balance"] = st.balance;
        js["storage"] = json::object();
        for (const auto& [k, v] : st.storage) {
            if (std::holds_alternative<std::int64_t>(v))
                js["storage"][k] = std::get<std::int64_t>(v);
            else
                js["storage"][k] = std::get<std::string>(v);
        }
        jc["contracts"][addr.value] = std::move(js);
    }
    jc["monitors"] = json::object();
    for (const auto& [addr, mon] : cfg.monitors.byContract) {
        json jm;
        jm["failmap"] = json::object();
        for (const auto& [t, s] : mon.failmap)
            jm["failmap"][std::to_string(t.value)] = to_string(s);
        jm["timeout"] = json::object();
        for (const auto& [t, d] : mon.timeoutmap)
            jm["timeout"][std::to_string(t.value)] = to_string(d);
        jc["monitors"][addr.value] = std::move(jm);
    }
    jc["users"] = json::object();
    for (const auto& [user, bal] : cfg.users.users) jc["users"][user.value] = bal;
    return jc;
}

void writeFile(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ScenarioError("cannot write " + path);
    out << content;
}

void emitDot(const std::string& dir, std::size_t stage, const MonitorTree& tree) {
    std::filesystem::create_directories(dir);
    char name[32];
    std::snprintf(name, sizeof name, "step-%03zu.dot", stage);
    writeFile((std::filesystem::path(dir) / name).string(), treeToDot(tree));
}

int applyAsserts(const RunOptions& opts, const std::vector<HistoryEntry>& entries,
                 std::ostream& out) {
    int rc = 0;
    for (const auto& [index, status] : opts.asserts) {
        if (index >= entries.size()) {
            out << "assert t" << index << ": no such transaction\n";
            rc = 1;
            continue;
        }
        if (entries[index].status != status) {
            out << "assert t" << index << "=" << to_string(status) << " failed: actual "
                << to_string(entries[index].status) << '\n';
            rc = 1;
        }
    }
    return rc;
}

RunArtifacts runLegacy(const CompiledScenario& cs, const RunOptions& opts, std::ostream& out) {
    RunArtifacts art;
    LedgerState ledger = cs.genesis.ledger;
    ExternalBalances users = cs.genesis.users;
    for (std::size_t i = 0; i < cs.txs.size(); ++i) {
        LegacyResult r = legacyApply(cs.txs[i], ledger, users, cs.registry);
        out << "step " << i << ": apply " << summary(cs.txs[i]) << " -> " << to_string(r.status)
            << '\n';
        art.finalEntries.push_back(HistoryEntry{
            cs.txs[i], r.status, ExtendedConfiguration{r.ledger, {}, r.users}});
        ledger = std::move(r.ledger);
        users = std::move(r.users);
    }
    out << "history:\n";
    for (const auto& e : art.finalEntries)
        out << "  t" << e.tx.id.value << ' ' << to_string(e.status) << '\n';
    printBalances(out, ledger, users);
    art.finalLedger = std::move(ledger);
    art.finalUsers = std::move(users);
    art.exitCode = applyAsserts(opts, art.finalEntries, out);

    if (opts.emitJsonPath) {
        json doc;
        doc["engine"] = "legacy";
        doc["k"] = cs.window;
        doc["history"] = json::array();
        for (const auto& e : art.finalEntries) {
            json je;
            je["tx"] = summary(e.tx);
            je["status"] = to_string(e.status);
            je["config"] = configToJson(e.config);
            doc["history"].push_back(std::move(je));
        }
        doc["final"] =
            configToJson(ExtendedConfiguration{art.finalLedger, {}, art.finalUsers});
        writeFile(*opts.emitJsonPath, doc.dump(2) + "\n");
    }
    return art;
}

}  // namespace

std::pair<std::size_t, TxStatus> parseAssert(const std::string& text) {
    auto eq = text.find('=');
    if (eq == std::string::npos || text.size() < 4 || text[0] != 't')
        throw ScenarioError("bad assert '" + text + "', expected tN=Committed|Failed");
    std::size_t index = 0;
    try {
        index = std::stoull(text.substr(1, eq - 1));
    } catch (...) {
        throw ScenarioError("bad assert '" + text + "', expected tN=Committed|Failed");
    }
    std::string status = text.substr(eq + 1);
    if (status == "Committed") return {index, TxStatus::Committed};
    if (status == "Failed") return {index, TxStatus::Failed};
    throw ScenarioError("bad assert status '" + status + "'");
}

RunArtifacts runScenario(const ScenarioFile& sc, const RunOptions& opts, std::ostream& out) {
    CompiledScenario cs = compileScenario(sc);
    if (cs.engine == EngineChoice::Legacy) return runLegacy(cs, opts, out);

    RunArtifacts art;
    BlockchainRun run = initRun(cs.genesis, cs.window);
    if (opts.emitDotDir) emitDot(*opts.emitDotDir, 0, run.tree);

    auto record = [&](std::size_t stepIndex, const BlockchainRun& cur,
                      const std::optional<std::pair<Transaction, TxStatus>>& consolidated) {
        TraceEvent ev;
        ev.stepIndex = stepIndex;
        ev.consolidated = consolidated;
        ev.treeHeight = heightOf(cur.tree);
        ev.treeSize = sizeOf(cur.tree);
        ev.treeDigest = treeDigest(cur.tree);
        ev.treeText = treeToText(cur.tree);
        art.trace.push_back(ev);

        out << "step " << stepIndex << ": apply " << summary(cs.txs[stepIndex]) << '\n';
        if (consolidated)
            out << "  consolidated t" << consolidated->first.id.value << '='
                << to_string(consolidated->second) << '\n';
        out << "  tree height=" << ev.treeHeight << " size=" << ev.treeSize
            << " digest=" << ev.treeDigest << '\n';
        if (opts.verboseTree) {
            std::istringstream lines(ev.treeText);
            std::string line;
            while (std::getline(lines, line)) out << "    " << line << '\n';
        }
    };

    for (std::size_t i = 0; i < cs.txs.size(); ++i) {
        std::size_t before = run.history.entries.size();
        run = step(run, cs.txs[i], cs.registry);
        std::optional<std::pair<Transaction, TxStatus>> consolidated;
        if (run.history.entries.size() > before) {
            const HistoryEntry& e = run.history.entries.back();
            consolidated = {{e.tx, e.status}};
        }
        record(i, run, consolidated);
        if (opts.emitDotDir) emitDot(*opts.emitDotDir, i + 1, run.tree);
    }

    art.preDrainTree = run.tree;
    History history = drain(run, cs.registry);
    art.finalEntries = history.entries;

    out << "history:\n";
    for (const auto& e : art.finalEntries)
        out << "  t" << e.tx.id.value << ' ' << to_string(e.status) << '\n';

    ExtendedConfiguration last =
        art.finalEntries.empty() ? history.genesis : art.finalEntries.back().config;
    printBalances(out, last.ledger, last.users);
    art.finalLedger = last.ledger;
    art.finalUsers = last.users;
    art.exitCode = applyAsserts(opts, art.finalEntries, out);

    if (opts.emitJsonPath) {
        json doc;
        doc["engine"] = "monitored";
        doc["k"] = cs.window;
        doc["history"] = json::array();
        for (const auto& e : art.finalEntries) {
            json je;
            je["tx"] = summary(e.tx);
            je["status"] = to_string(e.status);
            je["config"] = configToJson(e.config);
            doc["history"].push_back(std::move(je));
        }
        json nodes = json::array();
        std::istringstream lines(treeToText(art.preDrainTree));
        std::string line;
        while (std::getline(lines, line)) nodes.push_back(line);
        doc["tree"] = json::object();
        doc["tree"]["nodes"] = std::move(nodes);
        doc["tree"]["digest"] = treeDigest(art.preDrainTree);
        doc["final"] = configToJson(last);
        writeFile(*opts.emitJsonPath, doc.dump(2) + "\n");
    }
    return art;
}

}  // namespace futmon
