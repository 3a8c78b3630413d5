// Command-line driver: runs scenario files through the monitored (or
// legacy) engine, replays them against the brute-force oracle, and serves
// the bundled demo scenarios.

#include <iostream>

#include "CLI11.hpp"
#include "futmon/demos.hpp"
#include "futmon/generate.hpp"

namespace {

using namespace futmon;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

struct RunFlags {
    std::string emitDot;
    std::string emitJson;
    std::vector<std::string> asserts;
    bool trace = false;
};

void addRunFlags(CLI::App* cmd, RunFlags& flags) {
    cmd->add_option("--emit-dot", flags.emitDot, "write step-NNN.dot snapshots to DIR");
    cmd->add_option("--emit-json", flags.emitJson, "write the run-state document to FILE");
    cmd->add_option("--assert", flags.asserts,
                    "require a final status, e.g. t0=Committed or t2=Failed");
    cmd->add_flag("--trace", flags.trace, "print per-node tree lines after every step");
}

RunOptions toOptions(const RunFlags& flags) {
    RunOptions opts;
    if (!flags.emitDot.empty()) opts.emitDotDir = flags.emitDot;
    if (!flags.emitJson.empty()) opts.emitJsonPath = flags.emitJson;
    opts.verboseTree = flags.trace;
    for (const auto& a : flags.asserts) opts.asserts.push_back(parseAssert(a));
    return opts;
}

// True when no transaction ever pends or commits a monitor write; only then
// does the pre-monitor engine agree by construction.
bool monitorFreeChain(const CompiledScenario& cs) {
    ExtendedConfiguration cfg = cs.genesis;
    for (const auto& tx : cs.txs) {
        TransactionOutcome o = applyTx(tx, cfg, cs.registry);
        if (isPending(o)) return false;
        cfg = isCommit(o) ? std::get<CommitOutcome>(o).cfg : std::get<FailOutcome>(o).cfg;
        if (!cfg.monitors.byContract.empty()) return false;
    }
    return true;
}

int oracleSuite(const CompiledScenario& cs, const StepOptions& engineOpts, std::ostream& out) {
    bool ok = true;
    auto show = [&](const char* name, bool passed, const std::vector<std::string>& problems) {
        out << "  " << name << ": " << (passed ? "ok" : "FAILED") << '\n';
        for (const auto& p : problems) out << "    " << p << '\n';
        ok = ok && passed;
    };

    OracleReport decisions =
        checkDecisionsAgainstOracle(cs.genesis, cs.txs, cs.window, cs.registry, engineOpts);
    show("decisions", decisions.ok, decisions.problems);
    if (decisions.ok)
        out << "    1 consistent future, statuses match over " << cs.txs.size()
            << " transactions\n";

    CheckReport impossible = checkImpossibleNodes(cs.genesis, cs.txs, cs.window, cs.registry);
    show("impossible-nodes", impossible.ok, impossible.problems);

    CheckReport sizes;
    BlockchainRun run = initRun(cs.genesis, cs.window);
    for (const auto& tx : cs.txs) {
        run = step(run, tx, cs.registry);
        CheckReport r = checkSizeBound(run.tree, cs.window);
        if (!r.ok) {
            sizes.ok = false;
            for (auto& p : r.problems)
                sizes.problems.push_back("after t" + std::to_string(tx.id.value) + ": " + p);
        }
    }
    show("size-bound", sizes.ok, sizes.problems);

    if (monitorFreeChain(cs)) {
        CheckReport legacy = legacyDiff(cs.genesis, cs.txs, cs.window, cs.registry);
        show("legacy-equivalence", legacy.ok, legacy.problems);
    } else {
        out << "  legacy-equivalence: skipped (scenario uses future monitors)\n";
    }
    return ok ? kExitOk : kExitCheckFailed;
}

int cmdRun(const std::string& path, const RunFlags& flags) {
    ScenarioFile sc = parseScenario(path);
    RunArtifacts art = runScenario(sc, toOptions(flags), std::cout);
    return art.exitCode;
}

int cmdOracle(const std::string& path, std::uint64_t seed, std::size_t count,
              bool breakInnerprune) {
    StepOptions engineOpts;
    engineOpts.prune.commitGuard = !breakInnerprune;

    if (!path.empty()) {
        ScenarioFile sc = parseScenario(path);
        std::cout << "oracle " << path << '\n';
        return oracleSuite(compileScenario(sc), engineOpts, std::cout);
    }
    if (count == 0) {
        std::cerr << "oracle: need a scenario file or --count\n";
        return kExitUsage;
    }
    std::mt19937_64 rng(seed);
    GenOptions gen;
    for (std::size_t i = 0; i < count; ++i) {
        ScenarioFile sc = randomScenario(rng, gen);
        std::ostringstream report;
        int rc = oracleSuite(compileScenario(sc), engineOpts, report);
        if (rc != kExitOk) {
            std::cout << "fuzz scenario " << i << " (seed " << seed << ") FAILED\n"
                      << report.str() << "scenario:\n"
                      << serializeScenario(sc);
            return rc;
        }
    }
    std::cout << "fuzz: " << count << " scenarios ok (seed " << seed << ")\n";
    return kExitOk;
}

int cmdDemo(const std::string& name, int k, int m, bool print, const RunFlags& flags) {
    ScenarioFile sc =
        name == "size-worst-case" ? sizeWorstCaseScenario(k, m) : demoScenario(name);
    if (print) {
        std::cout << serializeScenario(sc);
        return kExitOk;
    }
    RunArtifacts art = runScenario(sc, toOptions(flags), std::cout);
    return art.exitCode;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bounded future monitors for blockchain transactions"};
    app.require_subcommand(1);

    RunFlags runFlags;
    std::string runPath;
    CLI::App* run = app.add_subcommand("run", "execute a scenario file");
    run->add_option("file", runPath, "scenario file")->required();
    addRunFlags(run, runFlags);

    std::string oraclePath;
    std::uint64_t seed = 42;
    std::size_t count = 0;
    bool breakInnerprune = false;
    CLI::App* oracle =
        app.add_subcommand("oracle", "validate engine decisions against the brute-force oracle");
    oracle->add_option("file", oraclePath, "scenario file (omit for --count fuzzing)");
    oracle->add_option("--seed", seed, "fuzz seed");
    oracle->add_option("--count", count, "number of random scenarios to fuzz");
    oracle->add_flag("--with-broken-innerprune", breakInnerprune,
                     "disable the pruner's commit guard (testing aid)")
        ->group("");

    RunFlags demoFlags;
    std::string demoName;
    int demoK = 2, demoM = 2;
    bool demoPrint = false;
    CLI::App* demo = app.add_subcommand("demo", "run a bundled demo scenario");
    std::string demoList;
    for (const auto& n : futmon::demoNames()) demoList += (demoList.empty() ? "" : ", ") + n;
    demo->add_option("name", demoName, "one of: " + demoList)->required();
    demo->add_option("--k", demoK, "window for size-worst-case");
    demo->add_option("--m", demoM, "monitored transactions for size-worst-case");
    demo->add_flag("--print", demoPrint, "print the scenario file instead of running it");
    addRunFlags(demo, demoFlags);

    try {
        app.parse(argc, argv);
        if (run->parsed()) return cmdRun(runPath, runFlags);
        if (oracle->parsed()) return cmdOracle(oraclePath, seed, count, breakInnerprune);
        if (demo->parsed()) return cmdDemo(demoName, demoK, demoM, demoPrint, demoFlags);
        return kExitUsage;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    } catch (const futmon::OracleCapExceeded& e) {
        std::cerr << e.what() << '\n';
        return kExitUsage;
    } catch (const futmon::ParseError& e) {
        std::cerr << e.what() << '\n';
        return kExitUsage;
    } catch (const futmon::ScenarioError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}
