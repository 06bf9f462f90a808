#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"

#include "ferro/eigensolve.hpp"
#include "ferro/errors.hpp"
#include "ferro/graph.hpp"
#include "ferro/report_io.hpp"
#include "ferro/verify.hpp"
#include "ferro/version.hpp"

namespace ferro {

enum class Command { verify, spectrum, lemma, gen, arithmetic_sweep };

inline const char* to_string(Command c) {
    switch (c) {
        case Command::verify: return "verify";
        case Command::spectrum: return "spectrum";
        case Command::lemma: return "lemma";
        case Command::gen: return "gen";
        case Command::arithmetic_sweep: return "arithmetic-sweep";
    }
    return "?";
}

// Generator spec mini-grammar: chain:8, ring:10, grid:3x4, complete:6,
// random:9:0.4:seed7.
inline GeneratorSpec parse_generator_spec(const std::string& text) {
    std::vector<std::string> parts;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, ':')) parts.push_back(token);
    auto fail = [&](const std::string& why) -> GeneratorSpec {
        throw InvalidParameter("generator spec '" + text + "': " + why);
    };
    auto parse_int = [&](const std::string& s, const char* what) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            fail(std::string("bad ") + what + " '" + s + "'");
            return 0;
        }
    };
    if (parts.size() < 2) fail("expected kind:params");
    const std::string& kind = parts[0];
    GeneratorSpec spec;
    if (kind == "chain" || kind == "ring" || kind == "complete") {
        if (parts.size() != 2) fail("expected one size parameter");
        spec.kind = kind == "chain"  ? GeneratorSpec::Kind::chain
                    : kind == "ring" ? GeneratorSpec::Kind::ring
                                     : GeneratorSpec::Kind::complete;
        spec.n = parse_int(parts[1], "size");
    } else if (kind == "grid") {
        if (parts.size() != 2) fail("expected RxC");
        const auto x = parts[1].find('x');
        if (x == std::string::npos) fail("expected RxC");
        spec.kind = GeneratorSpec::Kind::grid;
        spec.rows = parse_int(parts[1].substr(0, x), "row count");
        spec.cols = parse_int(parts[1].substr(x + 1), "column count");
        spec.n = spec.rows * spec.cols;
    } else if (kind == "random") {
        if (parts.size() != 4) fail("expected random:N:prob:seedS");
        spec.kind = GeneratorSpec::Kind::random_connected;
        spec.n = parse_int(parts[1], "size");
        try {
            std::size_t used = 0;
            spec.edge_prob = std::stod(parts[2], &used);
            if (used != parts[2].size()) throw std::invalid_argument(parts[2]);
        } catch (const std::exception&) {
            fail("bad probability '" + parts[2] + "'");
        }
        if (parts[3].rfind("seed", 0) != 0) fail("seed token must look like seed7");
        spec.seed = static_cast<std::uint64_t>(parse_int(parts[3].substr(4), "seed"));
    } else {
        fail("unknown kind '" + kind + "'");
    }
    return spec;
}

// Coupling spec mini-grammar: uniform:1.0 or random:0.5:2.0:seed3.
inline CouplingRule parse_coupling_spec(const std::string& text) {
    std::vector<std::string> parts;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, ':')) parts.push_back(token);
    auto fail = [&](const std::string& why) -> CouplingRule {
        throw InvalidParameter("coupling spec '" + text + "': " + why);
    };
    auto parse_double = [&](const std::string& s, const char* what) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            fail(std::string("bad ") + what + " '" + s + "'");
            return 0.0;
        }
    };
    if (parts.empty()) fail("empty spec");
    if (parts[0] == "uniform") {
        if (parts.size() != 2) fail("expected uniform:J");
        return CouplingRule::uniform(parse_double(parts[1], "coupling"));
    }
    if (parts[0] == "random") {
        if (parts.size() != 4) fail("expected random:lo:hi:seedS");
        if (parts[3].rfind("seed", 0) != 0) fail("seed token must look like seed3");
        std::uint64_t seed = 0;
        try {
            std::size_t used = 0;
            seed = std::stoull(parts[3].substr(4), &used);
            if (used != parts[3].substr(4).size()) throw std::invalid_argument(parts[3]);
        } catch (const std::exception&) {
            fail("bad seed '" + parts[3] + "'");
        }
        return CouplingRule::random_in(parse_double(parts[1], "lower bound"),
                                       parse_double(parts[2], "upper bound"), seed);
    }
    fail("unknown kind '" + parts[0] + "'");
    return CouplingRule::uniform(1.0);
}

struct RunConfig {
    Command command = Command::verify;
    std::string graph_file;
    std::string gen_spec;
    std::string coupling_spec = "uniform:1.0";
    std::size_t dense_cap = 4096;
    double tol_energy = Tolerances{}.energy_factor;
    double tol_span = Tolerances{}.projector;
    std::uint64_t seed = 2026;
    std::int64_t max_n = 1000000;
    int sector = kFullSpace;  // spectrum: single sector, or every sector if negative
    int count = 6;            // spectrum: eigenvalues requested per sector
    std::string format = "text";
    std::string output;

    bool operator==(const RunConfig&) const = default;

    // An argv that parses back to this config.
    std::vector<std::string> to_argv() const {
        std::vector<std::string> argv{to_string(command)};
        auto push = [&argv](const std::string& flag, const std::string& value) {
            argv.push_back(flag);
            argv.push_back(value);
        };
        if (!graph_file.empty()) push("--graph", graph_file);
        if (!gen_spec.empty()) push("--gen", gen_spec);
        if (command != Command::arithmetic_sweep) push("--J", coupling_spec);
        if (command == Command::verify || command == Command::spectrum) {
            push("--dense-cap", std::to_string(dense_cap));
            std::ostringstream tol;
            tol.precision(17);
            tol << tol_energy;
            push("--tol-energy", tol.str());
            tol.str("");
            tol << tol_span;
            push("--tol-span", tol.str());
        }
        push("--seed", std::to_string(seed));
        if (command == Command::arithmetic_sweep) push("--max-n", std::to_string(max_n));
        if (command == Command::spectrum) {
            if (sector >= 0) push("--sector", std::to_string(sector));
            push("--count", std::to_string(count));
        }
        push("--format", format);
        if (!output.empty()) push("--output", output);
        return argv;
    }
};

namespace detail {

inline int env_thread_count() {
    const char* raw = std::getenv("FERRO_THREADS");
    if (raw == nullptr || *raw == '\0') return 1;
    char* end = nullptr;
    const long v = std::strtol(raw, &end, 10);
    if (end == nullptr || *end != '\0' || v < 0) {
        throw InvalidParameter("FERRO_THREADS must be a nonnegative integer");
    }
    return v == 0 ? 1 : static_cast<int>(v);
}

// Input and usage problems exit with 2; anything else that goes wrong
// during a run means "could not certify" and exits with 1.
inline bool is_input_error(const Error& e) {
    return dynamic_cast<const ParseError*>(&e) != nullptr ||
           dynamic_cast<const IoError*>(&e) != nullptr ||
           dynamic_cast<const TooFewVertices*>(&e) != nullptr ||
           dynamic_cast<const SelfLoop*>(&e) != nullptr ||
           dynamic_cast<const DuplicateEdge*>(&e) != nullptr ||
           dynamic_cast<const NonPositiveCoupling*>(&e) != nullptr ||
           dynamic_cast<const DisconnectedGraph*>(&e) != nullptr ||
           dynamic_cast<const InvalidParameter*>(&e) != nullptr ||
           dynamic_cast<const InvalidN*>(&e) != nullptr ||
           dynamic_cast<const SectorTooLarge*>(&e) != nullptr ||
           dynamic_cast<const SectorTooLargeForDense*>(&e) != nullptr;
}

inline CouplingGraph resolve_graph(const RunConfig& cfg) {
    if (!cfg.graph_file.empty()) return load_edge_list(cfg.graph_file);
    return generate(parse_generator_spec(cfg.gen_spec),
                    parse_coupling_spec(cfg.coupling_spec));
}

inline SolverPolicy resolve_policy(const RunConfig& cfg) {
    SolverPolicy policy;
    policy.dense_cap = cfg.dense_cap;
    policy.seed = cfg.seed;
    policy.threads = env_thread_count();
    policy.tol.energy_factor = cfg.tol_energy;
    policy.tol.projector = cfg.tol_span;
    if (cfg.tol_energy <= 0 || cfg.tol_span <= 0) {
        throw InvalidParameter("tolerances must be positive");
    }
    return policy;
}

struct SinkGuard {
    std::ofstream file;
    std::ostream* stream = nullptr;

    SinkGuard(const std::string& path, std::ostream& fallback) {
        if (path.empty()) {
            stream = &fallback;
            return;
        }
        file.open(path);
        if (!file) throw IoError("cannot open '" + path + "' for writing");
        stream = &file;
    }
};

inline int run_verify(const RunConfig& cfg, std::ostream& out) {
    const CouplingGraph g = resolve_graph(cfg);
    const SolverPolicy policy = resolve_policy(cfg);
    const VerificationReport report = full_verify(g, policy, cfg.seed);
    SinkGuard sink(cfg.output, out);
    emit_report(report, parse_report_format(cfg.format), *sink.stream);
    return report.all_pass() ? 0 : 1;
}

inline int run_spectrum(const RunConfig& cfg, std::ostream& out) {
    const CouplingGraph g = resolve_graph(cfg);
    const SolverPolicy policy = resolve_policy(cfg);
    if (cfg.count < 1) throw InvalidParameter("--count must be at least 1");
    const int n = g.vertex_count();
    if (cfg.sector > n) {
        throw InvalidParameter("--sector beyond the number of sites");
    }
    std::vector<int> sectors;
    if (cfg.sector >= 0) {
        sectors.push_back(cfg.sector);
    } else {
        for (int k = 0; k <= n; ++k) sectors.push_back(k);
    }

    nlohmann::ordered_json js;
    js["graph"] = {{"n", n}, {"edges", g.edges().size()}};
    js["sectors"] = nlohmann::ordered_json::array();
    std::ostringstream text;
    text << "graph: n=" << n << ", edges=" << g.edges().size() << "\n";

    for (int k : sectors) {
        SectorPtr basis = enumerate_sector(n, k, policy.limits);
        const ImplicitOperator h = ImplicitOperator::hamiltonian(g, basis);
        SectorSpectrum spec;
        if (basis->size() <= policy.dense_cap) {
            Limits dense_limits = policy.limits;
            dense_limits.dense_cap = policy.dense_cap;
            spec = dense_spectrum(h, 0, dense_limits);
        } else {
            spec = krylov_lowest(h, std::max(cfg.count, 2),
                                 Rng::derive_seed(policy.seed, static_cast<std::uint64_t>(k)),
                                 policy);
        }
        const std::size_t shown =
            std::min<std::size_t>(static_cast<std::size_t>(cfg.count),
                                  spec.eigenvalues.size());
        nlohmann::ordered_json sj;
        sj["k"] = k;
        sj["dimension"] = basis->size();
        sj["mode"] = to_string(spec.mode);
        sj["lowest"] = nlohmann::ordered_json::array();
        text << "k=" << k << " dim=" << basis->size() << " mode=" << to_string(spec.mode)
             << " lowest:";
        for (std::size_t t = 0; t < shown; ++t) {
            sj["lowest"].push_back(spec.eigenvalues[t]);
            text << " " << std::setprecision(12) << spec.eigenvalues[t];
        }
        text << "\n";
        js["sectors"].push_back(std::move(sj));
    }
    js["version"] = kVersion;

    SinkGuard sink(cfg.output, out);
    if (parse_report_format(cfg.format) == ReportFormat::structured) {
        *sink.stream << js.dump(2) << "\n";
    } else {
        *sink.stream << text.str();
    }
    if (!*sink.stream) throw IoError("failed writing spectrum output");
    return 0;
}

inline int run_lemma(const RunConfig& cfg, std::ostream& out) {
    const CouplingGraph g = resolve_graph(cfg);
    const ClauseResult r = verify_lemma(g);
    SinkGuard sink(cfg.output, out);
    if (parse_report_format(cfg.format) == ReportFormat::structured) {
        nlohmann::ordered_json j;
        j["graph"] = {{"n", g.vertex_count()}, {"edges", g.edges().size()}};
        j["name"] = r.name;
        j["pass"] = r.pass;
        j["evidence"] = nlohmann::ordered_json::object();
        for (const auto& [key, value] : r.evidence) {
            j["evidence"][key] = evidence_json(value);
        }
        j["version"] = kVersion;
        *sink.stream << j.dump(2) << "\n";
    } else {
        *sink.stream << "graph: n=" << g.vertex_count() << ", edges=" << g.edges().size()
                     << "\n"
                     << "lemma: " << (r.pass ? "PASS" : "FAIL") << " (";
        bool first = true;
        for (const auto& [key, value] : r.evidence) {
            if (!first) *sink.stream << ", ";
            first = false;
            *sink.stream << key << "=" << evidence_text(value);
        }
        *sink.stream << ")\n";
    }
    if (!*sink.stream) throw IoError("failed writing lemma output");
    return r.pass ? 0 : 1;
}

inline int run_gen(const RunConfig& cfg, std::ostream& out) {
    if (cfg.gen_spec.empty()) throw InvalidParameter("gen requires --gen");
    const CouplingGraph g = generate(parse_generator_spec(cfg.gen_spec),
                                     parse_coupling_spec(cfg.coupling_spec));
    SinkGuard sink(cfg.output, out);
    write_edge_list(g, *sink.stream);
    if (!*sink.stream) throw IoError("failed writing edge list");
    return 0;
}

inline int run_sweep(const RunConfig& cfg, std::ostream& out) {
    if (cfg.max_n < 2) throw InvalidParameter("--max-n must be at least 2");
    std::int64_t first_failure = 0;
    for (std::int64_t n = 2; n <= cfg.max_n; ++n) {
        if (!exclusion_arithmetic(n)) {
            first_failure = n;
            break;
        }
    }
    SinkGuard sink(cfg.output, out);
    if (first_failure == 0) {
        *sink.stream << "exclusion arithmetic holds for every N in [2, " << cfg.max_n
                     << "]: no excluded total spin admits a solution\n";
        return 0;
    }
    *sink.stream << "exclusion arithmetic FAILED at N=" << first_failure << "\n";
    return 1;
}

} // namespace detail

// Flag parsing, separated from dispatch so configs can round-trip through
// to_argv. Returns the config, or the exit code when parsing already
// settled the run (help, version, usage error).
inline std::variant<RunConfig, int> parse_cli(const std::vector<std::string>& args,
                                              std::ostream& out, std::ostream& err) {
    RunConfig cfg;

    CLI::App app{"ferromagnetic ground-state verifier"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    auto add_graph_source = [&cfg](CLI::App* cmd, bool required) {
        auto* graph_opt =
            cmd->add_option("--graph", cfg.graph_file, "edge-list file to load");
        auto* gen_opt = cmd->add_option(
            "--gen", cfg.gen_spec,
            "generator spec: chain:8 | ring:10 | grid:3x4 | complete:6 | random:9:0.4:seed7");
        graph_opt->excludes(gen_opt);
        if (required) {
            // exactly one source; the excludes pair forbids both.
            cmd->callback([&cfg, cmd]() {
                if (cfg.graph_file.empty() && cfg.gen_spec.empty()) {
                    throw CLI::RequiredError("for " + cmd->get_name() +
                                             ", one of --graph or --gen");
                }
            });
        }
        cmd->add_option("--J", cfg.coupling_spec,
                        "coupling spec: uniform:1.0 | random:0.5:2.0:seed3");
    };
    auto add_common = [&cfg](CLI::App* cmd) {
        cmd->add_option("--seed", cfg.seed, "seed for solver starts and rotation samples");
        cmd->add_option("--format", cfg.format, "text | structured")
            ->check(CLI::IsMember({"text", "structured"}));
        cmd->add_option("--output", cfg.output, "write to this file instead of stdout");
    };
    auto add_solver = [&cfg](CLI::App* cmd) {
        cmd->add_option("--dense-cap", cfg.dense_cap,
                        "largest sector dimension solved densely");
        cmd->add_option("--tol-energy", cfg.tol_energy,
                        "kernel threshold factor (times max(1, sum J))");
        cmd->add_option("--tol-span", cfg.tol_span, "projector distance tolerance");
    };

    CLI::App* verify_cmd = app.add_subcommand("verify", "certify every clause on one graph");
    add_graph_source(verify_cmd, true);
    add_solver(verify_cmd);
    add_common(verify_cmd);

    CLI::App* spectrum_cmd =
        app.add_subcommand("spectrum", "per-sector low eigenvalues of H");
    add_graph_source(spectrum_cmd, true);
    add_solver(spectrum_cmd);
    spectrum_cmd->add_option("--sector", cfg.sector, "restrict to one S^z sector k");
    spectrum_cmd->add_option("--count", cfg.count, "eigenvalues to report per sector");
    add_common(spectrum_cmd);

    CLI::App* lemma_cmd =
        app.add_subcommand("lemma", "removable-pair check on one graph");
    add_graph_source(lemma_cmd, true);
    add_common(lemma_cmd);

    CLI::App* gen_cmd = app.add_subcommand("gen", "generate an edge-list file");
    add_graph_source(gen_cmd, false);
    add_common(gen_cmd);

    CLI::App* sweep_cmd =
        app.add_subcommand("arithmetic-sweep", "exact exclusion arithmetic over a range of N");
    sweep_cmd->add_option("--max-n", cfg.max_n, "largest N checked (from 2)");
    add_common(sweep_cmd);

    std::vector<const char*> argv;
    argv.push_back("ferro");
    for (const std::string& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::Success& e) {
        // --help and --version land here with exit code 0.
        app.exit(e, out, err);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    if (verify_cmd->parsed()) cfg.command = Command::verify;
    if (spectrum_cmd->parsed()) cfg.command = Command::spectrum;
    if (lemma_cmd->parsed()) cfg.command = Command::lemma;
    if (gen_cmd->parsed()) cfg.command = Command::gen;
    if (sweep_cmd->parsed()) cfg.command = Command::arithmetic_sweep;
    return cfg;
}

inline int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        switch (cfg.command) {
            case Command::verify: return detail::run_verify(cfg, out);
            case Command::spectrum: return detail::run_spectrum(cfg, out);
            case Command::lemma: return detail::run_lemma(cfg, out);
            case Command::gen: return detail::run_gen(cfg, out);
            case Command::arithmetic_sweep: return detail::run_sweep(cfg, out);
        }
        return 2;
    } catch (const Error& e) {
        if (detail::is_input_error(e)) {
            if (!cfg.graph_file.empty()) {
                err << "error: --graph " << cfg.graph_file << ": " << e.what() << "\n";
            } else {
                err << "error: " << e.what() << "\n";
            }
            return 2;
        }
        err << "error: could not certify: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

// Entry point shared by the binary and the in-process tests. Exit codes:
// 0 pass or successful generation, 1 verification failure or a run that
// could not certify, 2 input or usage error.
inline int run(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
    const auto parsed = parse_cli(args, out, err);
    if (std::holds_alternative<int>(parsed)) return std::get<int>(parsed);
    return dispatch(std::get<RunConfig>(parsed), out, err);
}

} // namespace ferro
