// Command-line surface for the tree-evaluation verification pipeline:
// generate instances, search pebbling games, compile pebblings into
// branching programs, check semantic restrictions, run the trace analyses
// and bottleneck censuses, and export DOT graphs.

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "tep/checkers.hpp"
#include "tep/instance.hpp"
#include "tep/pebbling.hpp"
#include "tep/profile.hpp"
#include "tep/synthesis.hpp"
#include "tep/trace.hpp"

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// write-then-rename keeps partially written outputs invisible
void write_file(const std::string& path, const std::string& content) {
    if (path == "-" || path.empty()) {
        std::cout << content;
        return;
    }
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::invalid_argument("cannot write " + tmp);
        out << content;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

tep::Budget budget_from_env() {
    tep::Budget budget;
    if (const char* env = std::getenv("TEP_BUDGET")) {
        budget.exhaustive_cap = std::strtoull(env, nullptr, 10);
        if (budget.exhaustive_cap == 0) throw std::invalid_argument("bad TEP_BUDGET value");
    }
    return budget;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const tep::budget_error*>(&e)) return 2;
    if (dynamic_cast<const tep::analysis_error*>(&e)) return 1;
    if (dynamic_cast<const std::invalid_argument*>(&e)) return 2;
    return 2;
}

struct PipelineSpec {
    std::string name;
    tep::Rat exponent;
    std::function<int(const tep::BranchingProgram&, const tep::TepInstance&,
                      const tep::ComputationPath&)>
        resolver;
};

PipelineSpec make_pipeline(const std::string& name, const tep::BranchingProgram& bp,
                           const tep::Budget& budget,
                           std::shared_ptr<tep::StateValueProfile>& profile) {
    int h = bp.shape().h;
    if (name == "det-thrifty")
        return {name, tep::Rat(h), tep::det_thrifty_supercritical_state};
    if (name == "ro-thrifty")
        return {name, tep::Rat((h + 1) / 2 + 1),
                [](const tep::BranchingProgram& b, const tep::TepInstance& i,
                   const tep::ComputationPath& p) {
                    return tep::ro_thrifty_supercritical_state(b, i, p, tep::RoMode::Syntactic);
                }};
    if (name == "ro-thrifty-npf")
        return {name, tep::Rat((h + 1) / 2 + 1),
                [](const tep::BranchingProgram& b, const tep::TepInstance& i,
                   const tep::ComputationPath& p) {
                    return tep::ro_thrifty_supercritical_state(b, i, p, tep::RoMode::NullPathFree);
                }};
    if (name == "algorithm1")
        return {name, tep::Rat(h), tep::algorithm1_supercritical_state};
    if (name == "bitwise" || name == "niro") {
        profile = std::make_shared<tep::StateValueProfile>(tep::reach_sets(bp, budget));
        auto variant = name == "bitwise" ? tep::IndependentVariant::BitwiseThrifty
                                         : tep::IndependentVariant::NodeIndependentRO;
        auto prof = profile;
        return {name, tep::Rat(h + 2, 2),
                [prof, variant](const tep::BranchingProgram& b, const tep::TepInstance& i,
                                const tep::ComputationPath& p) {
                    auto info = tep::independent_supercritical(b, i, p, *prof, variant);
                    return p.states[info.position];
                }};
    }
    throw std::invalid_argument("unknown pipeline: " + name);
}

json per_instance_analysis(const std::string& pipeline, const tep::BranchingProgram& bp,
                           const tep::TepInstance& inst, const tep::Budget& budget) {
    tep::ComputationPath path = tep::canonical_path(bp, inst, budget);
    json out;
    out["pipeline"] = pipeline;
    out["instance"] = json::parse(tep::instance_to_json(inst));
    json ids = json::array();
    for (int s : path.states) ids.push_back(bp.state(s).id);
    out["path"] = ids;

    if (pipeline == "det-thrifty") {
        tep::CriticalMap critical = tep::det_thrifty_critical_states(bp, path);
        json cj = json::object();
        for (int i = 1; i <= bp.shape().node_count(); ++i)
            cj[std::to_string(i)] = bp.state(path.states[critical.at(i)]).id;
        out["critical_states"] = cj;
        tep::PebbleSequence seq = tep::det_thrifty_pebbling(bp, path, critical);
        out["pebbling"] = json::parse(tep::pebbling_to_json(seq));
        tep::Tag tag = tep::det_thrifty_tag(bp, inst, path);
        out["tag"] = {{"gamma", tag.gamma_state_id}, {"v", tag.v}, {"x", tag.x}};
    } else if (pipeline == "ro-thrifty" || pipeline == "ro-thrifty-npf") {
        auto mode = pipeline == "ro-thrifty" ? tep::RoMode::Syntactic : tep::RoMode::NullPathFree;
        tep::PebbleSequence seq = tep::ro_thrifty_bw_pebbling(bp, path, mode);
        out["pebbling"] = json::parse(tep::pebbling_to_json(seq));
        if (mode == tep::RoMode::Syntactic) {
            tep::SemTag tag = tep::semantic_ro_tag(bp, inst, path);
            out["tag"] = {{"u", tag.permutation_rank}, {"gamma", tag.gamma_state_id}, {"x", tag.x}};
        }
    } else if (pipeline == "algorithm1") {
        tep::AnalysisTrace trace = tep::algorithm1_trace(bp, inst, path);
        out["trace"] = json::parse(tep::trace_to_json(bp, inst, path, trace));
        out["efficient"] = tep::check_efficient(bp, path, trace);
    } else if (pipeline == "bitwise" || pipeline == "niro") {
        auto profile = tep::reach_sets(bp, budget);
        auto variant = pipeline == "bitwise" ? tep::IndependentVariant::BitwiseThrifty
                                             : tep::IndependentVariant::NodeIndependentRO;
        tep::PebbleSequence seq = tep::independent_schedule(bp, path, profile, variant);
        out["schedule"] = json::parse(tep::pebbling_to_json(seq));
        auto info = tep::independent_supercritical(bp, inst, path, profile, variant);
        out["supercritical"] = bp.state(path.states[info.position]).id;
        out["effective"] = info.effective;
        out["used_fallback"] = info.used_fallback;
    } else {
        throw std::invalid_argument("unknown pipeline: " + pipeline);
    }
    return out;
}

int run_check(const std::string& bp_path, std::vector<std::string> properties, int jobs,
              const std::string& report, const std::string& out_path, const tep::Budget& budget) {
    tep::BranchingProgram bp = tep::bp_from_json(read_file(bp_path));

    tep::StructuralReport sr = tep::validate_bp(bp);
    std::vector<tep::Verdict> verdicts;
    tep::Verdict structural;
    structural.property = "structure";
    structural.pass = sr.valid();
    if (!sr.valid()) {
        json issues = json::array();
        for (const auto& issue : sr.issues)
            issues.push_back({{"what", issue.what}, {"states", issue.state_ids}});
        structural.witness = issues;
        structural.detail = "structural validation failed";
    }
    verdicts.push_back(structural);

    std::shared_ptr<tep::StateValueProfile> profile;
    auto need_profile = [&]() {
        if (!profile) profile = std::make_shared<tep::StateValueProfile>(tep::reach_sets(bp, budget));
        return profile;
    };

    std::vector<std::function<tep::Verdict()>> tasks;
    for (const auto& p : properties) {
        if (p == "computes") tasks.push_back([&] { return tep::computes_tep(bp, budget); });
        else if (p == "thrifty") tasks.push_back([&] { return tep::check_thrifty(bp, budget); });
        else if (p == "syntactic-ro") tasks.push_back([&] { return tep::check_syntactic_read_once(bp); });
        else if (p == "null-path-free") tasks.push_back([&] { return tep::check_null_path_free(bp, budget); });
        else if (p == "semantic-ro") tasks.push_back([&] { return tep::check_semantic_read_once(bp, budget); });
        else if (p == "node-independent")
            tasks.push_back([&] { return tep::check_node_independent(bp, *need_profile(), budget); });
        else if (p == "bitwise-independent")
            tasks.push_back([&] { return tep::check_bitwise_independent(bp, *need_profile(), budget); });
        else throw std::invalid_argument("unknown property: " + p);
    }

    if (!tasks.empty() && jobs > 1) {
        for (const auto& p : properties)
            if (p == "node-independent" || p == "bitwise-independent") {
                need_profile();  // shared read-only past this point
                break;
            }
        std::vector<tep::Verdict> results(tasks.size());
        std::vector<std::thread> pool;
        std::atomic<size_t> next{0};
        int workers = std::min<int>(jobs, (int)tasks.size());
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (size_t t; (t = next.fetch_add(1)) < tasks.size();) results[t] = tasks[t]();
            });
        for (auto& th : pool) th.join();
        for (auto& r : results) verdicts.push_back(std::move(r));
    } else {
        for (auto& task : tasks) verdicts.push_back(task());
    }

    bool all_pass = true;
    json jreport = json::array();
    std::ostringstream text;
    for (const auto& v : verdicts) {
        all_pass = all_pass && v.pass;
        jreport.push_back(v.to_json());
        text << (v.pass ? "[PASS] " : "[FAIL] ") << v.property
             << (v.sampled ? " (sampled)" : "") << (v.detail.empty() ? "" : ": " + v.detail)
             << "\n";
    }
    write_file(out_path, report == "json" ? jreport.dump(2) + "\n" : text.str());
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tree evaluation pebbling laboratory"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "print help");  // frees -h / --h for the height option

    tep::Budget budget;
    try {
        budget = budget_from_env();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    // gen
    auto* gen = app.add_subcommand("gen", "generate a random instance file");
    gen->set_help_flag("--help", "print help");
    int gen_h = 2, gen_k = 2;
    std::uint64_t gen_seed = 0;
    std::string gen_out = "-";
    gen->add_option("--h", gen_h, "tree height (levels)")->required();
    gen->add_option("--k", gen_k, "alphabet size")->required();
    gen->add_option("--seed", gen_seed, "RNG seed");
    gen->add_option("-o,--out", gen_out, "output path (default stdout)");

    // pebble
    auto* pebble = app.add_subcommand("pebble", "minimum pebble number with witness");
    pebble->set_help_flag("--help", "print help");
    std::string pebble_game = "black";
    int pebble_h = 2, pebble_d = 2;
    std::string pebble_out, pebble_report = "json";
    pebble->add_option("--game", pebble_game, "black|whole|fractional")->required();
    pebble->add_option("--h", pebble_h, "tree height")->required();
    pebble->add_option("--d", pebble_d, "fractional denominator (default 2)");
    pebble->add_option("--out", pebble_out, "witness output path");
    pebble->add_option("--report", pebble_report, "json|text");

    // compile
    auto* compile = app.add_subcommand("compile", "compile a pebbling witness into a BP");
    compile->set_help_flag("--help", "print help");
    std::string compile_witness;
    int compile_k = 2;
    std::string compile_out = "-";
    compile->add_option("--witness", compile_witness, "pebbling JSON path")->required();
    compile->add_option("--k", compile_k, "alphabet size")->required();
    compile->add_option("-o,--out", compile_out, "output path");

    // check
    auto* check = app.add_subcommand("check", "check structure and semantic restrictions");
    check->set_help_flag("--help", "print help");
    std::string check_bp;
    bool c_computes = false, c_thrifty = false, c_synro = false, c_npf = false, c_semro = false,
         c_nodei = false, c_biti = false, c_all = false;
    int check_jobs = 1;
    std::string check_report = "json", check_out = "-";
    check->add_option("bp", check_bp, "branching program JSON")->required();
    check->add_flag("--computes", c_computes, "computes TEP on every instance");
    check->add_flag("--thrifty", c_thrifty, "thrifty restriction");
    check->add_flag("--syntactic-ro", c_synro, "syntactic read-once");
    check->add_flag("--null-path-free", c_npf, "null-path freeness");
    check->add_flag("--semantic-ro", c_semro, "semantic read-once");
    check->add_flag("--node-independent", c_nodei, "node-independence");
    check->add_flag("--bitwise-independent", c_biti, "bitwise-independence");
    check->add_flag("--all", c_all, "every property");
    check->add_option("--jobs", check_jobs, "parallel checker threads");
    check->add_option("--report", check_report, "json|text");
    check->add_option("-o,--out", check_out, "output path");

    // analyze / census
    auto* analyze = app.add_subcommand("analyze", "trace analyses and bottleneck censuses");
    analyze->set_help_flag("--help", "print help");
    auto* census = app.add_subcommand("census", "bottleneck census over all instances");
    census->set_help_flag("--help", "print help");
    std::string an_bp, an_pipeline, an_instance, an_out = "-";
    bool an_all = false;
    for (auto* cmd : {analyze, census}) {
        cmd->add_option("bp", an_bp, "branching program JSON")->required();
        cmd->add_option("--pipeline", an_pipeline,
                        "det-thrifty|ro-thrifty|ro-thrifty-npf|algorithm1|bitwise|niro")
            ->required();
        cmd->add_option("-o,--out", an_out, "output path");
    }
    analyze->add_option("--instance", an_instance, "instance JSON for a single-path trace");
    analyze->add_flag("--all", an_all, "census over every instance");

    // export
    auto* exp = app.add_subcommand("export", "DOT export of a BP or pebbling file");
    exp->set_help_flag("--help", "print help");
    std::string exp_in, exp_format = "dot", exp_out = "-";
    exp->add_option("input", exp_in, "input JSON")->required();
    exp->add_option("--format", exp_format, "dot");
    exp->add_option("-o,--out", exp_out, "output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*gen) {
            if (gen_h < 2 || gen_k < 2)
                throw std::invalid_argument("gen requires h >= 2 and k >= 2");
            tep::TepInstance inst = tep::sample_instance(tep::TreeShape(gen_h), gen_k, gen_seed);
            write_file(gen_out, tep::instance_to_json(inst));
            return 0;
        }
        if (*pebble) {
            auto result = tep::min_pebble_number(tep::game_from_name(pebble_game), pebble_h,
                                                 pebble_d, budget);
            tep::SequenceVerdict sv = tep::validate_sequence(result.witness);
            json j = {{"game", pebble_game},
                      {"h", pebble_h},
                      {"min", result.minimum.str()},
                      {"max_cost", result.witness.max_pebbles().str()},
                      {"witness_valid", sv.ok},
                      {"moves", (int)result.witness.moves.size()}};
            if (!pebble_out.empty())
                write_file(pebble_out, tep::pebbling_to_json(result.witness));
            if (pebble_report == "text")
                std::cout << "min=" << result.minimum.str() << " valid=" << (sv.ok ? "yes" : "no")
                          << "\n";
            else
                std::cout << j.dump(2) << "\n";
            return sv.ok ? 0 : 1;
        }
        if (*compile) {
            tep::PebbleSequence seq = tep::pebbling_from_json(read_file(compile_witness));
            tep::BranchingProgram bp = seq.game == tep::Game::Black
                                           ? tep::compile_black(seq, compile_k)
                                           : tep::compile_bw(seq, compile_k);
            write_file(compile_out, tep::bp_to_json(bp));
            return 0;
        }
        if (*check) {
            std::vector<std::string> properties;
            if (c_all) {
                properties = {"computes", "thrifty", "syntactic-ro", "null-path-free",
                              "semantic-ro", "node-independent"};
                tep::BranchingProgram probe = tep::bp_from_json(read_file(check_bp));
                if ((probe.k() & (probe.k() - 1)) == 0) properties.push_back("bitwise-independent");
            } else {
                if (c_computes) properties.push_back("computes");
                if (c_thrifty) properties.push_back("thrifty");
                if (c_synro) properties.push_back("syntactic-ro");
                if (c_npf) properties.push_back("null-path-free");
                if (c_semro) properties.push_back("semantic-ro");
                if (c_nodei) properties.push_back("node-independent");
                if (c_biti) properties.push_back("bitwise-independent");
            }
            return run_check(check_bp, properties, check_jobs, check_report, check_out, budget);
        }
        if (*analyze || *census) {
            tep::BranchingProgram bp = tep::bp_from_json(read_file(an_bp));
            if (*census) an_all = true;
            if (an_all) {
                std::shared_ptr<tep::StateValueProfile> profile;
                PipelineSpec spec = make_pipeline(an_pipeline, bp, budget, profile);
                tep::Census cs = tep::bottleneck_census(bp, spec.exponent, spec.resolver, budget);
                write_file(an_out, cs.to_json().dump(2) + "\n");
                return cs.bound_holds ? 0 : 1;
            }
            if (an_instance.empty())
                throw std::invalid_argument("analyze needs --instance or --all");
            tep::TepInstance inst = tep::instance_from_json(read_file(an_instance));
            json out = per_instance_analysis(an_pipeline, bp, inst, budget);
            write_file(an_out, out.dump(2) + "\n");
            return 0;
        }
        if (*exp) {
            if (exp_format != "dot") throw std::invalid_argument("only dot export is supported");
            json j = json::parse(read_file(exp_in));
            if (j.contains("states") && j.contains("edges")) {
                tep::BranchingProgram bp = tep::bp_from_json(j.dump());
                write_file(exp_out, tep::bp_to_dot(bp));
            } else if (j.contains("configs")) {
                tep::PebbleSequence seq = tep::pebbling_from_json(j.dump());
                std::ostringstream os;
                os << "digraph pebbling {\n  rankdir=LR;\n";
                for (size_t t = 0; t < seq.configs.size(); ++t) {
                    os << "  c" << t << " [shape=box,label=\"";
                    for (int i = 1; i <= seq.shape.node_count(); ++i) {
                        if (seq.configs[t].b[i] != tep::Rat(0))
                            os << "b" << i << "=" << seq.configs[t].b[i].str() << " ";
                        if (seq.configs[t].w[i] != tep::Rat(0))
                            os << "w" << i << "=" << seq.configs[t].w[i].str() << " ";
                    }
                    os << "\"];\n";
                    if (t + 1 < seq.configs.size())
                        os << "  c" << t << " -> c" << t + 1 << " [label=\""
                           << seq.moves[t].str() << "\"];\n";
                }
                os << "}\n";
                write_file(exp_out, os.str());
            } else {
                throw std::invalid_argument("unrecognized input for export");
            }
            return 0;
        }
    } catch (const tep::analysis_error& e) {
        std::cerr << "counterexample: " << e.what() << "\n" << e.context.dump(2) << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    return 2;
}
