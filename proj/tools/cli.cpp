// Command-line frontend: run programs, compile, link, split, manipulate
// traces, check relations and safety properties, and drive the randomized
// robust-safety pipeline. Exit codes: 0 success/related/safe, 1 property
// violated, 2 usage or parse error.

#include <atomic>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "seclab/asm_format.hpp"
#include "seclab/backtranslation.hpp"
#include "seclab/compiler.hpp"
#include "seclab/gen.hpp"
#include "seclab/harness.hpp"
#include "seclab/json_io.hpp"
#include "seclab/relations.hpp"

using namespace seclab;

namespace {

std::int64_t default_fuel() {
  if (const char* s = std::getenv("LAB_FUEL")) {
    char* end = nullptr;
    long long v = std::strtoll(s, &end, 10);
    if (end && *end == '\0' && v > 0) return v;
  }
  return 100000;
}

[[noreturn]] void die(const std::string& msg, int code = 2) {
  std::cerr << "error: " << msg << "\n";
  std::exit(code);
}

MachProgram load_mach(const std::string& path, const std::string& format) {
  if (format == "asm" || (format.empty() && path.size() > 4 &&
                          path.compare(path.size() - 4, 4, ".asm") == 0)) {
    std::ifstream in(path);
    if (!in) die("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return mach_from_asm(ss.str());
  }
  return mach_from_json(load_json(path));
}

SourceProgram load_source(const std::string& path) { return source_from_json(load_json(path)); }

void emit(const Json& j, const std::string& out) {
  if (out.empty() || out == "-")
    std::cout << j.dump(1) << "\n";
  else
    save_json(out, j);
}

Renaming parse_ren(const std::string& spec) {
  if (spec.empty() || spec == "identity") return Renaming::identity();
  auto colon = spec.find(':');
  std::string kind = spec.substr(0, colon);
  std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "shift") return Renaming::shift(std::stoi(arg));
  if (kind == "table") {
    // JSON file: [[comp, block, new_block], ...]
    std::map<Loc, int> m;
    for (const Json& row : load_json(arg)) {
      if (!row.is_array() || row.size() != 3) die("bad table row in " + arg);
      m[{row[0].get<int>(), row[1].get<int>()}] = row[2].get<int>();
    }
    return Renaming::table(std::move(m));
  }
  if (kind == "compshift") {
    // Inline: comp=delta[,comp=delta...]
    std::map<int, int> deltas;
    std::istringstream ss(arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto eq = item.find('=');
      if (eq == std::string::npos) die("bad compshift entry '" + item + "'");
      deltas[std::stoi(item.substr(0, eq))] = std::stoi(item.substr(eq + 1));
    }
    return Renaming::comp_shift(std::move(deltas));
  }
  die("unknown renaming '" + spec + "'");
}

std::set<int> parse_comps(const std::string& spec) {
  std::set<int> out;
  std::istringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) out.insert(std::stoi(item));
  if (out.empty()) die("empty component list");
  return out;
}

int run_report(const RunResult& r, const std::string& trace_out, bool with_mem) {
  Json j{{"outcome", to_string(r.outcome)},
         {"steps", r.steps},
         {"events", remove_df(r.trace).size()}};
  if (r.outcome == Outcome::Done) j["result"] = to_json(r.result);
  std::cout << j.dump(1) << "\n";
  if (!trace_out.empty()) save_json(trace_out, to_json(r.trace, with_mem));
  if (r.outcome != Outcome::Done) {
    std::cerr << "run did not terminate normally: " << to_string(r.outcome) << "\n";
    return 1;
  }
  return 0;
}

std::string verdict_str(const Verdict& v) {
  switch (v.kind) {
    case Verdict::Kind::Pass: return "pass";
    case Verdict::Kind::Fail: return "fail";
    case Verdict::Kind::Skip: return "skip";
  }
  return "?";
}

// ---- rsp-test ------------------------------------------------------------

struct CaseResult {
  std::uint64_t seed = 0;
  std::string verdict;
  std::string stage;
  std::string detail;
};

int cmd_rsp_test(std::uint64_t seed, int cases, std::int64_t fuel, int jobs,
                 const std::string& report) {
  std::vector<CaseResult> results(cases);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < cases; i = next.fetch_add(1)) {
      GenConfig cfg;
      cfg.seed = seed + static_cast<std::uint64_t>(i);
      cfg.fuel = fuel;
      SourceProgram ps = gen_source_program(cfg);
      MachProgram ct = gen_mach_context(cfg, compile(ps).intf);
      PipelineResult r = rsp_pipeline(ps, ct, fuel);
      results[i] = {cfg.seed, verdict_str(r.verdict), r.stage, r.verdict.detail};
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  int failed = 0, skipped = 0;
  Json jcases = Json::array();
  for (const CaseResult& c : results) {
    if (c.verdict == "fail") ++failed;
    if (c.verdict == "skip") ++skipped;
    Json j{{"seed", c.seed}, {"verdict", c.verdict}};
    if (!c.stage.empty()) j["stage"] = c.stage;
    if (!c.detail.empty()) j["detail"] = c.detail;
    jcases.push_back(j);
    if (c.verdict == "fail")
      std::cerr << "seed " << c.seed << " failed at stage " << c.stage << ": " << c.detail
                << "\n";
  }
  Json summary{{"cases", cases}, {"failed", failed}, {"skipped", skipped}, {"results", jcases}};
  if (!report.empty()) save_json(report, summary);
  std::cout << "rsp-test: " << cases - failed - skipped << " passed, " << skipped
            << " skipped, " << failed << " failed\n";
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"secure-compilation laboratory"};
  app.require_subcommand(1);
  std::int64_t fuel = default_fuel();
  app.add_option("--fuel", fuel, "step budget (env LAB_FUEL)")->capture_default_str();

  std::string in, in2, out, trace_out, format, ren_spec, comps_spec, loc_spec, span_spec,
      report;
  bool no_mem = false, df = false;
  std::uint64_t seed = 0;
  int cases = 100, jobs = 1;

  auto* c_runsrc = app.add_subcommand("run-source", "run a source program");
  c_runsrc->add_option("file", in)->required();
  c_runsrc->add_option("--trace", trace_out, "write the interaction trace here");
  c_runsrc->add_flag("--no-mem", no_mem, "omit memory snapshots from the trace file");

  auto* c_runmach = app.add_subcommand("run-mach", "run a machine program");
  c_runmach->add_option("file", in)->required();
  c_runmach->add_option("--format", format)->check(CLI::IsMember({"json", "asm"}));
  c_runmach->add_option("--trace", trace_out);
  c_runmach->add_flag("--df", df, "record the full data-flow trace");
  c_runmach->add_flag("--no-mem", no_mem);

  auto* c_compile = app.add_subcommand("compile", "compile source to machine code");
  c_compile->add_option("file", in)->required();
  c_compile->add_option("-o,--output", out);

  auto* c_link = app.add_subcommand("link", "link two programs of the same language");
  c_link->add_option("a", in)->required();
  c_link->add_option("b", in2)->required();
  c_link->add_option("--format", format)->check(CLI::IsMember({"json", "asm"}));
  c_link->add_option("-o,--output", out);

  auto* c_split = app.add_subcommand("split", "project a program onto components");
  c_split->add_option("file", in)->required();
  c_split->add_option("--comps", comps_spec, "comma-separated component ids")->required();
  c_split->add_option("--format", format)->check(CLI::IsMember({"json", "asm"}));
  c_split->add_option("-o,--output", out);

  auto* c_strip = app.add_subcommand("strip-df", "drop data-flow events from a trace");
  c_strip->add_option("file", in)->required();
  c_strip->add_option("-o,--output", out);

  auto* c_bt = app.add_subcommand("backtranslate", "trace-directed back-translation");
  c_bt->add_option("trace", in)->required();
  c_bt->add_option("--intf", in2, "machine program the trace came from")->required();
  c_bt->add_option("--format", format)->check(CLI::IsMember({"json", "asm"}));
  c_bt->add_option("-o,--output", out);

  auto* c_rel = app.add_subcommand("check-trace-rel", "check two traces are related");
  c_rel->add_option("--ren", ren_spec, "identity | shift:K | table:FILE | compshift:C=D,..");
  c_rel->add_option("a", in)->required();
  c_rel->add_option("b", in2)->required();

  std::string prop, prog_path;
  auto* c_safe = app.add_subcommand("check-safety", "evaluate a safety property on a trace");
  c_safe->add_option("prop", prop)->check(CLI::IsMember({"nowrite"}))->required();
  c_safe->add_option("--loc", loc_spec, "comp:block:off of the protected cell")->required();
  c_safe->add_option("--span", span_spec, "caller:callee:proc filter");
  c_safe->add_option("--prog", prog_path, "program file resolving component names");
  c_safe->add_option("trace", in)->required();

  auto* c_rec = app.add_subcommand("check-recomposition", "ternary-monitor recomposition");
  c_rec->add_option("run1", in)->required();
  c_rec->add_option("run2", in2)->required();
  c_rec->add_option("--part", comps_spec, "program-side component ids")->required();
  c_rec->add_option("--ren", ren_spec, "renaming relating run1 to run2");

  auto* c_rsp = app.add_subcommand("rsp-test", "randomized robust-safety pipeline");
  c_rsp->add_option("--seed", seed)->capture_default_str();
  c_rsp->add_option("--cases", cases)->capture_default_str();
  c_rsp->add_option("--jobs", jobs, "worker threads")->capture_default_str();
  c_rsp->add_option("--report", report, "write a JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // help/version exit 0, usage errors exit 2
  }

  try {
    if (*c_runsrc) {
      RunResult r = run_source(load_source(in), fuel);
      return run_report(r, trace_out, !no_mem);
    }
    if (*c_runmach) {
      MachProgram m = load_mach(in, format);
      RunResult r = df ? run_mach(m, fuel) : run_mach_interaction(m, fuel);
      return run_report(r, trace_out, !no_mem);
    }
    if (*c_compile) {
      SourceProgram p = load_source(in);
      std::string why;
      if (!well_formed(p, &why)) die("ill-formed program: " + why, 1);
      emit(to_json(compile(p)), out);
      return 0;
    }
    if (*c_link) {
      Json ja = in.size() > 4 && in.compare(in.size() - 4, 4, ".asm") == 0 ? Json{}
                : load_json(in);
      bool src = ja.is_object() && ja.contains("lang") && ja["lang"] == "source";
      if (src) {
        auto w = link_source(source_from_json(ja), load_source(in2));
        if (!w) die("programs do not link", 1);
        emit(to_json(*w), out);
      } else {
        auto w = link_mach(load_mach(in, format), load_mach(in2, format));
        if (!w) die("programs do not link", 1);
        emit(to_json(*w), out);
      }
      return 0;
    }
    if (*c_split) {
      std::set<int> comps = parse_comps(comps_spec);
      Json j = load_json(in);
      if (j.contains("lang") && j["lang"] == "source")
        emit(to_json(proj_source(source_from_json(j), comps)), out);
      else
        emit(to_json(proj_mach(mach_from_json(j), comps)), out);
      return 0;
    }
    if (*c_strip) {
      emit(to_json(remove_df(trace_from_json(load_json(in)))), out);
      return 0;
    }
    if (*c_bt) {
      Trace t = trace_from_json(load_json(in));
      MachProgram m = load_mach(in2, format);
      std::string why;
      auto s = backtranslate(t, m, &why);
      if (!s) die("back-translation rejected the trace: " + why, 1);
      emit(to_json(*s), out);
      return 0;
    }
    if (*c_rel) {
      Trace a = trace_from_json(load_json(in));
      Trace b = trace_from_json(load_json(in2));
      std::string why;
      if (!trace_related(parse_ren(ren_spec), a, b, &why)) {
        std::cerr << "traces not related: " << why << "\n";
        return 1;
      }
      std::cout << "related\n";
      return 0;
    }
    if (*c_safe) {
      CompNames names;
      if (!prog_path.empty()) {
        Json j = load_json(prog_path);
        names = j.contains("lang") && j["lang"] == "source"
                    ? source_from_json(j).names
                    : mach_from_json(j).names;
      }
      auto comp_of = [&](const std::string& s) {
        if (!s.empty() && (std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '-'))
          return std::stoi(s);
        auto it = names.find(s);
        if (it == names.end()) die("unknown component '" + s + "' (use --prog to map names)");
        return it->second;
      };
      NoWrite loc;
      {
        std::istringstream ss(loc_spec);
        std::string c, b, o;
        if (!std::getline(ss, c, ':') || !std::getline(ss, b, ':') || !std::getline(ss, o))
          die("--loc expects comp:block:off");
        loc.comp = comp_of(c);
        loc.block = std::stoi(b);
        loc.off = std::stoll(o);
      }
      if (!span_spec.empty()) {
        std::istringstream ss(span_spec);
        std::string c, d, p;
        if (!std::getline(ss, c, ':') || !std::getline(ss, d, ':') || !std::getline(ss, p))
          die("--span expects caller:callee:proc");
        loc.caller = comp_of(c);
        loc.callee = comp_of(d);
        loc.proc = p;
      }
      Trace t = trace_from_json(load_json(in));
      if (!check_safety_nowrite(t, loc)) {
        std::cerr << "safety violated: protected cell changed across a call\n";
        return 1;
      }
      std::cout << "safe\n";
      return 0;
    }
    if (*c_rec) {
      Verdict v = check_recomposition(load_mach(in, format), load_mach(in2, format),
                                      parse_comps(comps_spec), parse_ren(ren_spec), fuel);
      if (!v.ok()) {
        std::cerr << "recomposition failed: " << v.detail << "\n";
        return 1;
      }
      std::cout << verdict_str(v) << (v.passed() ? "" : ": " + v.detail) << "\n";
      return 0;
    }
    if (*c_rsp) return cmd_rsp_test(seed, cases, fuel, jobs, report);
  } catch (const std::exception& e) {
    die(e.what());
  }
  return 2;
}
