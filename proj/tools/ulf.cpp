// Command-line front end: load Lie algebra spec files, run spectral /
// gradation / central-series / BCH analyses, run the contraction-group
// demos, and execute the acceptance selfcheck.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

#include "ulf/io.hpp"
#include "ulf/selfcheck.hpp"

namespace {

const std::map<std::string, std::string> kExamples = {
    {"heisenberg.json", R"({
  "field": {"kind": "padic", "p": 5},
  "dim": 3,
  "brackets": [{"i": 0, "j": 1, "k": 2, "c": "1"}],
  "automorphism": [["5", "0", "0"], ["0", "5", "0"], ["0", "0", "25"]]
}
)"},
    {"identity.json", R"({
  "field": {"kind": "padic", "p": 5},
  "dim": 2,
  "brackets": [],
  "automorphism": [["1", "0"], ["0", "1"]]
}
)"},
    {"companion.json", R"({
  "field": {"kind": "laurent", "p": 3, "f": 1},
  "dim": 2,
  "brackets": [],
  "automorphism": [["0", "X"], ["1", "0"]]
}
)"},
    {"filiform4.json", R"({
  "field": {"kind": "padic", "p": 7},
  "dim": 4,
  "brackets": [{"i": 0, "j": 1, "k": 2, "c": "1"}, {"i": 0, "j": 2, "k": 3, "c": "1"}],
  "automorphism": [["7", "0", "0", "0"], ["0", "7", "0", "0"], ["0", "0", "49", "0"], ["0", "0", "0", "343"]]
}
)"},
    {"heisenberg-q2.json", R"({
  "field": {"kind": "padic", "p": 2},
  "dim": 3,
  "brackets": [{"i": 0, "j": 1, "k": 2, "c": "1"}],
  "automorphism": [["2", "0", "0"], ["0", "2", "0"], ["0", "0", "4"]]
}
)"},
    {"sl2.json", R"({
  "field": {"kind": "padic", "p": 5},
  "dim": 3,
  "brackets": [{"i": 0, "j": 1, "k": 2, "c": "1"}, {"i": 0, "j": 2, "k": 0, "c": "-2"}, {"i": 1, "j": 2, "k": 1, "c": "2"}],
  "automorphism": [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]
}
)"},
};

int exit_code_for(const ulf::Error& e) {
  switch (e.error_class()) {
    case ulf::ErrorClass::parse: return 1;
    case ulf::ErrorClass::precondition: return 2;
    case ulf::ErrorClass::precision: return 3;
    case ulf::ErrorClass::check: return 4;
  }
  return 4;
}

void emit(const std::string& out_path, const ulf::Json& j) {
  std::string text = j.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    ulf::write_atomic(out_path, text);
}

ulf::Json demo_report(const std::string& name, std::uint64_t seed, long prec,
                      const ulf::CheckList& checks, const std::string& conclusion = "") {
  ulf::Json j;
  j["demo"] = name;
  j["precision"] = prec;
  j["seed"] = seed;
  j["checks"] = ulf::checklist_to_json(checks);
  if (!conclusion.empty()) j["conclusion"] = conclusion;
  j["all_pass"] = checks.all_pass();
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact spectral, gradation and contraction-group analysis over local fields"};
  app.require_subcommand(1);

  long precision = ulf::kDefaultPrecision;
  std::uint64_t seed = 0;
  std::string out_path;
  bool json_out = false;
  std::string spec_path;
  std::string demo_name;
  unsigned interleave_n = 3;
  long depth = 10;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--precision", precision, "working precision in uniformizer digits (>= 16)")
        ->capture_default_str();
    sub->add_option("--seed", seed, "seed for randomized checks")->capture_default_str();
    sub->add_option("--out", out_path, "write the report to this path (atomic)");
    sub->add_flag("--json", json_out, "force JSON output");
  };

  CLI::App* analyze = app.add_subcommand("analyze", "contractivity, decomposition, adapted norm");
  analyze->add_option("spec", spec_path, "Lie algebra spec file (JSON)")->required();
  add_common(analyze);
  CLI::App* gradation = app.add_subcommand("gradation", "analyze plus the induced N-gradation");
  gradation->add_option("spec", spec_path, "Lie algebra spec file (JSON)")->required();
  add_common(gradation);
  CLI::App* central = app.add_subcommand("central-series", "gradation plus the central series");
  central->add_option("spec", spec_path, "Lie algebra spec file (JSON)")->required();
  add_common(central);
  CLI::App* integrate = app.add_subcommand("integrate", "BCH group from a nilpotent spec over Q_p");
  integrate->add_option("spec", spec_path, "Lie algebra spec file (JSON)")->required();
  add_common(integrate);
  CLI::App* demo = app.add_subcommand("demo", "run a named contraction-group demo");
  demo->add_option("name", demo_name,
                   "one of: even-sub, subfield, interleave-2, interleave-n, semidirect, "
                   "heisenberg-bch, same-linearization")
      ->required();
  demo->add_option("--n", interleave_n, "number of interleaved components for interleave-n")
      ->capture_default_str();
  demo->add_option("--depth", depth, "ball depth for same-linearization")->capture_default_str();
  add_common(demo);
  CLI::App* selfcheck = app.add_subcommand("selfcheck", "run the full acceptance suite");
  add_common(selfcheck);
  CLI::App* dump = app.add_subcommand("dump-examples", "write the built-in example spec files");
  dump->add_option("--out", out_path, "directory to write into (default: current)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (precision < 16) throw ulf::ParseError("--precision must be at least 16");

    if (dump->parsed()) {
      std::string dir = out_path.empty() ? "." : out_path;
      for (const auto& [name, content] : kExamples) {
        ulf::write_atomic(dir + "/" + name, content);
        std::cout << dir + "/" + name << "\n";
      }
      return 0;
    }

    if (selfcheck->parsed()) {
      auto results = ulf::run_acceptance(seed, precision);
      bool all = true;
      for (const auto& r : results) {
        all = all && r.pass;
        if (!json_out)
          std::cout << "[" << (r.pass ? "PASS" : "FAIL") << "] criterion " << r.id << ": "
                    << r.name << " -- " << r.detail << "\n";
        std::cerr << "criterion " << r.id << " took " << r.seconds << " s\n";
      }
      if (json_out) emit(out_path, ulf::selfcheck_to_json(results));
      return all ? 0 : 4;
    }

    if (demo->parsed()) {
      ulf::Json rep;
      if (demo_name == "even-sub") {
        rep = demo_report(demo_name, seed, precision,
                          ulf::shift_isomorphism_even_sub(3, 40, 25, seed).report);
      } else if (demo_name == "subfield") {
        rep = demo_report(demo_name, seed, precision,
                          ulf::shift_isomorphism_subfield(3, 40, 25, seed).report);
      } else if (demo_name == "interleave-2") {
        rep = demo_report(demo_name, seed, precision,
                          ulf::shift_isomorphism_interleave(3, 2, 40, 25, seed).report);
      } else if (demo_name == "interleave-n") {
        rep = demo_report(demo_name, seed, precision,
                          ulf::shift_isomorphism_interleave(3, interleave_n, 40, 25, seed).report);
      } else if (demo_name == "semidirect") {
        rep = demo_report(demo_name, seed, precision, ulf::demo_semidirect(3, seed, precision));
      } else if (demo_name == "heisenberg-bch") {
        rep = demo_report(demo_name, seed, precision, ulf::demo_heisenberg_bch(seed, precision));
      } else if (demo_name == "same-linearization") {
        auto sl = ulf::same_linearization_demo(3, depth, 20, seed, precision);
        rep = demo_report(demo_name, seed, precision, sl.checks, sl.conclusion);
      } else {
        throw ulf::ParseError("unknown demo '" + demo_name + "'");
      }
      emit(out_path, rep);
      return rep["all_pass"].get<bool>() ? 0 : 4;
    }

    ulf::LieSpecFile spec = ulf::lie_spec_from_file(spec_path, precision);
    ulf::Json rep;
    if (analyze->parsed())
      rep = ulf::run_analyze(spec, precision, seed);
    else if (gradation->parsed())
      rep = ulf::run_gradation(spec, precision, seed);
    else if (central->parsed())
      rep = ulf::run_central_series(spec, precision, seed);
    else if (integrate->parsed())
      rep = ulf::run_integrate(spec, precision, seed);
    emit(out_path, rep);
    return 0;
  } catch (const ulf::Error& e) {
    ulf::Json err;
    err["error"]["type"] = e.name();
    err["error"]["message"] = e.what();
    try {
      emit(out_path, err);
    } catch (...) {
      std::cerr << e.name() << ": " << e.what() << "\n";
    }
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
}
