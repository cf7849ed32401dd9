// abdd: command-line front end for LTF compilation, network compilation and
// robustness verification.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "abdd/bnn.hpp"
#include "abdd/boosting.hpp"
#include "abdd/circuit.hpp"
#include "abdd/diagram.hpp"
#include "abdd/error.hpp"
#include "abdd/ltf.hpp"
#include "abdd/verify.hpp"

namespace {

using namespace abdd;

enum Exit : int {
  kOk = 0,
  kDiverged = 1,
  kInput = 2,
  kTrivial = 3,
  kWeakLearner = 4,
  kTimeout = 5,
};

struct Common {
  std::size_t cap = kDefaultDimensionCap;
  std::uint64_t seed = 1;
  double timeout_sec = 60.0;
  unsigned jobs = 1;
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

std::size_t effective_cap(std::size_t flag) { return dimension_cap_from_env(flag); }

// --- ltf2dd ---------------------------------------------------------------

struct Ltf2ddArgs {
  std::string input;
  std::string algo = "abdd";
  std::optional<double> epsilon;
  std::string out;
  std::string format = "json";
  std::string trace_out;
  bool raw = false;
};

int run_ltf2dd(const Ltf2ddArgs& a, const Common& c) {
  const auto f = read_ltf_file(a.input);
  const auto s = full_sample(f, effective_cap(c.cap));
  const std::size_t n = f.dimension();

  BoostConfig cfg;
  cfg.epsilon = a.epsilon.value_or(std::ldexp(1.0, -static_cast<int>(n)));
  cfg.hypotheses = lifted_hypotheses(n);
  std::optional<double> rho;
  try {
    rho = margin(f, effective_cap(c.cap)).rho;
  } catch (const TrivialFunction&) {
  }
  cfg.max_iterations = default_max_iterations(cfg.epsilon, rho);

  const auto r = a.algo == "mm" ? boost_mm_baseline(s, cfg) : boost(s, cfg);

  if (!a.out.empty()) {
    if (a.format == "dot") {
      std::ostringstream dot;
      write_dot(dot, r.diagram);
      write_file(a.out, dot.str());
    } else {
      write_file(a.out, to_json(r.diagram) + "\n");
    }
  }
  if (!a.trace_out.empty()) {
    std::ostringstream csv;
    write_trace_csv(csv, r.trace);
    write_file(a.trace_out, csv.str());
  }

  const auto circuit = dd_to_circuit(r.diagram, {!a.raw});
  std::cout << std::setprecision(6) << "algo " << a.algo << "  n " << n << "  epsilon " << cfg.epsilon
            << "\niterations " << r.trace.size() << "  size " << size(r.diagram) << "  width "
            << width(r.diagram) << "  depth " << depth(r.diagram) << "  gates " << gate_count(circuit)
            << "\ntraining error " << training_error(r.diagram, s) << "  entropy " << r.final_entropy;
  if (rho) std::cout << "  margin " << *rho;
  std::cout << '\n';
  if (r.status == BoostStatus::Diverged) {
    std::cerr << "abdd: iteration cap " << cfg.max_iterations << " reached before entropy fell below epsilon\n";
    return kDiverged;
  }
  return kOk;
}

// --- margin ---------------------------------------------------------------

int run_margin(const std::string& input, const std::string& out, const Common& c) {
  const auto f = read_ltf_file(input);
  const auto cert = margin(f, effective_cap(c.cap));
  if (!out.empty()) write_file(out, margin_report_json(cert) + "\n");
  std::cout << std::setprecision(10) << "rho " << cert.rho << "  dual " << cert.dual_value << "  gap "
            << cert.gap << '\n';
  return kOk;
}

// --- compile --------------------------------------------------------------

struct CompileArgs {
  std::string input;
  std::string out;
  std::optional<double> epsilon;
  std::optional<int> int_precision;
  std::size_t check_samples = 100000;
  bool raw = false;
};

std::vector<BitVector> random_points(std::size_t n, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<BitVector> pts;
  pts.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    std::vector<std::int8_t> bits(n);
    for (auto& b : bits) b = (rng() >> 63) ? 1 : -1;
    pts.emplace_back(std::move(bits));
  }
  return pts;
}

int run_compile(const CompileArgs& a, const Common& c) {
  auto spec = load_network(a.input);
  if (a.int_precision) spec = integer_scaled(spec, *a.int_precision);

  NetworkCompileOptions opts;
  opts.epsilon = a.epsilon;
  opts.cap = effective_cap(c.cap);
  opts.jobs = c.jobs;
  opts.simplify = !a.raw;
  if (spec.input_size() > 16) opts.check_inputs = random_points(spec.input_size(), a.check_samples, c.seed);

  const auto t0 = std::chrono::steady_clock::now();
  const auto net = compile_network(spec, opts);
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
  if (!a.out.empty()) write_bundle(a.out, net);

  std::cout << "neurons " << net.neurons.size() << "  inputs " << spec.input_size() << "  gates "
            << gate_count(net.circuit) << "\nequivalence " << (net.exhaustive_check ? "exhaustive" : "sampled")
            << " over " << net.checked_inputs << " inputs, 0 mismatches\n"
            << std::setprecision(3) << "time " << dt.count() << " s\n";
  return kOk;
}

// --- verify-sr ------------------------------------------------------------

Circuit load_circuit(const std::string& path) {
  namespace fs = std::filesystem;
  if (fs::is_directory(path)) return read_bundle_circuit(path);
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return circuit_from_json(buf.str());
}

int run_verify_sr(const std::string& bundle, const std::string& sample, const std::string& out,
                  const Common& c) {
  const auto f = load_circuit(bundle);
  const auto pts = read_instances_file(sample);
  RobustnessOptions opts;
  opts.timeout = std::chrono::duration<double>(c.timeout_sec);
  opts.jobs = c.jobs;
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = sample_robustness(f, pts, opts);
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
  if (!out.empty()) write_file(out, to_json(rep) + "\n");
  std::cout << std::setprecision(10) << "SR " << rep.value << "  instances " << rep.instances.size()
            << std::setprecision(3) << "  time " << dt.count() << " s\n";
  return kOk;
}

// --- compare --------------------------------------------------------------

ThresholdFunction seeded_ltf(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> w(-5, 5);
  for (;;) {
    ThresholdFunction f;
    for (std::size_t i = 0; i < n; ++i) f.weights.push_back(w(rng));
    f.bias = w(rng);
    try {
      (void)margin(f, n);
      return f;
    } catch (const TrivialFunction&) {
    }
  }
}

std::string join_trace(const IterationTrace& t) {
  std::ostringstream o;
  o << std::setprecision(17);
  for (std::size_t k = 0; k < t.size(); ++k) o << (k ? ";" : "") << t[k].h_merged;
  return o.str();
}

int run_compare(std::size_t seeds, std::size_t n, const std::string& out, const Common& c) {
  if (n > effective_cap(c.cap)) throw ResourceError("compare: n exceeds the dimension cap");
  std::ostringstream csv;
  csv << "seed,n,abdd_size,mm_size,abdd_gates,mm_gates,abdd_iterations,mm_iterations,abdd_entropy,mm_entropy\n";
  std::size_t wins = 0;
  for (std::size_t k = 0; k < seeds; ++k) {
    const std::uint64_t seed = c.seed + k;
    std::mt19937_64 rng(seed);
    const auto f = seeded_ltf(rng, n);
    const auto s = full_sample(f, n);
    BoostConfig cfg;
    cfg.epsilon = std::ldexp(1.0, -static_cast<int>(n));
    cfg.hypotheses = lifted_hypotheses(n);
    cfg.max_iterations = default_max_iterations(cfg.epsilon, margin(f, n).rho);
    const auto a = boost(s, cfg);
    const auto m = boost_mm_baseline(s, cfg);
    const auto ga = gate_count(dd_to_circuit(a.diagram)), gm = gate_count(dd_to_circuit(m.diagram));
    if (size(a.diagram) <= size(m.diagram)) ++wins;
    csv << seed << ',' << n << ',' << size(a.diagram) << ',' << size(m.diagram) << ',' << ga << ',' << gm
        << ',' << a.trace.size() << ',' << m.trace.size() << ',' << join_trace(a.trace) << ','
        << join_trace(m.trace) << '\n';
  }
  if (!out.empty()) write_file(out, csv.str());
  std::cout << "seeds " << seeds << "  n " << n << "  abdd size <= mm size on " << wins << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compile threshold functions and binary networks into aligned decision diagrams"};
  app.require_subcommand(1);
  Common common;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--cap", common.cap, "Dimension cap for full-cube samples")->capture_default_str();
    sub->add_option("--seed", common.seed, "Seed for generated inputs")->capture_default_str();
    sub->add_option("--jobs", common.jobs, "Parallel batch width")->check(CLI::PositiveNumber);
    sub->add_option("--timeout-sec", common.timeout_sec, "Per-query SAT timeout")->capture_default_str();
  };

  Ltf2ddArgs l2d;
  auto* ltf2dd = app.add_subcommand("ltf2dd", "Boost an LTF into a decision diagram");
  ltf2dd->add_option("ltf", l2d.input, "LTF JSON file")->required();
  ltf2dd->add_option("--algo", l2d.algo)->check(CLI::IsMember({"abdd", "mm"}))->capture_default_str();
  ltf2dd->add_option("--epsilon", l2d.epsilon, "Stop when frontier entropy falls below this (default 2^-n)");
  ltf2dd->add_option("--out", l2d.out, "Diagram output path");
  ltf2dd->add_option("--format", l2d.format)->check(CLI::IsMember({"json", "dot"}))->capture_default_str();
  ltf2dd->add_option("--trace-out", l2d.trace_out, "Per-iteration trace CSV path");
  ltf2dd->add_flag("--raw", l2d.raw, "Report gates without simplification");
  add_common(ltf2dd);

  std::string margin_in, margin_out;
  auto* margin_cmd = app.add_subcommand("margin", "Solve the margin LP of an LTF");
  margin_cmd->add_option("ltf", margin_in, "LTF JSON file")->required();
  margin_cmd->add_option("--out", margin_out, "Margin report JSON path");
  add_common(margin_cmd);

  CompileArgs comp;
  auto* compile = app.add_subcommand("compile", "Compile a binary network into a circuit bundle");
  compile->add_option("network", comp.input, "Network JSON file")->required();
  compile->add_option("--out", comp.out, "Bundle directory");
  compile->add_option("--epsilon", comp.epsilon, "Per-neuron epsilon (default 2^-fan_in)");
  compile->add_option("--int-precision", comp.int_precision, "Scale weights to integers with this many digits");
  compile->add_option("--check-samples", comp.check_samples, "Sampled equivalence checks above 16 inputs")
      ->capture_default_str();
  compile->add_flag("--raw", comp.raw, "Skip circuit simplification");
  add_common(compile);

  std::string bundle, sample, sr_out;
  auto* verify = app.add_subcommand("verify-sr", "Sample robustness of a compiled circuit");
  verify->add_option("circuit", bundle, "Bundle directory or circuit JSON")->required();
  verify->add_option("sample", sample, "Instance file (text or JSON)")->required();
  verify->add_option("--out", sr_out, "Report JSON path");
  add_common(verify);

  std::size_t seeds = 50, dim = 10;
  std::string cmp_out;
  auto* compare = app.add_subcommand("compare", "Compare ABDD and MM baseline sizes on seeded LTFs");
  compare->add_option("--seeds", seeds)->capture_default_str();
  compare->add_option("--n", dim)->capture_default_str();
  compare->add_option("--out", cmp_out, "CSV path");
  add_common(compare);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInput;
  }

  try {
    if (*ltf2dd) return run_ltf2dd(l2d, common);
    if (*margin_cmd) return run_margin(margin_in, margin_out, common);
    if (*compile) return run_compile(comp, common);
    if (*verify) return run_verify_sr(bundle, sample, sr_out, common);
    if (*compare) return run_compare(seeds, dim, cmp_out, common);
  } catch (const TrivialFunction& e) {
    std::cerr << "abdd: trivial function: " << e.what() << '\n';
    return kTrivial;
  } catch (const WeakLearnerFailure& e) {
    std::cerr << "abdd: weak learner failure: " << e.what() << '\n';
    return kWeakLearner;
  } catch (const Indeterminate& e) {
    std::cerr << "abdd: timeout: " << e.what() << '\n';
    return kTimeout;
  } catch (const InputError& e) {
    std::cerr << "abdd: " << e.what() << '\n';
    return kInput;
  } catch (const ResourceError& e) {
    std::cerr << "abdd: " << e.what() << '\n';
    return kInput;
  } catch (const DomainError& e) {
    std::cerr << "abdd: " << e.what() << '\n';
    return kInput;
  } catch (const Error& e) {
    std::cerr << "abdd: " << e.what() << '\n';
    return kDiverged;
  }
  return kOk;
}
