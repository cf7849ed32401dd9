#include "abdd/bnn.hpp"

#include <atomic>
#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "abdd/error.hpp"
#include "json.hpp"

namespace abdd {

namespace {

std::size_t conv_extent(std::size_t in, std::size_t k, std::size_t stride) {
  return (in - k) / stride + 1;
}

void require_finite(const std::vector<double>& v, const std::string& where) {
  for (double x : v)
    if (!std::isfinite(x)) throw InputError(where + ": non-finite weight");
}

}  // namespace

NetworkSpec::NetworkSpec(std::size_t height, std::size_t width, std::vector<Layer> layers)
    : layers_(std::move(layers)) {
  if (height == 0 || width == 0) throw InputError("network: empty input shape");
  if (layers_.empty()) throw InputError("network: no layers");
  shapes_.push_back({1, height, width});
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Shape in = shapes_.back();
    const std::string where = "layer " + std::to_string(l);
    if (const auto* c = std::get_if<ConvLayer>(&layers_[l])) {
      if (c->kernel == 0 || c->stride == 0) throw InputError(where + ": kernel and stride must be positive");
      if (c->kernel > in.height || c->kernel > in.width)
        throw InputError(where + ": kernel larger than input");
      if (c->filters.empty()) throw InputError(where + ": no filters");
      if (c->bias.size() != c->filters.size()) throw InputError(where + ": bias count mismatch");
      const auto fan = in.channels * c->kernel * c->kernel;
      for (const auto& f : c->filters) {
        if (f.size() != fan)
          throw InputError(where + ": filter has " + std::to_string(f.size()) + " weights, expected " +
                           std::to_string(fan));
        require_finite(f, where);
      }
      require_finite(c->bias, where);
      shapes_.push_back({c->filters.size(), conv_extent(in.height, c->kernel, c->stride),
                         conv_extent(in.width, c->kernel, c->stride)});
    } else {
      const auto& d = std::get<DenseLayer>(layers_[l]);
      if (d.weights.empty()) throw InputError(where + ": no neurons");
      if (d.bias.size() != d.weights.size()) throw InputError(where + ": bias count mismatch");
      for (const auto& row : d.weights) {
        if (row.size() != in.size())
          throw InputError(where + ": row has " + std::to_string(row.size()) + " weights, expected " +
                           std::to_string(in.size()));
        require_finite(row, where);
      }
      require_finite(d.bias, where);
      shapes_.push_back({1, 1, d.weights.size()});
    }
  }
}

ThresholdFunction NetworkSpec::neuron(std::size_t layer, std::size_t j) const {
  const auto& L = layers_.at(layer);
  if (const auto* c = std::get_if<ConvLayer>(&L)) {
    const auto positions = shapes_[layer + 1].height * shapes_[layer + 1].width;
    const auto f = j / positions;
    return {c->filters.at(f), c->bias.at(f)};
  }
  const auto& d = std::get<DenseLayer>(L);
  return {d.weights.at(j), d.bias.at(j)};
}

std::vector<std::size_t> NetworkSpec::fan_in(std::size_t layer, std::size_t j) const {
  const auto& L = layers_.at(layer);
  const Shape in = shapes_.at(layer);
  const Shape out = shapes_.at(layer + 1);
  if (j >= out.size()) throw DomainError("fan_in: neuron index out of range");
  std::vector<std::size_t> idx;
  if (const auto* c = std::get_if<ConvLayer>(&L)) {
    const auto pos = j % (out.height * out.width);
    const auto r = pos / out.width, col = pos % out.width;
    for (std::size_t ch = 0; ch < in.channels; ++ch)
      for (std::size_t kr = 0; kr < c->kernel; ++kr)
        for (std::size_t kc = 0; kc < c->kernel; ++kc)
          idx.push_back(ch * in.height * in.width + (r * c->stride + kr) * in.width +
                        col * c->stride + kc);
  } else {
    idx.resize(in.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  }
  return idx;
}

std::size_t NetworkSpec::max_fan_in() const {
  std::size_t m = 0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (const auto* c = std::get_if<ConvLayer>(&layers_[l]))
      m = std::max(m, shapes_[l].channels * c->kernel * c->kernel);
    else
      m = std::max(m, shapes_[l].size());
  }
  return m;
}

NetworkSpec network_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("network JSON: ") + e.what());
  }
  try {
    const auto& shape = j.at("input_shape");
    if (!shape.is_array() || shape.size() != 2) throw InputError("network JSON: input_shape must be [h,w]");
    std::vector<Layer> layers;
    for (const auto& lj : j.at("layers")) {
      const auto type = lj.at("type").get<std::string>();
      if (type == "conv") {
        ConvLayer c;
        c.kernel = lj.at("kernel").get<std::size_t>();
        c.stride = lj.value("stride", std::size_t{1});
        c.filters = lj.at("filters").get<std::vector<std::vector<double>>>();
        c.bias = lj.at("bias").get<std::vector<double>>();
        layers.emplace_back(std::move(c));
      } else if (type == "dense") {
        DenseLayer d;
        d.weights = lj.at("weights").get<std::vector<std::vector<double>>>();
        d.bias = lj.at("bias").get<std::vector<double>>();
        layers.emplace_back(std::move(d));
      } else {
        throw InputError("network JSON: unknown layer type '" + type + "'");
      }
    }
    return NetworkSpec(shape[0].get<std::size_t>(), shape[1].get<std::size_t>(), std::move(layers));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("network JSON: ") + e.what());
  }
}

NetworkSpec load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return network_from_json(ss.str());
}

std::string to_json(const NetworkSpec& spec) {
  nlohmann::json j;
  const auto in = spec.input_shape();
  j["input_shape"] = {in.height, in.width};
  auto layers = nlohmann::json::array();
  for (const auto& L : spec.layers()) {
    if (const auto* c = std::get_if<ConvLayer>(&L))
      layers.push_back({{"type", "conv"}, {"kernel", c->kernel}, {"stride", c->stride},
                        {"filters", c->filters}, {"bias", c->bias}});
    else {
      const auto& d = std::get<DenseLayer>(L);
      layers.push_back({{"type", "dense"}, {"weights", d.weights}, {"bias", d.bias}});
    }
  }
  j["layers"] = std::move(layers);
  return j.dump();
}

NetworkSpec integer_scaled(const NetworkSpec& spec, int digits) {
  auto scale = [digits](std::vector<double>& w, double& b) {
    const auto iw = integer_scale(w, b, digits);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = static_cast<double>(iw.weights[i]);
    b = static_cast<double>(iw.bias);
  };
  std::vector<Layer> layers = spec.layers();
  for (auto& L : layers) {
    if (auto* c = std::get_if<ConvLayer>(&L)) {
      for (std::size_t f = 0; f < c->filters.size(); ++f) scale(c->filters[f], c->bias[f]);
    } else {
      auto& d = std::get<DenseLayer>(L);
      for (std::size_t k = 0; k < d.weights.size(); ++k) scale(d.weights[k], d.bias[k]);
    }
  }
  const auto in = spec.input_shape();
  return NetworkSpec(in.height, in.width, std::move(layers));
}

std::vector<int> forward_all(const NetworkSpec& spec, const BitVector& image) {
  if (image.size() != spec.input_size())
    throw InputError("forward: image has " + std::to_string(image.size()) + " pixels, expected " +
                     std::to_string(spec.input_size()));
  std::vector<int> act(image.size());
  for (std::size_t i = 0; i < act.size(); ++i) act[i] = image[i];
  for (std::size_t l = 0; l < spec.layers().size(); ++l) {
    std::vector<int> next(spec.shapes()[l + 1].size());
    for (std::size_t j = 0; j < next.size(); ++j) {
      const auto f = spec.neuron(l, j);
      const auto idx = spec.fan_in(l, j);
      double s = f.bias;
      for (std::size_t i = 0; i < idx.size(); ++i) s += f.weights[i] * act[idx[i]];
      next[j] = s >= 0.0 ? 1 : -1;
    }
    act = std::move(next);
  }
  return act;
}

int forward(const NetworkSpec& spec, const BitVector& image) {
  const auto out = forward_all(spec, image);
  if (out.size() != 1) throw InputError("forward: network has " + std::to_string(out.size()) + " outputs");
  return out[0];
}

namespace {

std::string signal_name(std::size_t layer, std::size_t j) {
  return layer == 0 ? input_name(j) : "l" + std::to_string(layer - 1) + "_" + std::to_string(j);
}

// Distinct neuron functions of a layer: conv filters, or dense rows.
std::size_t unit_count(const NetworkSpec& spec, std::size_t l) {
  if (const auto* c = std::get_if<ConvLayer>(&spec.layers()[l])) return c->filters.size();
  return std::get<DenseLayer>(spec.layers()[l]).weights.size();
}

NeuronCompilation compile_unit(const NetworkSpec& spec, std::size_t l, std::size_t unit,
                               const NetworkCompileOptions& opts) {
  NeuronCompilation nc;
  nc.layer = l;
  nc.unit = unit;
  const auto positions = spec.shapes()[l + 1].height * spec.shapes()[l + 1].width;
  nc.function = spec.neuron(l, std::holds_alternative<ConvLayer>(spec.layers()[l]) ? unit * positions : unit);
  const auto n = nc.function.dimension();
  const auto sample = full_sample(nc.function, opts.cap);
  nc.epsilon = opts.epsilon.value_or(std::ldexp(1.0, -static_cast<int>(n)));
  try {
    nc.margin = margin(nc.function, opts.cap).rho;
  } catch (const TrivialFunction&) {
    nc.margin.reset();
  }
  BoostConfig cfg;
  cfg.epsilon = nc.epsilon;
  cfg.hypotheses = lifted_hypotheses(n);
  cfg.max_iterations = default_max_iterations(nc.epsilon, nc.margin);
  const std::string who = "layer " + std::to_string(l) + " unit " + std::to_string(unit);
  BoostResult res = [&] {
    try {
      return boost(sample, cfg);
    } catch (const WeakLearnerFailure& e) {
      std::ostringstream msg;
      msg << who << ": " << e.what();
      if (nc.margin) msg << " (margin " << *nc.margin << ")";
      throw WeakLearnerFailure(msg.str());
    }
  }();
  if (res.status != BoostStatus::Converged)
    throw Error(who + ": boosting did not reach the target entropy");
  nc.iterations = res.trace.size();
  nc.diagram = std::move(res.diagram);
  if (!opts.epsilon && training_error(nc.diagram, sample) != 0.0)
    throw Error(who + ": compiled diagram disagrees with the neuron");
  nc.circuit = dd_to_circuit(nc.diagram, {opts.simplify});
  return nc;
}

// Instance of a compiled unit with its inputs renamed to the signals it reads.
Circuit instantiate(const Circuit& unit, const std::vector<std::size_t>& fan, std::size_t layer) {
  Circuit c = unit;
  for (std::size_t i = 0; i < c.inputs.size(); ++i) c.inputs[i] = signal_name(layer, fan.at(i));
  return c;
}

}  // namespace

CompiledNetwork compile_network(const NetworkSpec& spec, const NetworkCompileOptions& opts) {
  if (spec.shapes().back().size() != 1)
    throw InputError("compile_network: network must have a single output");
  struct Job {
    std::size_t layer, unit;
  };
  std::vector<Job> jobs;
  for (std::size_t l = 0; l < spec.layers().size(); ++l)
    for (std::size_t u = 0; u < unit_count(spec, l); ++u) jobs.push_back({l, u});

  CompiledNetwork net;
  net.neurons.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      try {
        net.neurons[k] = compile_unit(spec, jobs[k].layer, jobs[k].unit, opts);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  const unsigned width = std::max(1u, std::min<unsigned>(opts.jobs, static_cast<unsigned>(jobs.size())));
  if (width == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < width; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<std::vector<NamedCircuit>> layers(spec.layers().size());
  std::size_t k = 0;
  for (std::size_t l = 0; l < spec.layers().size(); ++l) {
    const auto positions = spec.shapes()[l + 1].height * spec.shapes()[l + 1].width;
    const bool conv = std::holds_alternative<ConvLayer>(spec.layers()[l]);
    const auto units = unit_count(spec, l);
    for (std::size_t j = 0; j < spec.shapes()[l + 1].size(); ++j) {
      const auto& unit = net.neurons[k + (conv ? j / positions : j)];
      layers[l].push_back({signal_name(l + 1, j), instantiate(unit.circuit, spec.fan_in(l, j), l)});
    }
    k += units;
  }
  std::vector<std::string> primary;
  for (std::size_t i = 0; i < spec.input_size(); ++i) primary.push_back(input_name(i));
  net.circuit = compose_network(primary, layers, opts.simplify);

  if (!opts.check) return net;
  const auto n = spec.input_size();
  auto agree = [&](const BitVector& x) {
    if ((eval_circuit(net.circuit, x) ? 1 : -1) != forward(spec, x))
      throw Error("compile_network: composed circuit disagrees with the network on " + x.to_string());
  };
  if (n <= 16) {
    net.exhaustive_check = true;
    for (std::uint64_t i = 0; i < (std::uint64_t{1} << n); ++i) agree(BitVector::from_index(i, n));
    net.checked_inputs = std::size_t{1} << n;
  } else {
    for (const auto& x : opts.check_inputs) agree(x);
    net.checked_inputs = opts.check_inputs.size();
  }
  return net;
}

void write_bundle(const std::string& dir, const CompiledNetwork& net) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream out(fs::path(dir) / name);
    if (!out) throw InputError("cannot write " + (fs::path(dir) / name).string());
    out << text << '\n';
  };
  std::ostringstream csv;
  csv << std::setprecision(17);
  csv << "layer,unit,fan_in,size,width,depth,gates,margin,iterations,epsilon\n";
  for (const auto& nc : net.neurons) {
    write("neuron_" + std::to_string(nc.layer) + "_" + std::to_string(nc.unit) + ".json",
          to_json(nc.diagram));
    csv << nc.layer << ',' << nc.unit << ',' << nc.function.dimension() << ',' << size(nc.diagram)
        << ',' << width(nc.diagram) << ',' << depth(nc.diagram) << ',' << gate_count(nc.circuit) << ',';
    if (nc.margin) csv << *nc.margin;
    csv << ',' << nc.iterations << ',' << nc.epsilon << '\n';
  }
  write("circuit.json", to_json(net.circuit));
  std::ofstream out(fs::path(dir) / "stats.csv");
  out << csv.str();
}

Circuit read_bundle_circuit(const std::string& dir) {
  const auto path = std::filesystem::path(dir) / "circuit.json";
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return circuit_from_json(ss.str());
}

}  // namespace abdd
