#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "abdd/boosting.hpp"
#include "abdd/circuit.hpp"
#include "abdd/data.hpp"
#include "abdd/diagram.hpp"
#include "abdd/ltf.hpp"

namespace abdd {

/// Feature map shape: channels x height x width, flattened channel-major.
struct Shape {
  std::size_t channels = 1;
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t size() const noexcept { return channels * height * width; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Each filter holds in_channels*kernel*kernel weights (channel, row, col).
struct ConvLayer {
  std::size_t kernel = 3;
  std::size_t stride = 1;
  std::vector<std::vector<double>> filters;
  std::vector<double> bias;
};

/// weights[j] reads the flattened output of the previous layer.
struct DenseLayer {
  std::vector<std::vector<double>> weights;
  std::vector<double> bias;
};

using Layer = std::variant<ConvLayer, DenseLayer>;

/// A binarized network with step activations. Shapes are derived on load.
class NetworkSpec {
 public:
  NetworkSpec(std::size_t height, std::size_t width, std::vector<Layer> layers);

  Shape input_shape() const noexcept { return shapes_.front(); }
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  /// shapes()[l] is the input of layer l; shapes().back() the network output.
  const std::vector<Shape>& shapes() const noexcept { return shapes_; }
  std::size_t input_size() const noexcept { return shapes_.front().size(); }

  /// Neuron j of layer l as an LTF over its fan-in, plus the flattened
  /// indices (into layer l's input) it reads.
  ThresholdFunction neuron(std::size_t layer, std::size_t j) const;
  std::vector<std::size_t> fan_in(std::size_t layer, std::size_t j) const;
  std::size_t max_fan_in() const;

 private:
  std::vector<Layer> layers_;
  std::vector<Shape> shapes_;
};

NetworkSpec network_from_json(const std::string& text);
NetworkSpec load_network(const std::string& path);
std::string to_json(const NetworkSpec& spec);

/// Replaces every neuron's weights by integer_scale(w, b, digits).
NetworkSpec integer_scaled(const NetworkSpec& spec, int digits);

/// Layer-wise step-activation forward pass; output +-1.
int forward(const NetworkSpec& spec, const BitVector& image);
/// Full output vector of the last layer.
std::vector<int> forward_all(const NetworkSpec& spec, const BitVector& image);

/// One distinct neuron function (a conv filter is compiled once and
/// instantiated at every position).
struct NeuronCompilation {
  std::size_t layer = 0;
  std::size_t unit = 0;  // filter index (conv) or neuron index (dense)
  ThresholdFunction function;
  Diagram diagram{0};
  Circuit circuit;  // over x0..x{fan_in-1}
  std::optional<double> margin;
  std::size_t iterations = 0;
  double epsilon = 0.0;
};

struct CompiledNetwork {
  std::vector<NeuronCompilation> neurons;
  Circuit circuit;  // over x0..x{input_size-1}
  std::size_t checked_inputs = 0;
  bool exhaustive_check = false;
};

struct NetworkCompileOptions {
  /// Per-neuron precision; nullopt means 2^-n for fan-in n.
  std::optional<double> epsilon;
  std::size_t cap = kDefaultDimensionCap;
  unsigned jobs = 1;
  bool simplify = true;
  /// Random inputs for the equivalence check above 16 input bits; the library
  /// draws them from a fixed-seed generator passed in by the caller.
  std::vector<BitVector> check_inputs;
  bool check = true;
};

CompiledNetwork compile_network(const NetworkSpec& spec, const NetworkCompileOptions& opts = {});

/// Writes neuron_<layer>_<unit>.json diagrams, circuit.json and stats.csv.
void write_bundle(const std::string& dir, const CompiledNetwork& net);
Circuit read_bundle_circuit(const std::string& dir);

}  // namespace abdd
