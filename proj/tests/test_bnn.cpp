#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "abdd/bnn.hpp"
#include "abdd/error.hpp"
#include "support.hpp"

using namespace abdd;
using abdd::testing::Rng;

namespace {

const char* kSingle = R"({"input_shape":[1,3],"layers":[{"type":"dense","weights":[[1,0,0]],"bias":[0]}]})";

std::vector<BitVector> cube(std::size_t n) {
  std::vector<BitVector> v;
  for (std::uint64_t i = 0; i < (std::uint64_t{1} << n); ++i) v.push_back(BitVector::from_index(i, n));
  return v;
}

NetworkSpec conv_net(Rng& rng) {
  std::uniform_int_distribution<int> w(-3, 3);
  ConvLayer c;
  c.kernel = 2;
  c.stride = 2;
  for (int f = 0; f < 2; ++f) {
    std::vector<double> filt;
    for (int i = 0; i < 4; ++i) filt.push_back(w(rng));
    c.filters.push_back(filt);
    c.bias.push_back(w(rng));
  }
  DenseLayer d;
  std::vector<double> row;
  for (int i = 0; i < 8; ++i) row.push_back(w(rng));
  d.weights.push_back(row);
  d.bias.push_back(w(rng));
  return NetworkSpec(4, 4, {c, d});
}

}  // namespace

TEST(LoadNetwork, SingleDenseNeuron) {
  const auto spec = network_from_json(kSingle);
  EXPECT_EQ(spec.layers().size(), 1u);
  EXPECT_EQ(spec.input_size(), 3u);
  EXPECT_EQ(spec.shapes().back().size(), 1u);
  EXPECT_EQ(spec.neuron(0, 0).weights, (std::vector<double>{1, 0, 0}));
}

TEST(LoadNetwork, ConvShapes) {
  ConvLayer c;
  c.kernel = 3;
  c.stride = 2;
  c.filters = {std::vector<double>(9, 1.0)};
  c.bias = {0};
  const NetworkSpec a(4, 4, {c});
  EXPECT_EQ(a.shapes()[1], (Shape{1, 1, 1}));  // floor((4-3)/2)+1 = 1 per axis

  c.kernel = 2;
  c.filters = {std::vector<double>(4, 1.0), std::vector<double>(4, -1.0)};
  c.bias = {0, 0};
  const NetworkSpec b(4, 4, {c});
  EXPECT_EQ(b.shapes()[1], (Shape{2, 2, 2}));
  // Filter 1 at position (1,0) reads rows 2-3, cols 0-1.
  EXPECT_EQ(b.fan_in(0, 4 + 2), (std::vector<std::size_t>{8, 9, 12, 13}));
  EXPECT_EQ(b.neuron(0, 6).weights, c.filters[1]);
  EXPECT_EQ(b.max_fan_in(), 4u);

  // Second conv layer reads both channels.
  ConvLayer c2;
  c2.kernel = 2;
  c2.stride = 1;
  c2.filters = {std::vector<double>(8, 1.0)};
  c2.bias = {0};
  const NetworkSpec d(4, 4, {c, c2});
  EXPECT_EQ(d.shapes()[2], (Shape{1, 1, 1}));
  EXPECT_EQ(d.fan_in(1, 0), (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7}));
}

TEST(LoadNetwork, Errors) {
  EXPECT_THROW(network_from_json("{"), InputError);
  EXPECT_THROW(network_from_json(R"({"input_shape":[1,3],"layers":[]})"), InputError);
  EXPECT_THROW(network_from_json(R"({"input_shape":[1,3],"layers":[{"type":"dense","weights":[[1,0]],"bias":[0]}]})"),
               InputError);
  EXPECT_THROW(network_from_json(R"({"input_shape":[1,3],"layers":[{"type":"dense","weights":[[1,0,0]],"bias":[]}]})"),
               InputError);
  EXPECT_THROW(network_from_json(R"({"input_shape":[2,2],"layers":[{"type":"conv","kernel":3,"filters":[[1,1,1,1,1,1,1,1,1]],"bias":[0]}]})"),
               InputError);
  EXPECT_THROW(network_from_json(R"({"input_shape":[1,1],"layers":[{"type":"pool"}]})"), InputError);
  EXPECT_THROW(network_from_json(R"({"input_shape":[1,1],"layers":[{"type":"dense","weights":[[1e999]],"bias":[0]}]})"),
               InputError);
  EXPECT_THROW(load_network("/nonexistent/net.json"), InputError);
}

TEST(LoadNetwork, JsonRoundTrip) {
  Rng rng(40);
  const auto spec = conv_net(rng);
  EXPECT_EQ(to_json(network_from_json(to_json(spec))), to_json(spec));
}

TEST(Forward, Examples) {
  const auto spec = network_from_json(kSingle);
  for (const auto& x : cube(3)) EXPECT_EQ(forward(spec, x), x[0]);
  const NetworkSpec zero(1, 2, {DenseLayer{{{0, 0}}, {0}}});
  for (const auto& x : cube(2)) EXPECT_EQ(forward(zero, x), 1);
  EXPECT_THROW(forward(spec, BitVector({1})), InputError);
  const NetworkSpec two(1, 2, {DenseLayer{{{1, 0}, {0, 1}}, {0, 0}}});
  EXPECT_THROW(forward(two, BitVector({1, 1})), InputError);
  EXPECT_EQ(forward_all(two, BitVector({1, -1})), (std::vector<int>{1, -1}));
}

TEST(Compile, SingleNeuronEqualsLtf) {
  const auto spec = network_from_json(kSingle);
  const auto net = compile_network(spec);
  EXPECT_TRUE(net.exhaustive_check);
  EXPECT_EQ(net.checked_inputs, 8u);
  ASSERT_EQ(net.neurons.size(), 1u);
  for (const auto& x : cube(3)) EXPECT_EQ(eval_circuit(net.circuit, x), x[0] > 0);
}

TEST(Compile, TwoLayerSmallFanIn) {
  // Two 3-input neurons (disjoint halves of a 6-pixel image) feeding a 2-input neuron.
  DenseLayer l1{{{1, 1, 1, 0, 0, 0}, {0, 0, 0, 1, -1, 1}}, {0, -1}};
  DenseLayer l2{{{1, 1}}, {-1}};
  const NetworkSpec spec(2, 3, {l1, l2});
  const auto net = compile_network(spec);
  for (const auto& x : cube(6)) {
    const int h0 = x[0] + x[1] + x[2] >= 0 ? 1 : -1;
    const int h1 = x[3] - x[4] + x[5] - 1 >= 0 ? 1 : -1;
    const bool want = h0 + h1 - 1 >= 0;
    ASSERT_EQ(eval_circuit(net.circuit, x), want);
  }
}

TEST(Compile, RandomTwoLayerAtNine) {
  Rng rng(41);
  for (int trial = 0; trial < 3; ++trial) {
    const auto spec = abdd::testing::random_two_layer(rng, 3, 3, 3);
    const auto net = compile_network(spec);
    for (const auto& x : cube(9)) ASSERT_EQ(eval_circuit(net.circuit, x), forward(spec, x) > 0);
  }
}

TEST(Compile, ConvFiltersCompiledOnce) {
  Rng rng(42);
  const auto spec = conv_net(rng);
  const auto net = compile_network(spec);
  EXPECT_EQ(net.neurons.size(), 3u);  // two filters and one dense neuron
  EXPECT_EQ(net.checked_inputs, 65536u);
  for (const auto& x : cube(16)) ASSERT_EQ(eval_circuit(net.circuit, x), forward(spec, x) > 0);
}

TEST(Compile, DeterministicAndParallel) {
  Rng rng(43);
  const auto spec = conv_net(rng);
  NetworkCompileOptions par;
  par.jobs = 4;
  EXPECT_EQ(to_json(compile_network(spec).circuit), to_json(compile_network(spec, par).circuit));
}

TEST(Compile, Errors) {
  const NetworkSpec big(1, 17, {DenseLayer{{std::vector<double>(17, 1.0)}, {0}}});
  EXPECT_THROW(compile_network(big), ResourceError);
  const NetworkSpec two(1, 2, {DenseLayer{{{1, 0}, {0, 1}}, {0, 0}}});
  EXPECT_THROW(compile_network(two), InputError);
}

TEST(Compile, SampledCheckAboveSixteenInputs) {
  // 6x3 image, kernel-3 stride-3 conv gives two positions of fan-in 9.
  ConvLayer c{3, 3, {{1, -1, 1, 2, 0, -1, 1, 1, -2}}, {1}};
  DenseLayer d{{{1, 1}}, {0}};
  const NetworkSpec spec(6, 3, {c, d});
  Rng rng(44);
  NetworkCompileOptions opts;
  for (int i = 0; i < 2000; ++i) opts.check_inputs.push_back(abdd::testing::random_point(rng, 18));
  const auto net = compile_network(spec, opts);
  EXPECT_FALSE(net.exhaustive_check);
  EXPECT_EQ(net.checked_inputs, 2000u);
  EXPECT_EQ(net.neurons.size(), 2u);
}

TEST(Compile, IntegerScaledNetwork) {
  const NetworkSpec spec(1, 3, {DenseLayer{{{0.5, -0.25, 0.3}}, {0.1}}});
  const auto scaled = integer_scaled(spec, 2);
  const auto& w = std::get<DenseLayer>(scaled.layers()[0]).weights[0];
  EXPECT_EQ(w[0], 100);
  EXPECT_EQ(w[1], -50);
  for (const auto& x : cube(3)) EXPECT_EQ(forward(scaled, x), forward(spec, x));
}

TEST(Bundle, WriteAndRead) {
  Rng rng(45);
  const auto spec = conv_net(rng);
  const auto net = compile_network(spec);
  const auto dir = std::filesystem::temp_directory_path() / "abdd_bundle_test";
  std::filesystem::remove_all(dir);
  write_bundle(dir.string(), net);
  EXPECT_TRUE(std::filesystem::exists(dir / "neuron_0_0.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "neuron_0_1.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "neuron_1_0.json"));
  std::ifstream csv(dir / "stats.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "layer,unit,fan_in,size,width,depth,gates,margin,iterations,epsilon");
  const auto back = read_bundle_circuit(dir.string());
  EXPECT_EQ(to_json(back), to_json(net.circuit));
  std::filesystem::remove_all(dir);
}
