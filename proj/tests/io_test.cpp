#include "padnn/io.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "padnn/rng.hpp"

using namespace padnn;

namespace {

const FieldConfig kF3(3, Characteristic::CharZero);

}  // namespace

TEST(TestFunctionJson, RoundTripValueExact) {
  SplitMix64 rng(110);
  std::vector<double> v(9);
  for (double& x : v) x = rng.next_in(-1e3, 1e3);
  v[0] = 1.0 / 3.0;
  v[1] = 5e-324;  // smallest denormal
  v[2] = -0.0;
  const TestFunction phi(kF3, 2, v);
  const TestFunction back = test_function_from_json(nlohmann::json::parse(to_json(phi).dump()));
  EXPECT_TRUE(back.cfg == phi.cfg);
  EXPECT_EQ(back.level, phi.level);
  for (size_t i = 0; i < v.size(); ++i) EXPECT_EQ(back.coeffs[i], phi.coeffs[i]);
}

TEST(TestFunctionJson, SchemaFields) {
  const nlohmann::json j = to_json(constant_function(kF3, 1, 2.0));
  EXPECT_EQ(j.at("p"), 3);
  EXPECT_EQ(j.at("char"), "zero");
  EXPECT_EQ(j.at("level"), 1);
  EXPECT_EQ(j.at("coeffs").size(), 3u);
}

TEST(NetworkJson, RoundTripValueExact) {
  const FieldConfig cfg(2, Characteristic::PositiveChar);
  const Network net = random_network(cfg, 1, 2, 2.0, LayerKind::Conv, 77);
  const Network back = network_from_json(nlohmann::json::parse(to_json(net).dump()));
  EXPECT_TRUE(back.cfg == net.cfg);
  EXPECT_EQ(back.input_level, net.input_level);
  EXPECT_EQ(back.depth, net.depth);
  EXPECT_EQ(back.activation.M, net.activation.M);
  ASSERT_EQ(back.layers.size(), net.layers.size());
  for (size_t i = 0; i < net.layers.size(); ++i) {
    EXPECT_EQ(back.layers[i].kind, net.layers[i].kind);
    EXPECT_EQ(back.layers[i].weights, net.layers[i].weights);
    EXPECT_EQ(back.layers[i].bias, net.layers[i].bias);
  }
}

TEST(NetworkJson, BadKindRejected) {
  const FieldConfig cfg(2, Characteristic::PositiveChar);
  nlohmann::json j = to_json(random_network(cfg, 1, 1, 1.0, LayerKind::Dense, 1));
  j["layers"][0]["kind"] = "sparse";
  EXPECT_THROW(network_from_json(j), std::invalid_argument);
}

TEST(BundleJson, RoundTrip) {
  const FieldConfig cfg(2, Characteristic::CharZero);
  NetworkBundle bundle;
  bundle.components.push_back(BundleComponent{AffineChart(make_index(cfg, {1}), 1),
                                              random_network(cfg, 1, 1, 1.5, LayerKind::Dense, 3)});
  bundle.components.push_back(BundleComponent{AffineChart(make_index(cfg, {0, 1}), 2),
                                              random_network(cfg, 1, 2, 1.5, LayerKind::Conv, 4)});
  const NetworkBundle back = bundle_from_json(nlohmann::json::parse(to_json(bundle).dump()));
  ASSERT_EQ(back.components.size(), 2u);
  EXPECT_EQ(back.components[0].chart.center.digits, (std::vector<uint8_t>{1}));
  EXPECT_EQ(back.components[1].chart.scale_exponent, 2);
  EXPECT_EQ(back.components[1].net.layers[0].weights, bundle.components[1].net.layers[0].weights);
}

TEST(Characteristics, StringForms) {
  EXPECT_EQ(to_string(Characteristic::PositiveChar), "pos");
  EXPECT_EQ(characteristic_from_string("zero"), Characteristic::CharZero);
  EXPECT_THROW(characteristic_from_string("mixed"), std::invalid_argument);
}

TEST(Csv, CostLogFormat) {
  const std::string csv = cost_log_csv({0.5, 1.0 / 3.0});
  EXPECT_EQ(csv, "epoch,cost\n1,0.5\n2,0.33333333333333331\n");
}

TEST(Csv, WalshCoefficientsFormat) {
  const FieldConfig cfg(2, Characteristic::PositiveChar);
  std::vector<WalshCoefficient> coeffs{
      {trivial_character(), {1.0, 0.0}},
      {make_character(cfg, make_index(cfg, {1})), {0.0, -0.5}}};
  const std::string csv = walsh_coeffs_csv(coeffs);
  EXPECT_EQ(csv, "level,a_digits,re,im,modulus\n0,,1,0,1\n1,1,0,-0.5,0.5\n");
}

TEST(Files, SaveAndLoadJson) {
  const std::string path = ::testing::TempDir() + "/padnn_io_test.json";
  const nlohmann::json j = to_json(constant_function(kF3, 2, 0.25));
  save_json(path, j);
  EXPECT_EQ(load_json(path), j);
  EXPECT_THROW(load_json(path + ".missing"), std::runtime_error);
}
