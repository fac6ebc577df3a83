#include "ppl/model.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace ppl {

const char* to_string(Architecture arch) {
  return arch == Architecture::Linear ? "linear" : "mlp";
}

Architecture architecture_from_string(const std::string& name) {
  if (name == "linear") return Architecture::Linear;
  if (name == "mlp") return Architecture::Mlp;
  throw std::invalid_argument("unknown model architecture '" + name +
                              "' (expected linear|mlp)");
}

namespace {

Layer init_layer(int out, int in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  Layer layer;
  layer.weight.resize(out, in);
  for (int i = 0; i < out; ++i) {
    for (int j = 0; j < in; ++j) {
      layer.weight(i, j) = rng.uniform(-bound, bound);
    }
  }
  layer.bias = Eigen::VectorXd::Zero(out);
  return layer;
}

}  // namespace

Model Model::linear(int in_dim, int num_classes, Rng& rng) {
  if (in_dim < 1 || num_classes < 2) {
    throw std::invalid_argument("linear model needs in_dim >= 1, classes >= 2");
  }
  std::vector<Layer> layers;
  layers.push_back(init_layer(num_classes, in_dim, rng));
  return Model(Architecture::Linear, std::move(layers));
}

Model Model::mlp(int in_dim, int hidden, int num_classes, Rng& rng) {
  if (in_dim < 1 || hidden < 1 || num_classes < 2) {
    throw std::invalid_argument(
        "mlp needs in_dim >= 1, hidden >= 1, classes >= 2");
  }
  std::vector<Layer> layers;
  layers.push_back(init_layer(hidden, in_dim, rng));
  layers.push_back(init_layer(num_classes, hidden, rng));
  return Model(Architecture::Mlp, std::move(layers));
}

Eigen::MatrixXd Model::forward(const Eigen::MatrixXd& x) const {
  if (x.rows() != in_dim()) {
    throw std::invalid_argument("input dimension mismatch");
  }
  if (architecture_ == Architecture::Linear) {
    return (layers_[0].weight * x).colwise() + layers_[0].bias;
  }
  const Eigen::MatrixXd h =
      ((layers_[0].weight * x).colwise() + layers_[0].bias).array().tanh();
  return (layers_[1].weight * h).colwise() + layers_[1].bias;
}

bool Model::all_finite() const {
  for (const Layer& layer : layers_) {
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) return false;
  }
  return true;
}

void Model::save(const std::string& path) const {
  nlohmann::json j;
  j["architecture"] = to_string(architecture_);
  j["layers"] = nlohmann::json::array();
  for (const Layer& layer : layers_) {
    nlohmann::json jl;
    jl["rows"] = layer.weight.rows();
    jl["cols"] = layer.weight.cols();
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(layer.weight.size()));
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
      for (Eigen::Index k = 0; k < layer.weight.cols(); ++k) {
        w.push_back(layer.weight(i, k));
      }
    }
    jl["weight"] = std::move(w);
    jl["bias"] = std::vector<double>(layer.bias.data(),
                                     layer.bias.data() + layer.bias.size());
    j["layers"].push_back(std::move(jl));
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

Model Model::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  nlohmann::json j;
  in >> j;
  const Architecture arch =
      architecture_from_string(j.at("architecture").get<std::string>());
  std::vector<Layer> layers;
  for (const auto& jl : j.at("layers")) {
    Layer layer;
    const auto rows = jl.at("rows").get<Eigen::Index>();
    const auto cols = jl.at("cols").get<Eigen::Index>();
    const auto w = jl.at("weight").get<std::vector<double>>();
    const auto b = jl.at("bias").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(w.size()) != rows * cols ||
        static_cast<Eigen::Index>(b.size()) != rows) {
      throw std::runtime_error("model file '" + path + "' is inconsistent");
    }
    layer.weight.resize(rows, cols);
    std::size_t idx = 0;
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index k = 0; k < cols; ++k) {
        layer.weight(i, k) = w[idx++];
      }
    }
    layer.bias =
        Eigen::Map<const Eigen::VectorXd>(b.data(),
                                          static_cast<Eigen::Index>(b.size()));
    layers.push_back(std::move(layer));
  }
  const std::size_t expected = arch == Architecture::Linear ? 1 : 2;
  if (layers.size() != expected) {
    throw std::runtime_error("model file '" + path +
                             "' has the wrong layer count");
  }
  return Model(arch, std::move(layers));
}

}  // namespace ppl
