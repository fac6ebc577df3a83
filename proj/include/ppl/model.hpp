#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "ppl/rng.hpp"

namespace ppl {

enum class Architecture { Linear, Mlp };

const char* to_string(Architecture arch);
Architecture architecture_from_string(const std::string& name);

struct Layer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

// Linear softmax classifier or a one-hidden-layer tanh network. The hidden
// layer is the representation, the final layer the classifier; freezing the
// representation during late training needs the two-layer form.
class Model {
 public:
  static Model linear(int in_dim, int num_classes, Rng& rng);
  static Model mlp(int in_dim, int hidden, int num_classes, Rng& rng);

  // batch of column vectors: x is in_dim x m, logits num_classes x m
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;

  Architecture architecture() const { return architecture_; }
  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }
  int in_dim() const { return static_cast<int>(layers_.front().weight.cols()); }
  int num_classes() const {
    return static_cast<int>(layers_.back().weight.rows());
  }
  bool all_finite() const;

  void save(const std::string& path) const;
  static Model load(const std::string& path);

 private:
  Model(Architecture arch, std::vector<Layer> layers)
      : architecture_(arch), layers_(std::move(layers)) {}

  Architecture architecture_;
  std::vector<Layer> layers_;
};

}  // namespace ppl
