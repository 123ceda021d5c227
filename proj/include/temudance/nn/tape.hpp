#pragma once

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

namespace temu::nn {

using Mat = Eigen::MatrixXd;

struct Parameter {
  std::string name;
  Mat value;
};

// Handle to a node recorded on a Tape.
struct Var {
  int id = -1;
};

using Gradients = std::unordered_map<const Parameter*, Mat>;

// Reverse-mode automatic differentiation over dense double matrices. A tape
// records one forward computation; backward() walks it once in reverse.
// Parameters enter through param(): their values are copied in and their
// gradients are returned keyed by address.
class Tape {
 public:
  Var constant(Mat value);
  Var param(const Parameter& p);

  const Mat& value(Var v) const { return nodes_[v.id].value; }
  double scalar(Var v) const { return nodes_[v.id].value(0, 0); }
  int size() const { return static_cast<int>(nodes_.size()); }

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);  // elementwise
  Var scale(Var a, double s);
  Var add_scalar(Var a, double s);
  Var add_row(Var a, Var row);  // a (n x m) + broadcast row (1 x m)
  Var mul_row(Var a, Var row);  // a (n x m) * broadcast row (1 x m)
  Var broadcast_rows(Var row, int n);
  Var tanh(Var a);
  Var gelu(Var a);  // tanh approximation
  Var silu(Var a);
  Var softmax_rows(Var a);
  Var layer_norm_rows(Var a, double eps = 1e-5);  // no affine part
  Var transpose(Var a);
  Var concat_cols(const std::vector<Var>& parts);
  Var select_cols(Var a, const std::vector<int>& cols);
  Var mean_rows(Var a);  // 1 x m
  Var sum(Var a);        // 1 x 1
  Var mean(Var a);       // 1 x 1
  Var square(Var a);
  Var row_diff(Var a);   // rows 1.. minus rows ..n-2
  Var select_rows(Var a, const std::vector<int>& rows);
  // sum(a .* weights) for a fixed weight matrix: injects an externally
  // computed gradient `weights` into a.
  Var dot_const(Var a, const Mat& weights);

  // Gradients of the 1x1 node `loss` with respect to every parameter used.
  Gradients backward(Var loss);

 private:
  struct Node {
    Mat value;
    Mat grad;
    std::vector<int> inputs;
    std::function<void(Tape&, Node&)> back;
    const Parameter* param = nullptr;
  };

  Var push(Mat value, std::vector<int> inputs, std::function<void(Tape&, Node&)> back);
  Mat& grad(int id);

  std::vector<Node> nodes_;
};

// Ordered, named parameter collection with JSON persistence and a digest.
class ParameterSet {
 public:
  ParameterSet() = default;
  ParameterSet(const ParameterSet& other);
  ParameterSet& operator=(const ParameterSet& other);
  ParameterSet(ParameterSet&&) = default;
  ParameterSet& operator=(ParameterSet&&) = default;

  Parameter& add(const std::string& name, Mat value);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  Parameter& operator[](std::size_t i) { return *params_[i]; }
  const Parameter& operator[](std::size_t i) const { return *params_[i]; }

  // SHA-256 over names, shapes and the exact bits of every value.
  std::string digest() const;

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

}  // namespace temu::nn
