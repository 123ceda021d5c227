#include "temudance/nn/tape.hpp"

#include <cmath>
#include <numbers>

#include "temudance/common/digest.hpp"
#include "temudance/common/error.hpp"

namespace temu::nn {

namespace {

void require_shape(const Mat& a, const Mat& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kDimension, std::string(op) + ": shape " + std::to_string(a.rows()) + "x" +
                                           std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                                           std::to_string(b.cols()));
  }
}

void require_row(const Mat& a, const Mat& row, const char* op) {
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw Error(ErrorCode::kDimension, std::string(op) + ": expected a 1x" + std::to_string(a.cols()) + " row");
  }
}

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;

}  // namespace

Var Tape::push(Mat value, std::vector<int> inputs, std::function<void(Tape&, Node&)> back) {
  Node n;
  n.value = std::move(value);
  n.inputs = std::move(inputs);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Mat& Tape::grad(int id) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Var Tape::constant(Mat value) { return push(std::move(value), {}, nullptr); }

Var Tape::param(const Parameter& p) {
  Var v = push(p.value, {}, nullptr);
  nodes_[v.id].param = &p;
  return v;
}

Var Tape::matmul(Var a, Var b) {
  const Mat& av = value(a);
  const Mat& bv = value(b);
  if (av.cols() != bv.rows()) {
    throw Error(ErrorCode::kDimension, "matmul: inner dimensions " + std::to_string(av.cols()) + " and " +
                                           std::to_string(bv.rows()) + " differ");
  }
  return push(av * bv, {a.id, b.id}, [a, b](Tape& t, Node& n) {
    t.grad(a.id).noalias() += n.grad * t.value(b).transpose();
    t.grad(b.id).noalias() += t.value(a).transpose() * n.grad;
  });
}

Var Tape::add(Var a, Var b) {
  require_shape(value(a), value(b), "add");
  return push(value(a) + value(b), {a.id, b.id}, [a, b](Tape& t, Node& n) {
    t.grad(a.id) += n.grad;
    t.grad(b.id) += n.grad;
  });
}

Var Tape::sub(Var a, Var b) {
  require_shape(value(a), value(b), "sub");
  return push(value(a) - value(b), {a.id, b.id}, [a, b](Tape& t, Node& n) {
    t.grad(a.id) += n.grad;
    t.grad(b.id) -= n.grad;
  });
}

Var Tape::mul(Var a, Var b) {
  require_shape(value(a), value(b), "mul");
  return push(value(a).cwiseProduct(value(b)), {a.id, b.id}, [a, b](Tape& t, Node& n) {
    t.grad(a.id) += n.grad.cwiseProduct(t.value(b));
    t.grad(b.id) += n.grad.cwiseProduct(t.value(a));
  });
}

Var Tape::scale(Var a, double s) {
  return push(value(a) * s, {a.id}, [a, s](Tape& t, Node& n) { t.grad(a.id) += n.grad * s; });
}

Var Tape::add_scalar(Var a, double s) {
  return push(value(a).array() + s, {a.id}, [a](Tape& t, Node& n) { t.grad(a.id) += n.grad; });
}

Var Tape::add_row(Var a, Var row) {
  require_row(value(a), value(row), "add_row");
  Mat out = value(a).rowwise() + value(row).row(0);
  return push(std::move(out), {a.id, row.id}, [a, row](Tape& t, Node& n) {
    t.grad(a.id) += n.grad;
    t.grad(row.id) += n.grad.colwise().sum();
  });
}

Var Tape::mul_row(Var a, Var row) {
  require_row(value(a), value(row), "mul_row");
  Mat out = value(a).array().rowwise() * value(row).row(0).array();
  return push(std::move(out), {a.id, row.id}, [a, row](Tape& t, Node& n) {
    t.grad(a.id).array() += n.grad.array().rowwise() * t.value(row).row(0).array();
    t.grad(row.id) += n.grad.cwiseProduct(t.value(a)).colwise().sum();
  });
}

Var Tape::broadcast_rows(Var row, int n) {
  if (value(row).rows() != 1) throw Error(ErrorCode::kDimension, "broadcast_rows: expected a single row");
  Mat out = value(row).replicate(n, 1);
  return push(std::move(out), {row.id}, [row](Tape& t, Node& nd) { t.grad(row.id) += nd.grad.colwise().sum(); });
}

Var Tape::tanh(Var a) {
  Mat out = value(a).array().tanh();
  return push(std::move(out), {a.id}, [a](Tape& t, Node& n) {
    t.grad(a.id).array() += n.grad.array() * (1.0 - n.value.array().square());
  });
}

Var Tape::gelu(Var a) {
  const Mat& x = value(a);
  Mat out = 0.5 * x.array() * (1.0 + (kGeluC * (x.array() + kGeluA * x.array().cube())).tanh());
  return push(std::move(out), {a.id}, [a](Tape& t, Node& n) {
    const auto x = t.value(a).array();
    const Eigen::ArrayXXd th = (kGeluC * (x + kGeluA * x.cube())).tanh();
    const Eigen::ArrayXXd d = 0.5 * (1.0 + th) + 0.5 * x * (1.0 - th.square()) * kGeluC * (1.0 + 3.0 * kGeluA * x.square());
    t.grad(a.id).array() += n.grad.array() * d;
  });
}

Var Tape::silu(Var a) {
  const Eigen::ArrayXXd sig = 1.0 / (1.0 + (-value(a).array()).exp());
  Mat out = value(a).array() * sig;
  return push(std::move(out), {a.id}, [a](Tape& t, Node& n) {
    const auto x = t.value(a).array();
    const Eigen::ArrayXXd s = 1.0 / (1.0 + (-x).exp());
    t.grad(a.id).array() += n.grad.array() * (s * (1.0 + x * (1.0 - s)));
  });
}

Var Tape::softmax_rows(Var a) {
  Mat out = value(a);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double m = out.row(r).maxCoeff();
    out.row(r) = (out.row(r).array() - m).exp();
    out.row(r) /= out.row(r).sum();
  }
  return push(std::move(out), {a.id}, [a](Tape& t, Node& n) {
    const Eigen::VectorXd dots = n.grad.cwiseProduct(n.value).rowwise().sum();
    t.grad(a.id).array() += n.value.array() * (n.grad.colwise() - dots).array();
  });
}

Var Tape::layer_norm_rows(Var a, double eps) {
  const Mat& x = value(a);
  const Eigen::Index m = x.cols();
  const Eigen::VectorXd mu = x.rowwise().mean();
  const Mat centered = x.colwise() - mu;
  const Eigen::VectorXd inv = ((centered.array().square().rowwise().sum() / static_cast<double>(m)) + eps).rsqrt();
  Mat out = centered.array().colwise() * inv.array();
  return push(std::move(out), {a.id}, [a, inv](Tape& t, Node& n) {
    const Mat& xhat = n.value;
    const Eigen::VectorXd mean_g = n.grad.rowwise().mean();
    const Eigen::VectorXd mean_gx = n.grad.cwiseProduct(xhat).rowwise().mean();
    Mat d = n.grad.colwise() - mean_g;
    d.array() -= xhat.array().colwise() * mean_gx.array();
    t.grad(a.id).array() += d.array().colwise() * inv.array();
  });
}

Var Tape::transpose(Var a) {
  return push(value(a).transpose(), {a.id}, [a](Tape& t, Node& n) { t.grad(a.id) += n.grad.transpose(); });
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw Error(ErrorCode::kDimension, "concat_cols: no inputs");
  const Eigen::Index rows = value(parts[0]).rows();
  Eigen::Index cols = 0;
  std::vector<int> ids;
  for (Var p : parts) {
    if (value(p).rows() != rows) throw Error(ErrorCode::kDimension, "concat_cols: row counts differ");
    cols += value(p).cols();
    ids.push_back(p.id);
  }
  Mat out(rows, cols);
  Eigen::Index c = 0;
  for (Var p : parts) {
    out.middleCols(c, value(p).cols()) = value(p);
    c += value(p).cols();
  }
  return push(std::move(out), ids, [parts](Tape& t, Node& n) {
    Eigen::Index c = 0;
    for (Var p : parts) {
      const Eigen::Index w = t.value(p).cols();
      t.grad(p.id) += n.grad.middleCols(c, w);
      c += w;
    }
  });
}

Var Tape::select_cols(Var a, const std::vector<int>& cols) {
  const Mat& x = value(a);
  Mat out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] < 0 || cols[i] >= x.cols()) throw Error(ErrorCode::kDimension, "select_cols: index out of range");
    out.col(static_cast<Eigen::Index>(i)) = x.col(cols[i]);
  }
  return push(std::move(out), {a.id}, [a, cols](Tape& t, Node& n) {
    Mat& g = t.grad(a.id);
    for (std::size_t i = 0; i < cols.size(); ++i) g.col(cols[i]) += n.grad.col(static_cast<Eigen::Index>(i));
  });
}

Var Tape::select_rows(Var a, const std::vector<int>& rows) {
  const Mat& x = value(a);
  Mat out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= x.rows()) throw Error(ErrorCode::kDimension, "select_rows: index out of range");
    out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  }
  return push(std::move(out), {a.id}, [a, rows](Tape& t, Node& n) {
    Mat& g = t.grad(a.id);
    for (std::size_t i = 0; i < rows.size(); ++i) g.row(rows[i]) += n.grad.row(static_cast<Eigen::Index>(i));
  });
}

Var Tape::mean_rows(Var a) {
  const Eigen::Index n_rows = value(a).rows();
  return push(value(a).colwise().mean(), {a.id}, [a, n_rows](Tape& t, Node& n) {
    t.grad(a.id).rowwise() += n.grad.row(0) / static_cast<double>(n_rows);
  });
}

Var Tape::sum(Var a) {
  Mat out(1, 1);
  out(0, 0) = value(a).sum();
  return push(std::move(out), {a.id}, [a](Tape& t, Node& n) { t.grad(a.id).array() += n.grad(0, 0); });
}

Var Tape::mean(Var a) {
  const double count = static_cast<double>(value(a).size());
  Mat out(1, 1);
  out(0, 0) = value(a).mean();
  return push(std::move(out), {a.id}, [a, count](Tape& t, Node& n) { t.grad(a.id).array() += n.grad(0, 0) / count; });
}

Var Tape::square(Var a) {
  return push(value(a).array().square(), {a.id}, [a](Tape& t, Node& n) {
    t.grad(a.id) += 2.0 * n.grad.cwiseProduct(t.value(a));
  });
}

Var Tape::row_diff(Var a) {
  const Mat& x = value(a);
  if (x.rows() < 2) throw Error(ErrorCode::kDimension, "row_diff: needs at least 2 rows");
  const Eigen::Index k = x.rows() - 1;
  Mat out = x.bottomRows(k) - x.topRows(k);
  return push(std::move(out), {a.id}, [a, k](Tape& t, Node& n) {
    Mat& g = t.grad(a.id);
    g.bottomRows(k) += n.grad;
    g.topRows(k) -= n.grad;
  });
}

Var Tape::dot_const(Var a, const Mat& weights) {
  require_shape(value(a), weights, "dot_const");
  Mat out(1, 1);
  out(0, 0) = value(a).cwiseProduct(weights).sum();
  return push(std::move(out), {a.id}, [a, weights](Tape& t, Node& n) { t.grad(a.id) += n.grad(0, 0) * weights; });
}

Gradients Tape::backward(Var loss) {
  if (value(loss).rows() != 1 || value(loss).cols() != 1) {
    throw Error(ErrorCode::kDimension, "backward: loss must be a 1x1 node");
  }
  for (Node& n : nodes_) n.grad.resize(0, 0);
  grad(loss.id)(0, 0) = 1.0;
  Gradients out;
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0) continue;
    if (n.back) n.back(*this, n);
    if (n.param != nullptr) {
      auto it = out.find(n.param);
      if (it == out.end()) {
        out.emplace(n.param, n.grad);
      } else {
        it->second += n.grad;
      }
    }
  }
  return out;
}

ParameterSet::ParameterSet(const ParameterSet& other) {
  for (const auto& p : other.params_) params_.push_back(std::make_unique<Parameter>(*p));
}

ParameterSet& ParameterSet::operator=(const ParameterSet& other) {
  if (this != &other) {
    params_.clear();
    for (const auto& p : other.params_) params_.push_back(std::make_unique<Parameter>(*p));
  }
  return *this;
}

Parameter& ParameterSet::add(const std::string& name, Mat value) {
  if (contains(name)) throw Error(ErrorCode::kInvalidArgument, "duplicate parameter '" + name + "'");
  params_.push_back(std::make_unique<Parameter>(Parameter{name, std::move(value)}));
  return *params_.back();
}

bool ParameterSet::contains(const std::string& name) const {
  for (const auto& p : params_) {
    if (p->name == name) return true;
  }
  return false;
}

Parameter& ParameterSet::get(const std::string& name) {
  for (auto& p : params_) {
    if (p->name == name) return *p;
  }
  throw Error(ErrorCode::kInvalidArgument, "no parameter named '" + name + "'");
}

const Parameter& ParameterSet::get(const std::string& name) const {
  return const_cast<ParameterSet*>(this)->get(name);
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p->value.size());
  return n;
}

std::string ParameterSet::digest() const {
  Sha256 h;
  for (const auto& p : params_) {
    h.update(p->name);
    h.update(":" + std::to_string(p->value.rows()) + "x" + std::to_string(p->value.cols()) + ";");
    h.update(std::span<const double>(p->value.data(), static_cast<std::size_t>(p->value.size())));
  }
  return h.finish();
}

}  // namespace temu::nn
