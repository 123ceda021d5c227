#include "temudance/nn/optim.hpp"

#include <algorithm>
#include <cmath>

#include "temudance/common/error.hpp"

namespace temu::nn {

void gd_step(ParameterSet& set, const Gradients& grads, double lr) {
  for (std::size_t i = 0; i < set.size(); ++i) {
    auto it = grads.find(&set[i]);
    if (it != grads.end()) set[i].value -= lr * it->second;
  }
}

void Adam::step(ParameterSet& set, const Gradients& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < set.size(); ++i) {
    Parameter& p = set[i];
    auto it = grads.find(&p);
    if (it == grads.end()) continue;
    auto [slot, fresh] = moments_.try_emplace(&p);
    if (fresh) {
      slot->second.first = Mat::Zero(p.value.rows(), p.value.cols());
      slot->second.second = Mat::Zero(p.value.rows(), p.value.cols());
    }
    Mat& m = slot->second.first;
    Mat& v = slot->second.second;
    m = beta1_ * m + (1.0 - beta1_) * it->second;
    v = beta2_ * v + (1.0 - beta2_) * it->second.cwiseAbs2();
    p.value.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
  }
}

double clip_gradients(Gradients& grads, double max_norm) {
  // Sum in a fixed order (by name) so the norm does not depend on hash-map iteration order.
  std::vector<std::pair<std::string, const Mat*>> ordered;
  for (const auto& [p, g] : grads) ordered.emplace_back(p->name, &g);
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double sq = 0.0;
  for (const auto& [name, g] : ordered) sq += g->squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (auto& [p, g] : grads) g *= s;
  }
  return norm;
}

Json to_json(const ParameterSet& set) {
  Json j = Json::object();
  for (std::size_t i = 0; i < set.size(); ++i) j[set[i].name] = tensor_to_json(set[i].value);
  return j;
}

void load_json(ParameterSet& set, const Json& j) {
  if (!j.is_object() || j.size() != set.size()) {
    throw Error(ErrorCode::kSchema, "checkpoint holds " + std::to_string(j.is_object() ? j.size() : 0) +
                                        " tensors, expected " + std::to_string(set.size()));
  }
  for (std::size_t i = 0; i < set.size(); ++i) {
    Parameter& p = set[i];
    if (!j.contains(p.name)) throw Error(ErrorCode::kSchema, "checkpoint lacks tensor '" + p.name + "'");
    Mat v = tensor_from_json(j.at(p.name));
    if (v.rows() != p.value.rows() || v.cols() != p.value.cols()) {
      throw Error(ErrorCode::kSchema, "tensor '" + p.name + "' has the wrong shape");
    }
    p.value = std::move(v);
  }
}

}  // namespace temu::nn
