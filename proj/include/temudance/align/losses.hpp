#pragma once

#include <Eigen/Core>

#include <string>

namespace temu::align {

struct InfoNceResult {
  double loss = 0.0;
  Eigen::VectorXd grad_q;
  Eigen::VectorXd grad_k;
  double grad_alpha = 0.0;
};

// Upper bound on the logit scale s = exp(alpha).
inline constexpr double kMaxLogitScale = 100.0;

// -s q.k + log(exp(s q.k) + sum_j exp(s q.u_j)) with s = min(exp(alpha), 100)
// and u_j the columns of `queue` (D x n). An empty queue gives the
// uninformative value 0 and a warning. grad_alpha is 0 while s is clamped.
InfoNceResult infonce_loss(const Eigen::VectorXd& q, const Eigen::VectorXd& k, const Eigen::MatrixXd& queue,
                           double alpha);

struct DomainStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;  // population (1/N) normaliser
  std::string domain;
};

// Rows of `batch` are embeddings. Throws kCovarianceUndefined for fewer than 2 rows.
DomainStats domain_stats(const Eigen::MatrixXd& batch, std::string domain);

struct BridgeResult {
  double loss = 0.0;
  Eigen::MatrixXd grad_da;  // same shape as batch_da
  Eigen::MatrixXd grad_mo;
};

// |mu_da - mu_mo|^2 + |Sigma_da - Sigma_mo|_F^2 with analytic gradients.
BridgeResult bridge_loss(const Eigen::MatrixXd& batch_da, const Eigen::MatrixXd& batch_mo);

}  // namespace temu::align
