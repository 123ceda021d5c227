#include "temudance/align/losses.hpp"

#include <cmath>

#include "temudance/common/error.hpp"

namespace temu::align {

InfoNceResult infonce_loss(const Eigen::VectorXd& q, const Eigen::VectorXd& k, const Eigen::MatrixXd& queue,
                           double alpha) {
  if (q.size() != k.size() || (queue.cols() > 0 && queue.rows() != q.size())) {
    throw Error(ErrorCode::kDimension, "InfoNCE: query, key and queue dimensions differ");
  }
  InfoNceResult r;
  r.grad_q = Eigen::VectorXd::Zero(q.size());
  r.grad_k = Eigen::VectorXd::Zero(k.size());
  if (queue.cols() == 0) {
    warn("InfoNCE with an empty queue is the degenerate two-term form and always 0");
    return r;
  }
  const bool clamped = std::exp(alpha) > kMaxLogitScale;
  const double s = clamped ? kMaxLogitScale : std::exp(alpha);
  const double pos = q.dot(k);
  const Eigen::VectorXd neg = queue.transpose() * q;
  const double m = std::max(s * pos, s * neg.maxCoeff());
  const Eigen::ArrayXd e_neg = (s * neg.array() - m).exp();
  const double e_pos = std::exp(s * pos - m);
  const double z = e_pos + e_neg.sum();
  r.loss = -s * pos + m + std::log(z);
  const double p_pos = e_pos / z;
  const Eigen::VectorXd p_neg = (e_neg / z).matrix();
  // dL/dlogit: p_pos - 1 for the positive, p_j for the negatives.
  r.grad_q = s * ((p_pos - 1.0) * k + queue * p_neg);
  r.grad_k = s * (p_pos - 1.0) * q;
  const double dl_ds = (p_pos - 1.0) * pos + p_neg.dot(neg);
  r.grad_alpha = clamped ? 0.0 : s * dl_ds;
  return r;
}

DomainStats domain_stats(const Eigen::MatrixXd& batch, std::string domain) {
  if (batch.rows() < 2) throw Error(ErrorCode::kCovarianceUndefined, "covariance needs a batch of at least 2");
  DomainStats st;
  st.domain = std::move(domain);
  st.mean = batch.colwise().mean().transpose();
  const Eigen::MatrixXd centered = batch.rowwise() - st.mean.transpose();
  st.cov = centered.transpose() * centered / static_cast<double>(batch.rows());
  return st;
}

BridgeResult bridge_loss(const Eigen::MatrixXd& batch_da, const Eigen::MatrixXd& batch_mo) {
  if (batch_da.cols() != batch_mo.cols()) throw Error(ErrorCode::kDimension, "bridge loss: embedding widths differ");
  const DomainStats a = domain_stats(batch_da, "Da");
  const DomainStats b = domain_stats(batch_mo, "Mo");
  const Eigen::VectorXd dmu = a.mean - b.mean;
  const Eigen::MatrixXd dcov = a.cov - b.cov;
  BridgeResult r;
  r.loss = dmu.squaredNorm() + dcov.squaredNorm();
  const double n = static_cast<double>(batch_da.rows());
  const double m = static_cast<double>(batch_mo.rows());
  const Eigen::MatrixXd ca = batch_da.rowwise() - a.mean.transpose();
  const Eigen::MatrixXd cb = batch_mo.rowwise() - b.mean.transpose();
  r.grad_da = (2.0 / n) * dmu.transpose().replicate(batch_da.rows(), 1) + (4.0 / n) * ca * dcov;
  r.grad_mo = (-2.0 / m) * dmu.transpose().replicate(batch_mo.rows(), 1) - (4.0 / m) * cb * dcov;
  return r;
}

}  // namespace temu::align
