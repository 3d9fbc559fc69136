#pragma once

#include <Eigen/Dense>
#include <complex>

#include "vfi/beamform.hpp"
#include "vfi/errors.hpp"

namespace vfi {

// Truncated-SVD clutter filter: zero the n_cut largest singular components of
// the Casorati matrix (pixels x frames). The slow-time singular vectors are
// obtained from the K x K Gram matrix, so the cost is linear in pixel count.
inline BeamformedEnsemble svd_filter(const BeamformedEnsemble& ensemble, int n_cut) {
  const int K = ensemble.frames;
  if (n_cut < 0 || n_cut >= K)
    throw ValidationError("svd_filter: require 0 <= n_cut < frames");
  if (n_cut == 0) return ensemble;

  using Mat = Eigen::Matrix<cdouble, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const Mat> M(ensemble.values.data(), K, ensemble.n_samples);

  // Gram matrix of the Casorati columns: G = conj(M M^H)
  Eigen::MatrixXcd G = (M * M.adjoint()).conjugate();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(G);
  if (eig.info() != Eigen::Success)
    throw NumericalError("svd_filter: eigendecomposition failed");

  BeamformedEnsemble out = ensemble;
  Eigen::Map<Mat> Mf(out.values.data(), K, ensemble.n_samples);
  // eigenvalues ascending; remove the n_cut dominant slow-time vectors
  for (int i = 0; i < n_cut; ++i) {
    const Eigen::VectorXcd v = eig.eigenvectors().col(K - 1 - i);
    const Eigen::RowVectorXcd proj = v.transpose() * Mf;
    Mf.noalias() -= v.conjugate() * proj;
  }
  return out;
}

}  // namespace vfi
