// SPDX-License-Identifier: Apache-2.0
#include "cycfuse/degradation.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cycfuse/error.hpp"
#include "cycfuse/rng.hpp"

namespace cycfuse {

namespace {

void check_simplex_entries(const Mat<double>& w, const char* what) {
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double v = w.data()[i];
    if (!std::isfinite(v) || v < 0.0) throw DataError(std::string(what) + ": weights must be finite and non-negative");
  }
}

std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first && !line.empty() && line.front() == '#') {
      first = false;
      continue;
    }
    first = false;
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw FormatError(path.string() + ": not a number: '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw FormatError(path.string() + ": ragged rows (" + std::to_string(row.size()) + " vs " +
                        std::to_string(rows.front().size()) + " columns)");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError(path.string() + ": no data rows");
  return rows;
}

Mat<double> to_matrix(const std::vector<std::vector<double>>& rows) {
  Mat<double> m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

void write_csv(const Mat<double>& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
}

}  // namespace

PsfKernel::PsfKernel(Mat<double> weights) : weights_(std::move(weights)) {
  if (weights_.rows() < 1 || weights_.rows() != weights_.cols()) throw ShapeError("PsfKernel must be square and non-empty");
  check_simplex_entries(weights_, "PsfKernel");
  if (std::abs(weights_.sum() - 1.0) > kSimplexTolerance) throw DataError("PsfKernel weights must sum to 1");
}

SrfMatrix::SrfMatrix(Mat<double> weights) : weights_(std::move(weights)) {
  if (weights_.rows() < 1 || weights_.cols() < 1) throw ShapeError("SrfMatrix must be non-empty");
  check_simplex_entries(weights_, "SrfMatrix");
  for (Eigen::Index i = 0; i < weights_.rows(); ++i) {
    if (std::abs(weights_.row(i).sum() - 1.0) > kSimplexTolerance) {
      throw DataError("SrfMatrix row " + std::to_string(i) + " must sum to 1");
    }
  }
}

template <typename T>
Tensor<T> spatial_degrade(const Tensor<T>& x, const Mat<T>& kernel) {
  const int s = static_cast<int>(kernel.rows());
  if (s < 1 || kernel.cols() != s) throw ShapeError("spatial_degrade: kernel must be square");
  if (x.rows % s != 0 || x.cols % s != 0) {
    throw ShapeError("spatial_degrade: spatial size " + std::to_string(x.rows) + "x" + std::to_string(x.cols) +
                     " not divisible by scale " + std::to_string(s));
  }
  const int out_rows = x.rows / s;
  const int out_cols = x.cols / s;
  Tensor<T> out(x.channels(), out_rows, out_cols);
  for (int c = 0; c < x.channels(); ++c) {
    const T* src = x.data.row(c).data();
    T* dst = out.data.row(c).data();
    for (int i = 0; i < out_rows; ++i) {
      for (int p = 0; p < s; ++p) {
        const T* line = src + static_cast<std::size_t>(i * s + p) * x.cols;
        for (int j = 0; j < out_cols; ++j) {
          T acc = 0;
          for (int q = 0; q < s; ++q) acc += kernel(p, q) * line[j * s + q];
          dst[i * out_cols + j] += acc;
        }
      }
    }
  }
  return out;
}

template <typename T>
void spatial_degrade_backward(const Tensor<T>& x, const Mat<T>& kernel, const Tensor<T>& grad_out,
                              Tensor<T>* grad_x, Mat<T>* grad_kernel) {
  const int s = static_cast<int>(kernel.rows());
  const int out_rows = grad_out.rows;
  const int out_cols = grad_out.cols;
  if (grad_x && !grad_x->same_shape(x)) *grad_x = Tensor<T>(x.channels(), x.rows, x.cols);
  if (grad_kernel && (grad_kernel->rows() != s || grad_kernel->cols() != s)) *grad_kernel = Mat<T>::Zero(s, s);
  for (int c = 0; c < x.channels(); ++c) {
    const T* src = x.data.row(c).data();
    const T* g = grad_out.data.row(c).data();
    T* gx = grad_x ? grad_x->data.row(c).data() : nullptr;
    for (int i = 0; i < out_rows; ++i) {
      for (int p = 0; p < s; ++p) {
        const std::size_t line = static_cast<std::size_t>(i * s + p) * x.cols;
        for (int j = 0; j < out_cols; ++j) {
          const T go = g[i * out_cols + j];
          for (int q = 0; q < s; ++q) {
            if (gx) gx[line + j * s + q] += kernel(p, q) * go;
            if (grad_kernel) (*grad_kernel)(p, q) += go * src[line + j * s + q];
          }
        }
      }
    }
  }
}

template <typename T>
Tensor<T> spectral_degrade(const Tensor<T>& x, const Mat<T>& srf) {
  if (srf.cols() != x.channels()) {
    throw ShapeError("spectral_degrade: SRF expects " + std::to_string(srf.cols()) + " bands, input has " +
                     std::to_string(x.channels()));
  }
  Tensor<T> out;
  out.rows = x.rows;
  out.cols = x.cols;
  out.data.noalias() = srf * x.data;
  return out;
}

template <typename T>
void spectral_degrade_backward(const Tensor<T>& x, const Mat<T>& srf, const Tensor<T>& grad_out,
                               Tensor<T>* grad_x, Mat<T>* grad_srf) {
  if (grad_x) {
    if (!grad_x->same_shape(x)) *grad_x = Tensor<T>(x.channels(), x.rows, x.cols);
    grad_x->data.noalias() += srf.transpose() * grad_out.data;
  }
  if (grad_srf) {
    if (grad_srf->rows() != srf.rows() || grad_srf->cols() != srf.cols()) *grad_srf = Mat<T>::Zero(srf.rows(), srf.cols());
    grad_srf->noalias() += grad_out.data * x.data.transpose();
  }
}

template Tensor<float> spatial_degrade(const Tensor<float>&, const Mat<float>&);
template Tensor<double> spatial_degrade(const Tensor<double>&, const Mat<double>&);
template void spatial_degrade_backward(const Tensor<float>&, const Mat<float>&, const Tensor<float>&, Tensor<float>*,
                                       Mat<float>*);
template void spatial_degrade_backward(const Tensor<double>&, const Mat<double>&, const Tensor<double>&,
                                       Tensor<double>*, Mat<double>*);
template Tensor<float> spectral_degrade(const Tensor<float>&, const Mat<float>&);
template Tensor<double> spectral_degrade(const Tensor<double>&, const Mat<double>&);
template void spectral_degrade_backward(const Tensor<float>&, const Mat<float>&, const Tensor<float>&, Tensor<float>*,
                                        Mat<float>*);
template void spectral_degrade_backward(const Tensor<double>&, const Mat<double>&, const Tensor<double>&,
                                        Tensor<double>*, Mat<double>*);

HsiCube spatial_degrade(const HsiCube& x, const PsfKernel& k) {
  const Mat<float> kernel = k.weights().cast<float>();
  return to_cube(spatial_degrade(to_tensor<float>(x), kernel), x.name(), x.wavelengths_nm());
}

HsiCube spectral_degrade(const HsiCube& x, const SrfMatrix& r) {
  const Mat<float> srf = r.weights().cast<float>();
  return to_cube(spectral_degrade(to_tensor<float>(x), srf), x.name());
}

PsfKernel make_block_average_kernel(int scale) {
  if (scale <= 0) throw ArgumentError("block-average kernel needs scale >= 1, got " + std::to_string(scale));
  return PsfKernel(Mat<double>::Constant(scale, scale, 1.0 / (static_cast<double>(scale) * scale)));
}

SrfMatrix load_srf_csv(const std::filesystem::path& path) {
  Mat<double> m = to_matrix(read_numeric_csv(path));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (!std::isfinite(m(i, j)) || m(i, j) < 0.0) throw DataError(path.string() + ": negative or non-finite response");
    }
    const double total = m.row(i).sum();
    if (!(total > 0.0)) throw DataError(path.string() + ": response row " + std::to_string(i) + " sums to zero");
    m.row(i) /= total;
  }
  return SrfMatrix(std::move(m));
}

void save_srf_csv(const SrfMatrix& r, const std::filesystem::path& path) { write_csv(r.weights(), path); }

PsfKernel load_psf_csv(const std::filesystem::path& path) {
  Mat<double> m = to_matrix(read_numeric_csv(path));
  if (m.rows() != m.cols()) throw FormatError(path.string() + ": PSF kernel must be square");
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double v = m.data()[i];
    if (!std::isfinite(v) || v < 0.0) throw DataError(path.string() + ": negative or non-finite kernel weight");
  }
  const double total = m.sum();
  if (!(total > 0.0)) throw DataError(path.string() + ": kernel sums to zero");
  m /= total;
  return PsfKernel(std::move(m));
}

void save_psf_csv(const PsfKernel& k, const std::filesystem::path& path) { write_csv(k.weights(), path); }

Tensor<double> awgn_noise(const Tensor<double>& signal, double snr_db, std::uint64_t seed) {
  const double power = signal.data.squaredNorm() / static_cast<double>(std::max<Eigen::Index>(1, signal.data.size()));
  const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor<double> noise(signal.channels(), signal.rows, signal.cols);
  for (Eigen::Index i = 0; i < noise.data.size(); ++i) noise.data.data()[i] = sigma * normal(rng);
  return noise;
}

SimulatedPair simulate_pair(const HsiCube& x, const PsfKernel& k, const SrfMatrix& r, std::optional<double> noise_snr_db,
                            std::uint64_t seed) {
  if (r.hsi_bands() != x.bands()) {
    throw ShapeError("simulate_pair: SRF has " + std::to_string(r.hsi_bands()) + " HSI bands, cube has " +
                     std::to_string(x.bands()));
  }
  const auto xt = to_tensor<float>(x);
  Tensor<float> y = spatial_degrade(xt, Mat<float>(k.weights().cast<float>()));
  Tensor<float> z = spectral_degrade(xt, Mat<float>(r.weights().cast<float>()));
  if (noise_snr_db) {
    auto add_noise = [&](Tensor<float>& t, std::string_view stream) {
      const Tensor<double> signal = t.cast<double>();
      const Tensor<double> noise = awgn_noise(signal, *noise_snr_db, derive_seed(seed, stream));
      t.data = (signal.data + noise.data).cast<float>();
    };
    add_noise(y, "noise/lr_hsi");
    add_noise(z, "noise/hr_msi");
  }
  return SimulatedPair{to_cube(y, x.name().empty() ? "lr_hsi" : x.name() + "/lr_hsi", x.wavelengths_nm()),
                       to_cube(z, x.name().empty() ? "hr_msi" : x.name() + "/hr_msi")};
}

}  // namespace cycfuse
