#include "edgeflow/model.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace edgeflow {

namespace {

using RowMajorMatrix =
    Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstWeightMap = Eigen::Map<const RowMajorMatrix>;
using WeightMap = Eigen::Map<RowMajorMatrix>;
using ConstBiasMap = Eigen::Map<const Vector>;
using BiasMap = Eigen::Map<Vector>;

void check_batch(const ModelSpec& spec, const ParamVector& params, const Batch& batch) {
  spec.validate();
  if (params.size() != spec.param_count()) {
    throw ConfigError("parameter vector length " + std::to_string(params.size()) +
                      " does not match spec parameter count " +
                      std::to_string(spec.param_count()));
  }
  if (batch.features.cols() != spec.input_dim) {
    throw ConfigError("batch feature width " + std::to_string(batch.features.cols()) +
                      " does not match input_dim " + std::to_string(spec.input_dim));
  }
  if (batch.labels.size() != batch.features.rows()) {
    throw ConfigError("batch has " + std::to_string(batch.features.rows()) +
                      " feature rows but " + std::to_string(batch.labels.size()) +
                      " labels");
  }
  if (batch.size() < 1) {
    throw ConfigError("empty batch");
  }
  for (Index r = 0; r < batch.labels.size(); ++r) {
    const int y = batch.labels[r];
    if (y < 0 || y >= spec.num_classes) {
      throw ConfigError("label " + std::to_string(y) + " at row " + std::to_string(r) +
                        " outside [0, " + std::to_string(spec.num_classes) + ")");
    }
  }
}

void check_finite(const Matrix& m, int layer) {
  if (!m.allFinite()) {
    throw NumericError("non-finite intermediate at layer " + std::to_string(layer), layer);
  }
}

// Forward pass keeping post-activation values per layer. activations[0] is
// the input; the last entry holds raw logits.
std::vector<Matrix> forward_activations(const ModelSpec& spec, const ParamVector& params,
                                        const Matrix& features) {
  const std::vector<Index> dims = spec.layer_dims();
  const int num_layers = static_cast<int>(dims.size()) - 1;
  std::vector<Matrix> acts;
  acts.reserve(static_cast<std::size_t>(num_layers) + 1);
  acts.push_back(features);

  Index offset = 0;
  for (int l = 0; l < num_layers; ++l) {
    const Index in = dims[static_cast<std::size_t>(l)];
    const Index out = dims[static_cast<std::size_t>(l) + 1];
    ConstWeightMap w(params.data() + offset, out, in);
    offset += out * in;
    ConstBiasMap b(params.data() + offset, out);
    offset += out;

    Matrix z = acts.back() * w.transpose();
    z.rowwise() += b.transpose();
    if (l + 1 < num_layers) {
      z = z.array().tanh().matrix();
    }
    check_finite(z, l);
    acts.push_back(std::move(z));
  }
  return acts;
}

// Row-wise log-sum-exp with max shift.
Vector log_sum_exp_rows(const Matrix& z) {
  const Vector row_max = z.rowwise().maxCoeff();
  return row_max.array() +
         (z.colwise() - row_max).array().exp().rowwise().sum().log();
}

Real loss_from_logits(const Matrix& z, const IntVector& labels) {
  const Vector lse = log_sum_exp_rows(z);
  Real total = 0;
  for (Index r = 0; r < z.rows(); ++r) {
    total += lse[r] - z(r, labels[r]);
  }
  return total / static_cast<Real>(z.rows());
}

}  // namespace

std::vector<Index> ModelSpec::layer_dims() const {
  std::vector<Index> dims;
  dims.push_back(input_dim);
  if (kind == ModelKind::kMlp) {
    dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
  }
  dims.push_back(num_classes);
  return dims;
}

Index ModelSpec::param_count() const {
  const std::vector<Index> dims = layer_dims();
  Index count = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    count += dims[l] * dims[l + 1] + dims[l + 1];
  }
  return count;
}

void ModelSpec::validate() const {
  if (input_dim < 1) throw ConfigError("input_dim must be positive");
  if (num_classes < 2) throw ConfigError("num_classes must be at least 2");
  if (kind == ModelKind::kLinearSoftmax && !hidden_dims.empty()) {
    throw ConfigError("linear-softmax takes no hidden layers");
  }
  for (Index h : hidden_dims) {
    if (h < 1) throw ConfigError("hidden layer width must be positive");
  }
}

ParamVector init_params(const ModelSpec& spec, SplitRng rng) {
  spec.validate();
  ParamVector params(spec.param_count());
  const std::vector<Index> dims = spec.layer_dims();
  Index offset = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const Index in = dims[l];
    const Index out = dims[l + 1];
    const Real bound = 1.0 / std::sqrt(static_cast<Real>(in));
    for (Index i = 0; i < out * in + out; ++i) {
      params[offset + i] = rng.uniform_in(-bound, bound);
    }
    offset += out * in + out;
  }
  return params;
}

Real forward_loss(const ModelSpec& spec, const ParamVector& params, const Batch& batch) {
  check_batch(spec, params, batch);
  const std::vector<Matrix> acts = forward_activations(spec, params, batch.features);
  const Real loss = loss_from_logits(acts.back(), batch.labels);
  if (!std::isfinite(loss)) {
    throw NumericError("non-finite loss", static_cast<int>(acts.size()) - 2);
  }
  return loss;
}

ParamVector gradient(const ModelSpec& spec, const ParamVector& params, const Batch& batch) {
  check_batch(spec, params, batch);
  const std::vector<Index> dims = spec.layer_dims();
  const int num_layers = static_cast<int>(dims.size()) - 1;
  const std::vector<Matrix> acts = forward_activations(spec, params, batch.features);
  const Index b = batch.size();

  // Softmax minus one-hot, scaled by the batch mean.
  const Matrix& z = acts.back();
  Matrix delta(z.rows(), z.cols());
  for (Index r = 0; r < z.rows(); ++r) {
    const Real m = z.row(r).maxCoeff();
    Eigen::RowVectorXd e = (z.row(r).array() - m).exp();
    delta.row(r) = e / e.sum();
    delta(r, batch.labels[r]) -= 1.0;
  }
  delta /= static_cast<Real>(b);

  ParamVector grad = ParamVector::Zero(params.size());
  std::vector<Index> offsets(static_cast<std::size_t>(num_layers));
  Index offset = 0;
  for (int l = 0; l < num_layers; ++l) {
    offsets[static_cast<std::size_t>(l)] = offset;
    offset += dims[static_cast<std::size_t>(l)] * dims[static_cast<std::size_t>(l) + 1] +
              dims[static_cast<std::size_t>(l) + 1];
  }

  for (int l = num_layers - 1; l >= 0; --l) {
    const Index in = dims[static_cast<std::size_t>(l)];
    const Index out = dims[static_cast<std::size_t>(l) + 1];
    WeightMap gw(grad.data() + offsets[static_cast<std::size_t>(l)], out, in);
    BiasMap gb(grad.data() + offsets[static_cast<std::size_t>(l)] + out * in, out);
    gw = delta.transpose() * acts[static_cast<std::size_t>(l)];
    gb = delta.colwise().sum().transpose();

    if (l > 0) {
      ConstWeightMap w(params.data() + offsets[static_cast<std::size_t>(l)], out, in);
      const Matrix& a = acts[static_cast<std::size_t>(l)];  // tanh output
      delta = ((delta * w).array() * (1.0 - a.array().square())).matrix();
      check_finite(delta, l - 1);
    }
  }
  if (!grad.allFinite()) {
    throw NumericError("non-finite gradient", 0);
  }
  return grad;
}

Matrix logits(const ModelSpec& spec, const ParamVector& params, const Matrix& features) {
  Batch probe;
  probe.features = features;
  probe.labels = IntVector::Zero(features.rows());
  check_batch(spec, params, probe);
  return forward_activations(spec, params, features).back();
}

ParamVector axpy(const ParamVector& dst, Real scale, const ParamVector& src) {
  if (dst.size() != src.size()) {
    throw ConfigError("axpy length mismatch: " + std::to_string(dst.size()) + " vs " +
                      std::to_string(src.size()));
  }
  return dst + scale * src;
}

namespace {

void put_u64_le(std::ostream& os, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(buf, 8);
}

std::uint64_t get_u64_le(std::istream& is) {
  unsigned char buf[8];
  is.read(reinterpret_cast<char*>(buf), 8);
  if (!is) throw ConfigError("truncated parameter stream");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

void save_params(std::ostream& os, const ParamVector& v) {
  put_u64_le(os, static_cast<std::uint64_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i) {
    put_u64_le(os, std::bit_cast<std::uint64_t>(v[i]));
  }
}

ParamVector load_params(std::istream& is) {
  const std::uint64_t n = get_u64_le(is);
  ParamVector v(static_cast<Index>(n));
  for (std::uint64_t i = 0; i < n; ++i) {
    v[static_cast<Index>(i)] = std::bit_cast<Real>(get_u64_le(is));
  }
  return v;
}

void save_params_file(const std::string& path, const ParamVector& v) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  save_params(os, v);
}

ParamVector load_params_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path);
  return load_params(is);
}

}  // namespace edgeflow
