#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "edgeflow/rng.hpp"
#include "edgeflow/types.hpp"

namespace edgeflow {

enum class ModelKind { kLinearSoftmax, kMlp };

// Architecture description. The flat parameter count is a deterministic
// function of the spec: layer-major, weights before biases, row-major
// weight matrices.
struct ModelSpec {
  ModelKind kind = ModelKind::kLinearSoftmax;
  Index input_dim = 16;
  std::vector<Index> hidden_dims;  // empty for linear-softmax
  Index num_classes = 10;

  std::vector<Index> layer_dims() const;
  Index param_count() const;
  void validate() const;
};

struct Batch {
  Matrix features;   // rows are samples
  IntVector labels;  // values in [0, num_classes)
  Index size() const { return features.rows(); }
};

// Per-layer uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)], drawn from
// the given stream in layout order.
ParamVector init_params(const ModelSpec& spec, SplitRng rng);

// Mean cross-entropy over the batch. Nonnegative and finite on success.
Real forward_loss(const ModelSpec& spec, const ParamVector& params, const Batch& batch);

// Gradient of forward_loss at params; same length as params.
ParamVector gradient(const ModelSpec& spec, const ParamVector& params, const Batch& batch);

// Class scores for each batch row (no loss reduction).
Matrix logits(const ModelSpec& spec, const ParamVector& params, const Matrix& features);

// dst + scale * src, elementwise.
ParamVector axpy(const ParamVector& dst, Real scale, const ParamVector& src);

// Checkpoint format: u64 little-endian length, then that many f64
// little-endian values.
void save_params(std::ostream& os, const ParamVector& v);
ParamVector load_params(std::istream& is);
void save_params_file(const std::string& path, const ParamVector& v);
ParamVector load_params_file(const std::string& path);

}  // namespace edgeflow
