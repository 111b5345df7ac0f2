#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace edgeflow {

using Real = double;
using Index = Eigen::Index;

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IntVector = Eigen::VectorXi;

// Flat parameter block; length is fixed per model architecture and shared by
// every client and round.
using ParamVector = Vector;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite value produced by a model evaluation; carries the layer that
// first went bad.
struct NumericError : std::runtime_error {
  int layer;
  NumericError(const std::string& what, int layer_index)
      : std::runtime_error(what), layer(layer_index) {}
};

struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SamplingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A class pool ran out of samples during partitioning; names the class.
struct CapacityError : std::runtime_error {
  int class_id;
  CapacityError(const std::string& what, int cls)
      : std::runtime_error(what), class_id(cls) {}
};

struct TopologyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  int line;
  ParseError(const std::string& what, int line_no)
      : std::runtime_error(what), line(line_no) {}
};

}  // namespace edgeflow
