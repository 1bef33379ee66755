#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "slimtag/tensor.hpp"

namespace slimtag {

struct Node;
using VarPtr = std::shared_ptr<Node>;

// One value in the differentiable graph. Leaves are parameters or constants;
// interior nodes are produced by tape ops and carry their backward rule.
struct Node {
  Tensor value;
  Tensor grad;  // allocated on demand, same shape as value
  bool requires_grad = false;
  std::vector<VarPtr> parents;
  std::function<void(Node&)> backward_fn;  // scatters self.grad into parents

  explicit Node(Tensor v, bool req = false) : value(std::move(v)), requires_grad(req) {}

  Tensor& ensure_grad() {
    if (grad.size() != value.size()) grad = Tensor::zeros(value.shape());
    return grad;
  }
};

VarPtr make_param(Tensor value);
VarPtr make_const(Tensor value);

// Ordered record of executed differentiable ops. With recording off the ops
// still compute values (shared inference path) but store no edges, so the
// graph is garbage-collected as intermediate handles go out of scope.
class Tape {
 public:
  explicit Tape(bool recording = true) : recording_(recording) {}

  bool recording() const { return recording_; }

  VarPtr record(Tensor value, std::vector<VarPtr> parents,
                std::function<void(Node&)> backward_fn);

  // Reverse sweep from a scalar loss. Gradients accumulate into every
  // recorded node and into leaf parameters reached by the graph; leaves not
  // touched by the tape keep whatever is already in their grad buffer
  // (zero after zero_grad), which realizes the zero-gradient contract for
  // parameters that never influenced the loss.
  void backward(const VarPtr& loss);

  void clear() { nodes_.clear(); }
  size_t num_ops() const { return nodes_.size(); }

 private:
  bool recording_;
  std::vector<VarPtr> nodes_;
};

void zero_grad(const std::vector<VarPtr>& params);

}  // namespace slimtag
