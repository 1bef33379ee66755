#include "slimtag/tape.hpp"

#include <algorithm>

namespace slimtag {

VarPtr make_param(Tensor value) {
  auto n = std::make_shared<Node>(std::move(value), true);
  n->ensure_grad();
  return n;
}

VarPtr make_const(Tensor value) {
  return std::make_shared<Node>(std::move(value), false);
}

VarPtr Tape::record(Tensor value, std::vector<VarPtr> parents,
                    std::function<void(Node&)> backward_fn) {
  bool req = false;
  for (const auto& p : parents) req = req || p->requires_grad;
  auto node = std::make_shared<Node>(std::move(value), req);
  if (recording_ && req) {
    node->parents = std::move(parents);
    node->backward_fn = std::move(backward_fn);
    nodes_.push_back(node);
  }
  return node;
}

void Tape::backward(const VarPtr& loss) {
  if (!loss->value.is_scalar())
    throw DimensionError("backward: loss must be scalar, got " + loss->value.shape_str());
  if (!recording_) throw ConfigError("backward: tape is not recording");
  for (auto& n : nodes_) {
    n->ensure_grad();
    std::fill(n->grad.data(), n->grad.data() + n->grad.size(), 0.0);
  }
  loss->ensure_grad();
  std::fill(loss->grad.data(), loss->grad.data() + loss->grad.size(), 0.0);
  loss->grad[0] = 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    Node& n = **it;
    if (n.backward_fn && n.requires_grad) n.backward_fn(n);
  }
}

void zero_grad(const std::vector<VarPtr>& params) {
  for (const auto& p : params) {
    p->ensure_grad();
    std::fill(p->grad.data(), p->grad.data() + p->grad.size(), 0.0);
  }
}

}  // namespace slimtag
