#include "ls/ad/graph.hpp"

#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <utility>

namespace ls::ad {

namespace {

thread_local bool t_grad_mode = true;

}  // namespace

NoGradGuard::NoGradGuard() : previous_(t_grad_mode) { t_grad_mode = false; }
NoGradGuard::~NoGradGuard() { t_grad_mode = previous_; }

bool grad_mode_enabled() { return t_grad_mode; }

Tensor& Var::mutable_leaf_value() {
  if (!node_->is_leaf) {
    throw std::logic_error("mutable_leaf_value: '" + node_->op + "' is not a leaf");
  }
  return node_->value;
}

Var constant(Tensor value) {
  auto node = std::make_shared<Node>();
  node->op = "const";
  node->value = std::move(value);
  return Var(std::move(node));
}

Var leaf(Tensor value, bool requires_grad) {
  auto node = std::make_shared<Node>();
  node->op = "leaf";
  node->value = std::move(value);
  node->requires_grad = requires_grad;
  return Var(std::move(node));
}

const Tensor& forward(const Var& root) { return root.value(); }

namespace {

// Post-order over the grad-requiring subgraph: inputs precede their users.
std::vector<std::shared_ptr<Node>> topo_order(const Var& root) {
  std::vector<std::shared_ptr<Node>> order;
  std::unordered_set<const Node*> visited;
  std::vector<std::pair<std::shared_ptr<Node>, std::size_t>> stack;
  if (!root.requires_grad()) return order;
  stack.emplace_back(root.shared(), 0);
  visited.insert(root.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      const Var& input = node->inputs[next++];
      if (input.requires_grad() && visited.insert(input.node()).second) {
        stack.emplace_back(input.shared(), 0);
      }
      continue;
    }
    order.push_back(node);
    stack.pop_back();
  }
  return order;
}

}  // namespace

std::vector<Var> grad(const Var& root, std::span<const Var> wrt, bool create_graph) {
  if (root.size() != 1) {
    throw ShapeError("grad: root must be scalar, got shape " + shape_str(root.shape()));
  }
  const auto order = topo_order(root);

  std::unordered_set<const Node*> targets;
  for (const Var& w : wrt) targets.insert(w.node());

  // Only nodes with a path to some target need a gradient.
  std::unordered_set<const Node*> relevant;
  for (const auto& node : order) {
    bool hit = targets.count(node.get()) > 0;
    for (const Var& input : node->inputs) {
      if (hit) break;
      hit = relevant.count(input.node()) > 0;
    }
    if (hit) relevant.insert(node.get());
  }

  std::unordered_map<const Node*, Var> grads;
  if (relevant.count(root.node())) {
    grads[root.node()] = constant(Tensor(root.shape(), 1.0));
  }

  std::optional<NoGradGuard> no_grad;
  if (!create_graph) no_grad.emplace();

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto& node = *it;
    if (node->is_leaf || !relevant.count(node.get())) continue;
    auto found = grads.find(node.get());
    if (found == grads.end()) continue;
    if (create_graph && !node->second_order) {
      throw UnsupportedOpError("grad_graph: op '" + node->op +
                               "' has no second-order rule on the differentiation path");
    }
    const Var g = found->second;
    std::vector<Var> input_grads = node->backward(g, Var(node));
    for (std::size_t i = 0; i < node->inputs.size(); ++i) {
      const Var& input = node->inputs[i];
      if (i >= input_grads.size() || !input_grads[i].defined()) continue;
      if (!relevant.count(input.node())) continue;
      auto slot = grads.find(input.node());
      if (slot == grads.end()) {
        grads.emplace(input.node(), input_grads[i]);
      } else {
        slot->second = add(slot->second, input_grads[i]);
      }
    }
    // Intermediate gradients are dead once propagated.
    if (!targets.count(node.get())) grads.erase(node.get());
  }

  std::vector<Var> result;
  result.reserve(wrt.size());
  for (const Var& w : wrt) {
    auto found = grads.find(w.node());
    if (found != grads.end()) {
      result.push_back(found->second);
    } else {
      result.push_back(constant(Tensor(w.shape(), 0.0)));
    }
  }
  return result;
}

Var grad_graph(const Var& root, const Var& wrt) {
  const Var targets[] = {wrt};
  return grad(root, targets, /*create_graph=*/true).front();
}

}  // namespace ls::ad
