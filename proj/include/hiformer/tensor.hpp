#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hiformer::ad {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

/// One vertex of the computation graph. Values are immutable once an op has
/// produced them; only leaves may be written in place (optimizer updates).
struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until a gradient flows in
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads `self.grad` and accumulates into the grads of `self.inputs`.
  std::function<void(Node& self)> backward;

  bool is_leaf() const { return inputs.empty(); }
  void ensure_grad() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
  }
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape), 0.0); }
  static Tensor ones(Shape shape) { return Tensor(std::move(shape), 1.0); }
  static Tensor scalar(double v) { return Tensor(Shape{1}, v); }
  /// Row-major 2-D tensor from nested lists, handy in tests.
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const double> data() const;
  /// Writable view of a leaf's values. Throws ContractError for op outputs.
  std::span<double> mutable_data();
  double item() const;
  double at(std::initializer_list<std::size_t> index) const;

  bool requires_grad() const;
  Tensor& set_requires_grad(bool flag);
  bool is_leaf() const;
  bool has_grad() const;
  /// Accumulated gradient; all zeros if nothing has flowed in yet.
  std::vector<double> grad() const;
  std::span<const double> grad_view() const;
  void zero_grad();

  /// Reverse-mode sweep from this scalar. Gradients accumulate additively
  /// into leaves; intermediate gradients are reset at the start of each call,
  /// so two calls leave every leaf with exactly twice the single-call value.
  void backward() const;

  /// Same values, no history, requires_grad false.
  Tensor detach() const;
  /// Deep copy of values; keeps requires_grad for leaves.
  Tensor clone() const;

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Ordered record of the ops reachable from a root, inputs before outputs.
class ComputeTape {
 public:
  static ComputeTape record(const Tensor& root);

  std::span<Node* const> nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  /// Seeds d(root)/d(root) = 1 and runs every backward closure once, in reverse.
  void backward();

 private:
  std::shared_ptr<Node> root_;
  std::vector<Node*> nodes_;
};

/// While alive, ops on this thread record no history.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

/// When on, every op output is scanned for NaN/Inf and a NumericalError is
/// thrown naming the op. Defaults to on in builds without NDEBUG.
void set_check_finite(bool on);
bool check_finite_enabled();

}  // namespace hiformer::ad
