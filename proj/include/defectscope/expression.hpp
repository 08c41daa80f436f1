#pragma once
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace defectscope {

// Parsed arithmetic over named variables with operators + - * / ^ (right
// associative), functions sin cos tan atan2 exp log sqrt abs, numeric
// literals and the constant pi.  Precedence: ^ > unary minus > * / > + -.
class Expression {
public:
  Expression() = default;

  // Throws SyntaxError / UnknownIdentifier with byte offsets into `text`.
  static Expression parse(const std::string& text, const std::vector<std::string>& variables);

  static Expression constant(double v);
  static Expression variable(size_t index, const std::vector<std::string>& variables);

  double eval(std::span<const double> vars) const;
  double eval(double v0) const { double a[1] = {v0}; return eval(std::span<const double>(a, 1)); }
  double eval(double v0, double v1) const {
    double a[2] = {v0, v1};
    return eval(std::span<const double>(a, 2));
  }

  // Exact symbolic partial derivative with respect to variable `index`,
  // constant-folded.  abs differentiates to sign (zero at the kink).
  Expression derivative(size_t index) const;

  bool empty() const { return !root_; }
  size_t variable_count() const { return nvars_; }
  std::string str() const;  // debug/round-trip form

  struct Node;  // opaque outside expression.cpp
  using NodePtr = std::shared_ptr<const Node>;

private:
  NodePtr root_;
  size_t nvars_ = 0;

  explicit Expression(NodePtr root, size_t nvars) : root_(std::move(root)), nvars_(nvars) {}
  friend struct ExprBuilder;
};

}  // namespace defectscope
