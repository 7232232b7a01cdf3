#pragma once

#include "honestrd/core.hpp"

#include <functional>
#include <string>

namespace honestrd {

//! Kernel with support in [-1, 1].
class Kernel
{
public:
  explicit Kernel(KernelType type = KernelType::triangular);
  //! Extension point: any nonnegative function; it is truncated to |u| <= 1.
  explicit Kernel(std::function<double(double)> f);

  double operator()(double u) const;
  KernelType type() const { return type_; }
  std::string name() const;

  static Kernel parse(const std::string& name);

private:
  KernelType type_;
  std::function<double(double)> custom_;
};

} // namespace honestrd
