#include "honestrd/kernel.hpp"

#include <cmath>

namespace honestrd {

Kernel::Kernel(KernelType type)
  : type_(type)
{
  if (type == KernelType::custom)
    throw Error(ErrorKind::DomainError, "weights", "custom kernel needs a function");
}

Kernel::Kernel(std::function<double(double)> f)
  : type_(KernelType::custom)
  , custom_(std::move(f))
{}

double Kernel::operator()(double u) const
{
  const double a = std::fabs(u);
  if (a > 1.0)
    return 0.0;
  switch (type_) {
    case KernelType::uniform: return 0.5;
    case KernelType::triangular: return 1.0 - a;
    case KernelType::epanechnikov: return 0.75 * (1.0 - a * a);
    case KernelType::custom: return std::max(0.0, custom_(u));
  }
  return 0.0;
}

std::string Kernel::name() const
{
  switch (type_) {
    case KernelType::uniform: return "uniform";
    case KernelType::triangular: return "triangular";
    case KernelType::epanechnikov: return "epanechnikov";
    case KernelType::custom: return "custom";
  }
  return "custom";
}

Kernel Kernel::parse(const std::string& name)
{
  if (name == "uniform")
    return Kernel(KernelType::uniform);
  if (name == "triangular")
    return Kernel(KernelType::triangular);
  if (name == "epanechnikov")
    return Kernel(KernelType::epanechnikov);
  throw Error(ErrorKind::DomainError, "weights", "unknown kernel '" + name + "'");
}

} // namespace honestrd
