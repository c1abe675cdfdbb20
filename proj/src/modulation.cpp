#include "slp/modulation.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "slp/errors.hpp"

namespace slp::modulation {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kZeroComponent = 1e-12;

double sign_or_zero(double v) { return std::abs(v) < kZeroComponent ? 0.0 : (v > 0 ? 1.0 : -1.0); }
}  // namespace

void check_order(int order) {
  if (order < 2 || (order & (order - 1)) != 0) {
    throw std::invalid_argument("modulation order must be a power of two >= 2, got " +
                                std::to_string(order));
  }
}

double constellation_phase(int index, int order) {
  return kTwoPi * index / order + kPi / order;
}

double PskSymbol::phase() const { return constellation_phase(index, order); }

PskSymbol modulate(int index, int order) {
  check_order(order);
  if (index < 0 || index >= order) {
    throw std::out_of_range("symbol index " + std::to_string(index) + " outside [0, " +
                            std::to_string(order) + ")");
  }
  return {order, index, std::polar(1.0, constellation_phase(index, order))};
}

double bits_per_symbol(int order) {
  check_order(order);
  return std::log2(static_cast<double>(order));
}

double wrap_phase(double angle) {
  double a = std::remainder(angle, kTwoPi);
  if (a <= -kPi) a += kTwoPi;
  return a;
}

Detection detect(Complex y, int order) {
  check_order(order);
  if (y == Complex(0.0, 0.0)) return {0, true};
  double theta = std::atan2(y.imag(), y.real());
  if (theta < 0.0) theta += kTwoPi;
  const double q = theta * order / kTwoPi;
  const double fl = std::floor(q);
  int index = static_cast<int>(fl);
  if (q == fl && index >= 1) index -= 1;
  if (index >= order) index = order - 1;
  return {index, false};
}

DetectionRegion DetectionRegion::of(const PskSymbol& symbol, double margin_below,
                                    double margin_above) {
  const double half = kPi / symbol.order;
  if (margin_below < 0.0 || margin_above < 0.0 || margin_below > half || margin_above > half) {
    throw std::invalid_argument("relaxation margins must lie in [0, pi/M]");
  }
  return {symbol.phase(), half, margin_below, margin_above};
}

bool DetectionRegion::admits_phase(double phase) const {
  const double offset = wrap_phase(phase - center);
  return offset >= -margin_below && offset <= margin_above;
}

Complex interference_coefficient(const numerics::ComplexRow& h_j,
                                 const numerics::ComplexVector& w_k) {
  if (h_j.size() != w_k.size()) throw std::invalid_argument("interference_coefficient: size mismatch");
  const double nh = h_j.norm();
  const double nw = w_k.norm();
  if (nh == 0.0 || nw == 0.0) {
    throw DegenerateInput("interference_coefficient: zero channel or precoder");
  }
  return (h_j * w_k)(0) / (nh * nw);
}

InterferenceClass classify(Complex psi, const PskSymbol& d_j, const PskSymbol& d_k) {
  if (d_j.order != d_k.order) throw std::invalid_argument("classify: symbols of different order");
  InterferenceClass out;
  if (std::abs(psi) == 0.0) {
    out.neutral = true;
    return out;
  }
  const Complex rotated = psi * d_k.value;
  const double distance = wrap_phase(std::arg(rotated) - d_j.phase());
  out.phase_condition = std::abs(distance) <= kPi / d_j.order;

  const Complex cross = psi * d_j.value;
  const double re = sign_or_zero(d_k.value.real()) * sign_or_zero(cross.real());
  const double im = sign_or_zero(d_k.value.imag()) * sign_or_zero(cross.imag());
  out.neutral = re == 0.0 || im == 0.0;
  out.sign_condition = re > 0.0 && im > 0.0;
  out.constructive = out.phase_condition && out.sign_condition;
  return out;
}

bool is_constructive(Complex psi, const PskSymbol& d_j, const PskSymbol& d_k) {
  return classify(psi, d_j, d_k).constructive;
}

}  // namespace slp::modulation
