#include "dualmpc/window.hpp"

#include <stdexcept>

namespace dualmpc {

MeasurementWindow::MeasurementWindow(int length) : length_(length) {
  if (length < 1) throw std::invalid_argument("MeasurementWindow: length must be >= 1");
}

void MeasurementWindow::reset(long t, const Vector& x0, const Vector& y) {
  states_.clear();
  observations_.clear();
  controls_.clear();
  t_ = t;
  states_.push_back(x0);
  observations_.push_back(y);
}

void MeasurementWindow::push(const Vector& x0, const Vector& y, const Vector& control) {
  if (states_.empty()) throw std::logic_error("MeasurementWindow::push on an empty window; call reset first");
  states_.push_back(x0);
  observations_.push_back(y);
  controls_.push_back(control);
  ++t_;
  if (size() > length_) {
    states_.pop_front();
    observations_.pop_front();
    controls_.pop_front();
  }
}

}  // namespace dualmpc
