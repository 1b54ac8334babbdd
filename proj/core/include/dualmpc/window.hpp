#pragma once

#include <deque>
#include <optional>

#include "dualmpc/types.hpp"

namespace dualmpc {

/// Rolling buffer of the last L measured states x0, observations y and the
/// L-1 controls applied between consecutive entries.
class MeasurementWindow {
 public:
  explicit MeasurementWindow(int length);

  /// Appends the first entry, or an entry after a gap (clears the buffer).
  void reset(long t, const Vector& x0, const Vector& y);
  /// Appends the measurement at time t reached by applying `control` at t-1.
  /// Evicts the oldest entry once L entries are held.
  void push(const Vector& x0, const Vector& y, const Vector& control);

  int length() const { return length_; }
  int size() const { return static_cast<int>(states_.size()); }
  bool full() const { return size() == length_; }
  bool empty() const { return states_.empty(); }

  /// Time index of the newest entry.
  long time() const { return t_; }

  /// i = 0 is the oldest held entry.
  const Vector& state(int i) const { return states_.at(i); }
  const Vector& observation(int i) const { return observations_.at(i); }
  /// Control applied between entry i and entry i+1.
  const Vector& control(int i) const { return controls_.at(i); }
  int control_count() const { return static_cast<int>(controls_.size()); }

  const Vector& newest_state() const { return states_.back(); }

 private:
  int length_;
  long t_ = -1;
  std::deque<Vector> states_;
  std::deque<Vector> observations_;
  std::deque<Vector> controls_;
};

}  // namespace dualmpc
