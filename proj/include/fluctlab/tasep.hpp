#pragma once

// Continuous-time TASEP on a finite window.
//
// Each bond (x, x+1) carries its own rate-1 Poisson clock, generated in
// unit time blocks from the counter stream.  A particle at x jumps when the
// clock of (x, x+1) rings and x+1 is empty.  Only bonds with an occupied
// left site and an empty right site sit in the event heap, and a jump
// deactivates only the bond that fired, so no stale entries ever appear.
//
// Sites outside the window are frozen.  Two fronts track, exactly, how far
// the frozen edges can have influenced the configuration: every site in
// (left_front, right_front) agrees with the infinite-lattice process driven
// by the same clocks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

#include "fluctlab/error.hpp"
#include "fluctlab/rng.hpp"
#include "fluctlab/theory.hpp"

namespace fluctlab {

struct LatticeWindow {
  std::int64_t lo = -1;
  std::int64_t hi = 1;

  void validate() const { detail::require(lo < 0 && hi > 0, "window must satisfy lo < 0 < hi"); }
  std::int64_t width() const { return hi - lo + 1; }
  friend bool operator==(const LatticeWindow&, const LatticeWindow&) = default;
};

inline LatticeWindow window_for(double t, double margin) {
  detail::require(t >= 0.0 && margin > 0.0, "window_for: t >= 0 and margin > 0 required");
  const auto r = static_cast<std::int64_t>(std::ceil(t + margin));
  return {-r, r};
}

/// A smaller window sized from the front speeds: the right front moves at
/// most at speed rho_plus in mean, the left one at 1 - rho_minus.
/// `slack` is the distance kept beyond the mean travel of each front.
inline LatticeWindow front_window(const TasepParams& tp, double t, double slack) {
  detail::require(t >= 0.0 && slack > 0.0, "front_window: t >= 0 and slack > 0 required");
  const auto left = static_cast<std::int64_t>(std::ceil((1.0 - tp.rho_minus) * t + slack));
  const auto right = static_cast<std::int64_t>(std::ceil(tp.rho_plus * t + slack));
  return {-std::max<std::int64_t>(left, 1), std::max<std::int64_t>(right, 1)};
}

inline LatticeWindow window_for(const TasepParams& tp, double t, double margin) {
  detail::require(t >= 0.0 && margin > 0.0, "window_for: t >= 0 and margin > 0 required");
  return front_window(tp, t, 6.0 * std::sqrt(t + 1.0) + margin);
}

/// Height values h(j) for j in [j_lo, j_hi].
struct HeightProfile {
  std::int64_t j_lo = 0;
  std::vector<std::int64_t> values;

  std::int64_t j_hi() const { return j_lo + static_cast<std::int64_t>(values.size()) - 1; }
  std::int64_t at(std::int64_t j) const { return values.at(static_cast<std::size_t>(j - j_lo)); }
};

namespace detail {

/// Ring times of one bond inside one unit time block.
struct ClockBlock {
  std::int64_t block = -1;
  std::vector<double> times;
};

inline void fill_clock_block(const CounterRng& rng, std::int64_t bond, std::int64_t block, ClockBlock& out) {
  const std::uint32_t a = signed_coordinate(bond);
  const auto b = static_cast<std::uint32_t>(block);
  const auto head = rng.pair(Stream::BondClocks, a, b, 0);

  // Poisson(1) by inversion.
  double p = std::exp(-1.0), cdf = p;
  int n = 0;
  while (head[0] >= cdf && n < 64) {
    ++n;
    p /= n;
    cdf += p;
  }
  out.block = block;
  out.times.clear();
  if (n == 0) return;
  const double base = static_cast<double>(block);
  out.times.push_back(base + head[1]);
  for (int m = 1; m < n; m += 2) {
    const auto u = rng.pair(Stream::BondClocks, a, b, static_cast<std::uint32_t>(1 + m / 2));
    out.times.push_back(base + u[0]);
    if (m + 1 < n) out.times.push_back(base + u[1]);
  }
  std::sort(out.times.begin(), out.times.end());
}

} // namespace detail

/// One replica of TASEP on a window.
class TasepState {
public:
  TasepState(const LatticeWindow& window, const StreamKey& key)
      : window_(window), rng_(key), occ_(static_cast<std::size_t>(window.width()), 0),
        crossings_(static_cast<std::size_t>(window.width()), 0), clocks_(static_cast<std::size_t>(window.width())),
        right_front_(window.hi), left_front_(window.lo) {
    window.validate();
  }

  const LatticeWindow& window() const { return window_; }
  double clock() const { return clock_; }
  std::int64_t j0() const { return crossing_count(0); }
  std::int64_t right_front() const { return right_front_; }
  std::int64_t left_front() const { return left_front_; }

  bool occupied(std::int64_t x) const {
    detail::require(x >= window_.lo && x <= window_.hi, "occupied: site outside window");
    return occ_[index(x)] != 0;
  }

  /// Signed number of jumps across bond (x, x+1) since time 0.
  std::int64_t crossing_count(std::int64_t x) const {
    detail::require(x >= window_.lo && x < window_.hi, "crossing_count: bond outside window");
    return crossings_[index(x)];
  }

  /// Sets site x.  Only valid before the first step.
  void set_occupied(std::int64_t x, bool v) {
    detail::require(clock_ == 0.0 && !started_, "set_occupied: state already evolved");
    detail::require(x >= window_.lo && x <= window_.hi, "set_occupied: site outside window");
    occ_[index(x)] = v ? 1 : 0;
  }

  /// Sites whose values must stay exact; a front reaching them raises
  /// WindowBreach.
  void watch(std::int64_t x_lo, std::int64_t x_hi) {
    detail::require(x_lo <= x_hi, "watch: empty range");
    watch_lo_ = x_lo;
    watch_hi_ = x_hi;
    check_fronts();
  }

  /// Watches everything height_at(j_lo..j_hi) depends on.
  void watch_heights(std::int64_t j_lo, std::int64_t j_hi) {
    watch(std::min<std::int64_t>(j_lo + 1, 0), std::max<std::int64_t>(j_hi, 1));
  }

  void step_to_time(double t_end) {
    detail::require(t_end >= clock_, "step_to_time: t_end precedes the current clock");
    if (!started_) start();
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (;;) {
      const double t_heap = heap_.empty() ? inf : heap_.top().time;
      const double t_front = std::min(right_front_time_, left_front_time_);
      const double t_next = std::min(t_heap, t_front);
      if (t_next > t_end) break;
      // Fronts read the configuration just before a simultaneous jump.
      if (t_front <= t_heap) {
        if (right_front_time_ <= left_front_time_) advance_right_front();
        else advance_left_front();
        continue;
      }
      const Event ev = heap_.top();
      heap_.pop();
      fire(ev);
    }
    clock_ = t_end;
  }

  HeightProfile height_at(std::int64_t j_lo, std::int64_t j_hi) const {
    detail::require(j_lo <= j_hi, "height_at: empty range");
    detail::require(j_lo >= window_.lo && j_hi <= window_.hi, "height_at: range outside window");
    const std::int64_t need_lo = std::min<std::int64_t>(j_lo + 1, 0);
    const std::int64_t need_hi = std::max<std::int64_t>(j_hi, 1);
    if (need_lo <= left_front_ || need_hi >= right_front_)
      throw WindowBreach("height_at: requested sites were reached by edge effects");

    HeightProfile out;
    out.j_lo = j_lo;
    out.values.resize(static_cast<std::size_t>(j_hi - j_lo + 1));
    const std::int64_t h0 = 2 * j0();
    std::int64_t h = h0;
    for (std::int64_t j = 0; j <= j_hi; ++j) {
      if (j > 0) h += 1 - 2 * occ_[index(j)];
      if (j >= j_lo) out.values[static_cast<std::size_t>(j - j_lo)] = h;
    }
    h = h0;
    for (std::int64_t j = 0; j >= j_lo; --j) {
      if (j < 0) h -= 1 - 2 * occ_[index(j + 1)];
      if (j <= j_hi) out.values[static_cast<std::size_t>(j - j_lo)] = h;
    }
    return out;
  }

  std::int64_t height(std::int64_t j) const { return height_at(j, j).values[0]; }

  std::uint64_t jumps() const { return jumps_; }

private:
  struct Event {
    double time;
    std::int64_t bond;
    bool operator>(const Event& o) const { return time > o.time; }
  };

  std::size_t index(std::int64_t x) const { return static_cast<std::size_t>(x - window_.lo); }

  /// First ring of bond (x, x+1) strictly after s.
  double next_ring(std::int64_t x, double s) {
    auto& blk = clocks_[index(x)];
    auto k = static_cast<std::int64_t>(std::floor(s));
    for (;;) {
      if (blk.block != k) detail::fill_clock_block(rng_, x, k, blk);
      for (double r : blk.times)
        if (r > s) return r;
      ++k;
    }
  }

  bool bond_active(std::int64_t x) const {
    return x >= window_.lo && x < window_.hi && occ_[index(x)] && !occ_[index(x + 1)];
  }

  void activate_if_ready(std::int64_t x, double now) {
    if (bond_active(x)) heap_.push({next_ring(x, now), x});
  }

  void start() {
    started_ = true;
    for (std::int64_t x = window_.lo; x < window_.hi; ++x) activate_if_ready(x, clock_);
    reset_right_front(clock_);
    reset_left_front(clock_);
  }

  void fire(const Event& ev) {
    const std::int64_t x = ev.bond;
    occ_[index(x)] = 0;
    occ_[index(x + 1)] = 1;
    ++crossings_[index(x)];
    ++jumps_;
    activate_if_ready(x - 1, ev.time);
    activate_if_ready(x + 1, ev.time);
  }

  void reset_right_front(double s) {
    right_front_time_ = right_front_ - 1 >= window_.lo ? next_ring(right_front_ - 1, s)
                                                        : std::numeric_limits<double>::infinity();
  }
  void reset_left_front(double s) {
    left_front_time_ = left_front_ + 1 <= window_.hi ? next_ring(left_front_, s)
                                                      : std::numeric_limits<double>::infinity();
  }

  // A ring on (f-1, f) with f-1 occupied lets the possibly wrong site f
  // decide a jump, so f-1 becomes uncertain.
  void advance_right_front() {
    const double now = right_front_time_;
    if (occ_[index(right_front_ - 1)]) {
      --right_front_;
      check_fronts();
    }
    reset_right_front(now);
  }

  // Symmetric: a ring on (g, g+1) with g+1 empty lets g decide.
  void advance_left_front() {
    const double now = left_front_time_;
    if (!occ_[index(left_front_ + 1)]) {
      ++left_front_;
      check_fronts();
    }
    reset_left_front(now);
  }

  void check_fronts() const {
    if (right_front_ <= watch_hi_ || left_front_ >= watch_lo_)
      throw WindowBreach("edge effects reached the watched sites");
  }

  LatticeWindow window_;
  CounterRng rng_;
  std::vector<std::uint8_t> occ_;
  std::vector<std::int64_t> crossings_;
  std::vector<detail::ClockBlock> clocks_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> heap_;
  std::int64_t right_front_, left_front_;
  double right_front_time_ = std::numeric_limits<double>::infinity();
  double left_front_time_ = std::numeric_limits<double>::infinity();
  std::int64_t watch_lo_ = std::numeric_limits<std::int64_t>::max();
  std::int64_t watch_hi_ = std::numeric_limits<std::int64_t>::min();
  double clock_ = 0.0;
  bool started_ = false;
  std::uint64_t jumps_ = 0;
};

/// Independent Bernoulli occupancies, rho_minus on x <= 0 and rho_plus on x > 0.
inline TasepState init_two_sided(const TasepParams& tp, const LatticeWindow& window, const StreamKey& key) {
  tp.validate();
  window.validate();
  TasepState state(window, key);
  const CounterRng rng(key);
  for (std::int64_t x = window.lo; x <= window.hi; ++x) {
    const double rho = x <= 0 ? tp.rho_minus : tp.rho_plus;
    state.set_occupied(x, rng.uniform(Stream::InitialOccupancy, signed_coordinate(x)) < rho);
  }
  return state;
}

inline std::int64_t observer_site(double y, double t) { return static_cast<std::int64_t>(std::floor(y * t)); }

/// J_{[yt],t} = (h_t([yt]) - [yt]) / 2 for a state already at time t.
inline std::int64_t current_at(const TasepState& state, double y, double t) {
  detail::require(std::abs(state.clock() - t) <= 1e-12 * std::max(1.0, t), "current_at: state is not at time t");
  const std::int64_t j = observer_site(y, t);
  const std::int64_t h = state.height(j);
  if (((h - j) % 2 + 2) % 2 != 0) throw ParityError("current_at: h_t(j) - j is odd");
  return (h - j) / 2;
}

/// Height h_t(j) of one replica started from two-sided Bernoulli data.
inline std::int64_t sample_height(const TasepParams& tp, const LatticeWindow& window, const StreamKey& key, double t,
                                  std::int64_t j) {
  TasepState s = init_two_sided(tp, window, key);
  s.watch_heights(j, j);
  s.step_to_time(t);
  return s.height(j);
}

} // namespace fluctlab
