#include <algorithm>
#include <cmath>
#include <limits>

#include "gkdv/functionals.hpp"

namespace gkdv {

SlackRule SlackRule::absolute(double epsilon, MonotoneCheck check) {
  if (!(epsilon >= 0.0)) throw InvalidArgument("SlackRule: epsilon must be non-negative");
  SlackRule r;
  r.check = check;
  r.floor = epsilon;
  return r;
}

SlackRule SlackRule::integrated(std::vector<double> density, double floor, MonotoneCheck check) {
  if (!(floor >= 0.0)) throw InvalidArgument("SlackRule: floor must be non-negative");
  SlackRule r;
  r.check = check;
  r.floor = floor;
  r.density = std::move(density);
  return r;
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& t,
                                         const std::vector<double>& y) {
  if (t.size() != y.size()) throw InvalidArgument("cumulative_trapezoid: size mismatch");
  std::vector<double> out(t.size(), 0.0);
  for (std::size_t i = 1; i < t.size(); ++i)
    out[i] = out[i - 1] + 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
  return out;
}

MonotonicityReport check_monotone_values(const std::string& name, const std::vector<double>& t,
                                         const std::vector<double>& x, const SlackRule& rule) {
  if (t.size() != x.size()) throw InvalidArgument("check_monotone: size mismatch");
  if (!rule.density.empty() && rule.density.size() != t.size())
    throw InvalidArgument("check_monotone: slack density length differs from series");
  MonotonicityReport rep;
  rep.channel = name;
  rep.bound = rule.floor;
  const std::size_t n = t.size();
  const std::vector<double> C =
      rule.density.empty() ? std::vector<double>(n, 0.0) : cumulative_trapezoid(t, rule.density);

  double worst = -std::numeric_limits<double>::infinity();
  std::size_t at = 0;
  auto consider = [&](double v, std::size_t j) {
    if (!std::isfinite(v)) v = std::numeric_limits<double>::infinity();
    if (v > worst) {
      worst = v;
      at = j;
    }
  };
  switch (rule.check) {
    case MonotoneCheck::stepwise:
      for (std::size_t i = 0; i + 1 < n; ++i) consider(x[i + 1] - x[i] - (C[i + 1] - C[i]), i + 1);
      break;
    case MonotoneCheck::anchored:
      for (std::size_t j = 1; j < n; ++j) consider(x[j] - x[0] - C[j], j);
      break;
    case MonotoneCheck::cumulative: {
      // Running minimum of X_i - C_i over i < j.
      double low = n ? x[0] - C[0] : 0.0;
      for (std::size_t j = 1; j < n; ++j) {
        consider(x[j] - C[j] - low, j);
        if (std::isfinite(x[j])) low = std::min(low, x[j] - C[j]);
      }
      break;
    }
  }
  if (n < 2) worst = 0.0;
  rep.max_violation = worst;
  rep.worst_time = n ? t[at] : 0.0;
  rep.pass = worst <= rule.floor;
  return rep;
}

MonotonicityReport check_monotone(const FunctionalSeries& series, const std::string& channel,
                                  const SlackRule& rule) {
  return check_monotone_values(channel, series.times, series.channel(channel), rule);
}

namespace {

/// Calls visit(i, j) for every pair the check compares.
template <class Visit>
void for_each_pair(std::size_t n, MonotoneCheck check, Visit visit) {
  switch (check) {
    case MonotoneCheck::stepwise:
      for (std::size_t i = 0; i + 1 < n; ++i) visit(i, i + 1);
      break;
    case MonotoneCheck::anchored:
      for (std::size_t j = 1; j < n; ++j) visit(0, j);
      break;
    case MonotoneCheck::cumulative:
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) visit(i, j);
      break;
  }
}

/// Integral of a sampled density between two samples. Late intervals of a
/// decaying density are taken from the tail sums, which keep their relative
/// precision after the running total has saturated.
class IntervalIntegral {
 public:
  IntervalIntegral(const std::vector<double>& t, const std::vector<double>& w)
      : head_(cumulative_trapezoid(t, w)), tail_(head_.size(), 0.0) {
    for (std::size_t k = head_.size(); k-- > 1;)
      tail_[k - 1] = tail_[k] + 0.5 * (t[k] - t[k - 1]) * (w[k] + w[k - 1]);
  }

  double operator()(std::size_t i, std::size_t j) const {
    return tail_[i] < head_[j] ? tail_[i] - tail_[j] : head_[j] - head_[i];
  }

 private:
  std::vector<double> head_;
  std::vector<double> tail_;
};

}  // namespace

double minimal_slack_constant(const std::vector<double>& t, const std::vector<double>& x,
                              const std::vector<double>& w, double floor, MonotoneCheck check) {
  if (t.size() != x.size() || t.size() != w.size())
    throw InvalidArgument("minimal_slack_constant: size mismatch");
  const IntervalIntegral W(t, w);
  constexpr double inf = std::numeric_limits<double>::infinity();
  double best = 0.0;
  for_each_pair(t.size(), check, [&](std::size_t i, std::size_t j) {
    const double excess = x[j] - x[i] - floor;
    if (!std::isfinite(excess)) {
      best = inf;
      return;
    }
    if (excess <= 0.0) return;
    const double dW = W(i, j);
    best = std::max(best, dW > 0.0 ? excess / dW : inf);
  });
  return best;
}

double max_dissipation_rate(const std::vector<double>& t, const std::vector<double>& x,
                            const std::vector<double>& w, const std::vector<double>& d,
                            double floor) {
  if (t.size() != x.size() || t.size() != w.size() || t.size() != d.size())
    throw InvalidArgument("max_dissipation_rate: size mismatch");
  const IntervalIntegral W(t, w);
  const IntervalIntegral D(t, d);
  constexpr double inf = std::numeric_limits<double>::infinity();
  double kappa = inf;
  for_each_pair(t.size(), MonotoneCheck::cumulative, [&](std::size_t i, std::size_t j) {
    // x_j - x_i - (W_j - W_i) + kappa (D_j - D_i) <= floor.
    const double room = floor - (x[j] - x[i]) + W(i, j);
    const double dD = D(i, j);
    if (!std::isfinite(room)) {
      kappa = -inf;
      return;
    }
    if (dD > 0.0)
      kappa = std::min(kappa, room / dD);
    else if (room < 0.0)
      kappa = -inf;
  });
  return kappa;
}

}  // namespace gkdv
