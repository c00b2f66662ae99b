#pragma once

// One-dimensional quadrature used by the spectrum engine.
//
// integrate_gk21: globally adaptive 10/21-point Gauss-Kronrod (QUADPACK QAG
// strategy: always bisect the interval with the largest error estimate) over a
// union of segments.
// integrate_gauss_legendre: fixed composite 20-point Gauss-Legendre; no
// adaptivity, used as a reproducibility fallback.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <queue>
#include <span>
#include <utility>
#include <vector>

namespace feshrf {

struct Segment {
  double lo;
  double hi;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  std::size_t evaluations = 0;
  std::size_t intervals = 0;
  bool converged = false;
};

namespace detail {

// Kronrod abscissae on [0, 1]; odd entries (1, 3, ..., 9) are the 10-point Gauss nodes.
inline constexpr std::array<double, 11> kGk21Nodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> kGk21KronrodWeights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> kGk21GaussWeights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct RuleEstimate {
  double value;
  double error;
};

template <class F>
RuleEstimate gk21(F& f, double lo, double hi) {
  const double centre = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(centre);
  double kronrod = fc * kGk21KronrodWeights[10];
  double gauss = 0.0;
  double abs_sum = std::abs(kronrod);
  std::array<double, 10> f_lo{};
  std::array<double, 10> f_hi{};
  for (std::size_t j = 0; j < 10; ++j) {
    const double dx = half * kGk21Nodes[j];
    const double a = f(centre - dx);
    const double b = f(centre + dx);
    f_lo[j] = a;
    f_hi[j] = b;
    kronrod += kGk21KronrodWeights[j] * (a + b);
    abs_sum += kGk21KronrodWeights[j] * (std::abs(a) + std::abs(b));
    if (j % 2 == 1) gauss += kGk21GaussWeights[j / 2] * (a + b);
  }
  const double mean = 0.5 * kronrod;
  double asc = kGk21KronrodWeights[10] * std::abs(fc - mean);
  for (std::size_t j = 0; j < 10; ++j) {
    asc += kGk21KronrodWeights[j] * (std::abs(f_lo[j] - mean) + std::abs(f_hi[j] - mean));
  }
  const double scale = std::abs(half);
  double err = std::abs((kronrod - gauss) * half);
  asc *= scale;
  abs_sum *= scale;
  // QUADPACK error heuristic.
  if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (abs_sum > std::numeric_limits<double>::min() / (50.0 * eps)) {
    err = std::max(50.0 * eps * abs_sum, err);
  }
  return {kronrod * half, err};
}

// Nodes/weights of the n-point Gauss-Legendre rule on [-1, 1] by Newton iteration.
template <std::size_t N>
struct GaussLegendre {
  std::array<double, N> nodes{};
  std::array<double, N> weights{};
  GaussLegendre() {
    for (std::size_t i = 0; i < N; ++i) {
      double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(N) + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0;
        double p1 = x;
        for (std::size_t k = 2; k <= N; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
          p0 = p1;
          p1 = p2;
        }
        dp = static_cast<double>(N) * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[i] = x;
      weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

template <std::size_t N>
const GaussLegendre<N>& gauss_legendre_rule() {
  static const GaussLegendre<N> rule;
  return rule;
}

}  // namespace detail

// Adaptive integration of f over the union of `segments`. Stops when the summed
// error estimate is below max(abs_tol, rel_tol*|I|) or max_intervals is reached
// (converged = false in that case).
template <class F>
QuadratureResult integrate_gk21(F&& f, std::span<const Segment> segments, double abs_tol,
                                double rel_tol, std::size_t max_intervals) {
  struct Piece {
    double lo, hi, value, error;
  };
  auto worse = [](const Piece& a, const Piece& b) { return a.error < b.error; };
  std::priority_queue<Piece, std::vector<Piece>, decltype(worse)> queue(worse);

  QuadratureResult result;
  double total = 0.0;
  double total_err = 0.0;
  for (const auto& seg : segments) {
    if (!(seg.hi > seg.lo)) continue;
    const auto est = detail::gk21(f, seg.lo, seg.hi);
    result.evaluations += 21;
    queue.push({seg.lo, seg.hi, est.value, est.error});
    total += est.value;
    total_err += est.error;
  }
  auto tolerance = [&] { return std::max(abs_tol, rel_tol * std::abs(total)); };
  while (!queue.empty() && total_err > tolerance() && queue.size() < max_intervals) {
    const Piece worst = queue.top();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) break;  // interval at floating resolution
    queue.pop();
    const auto left = detail::gk21(f, worst.lo, mid);
    const auto right = detail::gk21(f, mid, worst.hi);
    result.evaluations += 42;
    queue.push({worst.lo, mid, left.value, left.error});
    queue.push({mid, worst.hi, right.value, right.error});
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
  }

  // Final sum in interval order, independent of queue history.
  std::vector<Piece> pieces;
  pieces.reserve(queue.size());
  while (!queue.empty()) {
    pieces.push_back(queue.top());
    queue.pop();
  }
  std::sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) { return a.lo < b.lo; });
  result.value = 0.0;
  result.abs_error = 0.0;
  for (const auto& p : pieces) {
    result.value += p.value;
    result.abs_error += p.error;
  }
  result.intervals = pieces.size();
  result.converged = result.abs_error <= std::max(abs_tol, rel_tol * std::abs(result.value));
  return result;
}

// Composite 20-point Gauss-Legendre with `panels` equal panels per segment.
template <class F>
QuadratureResult integrate_gauss_legendre(F&& f, std::span<const Segment> segments, std::size_t panels) {
  const auto& rule = detail::gauss_legendre_rule<20>();
  QuadratureResult result;
  panels = std::max<std::size_t>(panels, 1);
  for (const auto& seg : segments) {
    if (!(seg.hi > seg.lo)) continue;
    const double width = (seg.hi - seg.lo) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
      const double lo = seg.lo + width * static_cast<double>(p);
      const double half = 0.5 * width;
      const double centre = lo + half;
      double sum = 0.0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        sum += rule.weights[i] * f(centre + half * rule.nodes[i]);
      }
      result.value += sum * half;
      result.evaluations += rule.nodes.size();
    }
    result.intervals += panels;
  }
  result.abs_error = std::numeric_limits<double>::quiet_NaN();
  result.converged = true;
  return result;
}

}  // namespace feshrf
