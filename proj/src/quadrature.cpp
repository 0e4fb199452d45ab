#include "isslab/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

namespace isslab {

namespace {

constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes (1,3,5,7).
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  int depth;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel kronrod_panel(const std::function<double(double)>& f, double a, double b, int depth, int& evals) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kKronrodNodes[i];
    const double s = f(c - dx) + f(c + dx);
    kronrod += kKronrodWeights[i] * s;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * s;
  }
  evals += 15;
  return {a, b, kronrod * h, std::abs((kronrod - gauss) * h), depth};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                           double abs_tol, int max_depth) {
  if (!(b >= a)) throw std::invalid_argument("integrate: interval must satisfy a <= b");
  if (a == b) return {};
  int evals = 0;
  std::priority_queue<Panel> heap;
  heap.push(kronrod_panel(f, a, b, 0, evals));
  double value = heap.top().value, error = heap.top().error;
  std::vector<Panel> finished;
  constexpr int kMaxPanels = 20000;
  while (!heap.empty() && error > std::max(abs_tol, rel_tol * std::abs(value)) &&
         static_cast<int>(heap.size() + finished.size()) < kMaxPanels) {
    Panel p = heap.top();
    heap.pop();
    if (p.depth >= max_depth) {
      finished.push_back(p);
      continue;
    }
    const double m = 0.5 * (p.a + p.b);
    Panel l = kronrod_panel(f, p.a, m, p.depth + 1, evals);
    Panel r = kronrod_panel(f, m, p.b, p.depth + 1, evals);
    value += l.value + r.value - p.value;
    error += l.error + r.error - p.error;
    heap.push(l);
    heap.push(r);
  }
  // Re-sum in interval order so the result does not depend on heap layout.
  while (!heap.empty()) {
    finished.push_back(heap.top());
    heap.pop();
  }
  std::sort(finished.begin(), finished.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
  QuadratureResult out;
  for (const Panel& p : finished) {
    out.value += p.value;
    out.error += p.error;
  }
  out.evaluations = evals;
  return out;
}

QuadratureResult integrate_split(const std::function<double(double)>& f, double a, double b,
                                 std::span<const double> points, double rel_tol, double abs_tol) {
  std::vector<double> cuts{a};
  for (double p : points)
    if (p > a && p < b) cuts.push_back(p);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  QuadratureResult total;
  // Each panel gets the relative target on its own value; the sum inherits it.
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const QuadratureResult r = integrate(f, cuts[i], cuts[i + 1], rel_tol, abs_tol);
    total.value += r.value;
    total.error += r.error;
    total.evaluations += r.evaluations;
  }
  return total;
}

GaussRule gauss_legendre(int n) {
  static const std::array<double, 1> n1{0.0}, w1{2.0};
  static const std::array<double, 2> n2{-0.5773502691896257645, 0.5773502691896257645}, w2{1.0, 1.0};
  static const std::array<double, 3> n3{-0.7745966692414833770, 0.0, 0.7745966692414833770},
      w3{0.5555555555555555556, 0.8888888888888888889, 0.5555555555555555556};
  static const std::array<double, 4> n4{-0.8611363115940525752, -0.3399810435848562648,
                                        0.3399810435848562648, 0.8611363115940525752},
      w4{0.3478548451374538574, 0.6521451548625461426, 0.6521451548625461426, 0.3478548451374538574};
  static const std::array<double, 5> n5{-0.9061798459386639928, -0.5384693101056830910, 0.0,
                                        0.5384693101056830910, 0.9061798459386639928},
      w5{0.2369268850561890875, 0.4786286704993664680, 0.5688888888888888889, 0.4786286704993664680,
         0.2369268850561890875};
  switch (n) {
    case 1: return {n1, w1};
    case 2: return {n2, w2};
    case 3: return {n3, w3};
    case 4: return {n4, w4};
    case 5: return {n5, w5};
    default: throw std::invalid_argument("gauss_legendre: supported orders are 1..5");
  }
}

}  // namespace isslab
