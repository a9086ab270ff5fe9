#include "wlmc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace wlmc::quadrature {

namespace {

// 15-point Kronrod nodes (positive half) and weights; Gauss-7 reuses the
// odd-indexed nodes.
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct Panel {
  double a, b;
  double value;   // Kronrod estimate
  double error;
};

Panel eval_panel(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fk = 0.0, fg = 0.0;
  for (int i = 0; i < 8; ++i) {
    double fv;
    if (i == 7) {
      fv = f(c);
    } else {
      fv = f(c - h * kXgk[i]) + f(c + h * kXgk[i]);
    }
    fk += kWgk[i] * fv;
    if (i % 2 == 1) fg += kWg[i / 2] * fv;
  }
  Panel p;
  p.a = a;
  p.b = b;
  p.value = fk * h;
  const double diff = std::abs(fk - fg) * h;
  // quadpack-style conservative error model
  p.error = diff > 0.0 ? std::min(diff, std::pow(200.0 * diff, 1.5)) : 0.0;
  if (p.error < std::abs(p.value) * 1e-15) p.error = std::abs(p.value) * 1e-15;
  return p;
}

}  // namespace

Result integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol, double abs_tol, int max_intervals) {
  auto cmp = [](const Panel& x, const Panel& y) { return x.error < y.error; };
  std::priority_queue<Panel, std::vector<Panel>, decltype(cmp)> queue(cmp);
  queue.push(eval_panel(f, a, b));
  double total = queue.top().value;
  double total_err = queue.top().error;
  long evals = 15;
  int n = 1;
  while (total_err > std::max(abs_tol, rel_tol * std::abs(total))) {
    if (n >= max_intervals) {
      throw numerical_error("adaptive quadrature: interval budget exhausted", total, total_err);
    }
    Panel worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw numerical_error("adaptive quadrature: interval underflow", total, total_err);
    }
    Panel left = eval_panel(f, worst.a, mid);
    Panel right = eval_panel(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    evals += 30;
    ++n;
  }
  return Result{total, total_err, evals};
}

Result integrate_half_line(const std::function<double(double)>& f,
                           double rel_tol, double abs_tol, int max_intervals) {
  auto g = [&f](double t) {
    const double u = 1.0 - t;
    const double x = t / u;
    return f(x) / (u * u);
  };
  // stop a hair short of t=1; the Jacobian blows up but integrands here decay
  return integrate(g, 0.0, 1.0 - 1e-14, rel_tol, abs_tol, max_intervals);
}

namespace {

// Symmetric tridiagonal QL with implicit shifts (EISPACK tql2), tracking only
// the first component of each eigenvector, which is all Golub-Welsch needs.
void tql2_first_component(std::vector<double>& d, std::vector<double>& e,
                          std::vector<double>& q0) {
  const int n = static_cast<int>(d.size());
  q0.assign(n, 0.0);
  std::vector<std::vector<double>> z(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) z[i][i] = 1.0;
  e.push_back(0.0);
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= 1e-300 + dd * 2.3e-16) break;
      }
      if (m != l) {
        if (iter++ == 50) throw std::runtime_error("gauss_laguerre: eigen iteration failed");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + (g >= 0 ? std::abs(r) : -std::abs(r)));
        double s = 1.0, c = 1.0, p = 0.0;
        for (int i = m - 1; i >= l; --i) {
          double fi = s * e[i];
          const double b = c * e[i];
          r = std::hypot(fi, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = fi / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (int k = 0; k < n; ++k) {
            fi = z[k][i + 1];
            z[k][i + 1] = s * z[k][i] + c * fi;
            z[k][i] = c * z[k][i] - s * fi;
          }
        }
        if (r == 0.0 && m - 1 >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  // sort ascending, carry first components
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&d](int a, int b) { return d[a] < d[b]; });
  std::vector<double> ds(n);
  for (int i = 0; i < n; ++i) {
    ds[i] = d[idx[i]];
    q0[i] = z[0][idx[i]];
  }
  d = ds;
}

}  // namespace

GaussRule gauss_laguerre(int n, double alpha) {
  if (n < 1 || alpha <= -1.0) throw std::invalid_argument("gauss_laguerre: bad parameters");
  std::vector<double> d(n), e(n > 1 ? n - 1 : 0);
  for (int k = 0; k < n; ++k) d[k] = 2.0 * k + alpha + 1.0;
  for (int k = 1; k < n; ++k) e[k - 1] = std::sqrt(k * (k + alpha));
  std::vector<double> q0;
  tql2_first_component(d, e, q0);
  const double mu0 = std::tgamma(alpha + 1.0);
  GaussRule rule;
  rule.nodes = d;
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) rule.weights[i] = mu0 * q0[i] * q0[i];
  return rule;
}

}  // namespace wlmc::quadrature
