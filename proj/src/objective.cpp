#include "mpgsa/objective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace mpgsa {

namespace {

double sign_or_zero(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Sign used by a piece: zero entries are taken with +1.
signed char piece_sign(double v) { return v < 0.0 ? -1 : 1; }

ActivePiece make_piece(const Matrix& x, std::vector<Index> support,
                       double lambda) {
  ActivePiece piece;
  piece.gradient = Matrix::Zero(x.rows(), x.cols());
  piece.signs.reserve(support.size());
  double sum = 0.0;
  for (Index idx : support) {
    const signed char s = piece_sign(x.data()[idx]);
    piece.signs.push_back(s);
    piece.gradient.data()[idx] = lambda * s;
    sum += s * x.data()[idx];
  }
  piece.value = lambda * sum;
  piece.support = std::move(support);
  return piece;
}

// Calls visit(combination) for every m-subset of [0, count) in lexicographic
// order; stops early when visit returns false.
template <typename Visit>
bool for_each_combination(std::size_t count, std::size_t m, Visit&& visit) {
  if (m > count) return true;
  std::vector<std::size_t> comb(m);
  std::iota(comb.begin(), comb.end(), 0);
  while (true) {
    if (!visit(comb)) return false;
    std::size_t i = m;
    while (i > 0 && comb[i - 1] == count - m + (i - 1)) --i;
    if (i == 0) return true;
    ++comb[i - 1];
    for (std::size_t j = i; j < m; ++j) comb[j] = comb[j - 1] + 1;
  }
}

void check_k(const Matrix& x, Index k) {
  if (k < 1 || k > x.size()) {
    throw std::invalid_argument("top-K: K must satisfy 1 <= K <= " +
                                std::to_string(x.size()));
  }
}

}  // namespace

// --- h1 -----------------------------------------------------------------------

L1Norm::L1Norm(double lambda) : lambda_(lambda) {
  if (lambda < 0.0) throw std::invalid_argument("L1Norm: negative weight");
}

double L1Norm::value(const Matrix& x) const { return l1_value(x, lambda_); }

Matrix L1Norm::prox(const Matrix& z, double scale) const {
  return l1_prox(z, scale * lambda_);
}

double L1Norm::lipschitz(Index size) const {
  return lambda_ * std::sqrt(static_cast<double>(size));
}

double l1_value(const Matrix& x, double lambda) {
  return lambda * x.cwiseAbs().sum();
}

Matrix l1_prox(const Matrix& z, double scale) {
  if (scale < 0.0) throw std::invalid_argument("l1_prox: negative scale");
  return z.unaryExpr([scale](double v) {
    const double a = std::abs(v) - scale;
    return a > 0.0 ? std::copysign(a, v) : 0.0;
  });
}

// --- h2 -----------------------------------------------------------------------

PieceCapExceeded::PieceCapExceeded(std::vector<ActivePiece> partial,
                                   std::size_t cap)
    : std::runtime_error("active-piece enumeration exceeded cap of " +
                         std::to_string(cap)),
      partial_(std::move(partial)) {}

std::vector<ActivePiece> ZeroMax::active_pieces(const Matrix& x, double,
                                                std::size_t) const {
  ActivePiece piece;
  piece.gradient = Matrix::Zero(x.rows(), x.cols());
  return {piece};
}

TopKNorm::TopKNorm(Index k, double lambda) : k_(k), lambda_(lambda) {
  if (k < 1) throw std::invalid_argument("TopKNorm: K must be >= 1");
  if (lambda < 0.0) throw std::invalid_argument("TopKNorm: negative weight");
}

double TopKNorm::value(const Matrix& x) const {
  return topk_value(x, k_, lambda_);
}

Matrix TopKNorm::subgradient(const Matrix& x) const {
  return topk_subgradient(x, k_, lambda_);
}

std::vector<ActivePiece> TopKNorm::active_pieces(const Matrix& x, double eta,
                                                 std::size_t cap) const {
  return topk_active_pieces(x, k_, lambda_, eta, cap);
}

std::vector<Index> magnitude_order(const Matrix& x) {
  std::vector<Index> order(static_cast<std::size_t>(x.size()));
  std::iota(order.begin(), order.end(), Index{0});
  const double* d = x.data();
  std::stable_sort(order.begin(), order.end(), [d](Index a, Index b) {
    return std::abs(d[a]) > std::abs(d[b]);
  });
  return order;
}

double topk_value(const Matrix& x, Index k, double lambda) {
  check_k(x, k);
  std::vector<double> mags(x.data(), x.data() + x.size());
  for (double& m : mags) m = std::abs(m);
  std::nth_element(mags.begin(), mags.begin() + (k - 1), mags.end(),
                   std::greater<>());
  // nth_element leaves the k largest in front (unordered).
  double sum = 0.0;
  for (Index i = 0; i < k; ++i) sum += mags[static_cast<std::size_t>(i)];
  return lambda * sum;
}

Matrix topk_subgradient(const Matrix& x, Index k, double lambda) {
  check_k(x, k);
  const auto order = magnitude_order(x);
  Matrix z = Matrix::Zero(x.rows(), x.cols());
  for (Index i = 0; i < k; ++i) {
    const Index idx = order[static_cast<std::size_t>(i)];
    z.data()[idx] = lambda * sign_or_zero(x.data()[idx]);
  }
  return z;
}

std::vector<ActivePiece> topk_active_pieces(const Matrix& x, Index k,
                                            double lambda, double eta,
                                            std::size_t cap) {
  check_k(x, k);
  if (eta <= 0.0) throw std::invalid_argument("topk_active_pieces: eta <= 0");
  if (cap < 1) throw std::invalid_argument("topk_active_pieces: cap < 1");

  const auto order = magnitude_order(x);
  const std::vector<Index> selected(order.begin(), order.begin() + k);
  std::vector<ActivePiece> pieces;
  pieces.push_back(make_piece(x, selected, lambda));
  if (lambda == 0.0) return pieces;

  const double* d = x.data();
  const double kth = std::abs(d[selected.back()]);
  const double band = eta / lambda;

  // Swap candidates: selected entries that could leave and unselected
  // entries that could enter while the deficit stays below eta / lambda.
  std::vector<std::size_t> leave;  // positions within `selected`
  for (std::size_t i = 0; i < selected.size(); ++i)
    if (std::abs(d[selected[i]]) - kth < band) leave.push_back(i);
  std::vector<Index> enter;
  for (std::size_t i = static_cast<std::size_t>(k); i < order.size(); ++i) {
    if (kth - std::abs(d[order[i]]) < band) enter.push_back(order[i]);
    else break;  // order is by decreasing magnitude
  }

  const std::size_t max_swap = std::min(leave.size(), enter.size());
  for (std::size_t m = 1; m <= max_swap; ++m) {
    const bool complete = for_each_combination(
        leave.size(), m, [&](const std::vector<std::size_t>& out) {
          double out_sum = 0.0;
          for (std::size_t o : out) out_sum += std::abs(d[selected[leave[o]]]);
          return for_each_combination(
              enter.size(), m, [&](const std::vector<std::size_t>& in) {
                double in_sum = 0.0;
                for (std::size_t i : in) in_sum += std::abs(d[enter[i]]);
                if (out_sum - in_sum >= band) return true;
                if (pieces.size() >= cap) return false;
                std::vector<Index> support;
                support.reserve(selected.size());
                std::size_t next_out = 0;
                for (std::size_t s = 0; s < selected.size(); ++s) {
                  if (next_out < out.size() && leave[out[next_out]] == s) {
                    ++next_out;
                    continue;
                  }
                  support.push_back(selected[s]);
                }
                for (std::size_t i : in) support.push_back(enter[i]);
                pieces.push_back(make_piece(x, std::move(support), lambda));
                return true;
              });
        });
    if (!complete) throw PieceCapExceeded(std::move(pieces), cap);
  }
  return pieces;
}

// --- smooth terms -------------------------------------------------------------

TraceQuadratic::TraceQuadratic(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols())
    throw std::invalid_argument("TraceQuadratic: matrix must be square");
}

double TraceQuadratic::value(const Matrix& x) const {
  return (x.transpose() * (m_ * x)).trace();
}

Matrix TraceQuadratic::gradient(const Matrix& x) const { return 2.0 * m_ * x; }

Matrix TraceQuadratic::subgradient(const Matrix& x) const {
  Matrix mx = m_ * x;
  if ((x.transpose() * mx).trace() == 0.0)
    return Matrix::Zero(x.rows(), x.cols());
  return 2.0 * mx;
}

// --- composite ----------------------------------------------------------------

ObjectiveParts eval_parts(const CompositeProblem& problem, const Matrix& x) {
  ObjectiveParts parts;
  parts.g = problem.g->value(x);
  if (!(parts.g > 0.0)) {
    throw AssumptionViolation("g(x) must be positive on the manifold, got " +
                              std::to_string(parts.g));
  }
  parts.h1 = problem.h1->value(x);
  parts.h2 = problem.h2->value(x);
  parts.r = problem.r->value(x);
  parts.f = problem.f->value(x);
  return parts;
}

double eval_F(const CompositeProblem& problem, const Matrix& x) {
  return eval_parts(problem, x).total();
}

Matrix smooth_linearization(const CompositeProblem& problem, const Matrix& x,
                            const Matrix& y) {
  const double gx = problem.g->value(x);
  if (!(gx > 0.0)) {
    throw AssumptionViolation("g(x) must be positive on the manifold");
  }
  const double fx = problem.f->value(x);
  return problem.r->gradient(x) + (fx / (gx * gx)) * problem.g->gradient(x) -
         y / gx;
}

Matrix linearization_vector(const CompositeProblem& problem, const Matrix& x,
                            const Matrix& y, const Matrix& z) {
  return smooth_linearization(problem, x, y) - z;
}

// --- Moreau envelope ----------------------------------------------------------

Matrix moreau_envelope_grad(const ProxCapableConvex& h1, const Matrix& z,
                            double t) {
  if (!(t > 0.0)) throw std::invalid_argument("moreau_envelope_grad: t <= 0");
  return (z - h1.prox(z, t)) / t;
}

double moreau_envelope_value(const ProxCapableConvex& h1, const Matrix& z,
                             double t) {
  if (!(t > 0.0)) throw std::invalid_argument("moreau_envelope_value: t <= 0");
  Matrix p = h1.prox(z, t);
  return h1.value(p) + (p - z).squaredNorm() / (2.0 * t);
}

}  // namespace mpgsa
