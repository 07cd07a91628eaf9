#include "pentapulse/eigenstructure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pentapulse/error.hpp"

namespace pentapulse {

Mat5 build_hamiltonian(const Detuning4& d, const Field4& w) {
  Mat5 h = Mat5::Zero();
  for (int i = 0; i < kTransitions; ++i) {
    h(i + 1, i + 1) = d[i];
    h(i, i + 1) = -w[i];
    h(i + 1, i) = -std::conj(w[i]);
  }
  return h;
}

Mat5 build_hamiltonian(const Detuning4& d, const Rabi4& rabi) {
  return build_hamiltonian(d, Field4{rabi[0], rabi[1], rabi[2], rabi[3]});
}

Mat5 build_hamiltonian(const PulseSet& pulses, double tau) {
  return build_hamiltonian(pulses.multiphoton(), pulses.rabi(tau));
}

double hamiltonian_norm_bound(const Detuning4& d, const Field4& w) {
  double bound = 0.0;
  for (int k = 0; k < kLevels; ++k) {
    double row = k == 0 ? 0.0 : std::abs(d[k - 1]);
    if (k > 0) row += std::abs(w[k - 1]);
    if (k < kTransitions) row += std::abs(w[k]);
    bound = std::max(bound, row);
  }
  return bound;
}

CharPolyParams char_poly_params(const Rabi4& r) {
  const double a = r[0] * r[0];
  const double b = r[1] * r[1];
  const double c = r[2] * r[2];
  const double d = r[3] * r[3];
  CharPolyParams p;
  p.omega_s2 = a + b + c + d;
  p.v4 = b * d + a * c + a * d;
  // Omega_s^4 - 4 V^4 rewritten as a sum of squares.
  const double u = a + b - c - d;
  const double disc = u * u + 4.0 * b * c;
  p.x2 = 0.5 * (p.omega_s2 + std::sqrt(disc));
  p.x1 = p.x2 > 0.0 ? p.v4 / p.x2 : 0.0;
  return p;
}

std::array<double, 6> char_poly_coefficients(const CharPolyParams& p, double delta) {
  return {1.0, -2.0 * delta, delta * delta - p.omega_s2, p.omega_s2 * delta, p.v4, 0.0};
}

double char_poly(double lambda, const CharPolyParams& p, double delta) {
  const double y = lambda * (lambda - delta);
  return lambda * (y * y - p.omega_s2 * y + p.v4);
}

std::array<double, 2> quadratic_pair(double delta, double x) {
  const double s = std::sqrt(delta * delta + 4.0 * x);
  if (delta >= 0.0) {
    const double hi = 0.5 * (delta + s);
    return {hi != 0.0 ? -x / hi : 0.0, hi};
  }
  const double lo = 0.5 * (delta - s);
  return {lo, -x / lo};
}

namespace {

void require_nonnegative(std::initializer_list<double> values) {
  for (double v : values) {
    if (!(v >= 0.0)) throw InvalidInput("Rabi frequencies must be nonnegative");
  }
}

Spectrum5 spectrum_from_roots(double x1, double x2, double delta) {
  const auto p1 = quadratic_pair(delta, x1);
  const auto p2 = quadratic_pair(delta, x2);
  return {0.0, p1[0], p2[0], p1[1], p2[1]};
}

}  // namespace

Spectrum5 eigenvalues_general(const Rabi4& rabi, double delta) {
  require_nonnegative({rabi[0], rabi[1], rabi[2], rabi[3]});
  const auto p = char_poly_params(rabi);
  return spectrum_from_roots(p.x1, p.x2, delta);
}

Spectrum5 eigenvalues_special(double o1, double o2, double o3, double delta) {
  require_nonnegative({o1, o2, o3});
  return spectrum_from_roots(o1 * o1, o1 * o1 + o2 * o2 + o3 * o3, delta);
}

MixingAngles mixing_angles(double o1, double o2, double o3, double delta) {
  const auto lam = eigenvalues_special(o1, o2, o3, delta);
  MixingAngles a;
  a.omega = std::hypot(o2, o3);
  a.theta = std::atan2(o2, o3);
  a.phi1 = std::atan2(-lam[1], o1);
  a.phi2 = std::atan2(-lam[2], o1);
  // tan(Phi) = -(Omega/Omega_1) cos(Phi_2) with cos(Phi_2) = Omega_1 / hypot(Omega_1, lambda_2).
  const double den = std::hypot(o1, lam[2]);
  a.phi = den > 0.0 ? std::atan2(-a.omega, den) : 0.0;
  return a;
}

Vec5 dressed_state_lambda1(const MixingAngles& a) {
  const double ct = std::cos(a.theta), st = std::sin(a.theta);
  const double c1 = std::cos(a.phi1), s1 = std::sin(a.phi1);
  Vec5 v;
  v << ct * c1, ct * s1, 0.0, -st * s1, -st * c1;
  return v;
}

Vec5 dressed_state_lambda2(const MixingAngles& a) {
  const double ct = std::cos(a.theta), st = std::sin(a.theta);
  const double c2 = std::cos(a.phi2), s2 = std::sin(a.phi2);
  const double cp = std::cos(a.phi), sp = std::sin(a.phi);
  Vec5 v;
  v << cp * st * c2, cp * st * s2, -sp, cp * ct * s2, cp * ct * c2;
  return v;
}

EigenPairs numeric_eigensolve(const Mat5& h) { return jacobi_eigensolve(h); }

namespace {

struct NodeSolution {
  Spectrum5 lambda{};
  EigenPairs numeric;
  std::array<int, kLevels> label_of_rank{};  // label assigned to ascending rank r
  std::vector<std::vector<int>> clusters;    // ranks grouped by near-degeneracy
  bool degenerate = false;
};

NodeSolution solve_node(const PulseSet& pulses, double tau, double delta) {
  NodeSolution n;
  const auto rabi = pulses.rabi(tau);
  n.lambda = eigenvalues_general(rabi, delta);
  const Mat5 h = build_hamiltonian(pulses.multiphoton(), rabi);
  n.numeric = jacobi_eigensolve(h);

  std::array<int, kLevels> labels;
  std::iota(labels.begin(), labels.end(), 0);
  std::stable_sort(labels.begin(), labels.end(),
                   [&](int i, int j) { return n.lambda[i] < n.lambda[j]; });
  n.label_of_rank = labels;

  const double tol = 1e-8 * std::max(1.0, max_abs(h));
  std::vector<int> current{0};
  for (int r = 1; r < kLevels; ++r) {
    if (n.numeric.values(r) - n.numeric.values(r - 1) <= tol) {
      current.push_back(r);
    } else {
      n.clusters.push_back(current);
      current = {r};
    }
  }
  n.clusters.push_back(current);
  n.degenerate = n.clusters.size() < static_cast<std::size_t>(kLevels);
  return n;
}

// Vectors for this node in label order, continuous with `prev` (label order).
Mat5 continue_vectors(const NodeSolution& n, const Mat5& prev, long index) {
  Mat5 out = Mat5::Zero();
  const Mat5& v = n.numeric.vectors;
  for (const auto& cluster : n.clusters) {
    if (cluster.size() == 1) {
      const int r = cluster[0];
      const int label = n.label_of_rank[r];
      const Complex ov = v.col(r).dot(prev.col(label));  // <v_r | prev>
      // Maximal-overlap matching must agree with the label assignment.
      for (int other = 0; other < kLevels; ++other) {
        if (other == r) continue;
        if (std::abs(v.col(other).dot(prev.col(label))) > std::abs(ov) + 1e-12) {
          throw NumericalError("degenerate crossing: branch " + std::to_string(label) +
                                   " cannot be matched unambiguously",
                               index);
        }
      }
      const double mag = std::abs(ov);
      out.col(label) = mag > 0.0 ? Vec5(v.col(r) * (ov / mag)) : Vec5(v.col(r));
      continue;
    }
    // Degenerate subspace: project the previous vectors and orthonormalize.
    Eigen::Matrix<Complex, 5, Eigen::Dynamic> basis(5, cluster.size());
    for (std::size_t c = 0; c < cluster.size(); ++c) basis.col(c) = v.col(cluster[c]);
    std::vector<int> labels;
    for (int r : cluster) labels.push_back(n.label_of_rank[r]);
    std::vector<Vec5> done;
    for (int label : labels) {
      Vec5 p = basis * (basis.adjoint() * prev.col(label));
      for (const auto& q : done) p -= q * q.dot(p);
      const double norm = p.norm();
      if (norm < 1e-6) {
        throw NumericalError("degenerate crossing: projected branch " + std::to_string(label) +
                                 " vanished",
                             index);
      }
      p /= norm;
      done.push_back(p);
      out.col(label) = p;
    }
  }
  return out;
}

Mat5 fresh_vectors(const NodeSolution& n) {
  Mat5 out;
  for (int r = 0; r < kLevels; ++r) out.col(n.label_of_rank[r]) = n.numeric.vectors.col(r);
  return out;
}

}  // namespace

std::vector<EigenSystem> track_eigenvectors(const PulseSet& pulses, const Grid& grid) {
  grid.validate();
  if (!pulses.resonant(1e-12 * std::max(1.0, std::abs(pulses.delta())))) {
    throw RegimeError("track_eigenvectors requires two-photon resonance");
  }
  const double delta = pulses.delta();
  const std::size_t n = grid.n_tau;
  std::vector<NodeSolution> nodes;
  nodes.reserve(n);
  std::size_t start = n;
  for (std::size_t k = 0; k < n; ++k) {
    nodes.push_back(solve_node(pulses, grid.tau(k), delta));
    if (start == n && !nodes.back().degenerate) start = k;
  }

  std::vector<EigenSystem> out(n);
  auto fill = [&](std::size_t k, const Mat5& vecs) {
    const auto rabi = pulses.rabi(grid.tau(k));
    out[k].tau = grid.tau(k);
    out[k].lambda = nodes[k].lambda;
    out[k].vectors = vecs;
    out[k].mixing = mixing_angles(rabi[0], rabi[1], rabi[2], delta);
  };

  if (start == n) {
    // Fields never lift the degeneracy: bare states throughout.
    for (std::size_t k = 0; k < n; ++k) fill(k, fresh_vectors(nodes[k]));
    return out;
  }
  fill(start, fresh_vectors(nodes[start]));
  for (std::size_t k = start + 1; k < n; ++k) {
    fill(k, continue_vectors(nodes[k], out[k - 1].vectors, static_cast<long>(k)));
  }
  for (std::size_t k = start; k-- > 0;) {
    fill(k, continue_vectors(nodes[k], out[k + 1].vectors, static_cast<long>(k)));
  }
  return out;
}

}  // namespace pentapulse
