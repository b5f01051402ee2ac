#pragma once

#include <cstdint>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "nocollide/geometry.hpp"

namespace nocollide::detail {

// Network simplex for the dense balanced transportation problem with
// squared Euclidean arc costs, computed on the fly from the point
// coordinates. Nodes 0..n-1 are sources, n..n+m-1 targets, n+m the root.
// Real arc (i, j) has id i*m + j and direction source -> target; each
// non-root node also has an artificial arc to/from the root used for the
// initial basis. Pivoting uses block search with Cunningham's strongly
// feasible tie-breaking on the leaving arc.
class TransportSimplex {
 public:
  TransportSimplex(const std::vector<Vec2>& src, const std::vector<double>& src_w,
                   const std::vector<Vec2>& tgt, const std::vector<double>& tgt_w)
      : n_(static_cast<int>(src.size())), m_(static_cast<int>(tgt.size())) {
    if (n_ == 0 || m_ == 0) throw std::invalid_argument("transport: empty cloud");
    V_ = n_ + m_ + 1;
    E_ = static_cast<std::int64_t>(n_) * m_;
    sx_.resize(n_); sy_.resize(n_);
    tx_.resize(m_); ty_.resize(m_);
    for (int i = 0; i < n_; ++i) { sx_[i] = src[i].x; sy_[i] = src[i].y; }
    for (int j = 0; j < m_; ++j) { tx_[j] = tgt[j].x; ty_[j] = tgt[j].y; }

    double max_cost = 0.0;
    {
      double lox = sx_[0], hix = sx_[0], loy = sy_[0], hiy = sy_[0];
      for (int i = 0; i < n_; ++i) {
        lox = std::min(lox, sx_[i]); hix = std::max(hix, sx_[i]);
        loy = std::min(loy, sy_[i]); hiy = std::max(hiy, sy_[i]);
      }
      for (int j = 0; j < m_; ++j) {
        lox = std::min(lox, tx_[j]); hix = std::max(hix, tx_[j]);
        loy = std::min(loy, ty_[j]); hiy = std::max(hiy, ty_[j]);
      }
      double dx = hix - lox, dy = hiy - loy;
      max_cost = dx * dx + dy * dy;
    }
    art_cost_ = (max_cost + 1.0) * V_;
    eps_ = (max_cost + 1.0) * 1e-13;
    // Float-phase threshold at the float noise floor of the real costs.
    // Arcs hidden behind large artificial potentials surface once those
    // drain; whatever float cannot see is left to the exact endgame.
    eps_float_ = static_cast<float>(std::max(eps_, (max_cost + 1.0) * 3e-6));
    rows_per_block_ =
        std::clamp(static_cast<int>(3.0 * std::sqrt(static_cast<double>(E_)) / m_ + 0.5), 2, n_);

    ftx_.resize(m_); fty_.resize(m_); fpi_t_.resize(m_);
    for (int j = 0; j < m_; ++j) { ftx_[j] = static_cast<float>(tx_[j]); fty_[j] = static_cast<float>(ty_[j]); }

    state_.assign(static_cast<std::size_t>(E_), 1);  // all real arcs at lower bound
    parent_.assign(V_, -1);
    pred_arc_.assign(V_, -1);
    dir_.assign(V_, 0);
    flow_.assign(V_, 0.0);
    pi_.assign(V_, 0.0);
    first_child_.assign(V_, -1);
    next_sib_.assign(V_, -1);
    prev_sib_.assign(V_, -1);
    mark_.assign(V_, 0);

    const int root = V_ - 1;
    pi_[root] = 0.0;
    for (int v = 0; v < V_ - 1; ++v) {
      parent_[v] = root;
      pred_arc_[v] = E_ + v;
      attach(v, root);
      if (v < n_) {
        dir_[v] = +1;  // v -> root
        flow_[v] = src_w[v];
        pi_[v] = -art_cost_;
      } else {
        dir_[v] = -1;  // root -> v
        flow_[v] = tgt_w[v - n_];
        pi_[v] = art_cost_;
        fpi_t_[v - n_] = static_cast<float>(pi_[v]);
      }
    }
    build_shortlists(src_w, tgt_w);
  }

  void run() {
    const std::int64_t pivot_cap = 1000000 + 64LL * static_cast<std::int64_t>(V_) * V_;
    std::int64_t pivots = 0;

    // Opening phase on the shortlists: most of the pivoting happens here
    // at a few dozen arc evaluations per pivot. Near-degenerate instances
    // can churn on micro-improvements, hence the sweep cap.
    for (int sweep = 0; sweep < 12; ++sweep) {
      std::int64_t done = 0;
      for (int i = 0; i < n_; ++i) {
        if (!select_in_shortlist(i)) continue;
        find_join();
        find_leaving();
        change_flow();
        update_tree();
        ++done;
      }
      pivots += done;
      if (done * 16 < n_ || pivots > pivot_cap) break;
    }

    // Main phase scans in float; once it finds nothing the exact phase
    // finishes the remaining (few) pivots with double scans.
    for (;;) {
      if (!find_entering()) {
        if (exact_phase_) break;
        exact_phase_ = true;
        next_row_ = 0;
        continue;
      }
      find_join();
      find_leaving();
      change_flow();
      update_tree();
      if (++pivots > pivot_cap) throw std::runtime_error("transport: pivot limit exceeded");
    }
    // The balanced problem is feasible, so artificial arcs must have drained.
    double feas_tol = 1e-9;
    for (int v = 0; v < V_ - 1; ++v)
      if (pred_arc_[v] >= E_ && flow_[v] > feas_tol)
        throw std::runtime_error("transport: infeasible (artificial flow remains)");
  }

  double total_cost() const {
    double c = 0.0;
    for (int v = 0; v < V_ - 1; ++v) {
      std::int64_t a = pred_arc_[v];
      if (a < E_ && flow_[v] > 0.0) c += flow_[v] * arc_cost(a);
    }
    return c;
  }

  // Visits (i, j, mass) for every positive real-arc flow.
  template <class F>
  void for_each_flow(F&& f) const {
    for (int v = 0; v < V_ - 1; ++v) {
      std::int64_t a = pred_arc_[v];
      if (a < E_ && flow_[v] > 0.0)
        f(static_cast<std::int32_t>(a / m_), static_cast<std::int32_t>(a % m_), flow_[v]);
    }
  }

 private:
  int n_, m_, V_;
  std::int64_t E_;
  std::vector<double> sx_, sy_, tx_, ty_;
  std::vector<std::int8_t> state_;  // 1 = lower, 0 = tree
  std::vector<int> parent_;
  std::vector<std::int64_t> pred_arc_;
  std::vector<std::int8_t> dir_;  // +1 when the pred arc is oriented child -> parent
  std::vector<double> flow_;     // flow on the pred arc
  std::vector<double> pi_;
  std::vector<int> first_child_, next_sib_, prev_sib_;
  std::vector<std::uint32_t> mark_;
  std::uint32_t stamp_ = 0;
  std::vector<float> ftx_, fty_, fpi_t_;  // float mirrors for the fast scan phase
  double art_cost_ = 0.0, eps_ = 0.0;
  float eps_float_ = 0.0f;
  int rows_per_block_ = 1;
  int next_row_ = 0;
  bool exact_phase_ = false;

  static constexpr int kShortlist = 24;
  std::vector<int> shortlist_;
  int shortlist_len_ = 0;

  // pivot state
  std::int64_t in_arc_ = -1;
  int u_in_ = -1, v_in_ = -1, join_ = -1, u_out_ = -1;
  bool out_on_first_ = true;
  double delta_ = 0.0;

  double cost(int i, int j) const {
    double dx = sx_[i] - tx_[j], dy = sy_[i] - ty_[j];
    return dx * dx + dy * dy;
  }
  double arc_cost(std::int64_t a) const {
    return cost(static_cast<int>(a / m_), static_cast<int>(a % m_));
  }

  void attach(int v, int p) {
    next_sib_[v] = first_child_[p];
    prev_sib_[v] = -1;
    if (first_child_[p] >= 0) prev_sib_[first_child_[p]] = v;
    first_child_[p] = v;
    parent_[v] = p;
  }

  void detach(int v) {
    int p = parent_[v];
    if (prev_sib_[v] >= 0)
      next_sib_[prev_sib_[v]] = next_sib_[v];
    else
      first_child_[p] = next_sib_[v];
    if (next_sib_[v] >= 0) prev_sib_[next_sib_[v]] = prev_sib_[v];
    parent_[v] = -1;
  }

  // Minimum masked reduced cost over one source row; tree arcs contribute
  // zero through the state multiplier, which never beats a negative
  // threshold. The reduction form lets the compiler vectorize it.
  double row_min(int i) const {
    const double px = sx_[i], py = sy_[i], pot = pi_[i];
    const double* __restrict tx = tx_.data();
    const double* __restrict ty = ty_.data();
    const double* __restrict pt = pi_.data() + n_;
    const std::int8_t* __restrict st = state_.data() + static_cast<std::size_t>(i) * m_;
    double best = 0.0;
    for (int j = 0; j < m_; ++j) {
      double dx = px - tx[j], dy = py - ty[j];
      double r = (dx * dx + dy * dy + pot - pt[j]) * st[j];
      best = r < best ? r : best;
    }
    return best;
  }

  float row_min_float(int i) const {
    const float px = static_cast<float>(sx_[i]);
    const float py = static_cast<float>(sy_[i]);
    const float pot = static_cast<float>(pi_[i]);
    const float* __restrict tx = ftx_.data();
    const float* __restrict ty = fty_.data();
    const float* __restrict pt = fpi_t_.data();
    const std::int8_t* __restrict st = state_.data() + static_cast<std::size_t>(i) * m_;
    float best = 0.0f;
    for (int j = 0; j < m_; ++j) {
      float dx = px - tx[j], dy = py - ty[j];
      float r = (dx * dx + dy * dy + pot - pt[j]) * static_cast<float>(st[j]);
      best = r < best ? r : best;
    }
    return best;
  }

  double reduced_cost(int i, int j) const {
    double dx = sx_[i] - tx_[j], dy = sy_[i] - ty_[j];
    return (dx * dx + dy * dy + pi_[i] - pi_[n_ + j]) *
           state_[static_cast<std::size_t>(i) * m_ + j];
  }

  bool select_in_row_exact(int row) {
    const double px = sx_[row], py = sy_[row], pot = pi_[row];
    const std::int8_t* st = state_.data() + static_cast<std::size_t>(row) * m_;
    int best_j = -1;
    double best_r = -eps_;
    for (int j = 0; j < m_; ++j) {
      double dx = px - tx_[j], dy = py - ty_[j];
      double r = (dx * dx + dy * dy + pot - pi_[n_ + j]) * st[j];
      if (r < best_r) { best_r = r; best_j = j; }
    }
    if (best_j < 0) return false;
    in_arc_ = static_cast<std::int64_t>(row) * m_ + best_j;
    u_in_ = row;
    v_in_ = n_ + best_j;
    return true;
  }

  // Argmin of one row. The scan runs on the float mirrors and the winner
  // is verified exactly; precision edges fall back to the double scan.
  // Returns false when nothing in the row clears the threshold (a
  // float-phase false positive).
  bool select_in_row(int row) {
    const float px = static_cast<float>(sx_[row]);
    const float py = static_cast<float>(sy_[row]);
    const float pot = static_cast<float>(pi_[row]);
    const std::int8_t* st = state_.data() + static_cast<std::size_t>(row) * m_;
    int best_j = -1;
    float best_r = -eps_float_;
    for (int j = 0; j < m_; ++j) {
      float dx = px - ftx_[j], dy = py - fty_[j];
      float r = (dx * dx + dy * dy + pot - fpi_t_[j]) * static_cast<float>(st[j]);
      if (r < best_r) { best_r = r; best_j = j; }
    }
    if (best_j >= 0 && reduced_cost(row, best_j) < -eps_) {
      in_arc_ = static_cast<std::int64_t>(row) * m_ + best_j;
      u_in_ = row;
      v_in_ = n_ + best_j;
      return true;
    }
    return select_in_row_exact(row);
  }

  // Shortlists hold the targets nearest to each source's image under the
  // Gaussian-approximation transport map (the affine map matching the
  // clouds' means and covariances), which is where optimal arcs
  // concentrate for blob-like measures.
  void build_shortlists(const std::vector<double>& sw, const std::vector<double>& tw) {
    const int k = std::min(kShortlist, m_);
    shortlist_.resize(static_cast<std::size_t>(n_) * k);
    shortlist_len_ = k;

    auto moments = [](const std::vector<double>& xs, const std::vector<double>& ys,
                      const std::vector<double>& ws, double out[5]) {
      double W = 0, mx = 0, my = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        W += ws[i];
        mx += ws[i] * xs[i];
        my += ws[i] * ys[i];
      }
      mx /= W;
      my /= W;
      double cxx = 0, cxy = 0, cyy = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        double dx = xs[i] - mx, dy = ys[i] - my;
        cxx += ws[i] * dx * dx;
        cxy += ws[i] * dx * dy;
        cyy += ws[i] * dy * dy;
      }
      out[0] = mx;
      out[1] = my;
      out[2] = cxx / W;
      out[3] = cxy / W;
      out[4] = cyy / W;
    };
    auto sqrt2x2 = [](double a, double b, double c, double r[3]) {
      // principal square root of the SPD matrix [a b; b c]
      double det = std::max(a * c - b * b, 1e-300);
      double s = std::sqrt(det);
      double t = std::sqrt(std::max(a + c + 2.0 * s, 1e-300));
      r[0] = (a + s) / t;
      r[1] = b / t;
      r[2] = (c + s) / t;
    };

    double ms[5], mt[5], rs[3];
    moments(sx_, sy_, sw, ms);
    moments(tx_, ty_, tw, mt);
    sqrt2x2(ms[2], ms[3], ms[4], rs);
    // A = inv(S) sqrt(S Sigma_t S) inv(S) with S = sqrt(Sigma_s), the
    // transport map between the moment-matched Gaussians.
    auto mul = [](const double a[3], const double b[3], double r[4]) {
      r[0] = a[0] * b[0] + a[1] * b[1];
      r[1] = a[0] * b[1] + a[1] * b[2];
      r[2] = a[1] * b[0] + a[2] * b[1];
      r[3] = a[1] * b[1] + a[2] * b[2];
    };
    double det_rs = std::max(rs[0] * rs[2] - rs[1] * rs[1], 1e-300);
    double is[3] = {rs[2] / det_rs, -rs[1] / det_rs, rs[0] / det_rs};
    double st[3] = {mt[2], mt[3], mt[4]};
    double tmp[4], inner[3], msq[3], half[4];
    mul(rs, st, tmp);  // S * Sigma_t
    inner[0] = tmp[0] * rs[0] + tmp[1] * rs[1];
    inner[1] = tmp[0] * rs[1] + tmp[1] * rs[2];
    inner[2] = tmp[2] * rs[1] + tmp[3] * rs[2];
    sqrt2x2(inner[0], inner[1], inner[2], msq);
    mul(is, msq, half);
    double A00 = half[0] * is[0] + half[1] * is[1];
    double A01 = half[0] * is[1] + half[1] * is[2];
    double A10 = half[2] * is[0] + half[3] * is[1];
    double A11 = half[2] * is[1] + half[3] * is[2];

    std::vector<std::pair<float, int>> row(m_);
    for (int i = 0; i < n_; ++i) {
      double cx = sx_[i] - ms[0], cy = sy_[i] - ms[1];
      const float px = static_cast<float>(mt[0] + A00 * cx + A01 * cy);
      const float py = static_cast<float>(mt[1] + A10 * cx + A11 * cy);
      for (int j = 0; j < m_; ++j) {
        float dx = px - ftx_[j], dy = py - fty_[j];
        row[j] = {dx * dx + dy * dy, j};
      }
      std::nth_element(row.begin(), row.begin() + (k - 1), row.end());
      for (int t = 0; t < k; ++t) shortlist_[static_cast<std::size_t>(i) * k + t] = row[t].second;
    }
  }

  bool select_in_shortlist(int i) {
    const int k = shortlist_len_;
    const int* list = shortlist_.data() + static_cast<std::size_t>(i) * k;
    double best_r = -eps_;
    int best_j = -1;
    for (int t = 0; t < k; ++t) {
      double r = reduced_cost(i, list[t]);
      if (r < best_r) { best_r = r; best_j = list[t]; }
    }
    if (best_j < 0) return false;
    in_arc_ = static_cast<std::int64_t>(i) * m_ + best_j;
    u_in_ = i;
    v_in_ = n_ + best_j;
    return true;
  }

  bool find_entering() {
    // Block search over whole source rows, resuming where the last search
    // stopped; the best row of an improving block is rescanned exactly.
    int row = next_row_;
    int scanned = 0;
    while (scanned < n_) {
      double best = exact_phase_ ? -eps_ : -static_cast<double>(eps_float_);
      int best_row = -1;
      for (int in_block = 0; in_block < rows_per_block_ && scanned < n_; ++in_block, ++scanned) {
        double m = exact_phase_ ? row_min(row) : static_cast<double>(row_min_float(row));
        if (m < best) { best = m; best_row = row; }
        if (++row == n_) row = 0;
      }
      if (best_row >= 0 && select_in_row(best_row)) {
        next_row_ = row;
        return true;
      }
    }
    return false;
  }

  void find_join() {
    const int root = V_ - 1;
    ++stamp_;
    for (int w = u_in_;; w = parent_[w]) {
      mark_[w] = stamp_;
      if (w == root) break;
    }
    for (int w = v_in_;; w = parent_[w]) {
      if (mark_[w] == stamp_) { join_ = w; break; }
    }
  }

  void find_leaving() {
    delta_ = std::numeric_limits<double>::infinity();
    u_out_ = -1;
    // Cycle direction: along the entering arc u_in -> v_in, back through
    // the tree v_in -> join -> u_in. On the u_in side the cycle runs from
    // parent to child, so child->parent arcs lose flow; on the v_in side
    // it runs child to parent, so parent->child arcs lose flow.
    for (int w = u_in_; w != join_; w = parent_[w]) {
      if (dir_[w] > 0 && flow_[w] < delta_) { delta_ = flow_[w]; u_out_ = w; out_on_first_ = true; }
    }
    for (int w = v_in_; w != join_; w = parent_[w]) {
      if (dir_[w] < 0 && flow_[w] <= delta_) { delta_ = flow_[w]; u_out_ = w; out_on_first_ = false; }
    }
    if (u_out_ < 0) throw std::runtime_error("transport: unbounded pivot");
  }

  void change_flow() {
    if (delta_ > 0.0) {
      for (int w = u_in_; w != join_; w = parent_[w]) flow_[w] += dir_[w] > 0 ? -delta_ : delta_;
      for (int w = v_in_; w != join_; w = parent_[w]) flow_[w] += dir_[w] > 0 ? delta_ : -delta_;
    }
  }

  void update_tree() {
    const int inside = out_on_first_ ? u_in_ : v_in_;
    const int outside = out_on_first_ ? v_in_ : u_in_;
    const std::int64_t leaving = pred_arc_[u_out_];
    state_[static_cast<std::size_t>(in_arc_)] = 0;
    if (leaving < E_) state_[static_cast<std::size_t>(leaving)] = 1;

    double r_in = cost(u_in_, v_in_ - n_) + pi_[u_in_] - pi_[v_in_];

    // Re-hang the subtree of u_out at `inside`: reverse the pred chain
    // from inside up to u_out, carrying the entering arc in first.
    int w = inside;
    int new_parent = outside;
    std::int64_t carry_arc = in_arc_;
    std::int8_t carry_dir = (inside == u_in_) ? +1 : -1;
    double carry_flow = delta_;
    while (true) {
      int old_parent = parent_[w];
      std::int64_t old_arc = pred_arc_[w];
      std::int8_t old_dir = dir_[w];
      double old_flow = flow_[w];
      detach(w);
      attach(w, new_parent);
      pred_arc_[w] = carry_arc;
      dir_[w] = carry_dir;
      flow_[w] = carry_flow;
      if (w == u_out_) break;
      carry_arc = old_arc;
      carry_dir = static_cast<std::int8_t>(-old_dir);
      carry_flow = old_flow;
      new_parent = w;
      w = old_parent;
    }

    // Potentials shift by a constant on the moved subtree so the entering
    // arc's reduced cost becomes zero.
    double sigma = (inside == u_in_) ? -r_in : r_in;
    dfs_stack_.clear();
    dfs_stack_.push_back(inside);
    while (!dfs_stack_.empty()) {
      int v = dfs_stack_.back();
      dfs_stack_.pop_back();
      pi_[v] += sigma;
      if (v >= n_ && v < n_ + m_) fpi_t_[v - n_] = static_cast<float>(pi_[v]);
      for (int c = first_child_[v]; c >= 0; c = next_sib_[c]) dfs_stack_.push_back(c);
    }
  }

  std::vector<int> dfs_stack_;
};

}  // namespace nocollide::detail
