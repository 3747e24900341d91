#include "stereosal/emd.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "stereosal/imaging.hpp"

namespace stereosal {

namespace {

struct Cell {
  int row;
  int col;
  double flow;
};

// Basis of a transportation problem kept as a spanning tree over m row nodes
// and n column nodes (column j is node m + j).
class Basis {
 public:
  Basis(int m, int n) : m_(m), adj_(static_cast<std::size_t>(m + n)) {}

  int add(Cell c) {
    cells_.push_back(c);
    const int id = static_cast<int>(cells_.size()) - 1;
    adj_[static_cast<std::size_t>(c.row)].push_back(id);
    adj_[static_cast<std::size_t>(m_ + c.col)].push_back(id);
    return id;
  }

  void replace(int id, Cell c) {
    auto drop = [&](int node) {
      auto& a = adj_[static_cast<std::size_t>(node)];
      a.erase(std::find(a.begin(), a.end(), id));
    };
    drop(cells_[static_cast<std::size_t>(id)].row);
    drop(m_ + cells_[static_cast<std::size_t>(id)].col);
    cells_[static_cast<std::size_t>(id)] = c;
    adj_[static_cast<std::size_t>(c.row)].push_back(id);
    adj_[static_cast<std::size_t>(m_ + c.col)].push_back(id);
  }

  // BFS from row 0: potentials u (rows), v (columns), parent edge and depth.
  void refresh(const std::vector<double>& cost, int n) {
    const std::size_t nodes = adj_.size();
    pot_.assign(nodes, 0.0);
    parent_edge_.assign(nodes, -1);
    depth_.assign(nodes, -1);
    std::deque<int> q{0};
    depth_[0] = 0;
    while (!q.empty()) {
      const int a = q.front();
      q.pop_front();
      for (int e : adj_[static_cast<std::size_t>(a)]) {
        const Cell& c = cells_[static_cast<std::size_t>(e)];
        const int b = a < m_ ? m_ + c.col : c.row;
        if (depth_[static_cast<std::size_t>(b)] >= 0) continue;
        const double cij = cost[static_cast<std::size_t>(c.row) * static_cast<std::size_t>(n) + static_cast<std::size_t>(c.col)];
        // u_i + v_j = c_ij
        pot_[static_cast<std::size_t>(b)] = cij - pot_[static_cast<std::size_t>(a)];
        depth_[static_cast<std::size_t>(b)] = depth_[static_cast<std::size_t>(a)] + 1;
        parent_edge_[static_cast<std::size_t>(b)] = e;
        q.push_back(b);
      }
    }
  }

  int other(int e, int node) const {
    const Cell& c = cells_[static_cast<std::size_t>(e)];
    return node < m_ ? m_ + c.col : c.row;
  }

  // Tree path from row node `r` to column node `m + j`, as edges in order.
  std::vector<int> path(int r, int col_node) const {
    std::vector<int> from_r;
    std::vector<int> from_c;
    int a = r;
    int b = col_node;
    while (a != b) {
      if (depth_[static_cast<std::size_t>(a)] >= depth_[static_cast<std::size_t>(b)]) {
        const int e = parent_edge_[static_cast<std::size_t>(a)];
        from_r.push_back(e);
        a = other(e, a);
      } else {
        const int e = parent_edge_[static_cast<std::size_t>(b)];
        from_c.push_back(e);
        b = other(e, b);
      }
    }
    from_r.insert(from_r.end(), from_c.rbegin(), from_c.rend());
    return from_r;
  }

  double u(int i) const { return pot_[static_cast<std::size_t>(i)]; }
  double v(int j) const { return pot_[static_cast<std::size_t>(m_ + j)]; }
  std::vector<Cell>& cells() { return cells_; }

 private:
  int m_;
  std::vector<Cell> cells_;
  std::vector<std::vector<int>> adj_;
  std::vector<double> pot_;
  std::vector<int> parent_edge_;
  std::vector<int> depth_;
};

}  // namespace

TransportResult solve_transport(const std::vector<double>& supply, const std::vector<double>& demand,
                                const std::vector<double>& cost) {
  const int m = static_cast<int>(supply.size());
  const int n = static_cast<int>(demand.size());
  if (m == 0 || n == 0) throw Error("solve_transport: empty supply or demand");
  if (cost.size() != static_cast<std::size_t>(m) * static_cast<std::size_t>(n)) throw Error("solve_transport: cost size");
  const double ts = std::accumulate(supply.begin(), supply.end(), 0.0);
  const double td = std::accumulate(demand.begin(), demand.end(), 0.0);
  if (std::any_of(supply.begin(), supply.end(), [](double s) { return !(s >= 0.0); }) ||
      std::any_of(demand.begin(), demand.end(), [](double d) { return !(d >= 0.0); })) {
    throw Error("solve_transport: masses must be non-negative");
  }
  if (std::abs(ts - td) > 1e-9 * std::max({1.0, ts, td})) throw Error("solve_transport: unbalanced problem");

  // North-west corner start: exactly m + n - 1 basic cells.
  Basis basis(m, n);
  {
    std::vector<double> s = supply;
    std::vector<double> d = demand;
    d.back() += ts - td;  // absorb rounding
    int i = 0;
    int j = 0;
    while (true) {
      const double q = std::max(0.0, std::min(s[static_cast<std::size_t>(i)], d[static_cast<std::size_t>(j)]));
      basis.add({i, j, q});
      s[static_cast<std::size_t>(i)] -= q;
      d[static_cast<std::size_t>(j)] -= q;
      if (i == m - 1 && j == n - 1) break;
      if (i == m - 1) {
        ++j;
      } else if (j == n - 1) {
        ++i;
      } else if (s[static_cast<std::size_t>(i)] <= d[static_cast<std::size_t>(j)]) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  double cmax = 0.0;
  for (double c : cost) cmax = std::max(cmax, std::abs(c));
  const double eps = 1e-12 * std::max(1.0, cmax);
  const std::size_t total = static_cast<std::size_t>(m) * static_cast<std::size_t>(n);
  const std::size_t block = std::min(total, std::max<std::size_t>(64, 4 * static_cast<std::size_t>(m + n)));
  const long cap = std::max<long>(100000, 50L * (m + n) * (m + n));

  TransportResult result;
  std::size_t cursor = 0;
  basis.refresh(cost, n);
  while (true) {
    // Block pricing: scan blocks cyclically, take the most negative reduced cost.
    long best = -1;
    double best_r = -eps;
    std::size_t scanned = 0;
    while (scanned < total) {
      const std::size_t len = std::min(block, total - scanned);
      for (std::size_t k = 0; k < len; ++k) {
        const std::size_t idx = (cursor + k) % total;
        const int i = static_cast<int>(idx / static_cast<std::size_t>(n));
        const int j = static_cast<int>(idx % static_cast<std::size_t>(n));
        const double r = cost[idx] - basis.u(i) - basis.v(j);
        if (r < best_r) {
          best_r = r;
          best = static_cast<long>(idx);
        }
      }
      cursor = (cursor + len) % total;
      scanned += len;
      if (best >= 0) break;
    }
    if (best < 0) break;
    if (result.pivots >= cap) {
      result.optimal = false;
      spdlog::warn("transportation simplex stopped at the pivot cap ({})", cap);
      break;
    }
    const int ei = static_cast<int>(static_cast<std::size_t>(best) / static_cast<std::size_t>(n));
    const int ej = static_cast<int>(static_cast<std::size_t>(best) % static_cast<std::size_t>(n));
    const auto cycle = basis.path(ei, m + ej);
    // Edges alternate -, +, -, ... starting next to the entering row.
    double theta = std::numeric_limits<double>::infinity();
    int leaving = -1;
    for (std::size_t k = 0; k < cycle.size(); k += 2) {
      const double f = basis.cells()[static_cast<std::size_t>(cycle[k])].flow;
      if (f < theta) {
        theta = f;
        leaving = cycle[k];
      }
    }
    for (std::size_t k = 0; k < cycle.size(); ++k) {
      auto& c = basis.cells()[static_cast<std::size_t>(cycle[k])];
      c.flow = k % 2 == 0 ? std::max(0.0, c.flow - theta) : c.flow + theta;
    }
    basis.replace(leaving, {ei, ej, theta});
    basis.refresh(cost, n);
    ++result.pivots;
  }
  for (const auto& c : basis.cells()) {
    result.cost += c.flow * cost[static_cast<std::size_t>(c.row) * static_cast<std::size_t>(n) + static_cast<std::size_t>(c.col)];
  }
  return result;
}

double emd_grid(const RasterMap& a, const RasterMap& b) {
  require_same_dims(a.dims(), b.dims(), "emd");
  require_finite(a, "emd");
  require_finite(b, "emd");
  double sa = 0.0;
  double sb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < 0.0 || b[i] < 0.0) throw Error("emd: maps must be non-negative");
    sa += a[i];
    sb += b[i];
  }
  if (!(sa > 0.0) || !(sb > 0.0)) throw Error("emd: maps must have positive mass");
  std::vector<double> supply;
  std::vector<double> demand;
  std::vector<std::size_t> src;
  std::vector<std::size_t> dst;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double pa = a[i] / sa;
    const double pb = b[i] / sb;
    const double shared = std::min(pa, pb);
    if (pa - shared > 0.0) {
      supply.push_back(pa - shared);
      src.push_back(i);
    }
    if (pb - shared > 0.0) {
      demand.push_back(pb - shared);
      dst.push_back(i);
    }
  }
  const double ts = std::accumulate(supply.begin(), supply.end(), 0.0);
  const double td = std::accumulate(demand.begin(), demand.end(), 0.0);
  if (supply.empty() || demand.empty() || std::max(ts, td) < 1e-15) return 0.0;
  // Both residuals carry the same mass up to rounding; match them exactly.
  for (double& d : demand) d *= ts / td;
  const int w = a.width();
  std::vector<double> cost(supply.size() * demand.size());
  for (std::size_t p = 0; p < src.size(); ++p) {
    const double x0 = static_cast<double>(src[p] % static_cast<std::size_t>(w));
    const double y0 = static_cast<double>(src[p] / static_cast<std::size_t>(w));
    for (std::size_t q = 0; q < dst.size(); ++q) {
      const double x1 = static_cast<double>(dst[q] % static_cast<std::size_t>(w));
      const double y1 = static_cast<double>(dst[q] / static_cast<std::size_t>(w));
      cost[p * dst.size() + q] = std::hypot(x1 - x0, y1 - y0);
    }
  }
  return solve_transport(supply, demand, cost).cost;
}

double emd(const RasterMap& a, const RasterMap& b, int grid) {
  require_same_dims(a.dims(), b.dims(), "emd");
  if (grid < 1) throw Error("emd: grid must be positive");
  const Dims target{std::min(grid, a.width()), std::min(grid, a.height())};
  if (target == a.dims()) return emd_grid(a, b);
  return emd_grid(resize_area(a, target), resize_area(b, target));
}

}  // namespace stereosal
