#include "defectscope/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <numeric>
#include <thread>

#include "defectscope/errors.hpp"

namespace defectscope {

namespace {

constexpr long long kInf = std::numeric_limits<long long>::max() / 4;
constexpr size_t kLevelConfigCap = 200000;

long long llgcd(long long a, long long b) { return std::gcd(a < 0 ? -a : a, b < 0 ? -b : b); }

long long lllcm(long long a, long long b) {
  long long g = llgcd(a, b);
  __int128 l = (__int128)(a / g) * b;
  if (l > (__int128)1 << 60) fail(errc::validation, "predictor denominators overflow");
  return (long long)l;
}

// All costs are integers over a common denominator D.
struct Tables {
  long long D = 1;
  int B2;         // doubled strength bound
  int step2;      // 1 for director, 2 for vector
  long long chi2; // doubled Euler characteristic
  int cap;        // interior defect count cap
  int qe;
  std::vector<int> m2_grid;                      // admissible doubled m values
  std::vector<std::vector<long long>> vcost;     // [vertex][grid index]
  std::vector<std::vector<int>> vorder;          // grid indices sorted by cost
  long long unit4 = 0;                           // D * q_int^e / 4 (cost of n2^2 = 1)
};

Rational qpow(const Rational& q, int e) {
  if (e == 1) return q;
  if (e == 2) return q * q;
  fail(errc::validation, "q exponent must be 1 or 2");
}

Tables build_tables(const PredictionProblem& p, int extra_b2) {
  Tables t;
  t.qe = p.q_exponent;
  t.cap = p.max_interior;
  t.step2 = p.mode == FieldMode::director ? 1 : 2;

  Rational b2r = p.bound * Rational(2);
  if (!b2r.is_integer() || b2r.num <= 0)
    fail(errc::validation, "search bound must be a positive multiple of 1/2");
  t.B2 = static_cast<int>(b2r.num) + extra_b2;

  Rational chi2r = p.chi * Rational(2);
  if (!chi2r.is_integer())
    fail(errc::infeasible_parity, "chi is not a multiple of 1/2");
  if (p.mode == FieldMode::vector && !p.chi.is_integer())
    fail(errc::infeasible_parity, "vector mode requires integer chi");
  t.chi2 = chi2r.num;

  for (int m2 = -t.B2; m2 <= t.B2; ++m2)
    if (m2 % t.step2 == 0) t.m2_grid.push_back(m2);

  // exact rational costs, then a common denominator
  std::vector<std::vector<Rational>> rc(p.vertices.size());
  Rational unit = qpow(p.interior_q, t.qe) / Rational(4);
  long long D = unit.den;
  for (size_t j = 0; j < p.vertices.size(); ++j) {
    const auto& v = p.vertices[j];
    if (!(v.wedge_over_pi > Rational(0)) || !(v.wedge_over_pi < Rational(2)))
      fail(errc::zero_wedge, "vertex wedge angle must lie in (0, 2 pi)");
    Rational factor = Rational(2) / v.wedge_over_pi;  // 2 pi / wedge
    Rational qe = qpow(v.q, t.qe);
    for (int m2 : t.m2_grid) {
      Rational strength = Rational(m2, 2) - v.tau_over_pi / Rational(2);
      Rational c = factor * qe * sqr(strength);
      rc[j].push_back(c);
      D = lllcm(D, c.den);
    }
  }
  t.D = D;
  t.unit4 = unit.num * (D / unit.den);
  t.vcost.resize(p.vertices.size());
  t.vorder.resize(p.vertices.size());
  for (size_t j = 0; j < p.vertices.size(); ++j) {
    for (const Rational& c : rc[j]) {
      __int128 num = (__int128)c.num * (D / c.den);
      if (num > kInf) fail(errc::validation, "predictor cost overflow");
      t.vcost[j].push_back((long long)num);
    }
    t.vorder[j].resize(t.m2_grid.size());
    std::iota(t.vorder[j].begin(), t.vorder[j].end(), 0);
    std::stable_sort(t.vorder[j].begin(), t.vorder[j].end(),
                     [&](int a, int b) { return t.vcost[j][a] < t.vcost[j][b]; });
  }
  return t;
}

// Minimal interior cost (integer over D) realizing doubled residual s2, or
// kInf when infeasible under the count cap and strength bound.
long long optimal_interior_cost(const Tables& t, long long s2) {
  long long a = std::llabs(s2);
  if (a == 0) return 0;
  if (t.step2 == 2 && a % 2 != 0) return kInf;  // vector mode needs integer sums
  long long units = t.step2 == 2 ? a / 2 : a;   // count of minimal strengths needed
  long long k = std::min<long long>(t.cap, units);
  if (k == 0) return kInf;
  long long maxper = t.B2;  // |n2| <= B2
  if (a > k * maxper) return kInf;
  // spread |s2| over k doubled strengths as evenly as possible
  long long q = a / k, r = a % k;
  long long n2sq = (k - r) * q * q + r * (q + 1) * (q + 1);
  return n2sq * t.unit4;
}

// enumerate interior multisets (doubled strengths, as per-value counts) with
// sum s2, count <= cap, |n2| <= B2, integer cost <= budget; each multiset is
// produced exactly once, as the full count vector
template <typename Fn>
void for_each_interior(const Tables& t, long long s2, long long budget, const Fn& fn) {
  std::vector<int> values;
  int top = t.B2 - (t.B2 % t.step2);
  for (int v = top; v >= t.step2; v -= t.step2) values.push_back(v);
  for (int v = t.step2; v <= top; v += t.step2) values.push_back(-v);

  std::vector<int> cur;
  auto rec = [&](auto&& self, size_t vi, long long rem, long long cost, int slots) -> void {
    if (vi == values.size()) {
      if (rem == 0) fn(cur, cost);
      return;
    }
    if (std::llabs(rem) > (long long)t.B2 * slots) return;  // unreachable sum
    int v = values[vi];
    long long c = (long long)v * v * t.unit4;
    size_t base = cur.size();
    for (int k = 0; k <= slots; ++k) {
      if (k > 0) {
        if (cost + k * c > budget) break;
        cur.push_back(v);
      }
      self(self, vi + 1, rem - (long long)k * v, cost + k * c, slots - k);
    }
    cur.resize(base);
  };
  rec(rec, 0, s2, 0, t.cap);
}

struct Config2 {
  std::vector<int> m2;
  std::vector<int> interior2;  // non-increasing
  bool operator<(const Config2& o) const {
    if (m2 != o.m2) return m2 < o.m2;
    return interior2 < o.interior2;
  }
  bool operator==(const Config2& o) const { return m2 == o.m2 && interior2 == o.interior2; }
};

// bounded collection of the k smallest distinct cost levels
struct LevelKeeper {
  int max_levels;
  std::map<long long, std::vector<Config2>> levels;
  std::map<long long, bool> truncated;

  long long bound() const {
    return (int)levels.size() < max_levels ? kInf : levels.rbegin()->first;
  }
  void insert(long long cost, Config2 cfg) {
    if ((int)levels.size() >= max_levels) {
      long long worst = levels.rbegin()->first;
      if (cost > worst) return;
      if (cost < worst && levels.find(cost) == levels.end()) {
        levels.erase(worst);
        truncated.erase(worst);
      }
    }
    auto& vec = levels[cost];
    if (vec.size() >= kLevelConfigCap) {
      truncated[cost] = true;
      return;
    }
    vec.push_back(std::move(cfg));
  }
  void merge(const LevelKeeper& other) {
    for (const auto& [cost, cfgs] : other.levels) {
      for (const auto& c : cfgs) insert(cost, c);
      auto it = other.truncated.find(cost);
      if (it != other.truncated.end() && it->second) truncated[cost] = true;
    }
  }
};

// depth-first enumeration over one slice of the first vertex's grid
void enumerate_slice(const Tables& t, size_t nvert, const std::vector<int>& first_indices,
                     LevelKeeper& keep) {
  std::vector<int> choice(nvert, 0);

  auto complete = [&](long long cost, long long sum_m2) {
    long long s2 = t.chi2 - sum_m2;
    long long opt = optimal_interior_cost(t, s2);
    if (opt >= kInf || cost + opt > keep.bound()) return;
    long long budget = keep.bound() >= kInf ? kInf / 2 : keep.bound() - cost;
    for_each_interior(t, s2, budget, [&](const std::vector<int>& interior, long long icost) {
      long long total = cost + icost;
      if (total > keep.bound()) return;
      Config2 cfg;
      cfg.m2.resize(nvert);
      for (size_t j = 0; j < nvert; ++j) cfg.m2[j] = t.m2_grid[choice[j]];
      cfg.interior2 = interior;
      std::sort(cfg.interior2.begin(), cfg.interior2.end(), std::greater<int>());
      keep.insert(total, std::move(cfg));
    });
  };

  auto rec = [&](auto&& self, size_t v, long long cost, long long sum_m2) -> void {
    if (cost > keep.bound()) return;
    if (v == nvert) {
      complete(cost, sum_m2);
      return;
    }
    const auto& order = t.vorder[v];
    for (int idx : order) {
      long long c = t.vcost[v][idx];
      if (cost + c > keep.bound()) break;  // order is ascending in cost
      choice[v] = idx;
      self(self, v + 1, cost + c, sum_m2 + t.m2_grid[idx]);
    }
  };

  if (nvert == 0) {
    complete(0, 0);
    return;
  }
  for (int idx : first_indices) {
    long long c = t.vcost[0][idx];
    if (c > keep.bound()) continue;
    choice[0] = idx;
    rec(rec, 1, c, t.m2_grid[idx]);
  }
}

long long minimum_cost(const Tables& t, size_t nvert) {
  long long best = kInf;
  std::vector<int> choice(nvert, 0);
  auto rec = [&](auto&& self, size_t v, long long cost, long long sum_m2) -> void {
    if (cost >= best) return;
    if (v == nvert) {
      long long opt = optimal_interior_cost(t, t.chi2 - sum_m2);
      if (opt < kInf) best = std::min(best, cost + opt);
      return;
    }
    for (int idx : t.vorder[v]) {
      long long c = t.vcost[v][idx];
      if (cost + c >= best) break;
      self(self, v + 1, cost + c, sum_m2 + t.m2_grid[idx]);
    }
  };
  rec(rec, 0, 0, 0);
  return best;
}

int thread_budget() {
  if (const char* env = std::getenv("DEFECTSCOPE_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

PredictionResult finalize(const Tables& t, const PredictionProblem& p, LevelKeeper& keep) {
  PredictionResult result;
  if (keep.levels.empty())
    fail(errc::bound_too_small, "no admissible configuration within the bound and cap");
  for (auto& [cost, cfgs] : keep.levels) {
    Level lvl;
    lvl.Q = Rational::from_i128(cost, t.D);
    std::sort(cfgs.begin(), cfgs.end());
    cfgs.erase(std::unique(cfgs.begin(), cfgs.end()), cfgs.end());
    for (const auto& c : cfgs) {
      Configuration cfg;
      for (int m2 : c.m2) cfg.m.push_back(Rational(m2, 2));
      for (int n2 : c.interior2) cfg.interior.push_back(Rational(n2, 2));
      cfg.Q = lvl.Q;
      lvl.configs.push_back(std::move(cfg));
    }
    auto it = keep.truncated.find(cost);
    lvl.truncated = it != keep.truncated.end() && it->second;
    result.levels.push_back(std::move(lvl));
  }
  result.min_Q = result.levels.front().Q;
  return result;
}

}  // namespace

Rational configuration_rate(const PredictionProblem& p, const std::vector<Rational>& m,
                            const std::vector<Rational>& interior) {
  if (m.size() != p.vertices.size())
    fail(errc::validation, "m assignment size does not match vertex count");
  Rational total(0);
  for (size_t j = 0; j < m.size(); ++j) {
    const auto& v = p.vertices[j];
    Rational strength = m[j] - v.tau_over_pi / Rational(2);
    total = total + (Rational(2) / v.wedge_over_pi) * qpow(v.q, p.q_exponent) * sqr(strength);
  }
  for (const Rational& n : interior)
    total = total + qpow(p.interior_q, p.q_exponent) * sqr(n);
  return total;
}

PredictionResult enumerate_branches(const PredictionProblem& p, int extra_levels) {
  Tables t = build_tables(p, 0);
  size_t nvert = p.vertices.size();

  LevelKeeper keep{1 + extra_levels};
  int nthreads = std::min<int>(thread_budget(), std::max<size_t>(t.m2_grid.size(), 1));
  if (nvert == 0 || nthreads <= 1 || t.m2_grid.size() < 2) {
    std::vector<int> all(t.m2_grid.size());
    std::iota(all.begin(), all.end(), 0);
    enumerate_slice(t, nvert, nvert == 0 ? std::vector<int>{} : all, keep);
  } else {
    // partition the first vertex's grid; merge is associative so the result
    // is schedule independent
    std::vector<std::vector<int>> slices(nthreads);
    for (size_t i = 0; i < t.m2_grid.size(); ++i)
      slices[i % nthreads].push_back(t.vorder[0][i]);
    std::vector<LevelKeeper> keeps(nthreads, LevelKeeper{1 + extra_levels});
    std::vector<std::thread> threads;
    for (int i = 0; i < nthreads; ++i)
      threads.emplace_back(
          [&, i] { enumerate_slice(t, nvert, slices[i], keeps[i]); });
    for (auto& th : threads) th.join();
    for (const auto& k : keeps) keep.merge(k);
    while ((int)keep.levels.size() > 1 + extra_levels) {
      keep.truncated.erase(keep.levels.rbegin()->first);
      keep.levels.erase(keep.levels.rbegin()->first);
    }
  }

  PredictionResult result = finalize(t, p, keep);

  // bound auto-verification: enlarging B by one half step must not lower Q
  Tables t2 = build_tables(p, t.step2);
  long long min2 = minimum_cost(t2, nvert);
  Rational q2 = Rational::from_i128(min2, t2.D);
  if (q2 != result.min_Q)
    fail(errc::bound_too_small, "minimal Q drops from " + result.min_Q.str() + " to " + q2.str() +
                                    " when the bound grows; raise the bound");
  return result;
}

PredictionResult brute_force_oracle(const PredictionProblem& p, int extra_levels) {
  if (p.vertices.size() > 8 || !(p.bound <= Rational(2)) || p.max_interior > 10)
    fail(errc::instance_too_large, "oracle accepts <= 8 vertices, B <= 2, cap <= 10");
  Tables t = build_tables(p, 0);
  size_t nvert = p.vertices.size();
  LevelKeeper keep{1 + extra_levels};

  // plain odometer over the full product grid, no pruning
  std::vector<size_t> odo(nvert, 0);
  size_t gridsz = t.m2_grid.size();
  for (;;) {
    long long cost = 0, sum = 0;
    for (size_t j = 0; j < nvert; ++j) {
      cost += t.vcost[j][odo[j]];
      sum += t.m2_grid[odo[j]];
    }
    long long s2 = t.chi2 - sum;
    long long budget = keep.bound() >= kInf ? kInf / 2 : keep.bound() - cost;
    if (budget >= 0) {
      for_each_interior(t, s2, budget, [&](const std::vector<int>& interior, long long icost) {
        long long total = cost + icost;
        if (total > keep.bound()) return;
        Config2 cfg;
        cfg.m2.resize(nvert);
        for (size_t j = 0; j < nvert; ++j) cfg.m2[j] = t.m2_grid[odo[j]];
        cfg.interior2 = interior;
        std::sort(cfg.interior2.begin(), cfg.interior2.end(), std::greater<int>());
        keep.insert(total, std::move(cfg));
      });
    }
    // advance
    size_t j = 0;
    while (j < nvert && ++odo[j] == gridsz) odo[j++] = 0;
    if (j == nvert && nvert > 0) break;
    if (nvert == 0) break;
  }
  return finalize(t, p, keep);
}

void deduplicate_by_symmetry(PredictionResult& result, const PredictionProblem& p) {
  size_t n = p.vertices.size();
  if (n == 0) return;
  auto attr_equal = [&](size_t a, size_t b) {
    return p.vertices[a].tau_over_pi == p.vertices[b].tau_over_pi &&
           p.vertices[a].wedge_over_pi == p.vertices[b].wedge_over_pi &&
           p.vertices[a].q == p.vertices[b].q;
  };
  // collect cyclic rotations / reflections that preserve the vertex labels
  std::vector<std::vector<size_t>> perms;
  for (size_t r = 0; r < n; ++r) {
    for (int refl = 0; refl < 2; ++refl) {
      std::vector<size_t> perm(n);
      bool ok = true;
      for (size_t i = 0; i < n && ok; ++i) {
        size_t img = refl ? (r + n - i % n) % n : (i + r) % n;
        perm[i] = img;
        ok = attr_equal(i, img);
      }
      if (ok) perms.push_back(perm);
    }
  }
  for (auto& lvl : result.levels) {
    std::map<std::pair<std::vector<std::string>, std::vector<std::string>>, Configuration>
        canon;
    for (auto& cfg : lvl.configs) {
      std::vector<std::string> best;
      for (const auto& perm : perms) {
        std::vector<std::string> img(n);
        for (size_t i = 0; i < n; ++i) img[i] = cfg.m[perm[i]].str();
        if (best.empty() || img < best) best = img;
      }
      std::vector<std::string> inter;
      for (const auto& v : cfg.interior) inter.push_back(v.str());
      canon.emplace(std::make_pair(best, inter), cfg);
    }
    std::vector<Configuration> out;
    for (auto& [key, cfg] : canon) out.push_back(cfg);
    lvl.configs = std::move(out);
  }
}

Rational snap_angle_over_pi(double angle, int max_den, double tol) {
  double x = angle / M_PI;
  long long best_num = 0, best_den = 1;
  double best_err = std::numeric_limits<double>::infinity();
  for (int den = 1; den <= max_den; ++den) {
    long long num = std::llround(x * den);
    double err = std::fabs(x - static_cast<double>(num) / den);
    if (err < best_err - 1e-18) {
      best_err = err;
      best_num = num;
      best_den = den;
    }
  }
  if (best_err > tol / M_PI)
    fail(errc::validation,
         "angle " + std::to_string(angle) + " is not a rational multiple of pi (den <= " +
             std::to_string(max_den) + ")");
  return Rational(best_num, best_den);
}

}  // namespace defectscope
