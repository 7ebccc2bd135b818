#include "edgedel/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cstddef>

#include "edgedel/errors.hpp"

namespace edgedel {
namespace {

void decode(std::size_t idx, std::span<const std::size_t> dims,
            std::span<std::size_t> digits) {
  for (std::size_t i = dims.size(); i-- > 0;) {
    digits[i] = idx % dims[i];
    idx /= dims[i];
  }
}

std::vector<std::size_t> dims_of(std::span<const VarId> scope,
                                 const std::vector<int>& cards) {
  std::vector<std::size_t> d(scope.size());
  for (std::size_t i = 0; i < scope.size(); ++i)
    d[i] = static_cast<std::size_t>(cards[scope[i]]);
  return d;
}

// Fills out[lo,hi) with f[fi]*g[gi], walking the output multi-index as an
// odometer. fi/gi are maintained incrementally through per-axis strides
// (0 for axes absent from the respective operand).
void multiply_range(double* out, const double* ftab, const double* gtab,
                    std::span<const std::size_t> dims,
                    std::span<const std::size_t> sf,
                    std::span<const std::size_t> sg, std::size_t lo,
                    std::size_t hi) {
  const std::size_t k = dims.size();
  std::vector<std::size_t> digits(k);
  decode(lo, dims, digits);
  std::size_t fi = 0, gi = 0;
  for (std::size_t j = 0; j < k; ++j) {
    fi += digits[j] * sf[j];
    gi += digits[j] * sg[j];
  }
  for (std::size_t i = lo; i < hi; ++i) {
    out[i] = ftab[fi] * gtab[gi];
    for (std::size_t j = k; j-- > 0;) {
      ++digits[j];
      fi += sf[j];
      gi += sg[j];
      if (digits[j] < dims[j]) break;
      digits[j] = 0;
      fi -= sf[j] * dims[j];
      gi -= sg[j] * dims[j];
    }
  }
}

// Fills out[lo,hi) with sums over the eliminated axis. sfr maps output axes
// to strides in f; the eliminated axis contributes base + s*sv, s in fixed
// ascending order, so results do not depend on how the range was split.
void sum_out_range(double* out, const double* ftab,
                   std::span<const std::size_t> dims,
                   std::span<const std::size_t> sfr, std::size_t sv,
                   std::size_t cv, std::size_t lo, std::size_t hi) {
  const std::size_t k = dims.size();
  std::vector<std::size_t> digits(k);
  decode(lo, dims, digits);
  std::size_t base = 0;
  for (std::size_t j = 0; j < k; ++j) base += digits[j] * sfr[j];
  for (std::size_t i = lo; i < hi; ++i) {
    double acc = 0.0;
    std::size_t fi = base;
    for (std::size_t s = 0; s < cv; ++s, fi += sv) acc += ftab[fi];
    out[i] = acc;
    for (std::size_t j = k; j-- > 0;) {
      ++digits[j];
      base += sfr[j];
      if (digits[j] < dims[j]) break;
      digits[j] = 0;
      base -= sfr[j] * dims[j];
    }
  }
}

template <typename Worker>
void run_partitioned(std::size_t n, bool parallel, std::size_t grain,
                     Worker&& work) {
#ifdef _OPENMP
  if (parallel && n >= grain) {
#pragma omp parallel
    {
      const std::size_t nt = static_cast<std::size_t>(omp_get_num_threads());
      const std::size_t t = static_cast<std::size_t>(omp_get_thread_num());
      const std::size_t chunk = (n + nt - 1) / nt;
      const std::size_t lo = t * chunk;
      const std::size_t hi = lo + chunk < n ? lo + chunk : n;
      if (lo < hi) work(lo, hi);
    }
    return;
  }
#else
  (void)parallel;
  (void)grain;
#endif
  work(0, n);
}

}  // namespace

Factor multiply(const Factor& f, const Factor& g, const std::vector<int>& cards,
                const KernelConfig& cfg) {
  Factor out;
  out.scope = f.scope;
  for (VarId v : g.scope)
    if (!f.has(v)) out.scope.push_back(v);

  const auto dims = dims_of(out.scope, cards);
  const auto fstr = strides(f.scope, cards);
  const auto gstr = strides(g.scope, cards);
  std::vector<std::size_t> sf(out.scope.size(), 0), sg(out.scope.size(), 0);
  for (std::size_t j = 0; j < out.scope.size(); ++j) {
    for (std::size_t i = 0; i < f.scope.size(); ++i)
      if (f.scope[i] == out.scope[j]) sf[j] = fstr[i];
    for (std::size_t i = 0; i < g.scope.size(); ++i)
      if (g.scope[i] == out.scope[j]) sg[j] = gstr[i];
  }

  const std::size_t n = table_size(out.scope, cards);
  out.table.resize(n);
  run_partitioned(n, cfg.parallel, cfg.grain, [&](std::size_t lo, std::size_t hi) {
    multiply_range(out.table.data(), f.table.data(), g.table.data(), dims, sf,
                   sg, lo, hi);
  });
  return out;
}

Factor sum_out(const Factor& f, VarId v, const std::vector<int>& cards,
               const KernelConfig& cfg) {
  std::size_t pv = f.scope.size();
  for (std::size_t i = 0; i < f.scope.size(); ++i)
    if (f.scope[i] == v) pv = i;
  if (pv == f.scope.size())
    throw ValidationError("sum_out: variable not in factor scope");

  Factor out;
  out.scope.reserve(f.scope.size() - 1);
  for (std::size_t i = 0; i < f.scope.size(); ++i)
    if (i != pv) out.scope.push_back(f.scope[i]);

  const auto fstr = strides(f.scope, cards);
  const auto dims = dims_of(out.scope, cards);
  std::vector<std::size_t> sfr(out.scope.size());
  for (std::size_t j = 0; j < out.scope.size(); ++j)
    sfr[j] = fstr[j < pv ? j : j + 1];
  const std::size_t sv = fstr[pv];
  const std::size_t cv = static_cast<std::size_t>(cards[v]);

  const std::size_t n = table_size(out.scope, cards);
  out.table.resize(n);
  run_partitioned(n, cfg.parallel, cfg.grain, [&](std::size_t lo, std::size_t hi) {
    sum_out_range(out.table.data(), f.table.data(), dims, sfr, sv, cv, lo, hi);
  });
  return out;
}

Factor restrict(const Factor& f, const Evidence& e, const std::vector<int>& cards) {
  bool touched = false;
  for (VarId v : f.scope)
    if (e.assigns(v)) touched = true;
  if (!touched) return f;

  Factor out;
  const auto fstr = strides(f.scope, cards);
  std::size_t base = 0;
  std::vector<std::size_t> sfr;
  for (std::size_t i = 0; i < f.scope.size(); ++i) {
    if (e.assigns(f.scope[i])) {
      base += static_cast<std::size_t>(e.state(f.scope[i])) * fstr[i];
    } else {
      out.scope.push_back(f.scope[i]);
      sfr.push_back(fstr[i]);
    }
  }
  const auto dims = dims_of(out.scope, cards);
  const std::size_t n = table_size(out.scope, cards);
  out.table.resize(n);

  const std::size_t k = dims.size();
  std::vector<std::size_t> digits(k, 0);
  std::size_t fi = base;
  for (std::size_t i = 0; i < n; ++i) {
    out.table[i] = f.table[fi];
    for (std::size_t j = k; j-- > 0;) {
      ++digits[j];
      fi += sfr[j];
      if (digits[j] < dims[j]) break;
      digits[j] = 0;
      fi -= sfr[j] * dims[j];
    }
  }
  return out;
}

Factor reorder(const Factor& f, std::span<const VarId> new_scope,
               const std::vector<int>& cards) {
  if (new_scope.size() != f.scope.size())
    throw ValidationError("reorder: scope size mismatch");
  Factor out;
  out.scope.assign(new_scope.begin(), new_scope.end());
  const auto fstr = strides(f.scope, cards);
  std::vector<std::size_t> sfr(new_scope.size(), static_cast<std::size_t>(-1));
  for (std::size_t j = 0; j < new_scope.size(); ++j) {
    for (std::size_t i = 0; i < f.scope.size(); ++i)
      if (f.scope[i] == new_scope[j]) sfr[j] = fstr[i];
    if (sfr[j] == static_cast<std::size_t>(-1))
      throw ValidationError("reorder: variable not in factor scope");
  }
  const auto dims = dims_of(out.scope, cards);
  const std::size_t n = table_size(out.scope, cards);
  out.table.resize(n);
  std::vector<std::size_t> digits(dims.size(), 0);
  std::size_t fi = 0;
  for (std::size_t i = 0; i < n; ++i) {
    out.table[i] = f.table[fi];
    for (std::size_t j = dims.size(); j-- > 0;) {
      ++digits[j];
      fi += sfr[j];
      if (digits[j] < dims[j]) break;
      digits[j] = 0;
      fi -= sfr[j] * dims[j];
    }
  }
  return out;
}

namespace ref {
namespace {

// Naive index arithmetic, recomputed from scratch per entry. Slow on purpose:
// this is the reference the optimized kernels are checked against.
std::size_t index_in(const Factor& f, const std::vector<VarId>& scope,
                     const std::vector<std::size_t>& digits,
                     const std::vector<int>& cards) {
  const auto fstr = strides(f.scope, cards);
  std::size_t idx = 0;
  for (std::size_t i = 0; i < f.scope.size(); ++i) {
    for (std::size_t j = 0; j < scope.size(); ++j)
      if (scope[j] == f.scope[i]) idx += digits[j] * fstr[i];
  }
  return idx;
}

}  // namespace

Factor multiply(const Factor& f, const Factor& g, const std::vector<int>& cards) {
  Factor out;
  out.scope = f.scope;
  for (VarId v : g.scope)
    if (!f.has(v)) out.scope.push_back(v);
  const std::size_t n = table_size(out.scope, cards);
  out.table.resize(n);
  const auto ostr = strides(out.scope, cards);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> digits(out.scope.size());
    for (std::size_t j = 0; j < out.scope.size(); ++j)
      digits[j] = (i / ostr[j]) % static_cast<std::size_t>(cards[out.scope[j]]);
    out.table[i] = f.table[index_in(f, out.scope, digits, cards)] *
                   g.table[index_in(g, out.scope, digits, cards)];
  }
  return out;
}

Factor sum_out(const Factor& f, VarId v, const std::vector<int>& cards) {
  Factor out;
  for (VarId u : f.scope)
    if (u != v) out.scope.push_back(u);
  const std::size_t n = table_size(out.scope, cards);
  out.table.assign(n, 0.0);
  const auto ostr = strides(out.scope, cards);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> digits(out.scope.size());
    for (std::size_t j = 0; j < out.scope.size(); ++j)
      digits[j] = (i / ostr[j]) % static_cast<std::size_t>(cards[out.scope[j]]);
    double acc = 0.0;
    for (int s = 0; s < cards[v]; ++s) {
      std::vector<VarId> full_scope = out.scope;
      full_scope.push_back(v);
      std::vector<std::size_t> full_digits = digits;
      full_digits.push_back(static_cast<std::size_t>(s));
      acc += f.table[index_in(f, full_scope, full_digits, cards)];
    }
    out.table[i] = acc;
  }
  return out;
}

}  // namespace ref

}  // namespace edgedel
