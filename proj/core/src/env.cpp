#include "rwre/env.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "rwre/error.hpp"
#include "rwre/rng.hpp"

namespace rwre {

namespace {

constexpr std::uint64_t kSiteStreamSalt = 0x736974656b726e6cULL;  // per-site kernel streams

std::string fmt_prob(double p) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", p);
  return buf;
}

std::string kernel_to_text(const JumpKernel& k) {
  std::string s;
  for (int i = 0; i < k.size(); ++i) {
    if (i) s += " ;";
    for (Coord c : k.offset(i)) s += " " + std::to_string(c);
    s += " " + fmt_prob(k.probs[i]);
  }
  return s;
}

JumpKernel kernel_from_text(int dim, const std::string& body, int line_no) {
  std::vector<IVec> offs;
  std::vector<double> probs;
  std::istringstream in(body);
  std::string tok;
  std::vector<std::string> entry;
  auto flush = [&]() {
    if (entry.empty()) return;
    if (static_cast<int>(entry.size()) != dim + 1)
      throw ParseError("kernel entry needs dim offsets plus a probability", line_no);
    IVec z(dim);
    for (int c = 0; c < dim; ++c) z[c] = std::stoll(entry[c]);
    offs.push_back(std::move(z));
    probs.push_back(std::stod(entry.back()));
    entry.clear();
  };
  while (in >> tok) {
    if (tok == ";") {
      flush();
    } else {
      entry.push_back(tok);
    }
  }
  flush();
  if (offs.empty()) throw ParseError("empty kernel", line_no);
  return JumpKernel::make(dim, offs, probs);
}

}  // namespace

const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::Deterministic: return "deterministic";
    case ModelKind::Balanced: return "balanced";
    case ModelKind::Periodic: return "periodic";
    case ModelKind::IidDirichlet: return "iid-dirichlet";
    case ModelKind::IidFinite: return "iid-finite";
  }
  return "?";
}

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "deterministic") return ModelKind::Deterministic;
  if (name == "balanced") return ModelKind::Balanced;
  if (name == "periodic") return ModelKind::Periodic;
  if (name == "iid-dirichlet") return ModelKind::IidDirichlet;
  if (name == "iid-finite") return ModelKind::IidFinite;
  throw ParseError("unknown environment model '" + name + "'");
}

void EnvironmentSpec::validate() const {
  if (dim < 1) throw UsageError("environment dimension must be >= 1");
  if (range < 1) throw UsageError("jump range must be >= 1");
  switch (model) {
    case ModelKind::Deterministic:
      if (kernels.size() != 1) throw UsageError("deterministic model needs exactly one kernel");
      break;
    case ModelKind::Periodic: {
      if (period.empty() || static_cast<int>(period.size()) != dim)
        throw UsageError("periodic model needs a period vector of length dim");
      size_t phases = 1;
      for (Coord p : period) {
        if (p < 1) throw UsageError("period components must be >= 1");
        phases *= static_cast<size_t>(p);
      }
      if (kernels.size() != phases)
        throw UsageError("periodic model needs one kernel per phase (" + std::to_string(phases) +
                         ")");
      break;
    }
    case ModelKind::IidFinite: {
      if (kernels.empty()) throw UsageError("iid-finite model needs at least one kernel");
      if (weights.size() != kernels.size())
        throw UsageError("iid-finite model needs one weight per kernel");
      double s = 0.0;
      for (double w : weights) {
        if (!(w >= 0.0)) throw UsageError("kernel weights must be nonnegative");
        s += w;
      }
      if (std::abs(s - 1.0) > 1e-12) throw UsageError("kernel weights must sum to 1");
      break;
    }
    case ModelKind::IidDirichlet:
    case ModelKind::Balanced: {
      if (offsets_flat.empty() || offsets_flat.size() % static_cast<size_t>(dim) != 0)
        throw UsageError("dirichlet/balanced model needs a nonempty offset set");
      const int k = offset_count();
      if (static_cast<int>(alpha.size()) != k)
        throw UsageError("need one concentration per offset");
      for (double a : alpha)
        if (!(a > 0.0)) throw UsageError("dirichlet concentrations must be > 0");
      for (int i = 0; i < k; ++i) {
        if (euclid_norm(offset(i)) > static_cast<double>(range) + 1e-12)
          throw UsageError("offset " + format_site(offset(i)) + " exceeds jump range");
      }
      if (model == ModelKind::Balanced) {
        // offset set must be closed under negation for symmetrization
        for (int i = 0; i < k; ++i) {
          IVec neg(offset(i).begin(), offset(i).end());
          for (Coord& c : neg) c = -c;
          bool found = false;
          for (int j = 0; j < k; ++j) {
            bool eq = true;
            auto oj = offset(j);
            for (int c = 0; c < dim; ++c) eq = eq && oj[c] == neg[c];
            if (eq) {
              found = true;
              break;
            }
          }
          if (!found)
            throw UsageError("balanced model offset set must be closed under negation");
        }
      }
      break;
    }
  }
  for (const JumpKernel& k : kernels) {
    if (k.dim != dim) throw UsageError("kernel dimension does not match environment dimension");
    k.validate(range);
  }
}

bool EnvironmentSpec::finite_chain() const {
  switch (model) {
    case ModelKind::Deterministic:
    case ModelKind::Periodic:
      return true;
    case ModelKind::IidFinite:
      return kernels.size() == 1;  // degenerate case; otherwise the chain state is the whole field
    default:
      return false;
  }
}

std::string EnvironmentSpec::to_text() const {
  std::ostringstream out;
  out << "dim " << dim << "\n";
  out << "range " << range << "\n";
  out << "model " << model_kind_name(model) << "\n";
  if (!period.empty()) {
    out << "period";
    for (Coord p : period) out << " " << p;
    out << "\n";
  }
  if (!offsets_flat.empty()) {
    out << "offsets";
    for (Coord c : offsets_flat) out << " " << c;
    out << "\n";
    out << "alpha";
    for (double a : alpha) out << " " << fmt_prob(a);
    out << "\n";
  }
  for (size_t i = 0; i < kernels.size(); ++i) {
    out << "kernel " << i << " :" << kernel_to_text(kernels[i]) << "\n";
  }
  if (!weights.empty()) {
    out << "weights";
    for (double w : weights) out << " " << fmt_prob(w);
    out << "\n";
  }
  out << "seed " << seed << "\n";
  return out.str();
}

EnvironmentSpec EnvironmentSpec::from_text(const std::string& text) {
  EnvironmentSpec spec;
  spec.kernels.clear();
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool have_dim = false;
  std::vector<std::pair<size_t, std::string>> kernel_bodies;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key.empty()) continue;
    std::string rest;
    std::getline(ls, rest);
    std::istringstream rs(rest);
    if (key == "dim") {
      rs >> spec.dim;
      have_dim = true;
    } else if (key == "range") {
      rs >> spec.range;
    } else if (key == "model") {
      std::string name;
      rs >> name;
      spec.model = model_kind_from_name(name);
    } else if (key == "seed") {
      rs >> spec.seed;
    } else if (key == "period") {
      Coord p;
      while (rs >> p) spec.period.push_back(p);
    } else if (key == "offsets") {
      Coord c;
      while (rs >> c) spec.offsets_flat.push_back(c);
    } else if (key == "alpha") {
      double a;
      while (rs >> a) spec.alpha.push_back(a);
    } else if (key == "weights") {
      double w;
      while (rs >> w) spec.weights.push_back(w);
    } else if (key == "kernel") {
      if (!have_dim) throw ParseError("kernel line before dim", line_no);
      size_t idx;
      std::string colon;
      rs >> idx >> colon;
      if (colon != ":") throw ParseError("kernel line needs 'kernel <index> : ...'", line_no);
      std::string body;
      std::getline(rs, body);
      kernel_bodies.emplace_back(idx, body);
    } else {
      throw ParseError("unknown environment key '" + key + "'", line_no);
    }
  }
  spec.kernels.resize(kernel_bodies.size());
  std::vector<bool> seen(kernel_bodies.size(), false);
  for (auto& [idx, body] : kernel_bodies) {
    if (idx >= spec.kernels.size()) throw ParseError("kernel indices must be 0..k-1 contiguous");
    if (seen[idx]) throw ParseError("kernel index " + std::to_string(idx) + " repeated");
    seen[idx] = true;
    spec.kernels[idx] = kernel_from_text(spec.dim, body, 0);
  }
  spec.validate();
  return spec;
}

std::uint64_t EnvironmentSpec::content_hash() const {
  const std::string text = to_text();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

EnvironmentView::EnvironmentView(std::shared_ptr<const EnvironmentSpec> spec, IVec origin)
    : spec_(std::move(spec)), origin_(std::move(origin)) {
  if (origin_.empty()) origin_ = zero_site(spec_->dim);
  if (static_cast<int>(origin_.size()) != spec_->dim)
    throw UsageError("origin dimension mismatch");
}

EnvironmentView::EnvironmentView(const EnvironmentSpec& spec, IVec origin)
    : EnvironmentView(std::make_shared<EnvironmentSpec>(spec), std::move(origin)) {}

void EnvironmentView::check_dim(std::span<const Coord> x, const char* op) const {
  if (static_cast<int>(x.size()) != spec_->dim)
    throw UsageError(std::string(op) + ": site dimension " + std::to_string(x.size()) +
                     " does not match environment dimension " + std::to_string(spec_->dim));
}

int EnvironmentView::table_index(std::span<const Coord> site) const {
  const EnvironmentSpec& s = *spec_;
  switch (s.model) {
    case ModelKind::Deterministic:
      return 0;
    case ModelKind::Periodic: {
      // mixed-radix phase index over (site mod period)
      int idx = 0;
      for (int c = 0; c < s.dim; ++c) {
        idx = idx * static_cast<int>(s.period[c]) +
              static_cast<int>(floored_mod(site[c], s.period[c]));
      }
      return idx;
    }
    case ModelKind::IidFinite: {
      Philox4x32 rng(s.seed, site_fingerprint(kSiteStreamSalt, site));
      const double u = rng.next_unit();
      double acc = 0.0;
      for (size_t i = 0; i + 1 < s.weights.size(); ++i) {
        acc += s.weights[i];
        if (u < acc) return static_cast<int>(i);
      }
      return static_cast<int>(s.weights.size()) - 1;
    }
    default:
      return -1;
  }
}

JumpKernel EnvironmentView::sampled_kernel(std::span<const Coord> site) const {
  const EnvironmentSpec& s = *spec_;
  Philox4x32 rng(s.seed, site_fingerprint(kSiteStreamSalt, site));
  JumpKernel k;
  k.dim = s.dim;
  k.offsets = s.offsets_flat;
  k.probs.resize(static_cast<size_t>(s.offset_count()));
  rng.next_dirichlet(s.alpha, k.probs);
  k.rebuild_cdf();
  if (s.model == ModelKind::Balanced) return k.symmetrized();
  return k;
}

const JumpKernel* EnvironmentView::table_kernel_at(std::span<const Coord> x) const {
  check_dim(x, "kernel_at");
  const EnvironmentSpec& s = *spec_;
  if (s.model == ModelKind::IidDirichlet || s.model == ModelKind::Balanced) return nullptr;
  IVec site = add_sites(origin_, x);
  return &s.kernels[static_cast<size_t>(table_index(site))];
}

JumpKernel EnvironmentView::kernel_at(std::span<const Coord> x) const {
  check_dim(x, "kernel_at");
  IVec site = add_sites(origin_, x);
  const EnvironmentSpec& s = *spec_;
  if (s.model == ModelKind::IidDirichlet || s.model == ModelKind::Balanced)
    return sampled_kernel(site);
  return s.kernels[static_cast<size_t>(table_index(site))];
}

EnvironmentView EnvironmentView::shift(std::span<const Coord> z) const {
  check_dim(z, "shift");
  return EnvironmentView(spec_, add_sites(origin_, z));
}

std::vector<double> EnvironmentView::local_drift(std::span<const Coord> x) const {
  const JumpKernel* t = table_kernel_at(x);
  if (t) return t->drift();
  return kernel_at(x).drift();
}

int EnvironmentView::sample_step(std::span<const Coord> x, double u,
                                 std::span<Coord> step_out) const {
  const EnvironmentSpec& s = *spec_;
  const JumpKernel* t = nullptr;
  JumpKernel local;
  // allocation-free dispatch on the absolute site origin + x
  switch (s.model) {
    case ModelKind::Deterministic:
      t = &s.kernels[0];
      break;
    case ModelKind::Periodic: {
      int idx = 0;
      for (int c = 0; c < s.dim; ++c) {
        idx = idx * static_cast<int>(s.period[static_cast<size_t>(c)]) +
              static_cast<int>(floored_mod(origin_[static_cast<size_t>(c)] + x[static_cast<size_t>(c)],
                                           s.period[static_cast<size_t>(c)]));
      }
      t = &s.kernels[static_cast<size_t>(idx)];
      break;
    }
    case ModelKind::IidFinite: {
      Philox4x32 rng(s.seed, site_fingerprint_sum(kSiteStreamSalt, origin_, x));
      const double uw = rng.next_unit();
      double acc = 0.0;
      size_t pick = s.weights.size() - 1;
      for (size_t i = 0; i + 1 < s.weights.size(); ++i) {
        acc += s.weights[i];
        if (uw < acc) {
          pick = i;
          break;
        }
      }
      t = &s.kernels[pick];
      break;
    }
    default:
      local = kernel_at(x);
      t = &local;
      break;
  }
  const int i = t->sample(u);
  auto z = t->offset(i);
  for (int c = 0; c < spec_->dim; ++c) step_out[c] = z[c];
  return i;
}

FiniteRangeReport EnvironmentView::check_finite_range(std::span<const IVec> sites) const {
  FiniteRangeReport rep;
  for (const IVec& x : sites) {
    JumpKernel k = kernel_at(x);
    for (int i = 0; i < k.size(); ++i) {
      const double nz = euclid_norm(k.offset(i));
      if (nz > rep.max_norm) rep.max_norm = nz;
      if (nz > static_cast<double>(spec_->range) + 1e-12) {
        rep.ok = false;
        rep.violating_site = x;
        rep.message = "offset " + format_site(k.offset(i)) + " at site " + format_site(x) +
                      " exceeds range " + std::to_string(spec_->range);
        return rep;
      }
    }
  }
  rep.message = "ok, max |z| observed = " + std::to_string(rep.max_norm);
  return rep;
}

FiniteRangeReport check_kernel_range(std::span<const JumpKernel> kernels, int range) {
  FiniteRangeReport rep;
  for (size_t j = 0; j < kernels.size(); ++j) {
    const JumpKernel& k = kernels[j];
    for (int i = 0; i < k.size(); ++i) {
      const double nz = euclid_norm(k.offset(i));
      if (nz > rep.max_norm) rep.max_norm = nz;
      if (nz > static_cast<double>(range) + 1e-12) {
        rep.ok = false;
        rep.message = "kernel " + std::to_string(j) + " offset " + format_site(k.offset(i)) +
                      " exceeds range " + std::to_string(range);
        return rep;
      }
    }
  }
  rep.message = "ok, max |z| observed = " + std::to_string(rep.max_norm);
  return rep;
}

}  // namespace rwre
