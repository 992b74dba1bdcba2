#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rwre/kernel.hpp"
#include "rwre/lattice.hpp"

namespace rwre {

enum class ModelKind {
  Deterministic,  // one kernel everywhere
  Balanced,       // per-site Dirichlet kernel, symmetrized (zero site drift)
  Periodic,       // per-phase kernels, phase = site mod period
  IidDirichlet,   // per-site Dirichlet kernel over a fixed offset set
  IidFinite,      // per-site pick from a finite kernel set
};

const char* model_kind_name(ModelKind k);
ModelKind model_kind_from_name(const std::string& name);

// Value description of an environment law on Z^d. Immutable once validated.
struct EnvironmentSpec {
  int dim = 1;
  int range = 1;  // jump bound M
  ModelKind model = ModelKind::Deterministic;
  std::uint64_t seed = 0;

  std::vector<JumpKernel> kernels;   // deterministic: 1; periodic: one per phase; iid-finite: the set
  IVec period;                       // periodic only
  std::vector<double> weights;       // iid-finite only
  std::vector<Coord> offsets_flat;   // dirichlet / balanced offset set, k x dim
  std::vector<double> alpha;         // dirichlet / balanced concentrations

  void validate() const;

  int offset_count() const { return dim == 0 ? 0 : static_cast<int>(offsets_flat.size()) / dim; }
  std::span<const Coord> offset(int i) const {
    return {offsets_flat.data() + static_cast<size_t>(i) * dim, static_cast<size_t>(dim)};
  }

  // True when the environment chain viewed from the particle is
  // finite-state (exact corrector machinery applies).
  bool finite_chain() const;

  // Canonical structured-text block; field order: dim, range, model,
  // model-params, seed. Round-trips bit-identically.
  std::string to_text() const;
  static EnvironmentSpec from_text(const std::string& text);

  std::uint64_t content_hash() const;
};

struct FiniteRangeReport {
  bool ok = true;
  double max_norm = 0.0;
  std::optional<IVec> violating_site;
  std::string message;
};

// A concrete environment: spec plus an origin offset realizing the shift
// T_z as index translation. Immutable and freely shareable across threads;
// kernel_at is pure.
class EnvironmentView {
 public:
  explicit EnvironmentView(std::shared_ptr<const EnvironmentSpec> spec, IVec origin = {});
  explicit EnvironmentView(const EnvironmentSpec& spec, IVec origin = {});

  const EnvironmentSpec& spec() const { return *spec_; }
  std::span<const Coord> origin() const { return origin_; }

  // Site kernel pi_{x, x+.}; deterministic in (spec.seed, origin + x).
  JumpKernel kernel_at(std::span<const Coord> x) const;

  // Fast path: pointer into spec-owned kernel storage for table-backed
  // models (deterministic, periodic, iid-finite); nullptr for models whose
  // kernels are materialized per site.
  const JumpKernel* table_kernel_at(std::span<const Coord> x) const;

  EnvironmentView shift(std::span<const Coord> z) const;

  std::vector<double> local_drift(std::span<const Coord> x) const;

  // Draws one step at site x given a uniform u; writes the offset into
  // step_out and returns the offset index.
  int sample_step(std::span<const Coord> x, double u, std::span<Coord> step_out) const;

  FiniteRangeReport check_finite_range(std::span<const IVec> sites) const;

 private:
  void check_dim(std::span<const Coord> x, const char* op) const;
  JumpKernel sampled_kernel(std::span<const Coord> site) const;  // dirichlet / balanced
  int table_index(std::span<const Coord> site) const;            // deterministic / periodic / iid-finite

  std::shared_ptr<const EnvironmentSpec> spec_;
  IVec origin_;
};

// Checks kernels directly against a range bound; used both by
// EnvironmentView::check_finite_range and as a standalone audit.
FiniteRangeReport check_kernel_range(std::span<const JumpKernel> kernels, int range);

}  // namespace rwre
