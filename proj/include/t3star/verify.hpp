#pragma once

// Randomized checks of the Type III* identities. Every case draws its own
// design from a seed derived from (base seed, case index), so a single
// failing case can be replayed on its own.

#include "t3star/design.hpp"
#include "t3star/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace t3star {

struct SamplerConfig {
  int min_factors = 2;
  int max_factors = 3;
  int min_levels = 2;
  int max_levels = 4;
  /// Each cell is empty with a probability drawn from [0, max_empty_prob].
  double max_empty_prob = 0.4;
  int min_replicates = 1;
  int max_replicates = 3;
  int max_covariates = 2;
  /// Draws whose cell count exceeds this are redrawn; keeps the 500-case
  /// gate inside its time budget on one core.
  int max_cells = 36;

  void validate() const;
};

enum class CaseKind {
  general,        // 0..max_covariates covariates, arbitrary empty cells
  one_covariate,  // exactly one covariate part
  balanced,       // no empty cells, equal replicates, self-contained model
};

struct SampledCase {
  std::uint64_t seed = 0;
  Design design;
  ModelSpec spec;
  CovariateTable covariates;

  /// e.g. "levels 3x2 n=9 empty=2 parts=2 [00,10,01 | x1: 00,01]".
  std::string summary() const;
};

class DesignSampler {
 public:
  explicit DesignSampler(std::uint64_t seed, SamplerConfig config = {});

  std::uint64_t seed() const { return seed_; }
  const SamplerConfig& config() const { return config_; }

  /// Seed of case `index`; distinct checks salt it so they see different
  /// designs.
  std::uint64_t case_seed(std::uint64_t salt, int index) const;
  SampledCase draw(std::uint64_t case_seed, CaseKind kind) const;

 private:
  std::uint64_t seed_;
  SamplerConfig config_;
};

struct CheckFailure {
  std::uint64_t seed = 0;
  std::string design;
  std::string detail;
  double discrepancy = 0.0;
};

struct CheckReport {
  std::string check_name;
  int cases_run = 0;
  /// Cases where every asserted object had rank 0 or a precondition failed.
  int vacuous = 0;
  /// Effects examined across all cases.
  int effects_checked = 0;
  double max_discrepancy = 0.0;
  std::vector<CheckFailure> failures;
  double seconds = 0.0;

  int non_vacuous() const { return cases_run - vacuous; }
  double non_vacuous_rate() const { return cases_run ? double(non_vacuous()) / cases_run : 0.0; }
  /// No failures and at least 70% of cases non-vacuous.
  bool passed() const;
};

/// Absolute tolerances used by the checks.
struct CheckTolerances {
  double subspace = 1e-8;      // projector Frobenius distance
  double prop3 = 1e-9;         // relative Frobenius norm of H_* E_{2*}
  double ncp_zero = 1e-9;      // ncp / |mu|^2 treated as zero
  double ncp_positive = 1e-10; // ncp of a unit estimable signal
  double balanced = 1e-9;      // |SS3 - SS_anova| / max(1, SS)
};

constexpr double kRequiredNonVacuousRate = 0.7;

std::vector<std::string> check_names();

CheckReport check_prop1(const DesignSampler& sampler, int cases, const CheckTolerances& tol = {});
CheckReport check_prop2_ncp(const DesignSampler& sampler, int cases, const CheckTolerances& tol = {});
CheckReport check_prop3(const DesignSampler& sampler, int cases, const CheckTolerances& tol = {});
CheckReport check_prop4_cellsize(const DesignSampler& sampler, int cases,
                                 const CheckTolerances& tol = {});
CheckReport check_prop5_covariate(const DesignSampler& sampler, int cases,
                                  const CheckTolerances& tol = {});
CheckReport check_balanced_equivalence(const DesignSampler& sampler, int cases,
                                       const CheckTolerances& tol = {});

/// By name; throws InputError for an unknown name.
CheckReport run_check(const std::string& name, const DesignSampler& sampler, int cases,
                      const CheckTolerances& tol = {});

/// JSON document for a set of reports, failures sorted by seed.
std::string report_json(const std::vector<CheckReport>& reports, std::uint64_t seed, int cases);
std::string report_text(const std::vector<CheckReport>& reports);

}  // namespace t3star
