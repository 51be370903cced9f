#pragma once

// Finite-difference verification of the full joint objective on a small
// random fixture, reported per parameter group.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "vexrec/dataset.hpp"
#include "vexrec/feature_store.hpp"
#include "vexrec/objective.hpp"
#include "vexrec/params.hpp"
#include "vexrec/vecf.hpp"

namespace vexrec {

struct FixtureSpec {
  ModelDims dims{3, 4, 4, 6, 4, 3, 5, 2};  // N, M, K, D, h, Z, N^w, O
  Variant variant = Variant::ReVecf;
  double delta = 0.3;
  double lambda = 0.01;
  double init_scale = 0.5;
  std::size_t review_length = 3;
  double min_relu_margin = 1e-3;  // fixtures closer to a kink are redrawn
};

struct GradFixture {
  Variant variant = Variant::ReVecf;
  double delta = 0.0;
  double lambda = 0.0;
  ModelParams params;
  RegionalFeatureStore features;
  ReviewTable reviews;
  std::size_t end_token = 0;
  std::vector<LabeledPair> batch;
  std::size_t attempts = 0;

  ModelInputs inputs() const;
};

// Needs N^w ≥ 3 (one regular token plus the reserved end and unknown) and
// M ≥ 2 so that every user has a negative.
GradFixture make_grad_fixture(const FixtureSpec& spec, std::uint64_t seed);

// Smallest |pre-activation| over every relu the fixture's objective touches.
double fixture_relu_margin(const GradFixture& fixture);

struct GroupCheck {
  ParamGroup group = ParamGroup::User;
  std::size_t coordinates = 0;
  double max_relative_error = 0.0;
  bool passed = false;
};

struct GradCheckReport {
  std::vector<GroupCheck> groups;
  bool passed = false;
};

// Compares analytic and central-difference gradients of the joint
// objective. `flip` negates the analytic gradient of one group, for
// exercising the failure path.
GradCheckReport check_joint_gradients(const GradFixture& fixture, double tolerance = 1e-4,
                                      double epsilon = 1e-5,
                                      std::optional<ParamGroup> flip = std::nullopt);

std::optional<ParamGroup> parse_param_group(std::string_view name);

}  // namespace vexrec
