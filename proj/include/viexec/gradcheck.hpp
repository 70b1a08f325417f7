#pragma once

#include <string>
#include <vector>

#include "viexec/executor.hpp"
#include "viexec/mdp.hpp"
#include "viexec/nn.hpp"

namespace viexec {

/// The fixed 5-state, 2-action MDP used for executor gradient verification,
/// together with an input/target value pair taken from its oracle trajectory.
struct GradCheckFixture {
    Mdp mdp;
    ValueFunction v_in;
    ValueFunction target;
};

GradCheckFixture gradcheck_fixture();

/// Central-finite-difference check of one executor step loss for a variant.
GradCheckReport variant_grad_check(const MpnnConfig& config, double h = 1e-5, double tol = 1e-4);

struct VariantGradCheck {
    std::string variant;
    GradCheckReport report;
};

/// Runs the check for all five Table-1 variants.
std::vector<VariantGradCheck> all_variant_grad_checks(double h = 1e-5, double tol = 1e-4,
                                                      int hidden_dim = 32);

}  // namespace viexec
