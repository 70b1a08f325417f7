#include "viexec/gradcheck.hpp"

#include "viexec/graphgen.hpp"
#include "viexec/rng.hpp"
#include "viexec/vi.hpp"

namespace viexec {

GradCheckFixture gradcheck_fixture() {
    Rng rng(derive_seed(20240817, "gradcheck-mdp", 0));
    const UndirectedGraph g = gen_erdos_renyi(5, 0.4, rng);
    GradCheckFixture fixture;
    fixture.mdp = graph_to_mdp(g, 2, 0.9, rng);
    const ViTrajectory traj = solve(fixture.mdp);
    fixture.v_in = traj.steps[3];
    fixture.target = traj.steps[4];
    return fixture;
}

GradCheckReport variant_grad_check(const MpnnConfig& config, double h, double tol) {
    const GradCheckFixture fixture = gradcheck_fixture();
    Rng rng(derive_seed(20240817, "gradcheck-init", 0));
    MpnnParams params = MpnnParams::init(config, rng);
    const ActionGraphs graphs = build_action_graphs(fixture.mdp, fixture.v_in);

    params.zero_grads();
    ExecutorTape tape;
    executor_forward(graphs, params, tape);
    {
        ValueFunction pred(tape.out.begin(), tape.out.begin() + fixture.mdp.num_states);
        const auto [loss, grad] = mse_loss(pred, fixture.target);
        (void)loss;
        executor_backward(graphs, params, tape, grad);
    }

    auto loss_only = [&]() {
        ExecutorTape local;
        executor_forward(graphs, params, local);
        ValueFunction pred(local.out.begin(), local.out.begin() + fixture.mdp.num_states);
        return mse_loss(pred, fixture.target).first;
    };
    return grad_check(loss_only, params.tensors(), h, tol);
}

std::vector<VariantGradCheck> all_variant_grad_checks(double h, double tol, int hidden_dim) {
    static const char* variants[] = {"MPNN-Sum", "MPNN-Mean", "MPNN-Max", "MPNN-2-Sum", "Attn-Sum"};
    std::vector<VariantGradCheck> out;
    for (const char* name : variants) {
        const MpnnConfig config = MpnnConfig::from_variant(name, hidden_dim);
        out.push_back({name, variant_grad_check(config, h, tol)});
    }
    return out;
}

}  // namespace viexec
