// Small end-to-end run through the library API: a Bouc-Wen "truth" building,
// noisy base acceleration, and two candidate isolator classes.

#include <cstdio>

#include "falsikit/falsikit.hpp"

using namespace falsikit;

int main() {
    GroundMotionSpec g;
    g.noise = {30.0, 0.05, 0.2, 5.0, 2, 1};
    const ExcitationRecord quake = synthetic_ground_motion(g);

    StructureSpec structure;
    const ParamMap truth{{"k_post", 4.0}, {"c_b", 20.0}, {"r_k", 0.1667}, {"Q_y", 5.0}};
    const SimulationOptions opt{0.005, 0.05, 30.0, {"base_abs_acc"}};
    const auto true_system = find_binding("boucwen").make_system(structure, truth);
    Rng rng(derive_seed(7, "demo_noise", 0));
    const MeasurementSet d = add_measurement_noise(simulate(*true_system, quake, opt), 0.2, rng);
    const auto noise = ResidualNoiseModel::iid(0.15 * channel_std(d, 0));

    const std::vector<PriorSpec> hyst{{PriorKind::Lognormal, 4.5, 0.25, true},
                                      {PriorKind::Lognormal, 20.0, 4.0, true},
                                      {PriorKind::Uniform, 0.16, 0.0058, true},
                                      {PriorKind::Uniform, 4.75, 0.2887, true}};
    std::vector<PriorSpec> lin = hyst;
    lin[3] = {PriorKind::Uniform, 2.5, 0.2887, true};
    const std::vector<ModelClassSpec> classes{
        {"boucwen", {"k_post", "c_b", "r_k", "Q_y"}, hyst, "boucwen", {}},
        {"aashto", {"k_post", "c_b", "r_k", "r_d"}, lin, "aashto", {}}};

    std::vector<ResidualCase> cases;
    for (const auto& cls : classes) {
        for (std::size_t i = 0; i < 100; ++i) {
            const ModelSample s = draw_sample(cls, 2024, i);
            const auto sys = find_binding(cls.physics_binding)
                                 .make_system(structure, make_param_map(cls.parameter_names, s.theta, {}));
            cases.push_back({cls.class_id, i, s.theta, residuals(simulate(*sys, quake, opt), d)});
        }
    }
    const FalsificationReport report = falsify(cases, noise, FdrConfig{0.05});
    for (const auto& c : report.classes)
        std::printf("%-8s %3zu / %3zu unfalsified\n", c.class_id.c_str(), c.unfalsified, c.verdicts.size());

    const auto& bw = report.at("boucwen");
    if (bw.unfalsified == 0) return 0;
    const auto theta = estimate_parameters(post_falsification_weights(bw));
    std::printf("theta_hat: k_post %.3f MN/m, c_b %.2f kN s/m, r_k %.4f, Q_y %.3f %%W\n", theta[0], theta[1], theta[2],
                theta[3]);
    return 0;
}
