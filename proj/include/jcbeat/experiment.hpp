#pragma once

// Experiment runner. Each run writes its CSV (and JSON sidecar) files into an
// output directory together with manifest.json:
//
//   steady        steady.csv         n_ss,sigma_ss,flux_ratio,p3,truncation_population
//   transient     transient.csv      tau,n,sigma,w0 (+ four-level elements for the effective model)
//   wigner_origin w0.csv             tau,w0
//   wigner_grid   wigner.csv         x,y,w            (wigner.bin with "binary": true)
//   g2            g2.csv             tau,g2[,g2_beat_averaged]
//   trajectory    trajectory.csv     tau,n_cond,sigma_cond,r_cond  + trajectory.json
//   ensemble      ensemble.csv       tau,mean_n,se_n,mean_sigma,se_sigma,mean_r,se_r
//   figure_preset see figure_preset()

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "jcbeat/config.hpp"

namespace jcbeat {

extern const char* const version;

struct RunResult {
    std::vector<std::string> files;   // relative to the output directory, manifest last
    nlohmann::ordered_json summary;   // derived scalars echoed into the manifest
    double wall_time = 0.0;           // seconds
};

// Creates `out_dir` if needed. Throws InvalidArgument for a bad config and
// NumericalError when a computation fails.
RunResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                         Execution exec = Execution::parallel);

// Drive amplitude giving the two-photon steady occupation p3 at gamma = 2 kappa:
// p3 = Omega^2 / (gamma^2 + 4 Omega^2), Omega = 2 sqrt2 eps^2 / g.
double eps_for_p3(double p3, double g, double gamma);

// Presets reproducing the data behind the figures. Files written:
//   fig2   w0_forward.csv, w0_side.csv, w0_twophoton.csv, g2_forward.csv,
//          wigner_b.csv, wigner_c.csv, wigner_d.csv
//   fig3x  traj_ground.csv/.json, traj_one_photon.csv/.json, me_ground.csv,
//          effective_side.csv, wigner_ss.csv
//   fig4a  traj_ground.csv/.json, traj_one_photon.csv/.json,
//          wigner_A.csv, wigner_B.csv, wigner_C.csv
//   fig4b  traj_mc.csv/.json, wigner_jump_before.csv, wigner_jump_after.csv
ExperimentConfig figure_preset(const std::string& name);
const std::vector<std::string>& figure_preset_names();

} // namespace jcbeat
