// Acceptance suite: runs every gate criterion and prints one PASS/FAIL line
// per criterion. Exit code 0 iff all pass.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <vector>

#include "posebench/metrics.hpp"
#include "posebench/process_sim.hpp"
#include "posebench/report.hpp"
#include "support.hpp"

using namespace posebench;
using namespace posebench::testing;
namespace fs = std::filesystem;

namespace {

int failures = 0;
std::vector<std::string> notes;

void require(bool condition, const std::string &detail) {
  if (!condition) {
    ++failures;
    notes.push_back(detail);
  }
}

void run_criterion(int number, const std::string &title,
                   const std::function<void()> &body) {
  const int before = failures;
  notes.clear();
  try {
    body();
  } catch (const std::exception &e) {
    ++failures;
    notes.push_back(std::string("exception: ") + e.what());
  }
  const bool ok = failures == before;
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << number << ": "
            << title << "\n";
  for (const auto &note : notes) {
    std::cout << "       " << note << "\n";
  }
}

double rel_diff(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

struct Cli {
  fs::path work;
  int last_exit = -1;
  std::string last_output;

  explicit Cli(const std::string &tag) {
    work = fs::temp_directory_path() /
           ("posebench_acc_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(work);
    fs::create_directories(work);
  }
  ~Cli() { fs::remove_all(work); }

  int run(const std::string &args) {
    const fs::path log = work / "log.txt";
    const std::string command = std::string(POSEBENCH_CLI_PATH) + " " + args +
                                " > " + log.string() + " 2>&1";
    const int status = std::system(command.c_str());
    last_exit = WEXITSTATUS(status);
    std::ifstream in(log);
    std::ostringstream buf;
    buf << in.rdbuf();
    last_output = buf.str();
    return last_exit;
  }

  fs::path write_cube_models() {
    const fs::path dir = work / "models";
    fs::create_directories(dir);
    std::ofstream out(dir / "obj_000001.ply");
    out << "ply\nformat ascii 1.0\nelement vertex 8\n"
        << "property float x\nproperty float y\nproperty float z\n"
        << "end_header\n";
    for (const double x : {-10.0, 10.0})
      for (const double y : {-10.0, 10.0})
        for (const double z : {-10.0, 10.0})
          out << x << ' ' << y << ' ' << z << '\n';
    return dir;
  }
};

ModelSet cube_models() {
  ModelSet models;
  models.emplace(1, unit_cube_model(1));
  return models;
}

void criterion_1_metric_exactness() {
  std::mt19937_64 rng(2024);
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 1000; ++i) {
    const auto model = random_model(rng);
    const Pose gt = random_pose(rng);
    const Pose est = random_pose(rng);
    require(rel_diff(compute_mde(gt, est, model), oracle_mde(gt, est, model)) <=
                1e-12,
            "MDE mismatch at case " + std::to_string(i));
    require(rel_diff(compute_add(gt, est, model), oracle_add(gt, est, model)) <=
                1e-12,
            "ADD mismatch at case " + std::to_string(i));
    const auto comp = compute_axis_components(gt, est, model);
    const auto expected = oracle_axis_components(gt, est, model);
    for (int k = 0; k < 3; ++k) {
      require(rel_diff(comp(k), expected(k)) <= 1e-12,
              "axis component mismatch at case " + std::to_string(i));
    }
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  require(elapsed < 1.0,
          "1000 oracle comparisons took " + std::to_string(elapsed) + " s");
}

void criterion_2_geometry_invariants() {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 10'000; ++i) {
    const auto model = random_model(rng, 4, 12);
    const Pose a = random_pose(rng);
    const Pose b = random_pose(rng);

    require(compute_mde(a, a, model) == 0.0, "identity MDE nonzero");
    require(compute_add(a, a, model) == 0.0, "identity ADD nonzero");

    const double mde = compute_mde(a, b, model);
    const double add = compute_add(a, b, model);
    require(rel_diff(mde, compute_mde(b, a, model)) <= 1e-12,
            "MDE asymmetric");
    require(rel_diff(add, compute_add(b, a, model)) <= 1e-12,
            "ADD asymmetric");
    require(add <= mde * (1.0 + 1e-12), "ADD exceeds MDE");

    const Pose q = random_pose(rng);
    require(rel_diff(compute_mde(q.compose(a), q.compose(b), model), mde) <=
                1e-9,
            "MDE not isometry invariant");
    require(rel_diff(compute_add(q.compose(a), q.compose(b), model), add) <=
                1e-9,
            "ADD not isometry invariant");

    Pose shifted = a;
    const Eigen::Vector3d d(3.0, -4.0, 12.0);
    shifted.translation += d;
    require(rel_diff(compute_mde(a, shifted, model), d.norm()) <= 1e-12,
            "pure-translation MDE law broken");
    require(rel_diff(compute_add(a, shifted, model), d.norm()) <= 1e-12,
            "pure-translation ADD law broken");
    const auto comp = compute_axis_components(a, shifted, model);
    for (int k = 0; k < 3; ++k) {
      require(rel_diff(comp(k), std::abs(d(k))) <= 1e-12,
              "pure-translation component law broken");
    }

    // Convexity: interior hull points never beat the vertex maximum.
    for (int j = 0; j < 1000; ++j) {
      const Eigen::Vector3d p = random_hull_point(rng, model);
      const double err = (a.apply(p) - b.apply(p)).norm();
      if (err > mde * (1.0 + 1e-9)) {
        require(false, "interior point exceeds vertex MDE");
        break;
      }
    }
  }
}

void criterion_3_matching_oracle() {
  const auto models = cube_models();
  EvalConfig cfg;
  std::mt19937_64 rng(3003);
  std::uniform_int_distribution<int> n(0, 5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> offset(-30.0, 30.0);

  std::vector<GtAnnotation> all_gts;
  std::vector<Estimate> all_ests;
  for (int i = 0; i < 500; ++i) {
    std::vector<GtAnnotation> gts;
    std::vector<Estimate> ests;
    const int gt_count = n(rng);
    for (int g = 0; g < gt_count; ++g) {
      GtAnnotation gt;
      gt.scene_id = i / 50;
      gt.image_id = i % 50;
      gt.object_id = 1;
      gt.pose = random_pose(rng, 100.0);
      gt.visibility = u(rng);
      gts.push_back(gt);
      all_gts.push_back(gt);
    }
    const int est_count = n(rng);
    for (int e = 0; e < est_count; ++e) {
      Estimate est;
      est.scene_id = i / 50;
      est.image_id = i % 50;
      est.object_id = 1;
      if (!gts.empty() && u(rng) < 0.8) {
        est.pose = gts[static_cast<size_t>(u(rng) * gts.size())].pose;
        est.pose.translation +=
            Eigen::Vector3d(offset(rng), offset(rng), offset(rng));
      } else {
        est.pose = random_pose(rng, 100.0);
      }
      est.confidence = u(rng);
      ests.push_back(est);
      all_ests.push_back(est);
    }

    const auto greedy = match_sample(gts, ests, models, cfg);

    // Exhaustive maximum-TP count: GTs are reusable, so estimate choices
    // are independent and the optimum is the count of estimates with any
    // in-threshold same-class GT.
    int max_tp = 0;
    for (const auto &est : ests) {
      for (const auto &gt : gts) {
        if (gt.object_id == est.object_id &&
            oracle_mde(gt.pose, est.pose, models.at(1)) <=
                cfg.error_threshold_mm) {
          ++max_tp;
          break;
        }
      }
    }
    require(greedy.tp == max_tp, "greedy TP differs from enumeration maximum");
    require(greedy.tp + greedy.fp == static_cast<int>(ests.size()),
            "TP+FP does not cover the estimates");

    // FN from the enumeration side: a visible GT escapes FN exactly when
    // some estimate's minimum-MDE assignment lands on it within threshold.
    std::vector<bool> covered(gts.size(), false);
    for (const auto &est : ests) {
      int best = -1;
      double best_mde = std::numeric_limits<double>::infinity();
      for (size_t g = 0; g < gts.size(); ++g) {
        if (gts[g].object_id != est.object_id) continue;
        const double mde = oracle_mde(gts[g].pose, est.pose, models.at(1));
        if (mde < best_mde) {
          best_mde = mde;
          best = static_cast<int>(g);
        }
      }
      if (best >= 0 && best_mde <= cfg.error_threshold_mm) covered[best] = true;
    }
    int expected_fn = 0;
    for (size_t g = 0; g < gts.size(); ++g) {
      if (!covered[g] && gts[g].visibility >= cfg.visibility_threshold)
        ++expected_fn;
    }
    require(greedy.fn == expected_fn, "FN differs from enumeration");
  }

  // Byte-identical determinism across runs and parallelism degrees.
  const auto r1 = match_all(all_gts, all_ests, models, cfg, 1);
  const auto r2 = match_all(all_gts, all_ests, models, cfg, 1);
  const auto r4 = match_all(all_gts, all_ests, models, cfg, 4);
  auto serialize = [](const std::vector<SampleMatchResult> &results) {
    std::ostringstream os;
    os << std::setprecision(17);
    for (const auto &r : results) {
      os << r.scene_id << '/' << r.image_id << ':' << r.tp << ',' << r.fp
         << ',' << r.fn << ';';
      for (const auto &m : r.matches) {
        os << m.estimate_index << '>' << m.gt_index << '@' << m.mde_mm << '|';
      }
    }
    return os.str();
  };
  require(serialize(r1) == serialize(r2), "repeat run differs");
  require(serialize(r1) == serialize(r4), "jobs=4 run differs from jobs=1");
}

void criterion_4_threshold_laws() {
  const auto models = cube_models();
  std::mt19937_64 rng(4004);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  // Randomized dataset with calibrated confidences.
  std::vector<GtAnnotation> gts;
  NoiseModel noise;
  noise.translation_sigma_mm = 8.0;
  noise.rotation_sigma_deg = 6.0;
  noise.outlier_rate = 0.15;
  noise.miss_rate = 0.1;
  noise.seed = 11;
  for (int s = 0; s < 20; ++s) {
    auto scene = sample_scene(SceneLayout::kRandomDrop, 6, models.at(1),
                              1000 + s, 0, s);
    for (auto &gt : scene) {
      gt.visibility = 0.7 + 0.3 * u(rng);
      gts.push_back(gt);
    }
  }
  const auto ests = perturb(gts, noise, models);

  // AP and AR non-decreasing in theta_p, exactly.
  double prev_ap = 0.0, prev_ar = 0.0;
  for (const double theta : {1.0, 3.0, 7.0, 15.0, 30.0, 60.0, 200.0}) {
    EvalConfig cfg;
    cfg.error_threshold_mm = theta;
    const auto results = match_all(gts, ests, models, cfg);
    const auto [ap, ar] = compute_ap_ar(results);
    require(ap >= prev_ap, "AP decreased when raising theta_p");
    require(ar >= prev_ar, "AR decreased when raising theta_p");
    prev_ap = ap;
    prev_ar = ar;
  }

  // AR non-increasing in the confidence threshold, exactly.
  EvalConfig cfg;
  cfg.sweep_resolution = 101;
  const auto sweep = sweep_confidence(gts, ests, models, cfg);
  for (size_t i = 1; i < sweep.size(); ++i) {
    require(sweep[i].ar <= sweep[i - 1].ar,
            "AR increased along the confidence sweep");
  }

  // A miscalibrated confidence model yields a non-monotone AP curve.
  NoiseModel bad = noise;
  bad.confidence_mode = ConfidenceMode::kMiscalibrated;
  bad.seed = 12;
  const auto bad_ests = perturb(gts, bad, models);
  const auto bad_sweep = sweep_confidence(gts, bad_ests, models, cfg);
  bool has_drop = false;
  for (size_t i = 1; i < bad_sweep.size(); ++i) {
    if (bad_sweep[i].ap < bad_sweep[i - 1].ap - 1e-12) has_drop = true;
  }
  require(has_drop, "miscalibrated AP curve never drops");
}

void criterion_5_end_to_end_perfect() {
  Cli cli("e2e");
  const auto models_dir = cli.write_cube_models();
  const auto start = std::chrono::steady_clock::now();

  require(cli.run("perturb --models " + models_dir.string() +
                  " --scenes 25 --parts 8 --seed 5 --out " +
                  (cli.work / "synth").string()) == 0,
          "perturb failed: " + cli.last_output);
  require(cli.run("evaluate --manifest " +
                  (cli.work / "synth" / "manifest.json").string() +
                  " --estimates " +
                  (cli.work / "synth" / "estimates.csv").string() + " --out " +
                  (cli.work / "eval").string()) == 0,
          "evaluate failed: " + cli.last_output);
  require(cli.last_output.find("AP 100.0 AR 100.0") != std::string::npos,
          "evaluate output was: " + cli.last_output);

  require(cli.run("simulate --models " + models_dir.string() +
                  " --scenes 25 --parts 8 --out " +
                  (cli.work / "sim").string()) == 0,
          "simulate failed: " + cli.last_output);
  require(cli.last_output.find("AP 100.0 AR 100.0") != std::string::npos,
          "simulate output was: " + cli.last_output);

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  require(elapsed < 5.0,
          "end-to-end run took " + std::to_string(elapsed) + " s");
}

void criterion_6_noise_calibration() {
  const auto models = cube_models();

  std::vector<GtAnnotation> gts(100'000);
  for (auto &gt : gts) {
    gt.object_id = 1;
    gt.pose.translation = {0.0, 0.0, 500.0};
  }
  NoiseModel noise;
  noise.translation_sigma_mm = 5.0;
  noise.seed = 600;
  const auto ests = perturb(gts, noise, models);
  require(ests.size() == gts.size(), "unexpected misses");
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (size_t i = 0; i < ests.size(); ++i) {
    mean += compute_axis_components(gts[i].pose, ests[i].pose, models.at(1));
  }
  mean /= static_cast<double>(ests.size());
  const double expected = 5.0 * std::sqrt(2.0 / std::numbers::pi);
  for (int k = 0; k < 3; ++k) {
    require(std::abs(mean(k) - expected) / expected <= 0.03,
            "axis " + std::to_string(k) + " mean " + std::to_string(mean(k)) +
                " vs expected " + std::to_string(expected));
  }

  std::vector<GtAnnotation> bias_gts(10'000);
  for (auto &gt : bias_gts) {
    gt.object_id = 1;
    gt.pose.translation = {0.0, 0.0, 500.0};
  }
  NoiseModel bias;
  bias.z_bias_mm = 10.0;
  bias.seed = 601;
  const auto bias_ests = perturb(bias_gts, bias, models);
  double z_mean = 0.0;
  for (size_t i = 0; i < bias_ests.size(); ++i) {
    z_mean += compute_axis_components(bias_gts[i].pose, bias_ests[i].pose,
                                      models.at(1))
                  .z();
  }
  z_mean /= static_cast<double>(bias_ests.size());
  require(std::abs(z_mean - 10.0) / 10.0 <= 0.01,
          "z-bias mean " + std::to_string(z_mean) + " vs expected 10");
}

void criterion_7_process_granularity() {
  const auto model = unit_cube_model();
  for (int r = 0; r < 10'000; ++r) {
    ProcessConfig cfg;
    cfg.seed = static_cast<uint64_t>(r);
    NoiseModel noise;
    noise.translation_sigma_mm = 8.0;
    noise.outlier_rate = 0.08;
    noise.miss_rate = 0.04;
    const auto outcome = simulate(cfg, model, noise);
    if (outcome.tp + outcome.fn != 40) {
      require(false, "part conservation broken at replication " +
                         std::to_string(r));
      return;
    }
    const double steps = outcome.ar * 40.0;
    if (std::abs(steps - std::round(steps)) > 1e-9) {
      require(false,
              "AR " + std::to_string(outcome.ar) + " not a multiple of 2.5 %");
      return;
    }
  }
}

void criterion_8_io_round_trip() {
  const auto models = cube_models();
  const auto gts =
      sample_scene(SceneLayout::kRandomDrop, 16, models.at(1), 800);
  NoiseModel noise;
  noise.translation_sigma_mm = 4.0;
  noise.rotation_sigma_deg = 3.0;
  noise.miss_rate = 0.1;
  noise.seed = 801;
  const auto ests = perturb(gts, noise, models);

  Cli cli("io");
  write_ground_truth(cli.work / "gt.json", gts);
  write_estimates(cli.work / "est.csv", ests);
  const auto gts2 = load_ground_truth(cli.work / "gt.json", 0);
  const auto ests2 = load_estimates(cli.work / "est.csv");

  require(gts2.size() == gts.size(), "GT count changed in round trip");
  for (size_t i = 0; i < std::min(gts.size(), gts2.size()); ++i) {
    require(pose_bits_equal(gts2[i].pose, gts[i].pose) &&
                gts2[i].visibility == gts[i].visibility &&
                gts2[i].object_id == gts[i].object_id,
            "GT round trip not bit-identical at index " + std::to_string(i));
  }
  require(ests2.size() == ests.size(), "estimate count changed in round trip");
  for (size_t i = 0; i < std::min(ests.size(), ests2.size()); ++i) {
    require(pose_bits_equal(ests2[i].pose, ests[i].pose) &&
                ests2[i].confidence == ests[i].confidence &&
                ests2[i].inference_time == ests[i].inference_time,
            "estimate round trip not bit-identical at index " +
                std::to_string(i));
  }

  // Malformed inputs: exit code 2 with a row/field diagnostic.
  const auto models_dir = cli.write_cube_models();
  {
    std::ofstream out(cli.work / "bad.csv");
    out << "scene_id,im_id,obj_id,score,R,t,time\n";
    out << "0,0,1,0.9,1 0 0 0 1 0 0 0 1,0 0 500,0.1\n";
    out << "0,0,1,not_a_number,1 0 0 0 1 0 0 0 1,0 0 500,0.1\n";
  }
  require(cli.run("evaluate --models " + models_dir.string() + " --gt " +
                  (cli.work / "gt.json").string() + " --estimates " +
                  (cli.work / "bad.csv").string() + " --out " +
                  (cli.work / "out1").string()) == 2,
          "malformed CSV exit code was " + std::to_string(cli.last_exit));
  require(cli.last_output.find("row 3") != std::string::npos,
          "diagnostic lacks the row number: " + cli.last_output);

  {
    std::ofstream out(cli.work / "bad_gt.json");
    out << R"({"0": [{"obj_id": 1, "cam_R_m2c": [1,0,0,0,1,0,0,0,1],)"
        << R"( "cam_t_m2c": [0,0,500], "visib_fract": 1.7}]})";
  }
  require(cli.run("evaluate --models " + models_dir.string() + " --gt " +
                  (cli.work / "bad_gt.json").string() + " --estimates " +
                  (cli.work / "est.csv").string() + " --out " +
                  (cli.work / "out2").string()) == 2,
          "malformed GT exit code was " + std::to_string(cli.last_exit));
  require(cli.last_output.find("visibility") != std::string::npos,
          "diagnostic lacks the field name: " + cli.last_output);
}

}  // namespace

int main() {
  run_criterion(1, "metric exactness against the brute-force oracle",
                criterion_1_metric_exactness);
  run_criterion(2, "geometry invariants and convexity vertex-exactness",
                criterion_2_geometry_invariants);
  run_criterion(3, "matching equals exhaustive enumeration, deterministic",
                criterion_3_matching_oracle);
  run_criterion(4, "threshold monotonicity laws and miscalibrated AP curve",
                criterion_4_threshold_laws);
  run_criterion(5, "end-to-end perfect estimator through the CLI",
                criterion_5_end_to_end_perfect);
  run_criterion(6, "noise calibration of the perturbation oracle",
                criterion_6_noise_calibration);
  run_criterion(7, "process-sim AR granularity and part conservation",
                criterion_7_process_granularity);
  run_criterion(8, "I/O round trip and malformed-file diagnostics",
                criterion_8_io_round_trip);

  if (failures > 0) {
    std::cout << failures << " check(s) failed\n";
    return 1;
  }
  std::cout << "all criteria passed\n";
  return 0;
}
