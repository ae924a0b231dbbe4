#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "posebench/report.hpp"

namespace posebench {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::filesystem::path &path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write file: " + path.string());
  }
  return out;
}

const char *verdict_name(Verdict v) {
  return v == Verdict::kTruePositive ? "TP" : "FP";
}

const char *attempt_verdict_name(AttemptVerdict v) {
  switch (v) {
    case AttemptVerdict::kTruePositive: return "TP";
    case AttemptVerdict::kFpCrash: return "FP_crash";
    case AttemptVerdict::kFpMisplace: return "FP_misplace";
    case AttemptVerdict::kSkipped: return "skipped";
  }
  return "?";
}

json pose_to_json(const Pose &pose) {
  std::vector<double> r(9);
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col) r[row * 3 + col] = pose.rotation(row, col);
  return json{{"R", r},
              {"t", {pose.translation.x(), pose.translation.y(),
                     pose.translation.z()}}};
}

}  // namespace

std::string format_percent(double fraction) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1) << fraction * 100.0;
  return os.str();
}

void write_sweep_csv(const std::filesystem::path &path,
                     const std::vector<SweepPoint> &sweep) {
  auto out = open_out(path);
  out << "confidence,ap,ar\n";
  out << std::setprecision(17);
  for (const auto &p : sweep) {
    out << p.confidence << ',' << p.ap << ',' << p.ar << '\n';
  }
}

void write_distribution_csv(const std::filesystem::path &path,
                            const std::vector<std::pair<int, double>> &rows) {
  auto out = open_out(path);
  out << "object_id,mde_mm\n";
  out << std::setprecision(17);
  for (const auto &[object_id, mde] : rows) {
    out << object_id << ',' << mde << '\n';
  }
}

void write_eval_report(const std::filesystem::path &dir,
                       const EvalReport &report) {
  {
    auto out = open_out(dir / "ap_ar.csv");
    out << "ap,ar,ap_percent,ar_percent\n";
    out << std::setprecision(17) << report.ap << ',' << report.ar << ','
        << format_percent(report.ap) << ',' << format_percent(report.ar)
        << '\n';
  }
  write_sweep_csv(dir / "sweep.csv", report.sweep);
  write_distribution_csv(dir / "mde_distribution.csv",
                         report.mde_distribution);
  {
    auto out = open_out(dir / "components.csv");
    out << "axis,mean_mm,std_mm\n";
    out << std::setprecision(17);
    const char *axes[] = {"x", "y", "z"};
    for (int k = 0; k < 3; ++k) {
      out << axes[k] << ',' << report.component_stats.mean(k) << ','
          << report.component_stats.stddev(k) << '\n';
    }
  }

  json j;
  j["ap"] = report.ap;
  j["ar"] = report.ar;
  j["components"] = {
      {"count", report.component_stats.count},
      {"mean_mm", {report.component_stats.mean.x(),
                   report.component_stats.mean.y(),
                   report.component_stats.mean.z()}},
      {"std_mm", {report.component_stats.stddev.x(),
                  report.component_stats.stddev.y(),
                  report.component_stats.stddev.z()}}};
  j["sweep"] = json::array();
  for (const auto &p : report.sweep) {
    j["sweep"].push_back({{"confidence", p.confidence}, {"ap", p.ap},
                          {"ar", p.ar}});
  }
  j["samples"] = json::array();
  for (const auto &s : report.per_sample) {
    json sample;
    sample["scene_id"] = s.scene_id;
    sample["image_id"] = s.image_id;
    sample["tp"] = s.tp;
    sample["fp"] = s.fp;
    sample["fn"] = s.fn;
    sample["matches"] = json::array();
    for (const auto &m : s.matches) {
      json match;
      match["estimate_index"] = m.estimate_index;
      match["gt_index"] = m.gt_index;
      match["object_id"] = m.object_id;
      match["verdict"] = verdict_name(m.verdict);
      if (m.gt_index >= 0) {
        match["mde_mm"] = m.mde_mm;
        match["gt_pose"] = pose_to_json(m.gt_pose);
        match["est_pose"] = pose_to_json(m.est_pose);
      }
      sample["matches"].push_back(match);
    }
    sample["unmatched_gt_fn"] = s.unmatched_gt_fn;
    j["samples"].push_back(sample);
  }
  auto out = open_out(dir / "report.json");
  out << j.dump(2) << '\n';
}

void write_process_outcome(const std::filesystem::path &dir,
                           const ProcessOutcome &outcome) {
  json j;
  j["tp"] = outcome.tp;
  j["fp"] = outcome.fp;
  j["fn"] = outcome.fn;
  j["ap"] = outcome.ap;
  j["ar"] = outcome.ar;
  j["attempts"] = json::array();
  for (const auto &a : outcome.attempts) {
    j["attempts"].push_back({{"scene", a.scene},
                             {"part", a.part},
                             {"verdict", attempt_verdict_name(a.verdict)},
                             {"mde_mm", a.mde_mm},
                             {"confidence", a.confidence},
                             {"elapsed_s", a.elapsed_s}});
  }
  j["scenes"] = json::array();
  for (const auto &s : outcome.per_scene) {
    j["scenes"].push_back({{"tp", s.tp}, {"fp", s.fp}, {"fn", s.fn},
                           {"precision", s.precision}, {"recall", s.recall}});
  }
  {
    auto out = open_out(dir / "attempt_log.json");
    out << j.dump(2) << '\n';
  }
  {
    auto out = open_out(dir / "summary.csv");
    out << "scene,tp,fp,fn,precision,recall\n";
    out << std::setprecision(17);
    for (size_t s = 0; s < outcome.per_scene.size(); ++s) {
      const auto &scene = outcome.per_scene[s];
      out << s << ',' << scene.tp << ',' << scene.fp << ',' << scene.fn << ','
          << scene.precision << ',' << scene.recall << '\n';
    }
    out << "total," << outcome.tp << ',' << outcome.fp << ',' << outcome.fn
        << ',' << format_percent(outcome.ap) << ','
        << format_percent(outcome.ar) << '\n';
  }
}

}  // namespace posebench
