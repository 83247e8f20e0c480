// Command-line front end for the self-identity experiment pipeline.
//
// Exit codes: 0 success (or verdict true), 1 verdict false, 2 usage or
// config error, 3 runtime failure.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "selfid/selfid.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kVerdictFalse = 1;
constexpr int kUsage = 2;
constexpr int kRuntime = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"selfid: memory continua, identity recognition and belief verification"};
  app.require_subcommand(1);

  std::string config_path;
  std::string checkpoint_path;
  std::string before_path, after_path, out_override;
  std::size_t top_n = 30;

  auto* gen = app.add_subcommand("generate", "Generate a synthetic memory dataset and labels");
  gen->add_option("--config", config_path, "Experiment config (JSON)")->required();
  gen->add_option("--out", out_override, "Output directory (overrides output_dir)");

  auto* tr = app.add_subcommand("train", "Train the low-rank adapter on the generated dataset");
  tr->add_option("--config", config_path, "Experiment config (JSON)")->required();
  tr->add_option("--out", out_override, "Output directory (overrides output_dir)");

  auto* ver = app.add_subcommand("verify", "Check both self conditions for a checkpoint");
  ver->add_option("--config", config_path, "Experiment config (JSON)")->required();
  ver->add_option("--checkpoint", checkpoint_path, "Recognizer checkpoint (default: final checkpoint)");
  ver->add_option("--out", out_override, "Output directory (overrides output_dir)");

  auto* tm = app.add_subcommand("textmetrics", "Compare two response corpora");
  tm->add_option("--before", before_path, "Baseline responses (JSON lines)")->required();
  tm->add_option("--after", after_path, "Post-training responses (JSON lines)")->required();
  tm->add_option("--top-n", top_n, "Words in the frequency comparison")->check(CLI::PositiveNumber);
  tm->add_option("--out", out_override, "Output directory")->required();

  auto* rep = app.add_subcommand("report", "Aggregate earlier outputs into report.json");
  rep->add_option("--config", config_path, "Experiment config (JSON)");
  rep->add_option("--out", out_override, "Output directory (overrides output_dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  namespace fs = std::filesystem;
  std::optional<fs::path> override_dir;
  if (!out_override.empty()) override_dir = out_override;

  try {
    if (*tm) {
      auto r = selfid::cmd_textmetrics(before_path, after_path, top_n, *override_dir);
      std::cout << "wrote " << (*override_dir / selfid::files::kTextReport).string() << "\n";
      for (const auto& m : r.report.metrics)
        if (m.percent) std::cout << "  " << m.name << ": " << m.before << " -> " << m.after << " ("
                                 << selfid::round1(*m.percent) << "%)\n";
      return kOk;
    }
    if (*rep && config_path.empty() && !override_dir) {
      std::cerr << "report needs --config or --out\n";
      return kUsage;
    }

    const auto cfg = config_path.empty() ? selfid::ExperimentConfig{} : selfid::load_config(config_path);
    const fs::path out = selfid::out_dir(cfg, override_dir);

    if (*gen) {
      auto r = selfid::cmd_generate(cfg, out);
      std::cout << "generated " << r.dataset.samples.size() << " samples x "
                << cfg.generator.memories_per_sample << " memories in " << out.string()
                << " (guaranteed epsilon " << r.dataset.manifest.guaranteed_epsilon << ")\n";
      return kOk;
    }
    if (*tr) {
      auto r = selfid::cmd_train(cfg, out);
      std::cout << "trained " << r.trace.steps.size() << " steps: loss " << r.trace.initial_loss << " -> "
                << r.trace.final_loss << "\n";
      return kOk;
    }
    if (*ver) {
      const fs::path checkpoint = checkpoint_path.empty() ? out / selfid::files::kFinalCheckpoint
                                                          : fs::path(checkpoint_path);
      auto v = selfid::cmd_verify(cfg, checkpoint, out);
      std::cout << "condition 1 (single continuum): " << (v.condition1 ? "holds" : "fails") << "\n"
                << "condition 2 (stable recognition, belief >= " << cfg.threshold
                << "): " << (v.condition2 ? "holds" : "fails") << "\n";
      const auto failing = v.condition2_detail.failing_memories();
      if (!failing.empty()) {
        std::cout << "failing memories (" << failing.size() << "):";
        for (std::size_t i = 0; i < failing.size() && i < 20; ++i) std::cout << " " << failing[i];
        if (failing.size() > 20) std::cout << " ...";
        std::cout << "\n";
      }
      std::cout << "verdict: " << (v.possesses_self ? "possesses a self" : "no self") << "\n";
      return v.possesses_self ? kOk : kVerdictFalse;
    }
    if (*rep) {
      selfid::cmd_report(out);
      std::cout << "wrote " << (out / selfid::files::kReport).string() << "\n";
      return kOk;
    }
  } catch (const selfid::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
