#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ctrllab/config.hpp"
#include "ctrllab/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"controllability experiments for two pseudo-parabolic equations"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "execute experiment families");
  std::string config_path;
  std::vector<std::string> only;
  std::string out_dir;
  run->add_option("--config", config_path, "JSON experiment configuration")
      ->required();
  run->add_option("--only", only,
                  "restrict to the given families (repeatable)");
  run->add_option("--out", out_dir, "output directory (default from config)");

  auto* families = app.add_subcommand("families", "list experiment families");
  auto* dump = app.add_subcommand("default-config",
                                  "print the default configuration");

  CLI11_PARSE(app, argc, argv);

  if (families->parsed()) {
    for (const auto& f : ctrllab::experiment_families()) std::printf("%s\n", f.c_str());
    return 0;
  }
  if (dump->parsed()) {
    std::fputs(ctrllab::serialize_config(ctrllab::default_config()).c_str(),
               stdout);
    return 0;
  }

  ctrllab::ExperimentConfig cfg;
  try {
    cfg = ctrllab::load_config(config_path);
    auto issues = cfg.validate();
    if (!issues.empty()) {
      for (const auto& msg : issues) std::fprintf(stderr, "config: %s\n", msg.c_str());
      return 1;
    }
  } catch (const ctrllab::ConfigError& e) {
    for (const auto& msg : e.issues) std::fprintf(stderr, "config: %s\n", msg.c_str());
    return 1;
  }

  std::string out = out_dir.empty() ? cfg.output_dir : out_dir;
  ctrllab::RunManifest manifest;
  try {
    manifest = ctrllab::run_experiments(cfg, only, out);
  } catch (const ctrllab::ConfigError& e) {
    for (const auto& msg : e.issues) std::fprintf(stderr, "config: %s\n", msg.c_str());
    return 1;
  }

  for (const auto& [fam, err] : manifest.failures)
    std::fprintf(stderr, "%s: failed: %s\n", fam.c_str(), err.c_str());
  for (const auto& fam : manifest.families) {
    if (manifest.failures.count(fam)) continue;
    std::printf("%s: ok (%.2fs)\n", fam.c_str(), manifest.seconds.at(fam));
  }
  return manifest.failures.empty() ? 0 : 2;
}
