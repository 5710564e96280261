#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "emopanel/pipeline.hpp"

namespace {

std::string stage_list() {
  std::string s = "all";
  for (const auto& n : emopanel::pipeline::stage_names()) s += ", " + n;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Investor-emotion panel pipeline"};
  app.set_version_flag("--version", std::string(emopanel::pipeline::kVersion));
  std::string stage, config_path, out_dir;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  app.add_option("stage", stage, "Stage to run: " + stage_list())->required();
  app.add_option("--config", config_path, "JSON configuration file")->required();
  app.add_option("--seed", seed, "Override the configured seed");
  app.add_option("--out", out_dir, "Override the output directory (also EMOPANEL_OUT)");
  app.add_flag("-q,--quiet", quiet, "Suppress stage notes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  using namespace emopanel;
  try {
    auto config = pipeline::PipelineConfig::load(config_path);
    if (const char* env = std::getenv("EMOPANEL_OUT"); env && *env) config.out_dir = env;
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (seed) config.seed = *seed;
    for (const auto& r : pipeline::run_stage(stage, config)) {
      if (quiet) continue;
      std::cout << "[" << r.stage << "]";
      for (const auto& o : r.outputs) std::cout << ' ' << o;
      std::cout << '\n';
      for (const auto& l : r.log) std::cout << "  " << l << '\n';
    }
  } catch (const InvalidArgument& e) {
    std::cerr << "emopanel: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "emopanel: " << e.what();
    if (e.line()) std::cerr << " (line " << e.line() << ')';
    std::cerr << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "emopanel: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
