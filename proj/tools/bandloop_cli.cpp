// bandloop command line: runs one experiment per invocation against the
// shared-library C API. Exit codes: 0 success, 1 acceptance-threshold
// violation, 2 configuration error, 3 runtime failure.

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bandloop/bandloop.h"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string seed;
  std::string samples;
  std::string threads = "1";
  std::string out_path;
  std::string format = "csv";
  bool overwrite = false;
  std::vector<std::string> sets;
};

int fail_code(bl_status status) {
  switch (status) {
    case BL_CONFIG_ERROR:
    case BL_INVALID_ARGUMENT:
    case BL_IO_ERROR:
      return 2;
    default:
      return 3;
  }
}

int run_kind(const std::string& kind, const CommonArgs& args) {
  bl_config* config = nullptr;
  bl_status status = bl_config_load(args.config_path.c_str(), &config);
  if (status != BL_OK) {
    std::fprintf(stderr, "bandloop: %s\n", bl_last_error());
    return fail_code(status);
  }
  std::unique_ptr<bl_config, decltype(&bl_config_free)> config_guard(config, bl_config_free);

  auto apply = [&](const char* key, const std::string& value) -> int {
    if (value.empty()) return 0;
    if (bl_config_set(config, key, value.c_str()) != BL_OK) {
      std::fprintf(stderr, "bandloop: %s\n", bl_last_error());
      return 2;
    }
    return 0;
  };
  if (int rc = apply("kind", kind)) return rc;
  if (int rc = apply("seed", args.seed)) return rc;
  if (int rc = apply("samples", args.samples)) return rc;
  for (const auto& pair : args.sets) {
    const auto eq = pair.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "bandloop: --set expects key=value, got '%s'\n", pair.c_str());
      return 2;
    }
    if (int rc = apply(pair.substr(0, eq).c_str(), pair.substr(eq + 1))) return rc;
  }

  int threads = 1;
  try {
    threads = std::stoi(args.threads);
  } catch (...) {
    std::fprintf(stderr, "bandloop: --threads expects an integer\n");
    return 2;
  }

  bl_report* report = nullptr;
  status = bl_run(config, threads, &report);
  if (status != BL_OK) {
    std::fprintf(stderr, "bandloop: %s\n", bl_last_error());
    return fail_code(status);
  }
  std::unique_ptr<bl_report, decltype(&bl_report_free)> report_guard(report, bl_report_free);

  std::fputs(bl_report_brief(report), stdout);

  if (!args.out_path.empty()) {
    const bl_format fmt = args.format == "json" ? BL_FORMAT_JSON : BL_FORMAT_CSV;
    status = bl_report_write(report, args.out_path.c_str(), fmt, args.overwrite ? 1 : 0);
    if (status != BL_OK) {
      std::fprintf(stderr, "bandloop: %s\n", bl_last_error());
      return fail_code(status);
    }
    std::printf("report written to %s\n", args.out_path.c_str());
  }

  return bl_report_passed(report) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("bandloop ") + bl_version() +
               " - band matrix loop experiments (blocks are 0-based on the command line and in "
               "reports' raw indices)"};
  app.require_subcommand(1);

  const std::vector<std::string> kinds = {"ward",     "sumzero",  "oracle",
                                          "compare-k", "scaling", "diffusion",
                                          "locallaw", "spectrum", "sample-loops"};
  std::vector<std::pair<CLI::App*, std::shared_ptr<CommonArgs>>> commands;
  for (const auto& kind : kinds) {
    auto args = std::make_shared<CommonArgs>();
    CLI::App* sub = app.add_subcommand(kind, "run the '" + kind + "' experiment");
    sub->add_option("--config", args->config_path, "key = value config file")->required();
    sub->add_option("--seed", args->seed, "master seed override");
    sub->add_option("--samples", args->samples, "sample count override");
    sub->add_option("--threads", args->threads, "worker threads (default 1)");
    sub->add_option("--out", args->out_path, "report output path");
    sub->add_option("--format", args->format, "csv or json (default csv)")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_flag("--overwrite", args->overwrite, "allow overwriting --out");
    sub->add_option("--set", args->sets, "extra key=value config overrides")
        ->take_all();
    commands.emplace_back(sub, args);
  }

  CLI11_PARSE(app, argc, argv);

  for (std::size_t i = 0; i < commands.size(); ++i) {
    if (commands[i].first->parsed()) return run_kind(kinds[i], *commands[i].second);
  }
  std::fprintf(stderr, "bandloop: no subcommand selected\n");
  return 2;
}
