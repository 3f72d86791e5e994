#include "cli.hpp"

#include <CLI11.hpp>
#include <ostream>

#include "commands.hpp"
#include "genokit/error.hpp"
#include "genokit/parallel.hpp"

namespace genokit::cli {

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"genokit: SNP genotype analysis toolkit", "genokit"};
  app.set_version_flag("--version", GENOKIT_VERSION);
  app.set_config("--config", "", "Read options from a TOML/INI file");
  unsigned threads = 0;
  std::uint64_t seed = 1;
  std::string log_path;
  bool quiet = false;
  app.add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--seed", seed, "Random seed")->capture_default_str();
  app.add_option("--log", log_path, "Write config, progress and timings to this file");
  app.add_flag("--quiet", quiet, "Suppress progress messages");
  app.require_subcommand(1);
  app.fallthrough();
  auto commands = add_commands(app);

  if (args.empty()) {
    err << app.help();
    return kExitUsage;
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << GENOKIT_VERSION << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: category=usage message=" << e.what() << '\n';
    err << "Run with --help for more information.\n";
    return kExitUsage;
  }

  try {
    set_thread_count(threads);
    Context ctx(out, err, quiet, log_path);
    ctx.seed = seed;
    std::string argv_line = "genokit";
    for (const auto& a : args) argv_line += " " + a;
    ctx.log("genokit " GENOKIT_VERSION);
    ctx.log("command: " + argv_line);
    ctx.log("threads: " + std::to_string(thread_count()));
    ctx.log("effective config:");
    ctx.log(app.config_to_str(true, false));
    for (auto& c : commands)
      if (c->app->parsed()) {
        auto total = ctx.phase("total");
        c->execute(ctx);
      }
    return 0;
  } catch (const Error& e) {
    err << "error: category=" << to_string(e.kind()) << " message=" << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: category=internal message=" << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace genokit::cli
