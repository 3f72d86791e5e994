#pragma once

#include <memory>
#include <vector>

#include "io.hpp"

namespace CLI {
class App;
}

namespace genokit::cli {

class Command {
 public:
  virtual ~Command() = default;
  virtual void execute(Context& ctx) = 0;
  CLI::App* app = nullptr;
};

/// Registers every subcommand on `app`; the returned objects own the parsed
/// option values.
std::vector<std::unique_ptr<Command>> add_commands(CLI::App& app);

}  // namespace genokit::cli
