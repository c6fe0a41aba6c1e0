#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace CLI {
class App;
}

namespace wsseg::cli {

enum ExitCode { kOk = 0, kUserError = 1, kInternalError = 2, kNumericalError = 3 };

/// Parsed flag values of every subcommand; filled by CLI11 during parsing.
struct Options;

/// The full command tree. Owns the option storage the App writes into.
class Application {
 public:
  Application();
  ~Application();

  CLI::App& app() { return *app_; }

  /// Parses `args` (without the program name) and runs the chosen subcommand.
  int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

 private:
  std::unique_ptr<Options> opts_;
  std::unique_ptr<CLI::App> app_;
};

/// Convenience wrapper: a fresh Application per call.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wsseg::cli
