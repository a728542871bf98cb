#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>

#include "dbnet/cli.hpp"

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("dbnet");
  logger->set_pattern("[%l] %v");
  const char* level = std::getenv("DBNET_LOG");
  logger->set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
  std::vector<std::string> args(argv + 1, argv + argc);
  return dbnet::cli::run_command(args, std::cout, std::cerr, [&](const std::string& m) { logger->info(m); });
}
