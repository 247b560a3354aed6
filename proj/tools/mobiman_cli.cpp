#include <CLI11.hpp>
#include <cstdio>

int main(int argc, char** argv) {
  CLI::App app{"mobile manipulation simulation harness"};
  app.require_subcommand(1);
  auto* run = app.add_subcommand("run", "run a scenario");
  auto* replay = app.add_subcommand("replay", "replay a measurement log");
  auto* report = app.add_subcommand("report", "summarize a run directory");
  (void)run;
  (void)replay;
  (void)report;
  CLI11_PARSE(app, argc, argv);
  std::puts("not yet implemented");
  return 1;
}
