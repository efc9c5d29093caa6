#include <cstdio>
#include <exception>

#include "CLI11.hpp"

#include "commands.hpp"
#include "jnr/errors.hpp"
#include "jnr/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "Joint, product, and separable numerical ranges of two-qubit "
      "observable triples: sampling, hulls, boundary classification, and "
      "ground-energy phase scans."};
  app.set_version_flag("--version", jnr::kLibraryVersion);
  app.require_subcommand(1);

  jnrcli::RunConfig cfg;

  const auto add_common = [&cfg](CLI::App* c, const char* file_help) {
    c->add_option("--demo", cfg.demo,
                  "Bundled instance: oloid, cone, ising, xy, eg1, eg2, eg3");
    c->add_option("--file", cfg.file, file_help);
    c->add_option("--grid", cfg.grid, "Bloch grid size per state factor")
        ->capture_default_str();
    c->add_option("--dirs", cfg.dirs, "Supporting-plane sweep directions")
        ->capture_default_str();
    c->add_option("--seed", cfg.seed, "Seed of every random stream")
        ->capture_default_str();
    c->add_option("--out", cfg.out, "Output directory")->capture_default_str();
    c->add_option("--eps-slab", cfg.eps_slab,
                  "Relative slab half-thickness (default 5e-4)");
    c->add_option("--eps-member", cfg.eps_member,
                  "Relative membership tolerance (default 1e-2)");
    c->add_option("--probes", cfg.probes,
                  "Membership probes per segment interior (default 9)");
  };

  CLI::App* sample = app.add_subcommand(
      "sample",
      "Sample the product range (plus symmetric variants where defined) to "
      "CSV point clouds");
  add_common(sample, "Instance JSON file (dense {re,im} or Pauli maps)");

  CLI::App* hull = app.add_subcommand(
      "hull", "Convex hull as an OBJ mesh with stats; input is an instance "
              "or a cloud CSV");
  add_common(hull, "Instance JSON file, or a cloud CSV to hull directly");

  CLI::App* classify = app.add_subcommand(
      "classify",
      "Sweep supporting planes, detect ruled boundary, classify features");
  add_common(classify, "Instance JSON file (dense {re,im} or Pauli maps)");

  const auto add_path = [&cfg](CLI::App* c) {
    c->add_option("--path-a", cfg.path_a, "Great-circle start direction")
        ->capture_default_str();
    c->add_option("--path-b", cfg.path_b, "Great-circle second direction")
        ->capture_default_str();
    c->add_option("--steps", cfg.steps, "Directions along the circle")
        ->capture_default_str();
    c->add_option("--path-file", cfg.path_file,
                  "CSV of explicit directions (x,y,z header)");
  };

  CLI::App* phase = app.add_subcommand(
      "phase", "Ground-energy scan along a closed direction path");
  add_common(phase, "Instance JSON file (dense {re,im} or Pauli maps)");
  add_path(phase);

  CLI::App* demo = app.add_subcommand(
      "demo", "sample + hull + classify + phase with defaults");
  demo->add_option("name", cfg.demo, "Bundled instance name");
  add_common(demo, "Instance JSON file (dense {re,im} or Pauli maps)");
  add_path(demo);

  CLI::App* report = app.add_subcommand(
      "report", "Validate and summarize an emitted cloud CSV");
  add_common(report, "Cloud CSV to inspect (required)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sample->parsed()) {
      cfg.command = "sample";
      return jnrcli::cmd_sample(cfg);
    }
    if (hull->parsed()) {
      cfg.command = "hull";
      return jnrcli::cmd_hull(cfg);
    }
    if (classify->parsed()) {
      cfg.command = "classify";
      return jnrcli::cmd_classify(cfg);
    }
    if (phase->parsed()) {
      cfg.command = "phase";
      return jnrcli::cmd_phase(cfg);
    }
    if (demo->parsed()) {
      cfg.command = "demo";
      return jnrcli::cmd_demo(cfg);
    }
    if (report->parsed()) {
      cfg.command = "report";
      return jnrcli::cmd_report(cfg);
    }
    std::fprintf(stderr, "error: no command\n");
    return 2;
  } catch (const jnr::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const jnr::NotFoundError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const jnr::NoConvergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const jnr::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
