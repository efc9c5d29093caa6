#pragma once

#include <cstdint>
#include <string>

namespace jnrcli {

// Everything the subcommands need, straight from the parsed flags. Negative
// tolerance / probe values mean "library default"; the effective values are
// echoed into every report.
struct RunConfig {
  std::string command;
  std::string demo;       // catalog name
  std::string file;       // instance JSON, or cloud CSV for hull/report
  int grid = 200;         // Bloch grid per factor
  int dirs = 2000;        // sweep directions
  std::uint64_t seed = 1;
  std::string out = ".";
  double eps_slab = -1;   // relative slab half-thickness
  double eps_member = -1; // relative membership tolerance
  int probes = -1;        // probes per segment interior
  // Phase-scan path: great circle through two directions, or explicit list.
  std::string path_a = "0,1,1";
  std::string path_b = "1,0,0";
  int steps = 64;
  std::string path_file;
};

int cmd_sample(const RunConfig& cfg);
int cmd_hull(const RunConfig& cfg);
int cmd_classify(const RunConfig& cfg);
int cmd_phase(const RunConfig& cfg);
int cmd_demo(const RunConfig& cfg);
int cmd_report(const RunConfig& cfg);

} // namespace jnrcli
