#include "cpset/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  cpset::RunConfig cfg;
  CLI::App app{"Cut-and-project sets, bounded remainder sets and equidecomposition checks"};
  app.add_option("command", cfg.command, "Command to run")->required()->check(CLI::IsMember(cpset::command_names()));
  app.add_option("--lattice", cfg.lattice, "Lattice JSON");
  app.add_option("--window", cfg.window, "Window JSON (A for two-window commands)");
  app.add_option("--window2", cfg.window2, "Second window JSON (B)");
  app.add_option("--instance", cfg.instance, "Bipartite instance JSON for hall");
  app.add_option("--decomposition", cfg.decomposition, "Decomposition JSON for equi-verify");
  app.add_option("--out", cfg.out, "Output directory")->capture_default_str();
  app.add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  app.add_option("--nmax", cfg.nmax, "Orbit length, profile length or patch index range")->capture_default_str();
  app.add_option("--split", cfg.split, "Stabilization split for brs and pairgap (default nmax/100)");
  app.add_option("--n-lo", cfg.n_lo, "First patch index for gen");
  app.add_option("--K", cfg.k, "Matching distance for bde");
  app.add_option("--slack", cfg.slack, "Boundary slack for bde (default K)");
  app.add_flag("--binary-search-K", cfg.binary_search_k, "Search the minimal K on a grid of --step");
  app.add_option("--step", cfg.step, "Grid step for the K search")->capture_default_str();
  app.add_option("--kmax", cfg.kmax, "Largest block size for uniformity")->capture_default_str();
  app.add_option("--x-samples", cfg.x_samples, "Base points sampled by uniformity")->capture_default_str();
  app.add_option("--raster", cfg.raster, "Raster cell size for equi-build")->capture_default_str();
  app.add_option("--samples", cfg.samples, "Monte Carlo samples for equi-verify")->capture_default_str();
  app.add_option("--q-max", cfg.q_max, "Integer relation bound for special-form")->capture_default_str();
  app.add_option("--x", cfg.x, "Base point, comma separated (default: grid)")->delimiter(',');
  app.add_option("--side", cfg.side, "Hall side: left, right or both")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  return cpset::run(cfg);
}
