// Copyright 2026 The qeopt authors
// SPDX-License-Identifier: Apache-2.0
//
// Builds the parameter-prediction table assets (tree_table.json,
// sk_table.json, mis_fit.json) by optimizing emulated QAOA on proxy
// instances, and writes them into the given directory.

#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "qeopt/params.hpp"

int main(int argc, char** argv) {
  CLI::App app{"qeopt parameter-table builder"};
  std::string out_dir = "assets";
  bool quick = false;
  bool skip_tree = false, skip_sk = false, skip_mis = false;
  int max_p = 6;
  std::uint64_t seed = 20260810;
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--quick", quick, "small proxies and fewer restarts (for smoke testing)");
  app.add_flag("--skip-tree", skip_tree);
  app.add_flag("--skip-sk", skip_sk);
  app.add_flag("--skip-mis", skip_mis);
  app.add_option("--max-p", max_p, "largest layer count to tabulate");
  app.add_option("--seed", seed, "build seed");
  CLI11_PARSE(app, argc, argv);

  std::filesystem::create_directories(out_dir);
  using namespace qeopt;

  if (!skip_tree) {
    TreeTableBuildOptions topts;
    topts.max_p = max_p;
    topts.seed = derive_seed(seed, 1);
    if (quick) {
      topts.degrees = {1, 2, 3, 4, 5};
      topts.proxy_n = 10;
      topts.restarts = 2;
      topts.girth_candidates = 3;
    }
    std::cerr << "building tree table (degrees=" << topts.degrees.size() << ", p<=" << topts.max_p
              << ", proxy n=" << topts.proxy_n << ")...\n";
    auto t0 = std::chrono::steady_clock::now();
    TreeParamTable tree = build_tree_table(topts);
    spill_file(out_dir + "/tree_table.json", tree_table_to_json(tree).dump(1));
    std::cerr << "  done in "
              << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s\n";
    for (const auto& cell : tree.metadata.at("cells"))
      if (cell.at("p").get<int>() == 1)
        std::cerr << "  d=" << cell.at("d") << " ar*=" << cell.at("ar_star") << "\n";
  }

  if (!skip_sk) {
    SkTableBuildOptions sopts;
    sopts.max_p = max_p;
    sopts.seed = derive_seed(seed, 2);
    if (quick) {
      sopts.n = 8;
      sopts.instances = 3;
      sopts.restarts = 2;
    }
    std::cerr << "building sk table (n=" << sopts.n << ", instances=" << sopts.instances << ")...\n";
    auto t0 = std::chrono::steady_clock::now();
    SkParamTable sk = build_sk_table(sopts);
    spill_file(out_dir + "/sk_table.json", sk_table_to_json(sk).dump(1));
    std::cerr << "  done in "
              << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s\n";
  }

  if (!skip_mis) {
    MisTableBuildOptions mopts;
    mopts.max_p = max_p;
    mopts.seed = derive_seed(seed, 3);
    if (quick) {
      mopts.sizes = {8, 9, 10};
      mopts.graphs_total = 24;
      mopts.restarts = 2;
    }
    std::cerr << "building mis fit table (" << mopts.graphs_total << " training graphs)...\n";
    auto t0 = std::chrono::steady_clock::now();
    MisFitTable mis = fit_mis_tables(mopts);
    spill_file(out_dir + "/mis_fit.json", mis_table_to_json(mis).dump(1));
    std::cerr << "  done in "
              << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s\n";
    for (const auto& f : mis.metadata.at("fits"))
      std::cerr << "  p=" << f.at("p") << " j=" << f.at("j") << " rms=" << f.at("rms_residual") << "\n";
  }
  std::cerr << "assets written to " << out_dir << "\n";
  return 0;
}
