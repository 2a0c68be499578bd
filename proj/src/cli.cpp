#include "dcgkit/cli.hpp"

#include <algorithm>
#include <chrono>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "dcgkit/dcg.hpp"
#include "dcgkit/dm.hpp"
#include "dcgkit/hc.hpp"
#include "dcgkit/io.hpp"
#include "dcgkit/mimic.hpp"
#include "dcgkit/newick.hpp"
#include "dcgkit/rng.hpp"
#include "dcgkit/seqscore.hpp"

namespace dcgkit::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::string out;
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(io::read_file(path)); }

namespace {

// Exit code 3: results were written but are degenerate.
class Degenerate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Context {
  std::string command;
  std::vector<std::string> args;
  fs::path out = "out";
  std::uint64_t seed = 0;
  bool verbose = false;
  json params = json::object();
  std::vector<fs::path> inputs;
  std::vector<std::string> outputs;  // relative to out

  void write(const std::string& name, std::string_view content) {
    io::write_file(out / name, content);
    outputs.push_back(name);
  }
};

void write_manifest(const Context& ctx, double seconds, int exit_code) {
  json m;
  m["command"] = ctx.command;
  m["args"] = ctx.args;
  m["cwd"] = fs::current_path().string();
  m["seed"] = ctx.seed;
  m["parameters"] = ctx.params;
  json inputs = json::array();
  for (const auto& p : ctx.inputs) inputs.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
  m["inputs"] = std::move(inputs);
  std::vector<std::string> names = ctx.outputs;
  std::sort(names.begin(), names.end());
  json outputs = json::array();
  for (const auto& n : names) outputs.push_back({{"path", n}, {"sha256", sha256_file(ctx.out / n)}});
  m["outputs"] = std::move(outputs);
  m["exit_code"] = exit_code;
  m["seconds"] = seconds;
  io::write_file(ctx.out / "manifest.json", m.dump(2) + "\n");
}

struct DcgFlags {
  std::string grid;
  std::size_t trajectories = 100;
  int visit_threshold = 5;
  double spike_factor = 5.0;
  double eigen_tol = 0.05;
  std::size_t min_run = 3;

  void add(CLI::App* app) {
    app->add_option("--grid", grid, "temperature grid lo:hi:count (log spaced); default spans the distances");
    app->add_option("--trajectories", trajectories, "random walks per temperature")->check(CLI::PositiveNumber);
    app->add_option("--visit-threshold", visit_threshold, "visits before a node is removed");
    app->add_option("--spike-factor", spike_factor, "recurrence spike factor");
    app->add_option("--eigen-tol", eigen_tol, "eigenvalues above this fraction of the largest count as clusters");
    app->add_option("--min-run", min_run, "minimum plateau length for a selected temperature");
  }

  dcg::DcgParams params(std::uint64_t seed) const {
    dcg::DcgParams p;
    if (!grid.empty()) {
      std::vector<std::string> parts;
      std::stringstream ss(grid);
      for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
      if (parts.size() != 3) throw InputError(fmt::format("--grid '{}' is not lo:hi:count", grid));
      try {
        std::size_t used = 0;
        const double lo = std::stod(parts[0]), hi = std::stod(parts[1]);
        const long count = std::stol(parts[2], &used);
        if (used != parts[2].size() || count < 3) throw InputError("");
        if (!(lo > 0.0) || !(hi > lo)) throw InputError("");
        p.grid = dcg::log_grid(lo, hi, static_cast<std::size_t>(count));
      } catch (const std::exception&) {
        throw InputError(fmt::format("--grid '{}': need 0 < lo < hi and count >= 3", grid));
      }
    }
    p.trajectories = trajectories;
    p.walk.visit_threshold = visit_threshold;
    p.walk.spike_factor = spike_factor;
    p.walk.validate();
    if (!(eigen_tol > 0.0 && eigen_tol < 1.0)) throw InputError("--eigen-tol must lie in (0, 1)");
    p.eigen_rel_tol = eigen_tol;
    if (min_run < 1) throw InputError("--min-run must be >= 1");
    p.min_run = min_run;
    p.seed = seed;
    return p;
  }

  json to_json() const {
    return {{"grid", grid},           {"trajectories", trajectories}, {"visit_threshold", visit_threshold},
            {"spike_factor", spike_factor}, {"eigen_tol", eigen_tol}, {"min_run", min_run}};
  }
};

Axis parse_axis(const std::string& s) {
  if (s == "rows") return Axis::rows;
  if (s == "cols" || s == "columns") return Axis::cols;
  throw InputError(fmt::format("--axis must be rows or cols (got '{}')", s));
}

// Distances between the vectors along `axis`; `normalize` rank-normalizes
// each feature (the other axis) first.
DistanceMatrix matrix_distances(const DataMatrix& m, Axis axis, bool normalize) {
  if (!normalize) return pairwise_euclidean(m, axis);
  // rank_normalize works per row, so features must be rows.
  if (axis == Axis::rows) return pairwise_euclidean(rank_normalize(m.transposed()).transposed(), axis);
  return pairwise_euclidean(rank_normalize(m), axis);
}

std::string levels_tsv(const ClusterTree& tree) {
  std::string out = "level\theight\tclusters\n";
  for (std::size_t l = 0; l < tree.level_count(); ++l)
    out += fmt::format("{}\t{}\t{}\n", l, io::format_number(tree.level(l).height), tree.level(l).partition.k());
  return out;
}

std::string assignments_tsv(const ClusterTree& tree) {
  std::string out = "leaf";
  for (std::size_t l = 0; l < tree.level_count(); ++l) out += fmt::format("\tlevel{}", l);
  out += '\n';
  for (std::size_t i = 0; i < tree.leaf_count(); ++i) {
    out += tree.leaves()[i];
    for (const auto& lv : tree.levels()) out += fmt::format("\t{}", lv.partition[i]);
    out += '\n';
  }
  return out;
}

// ---- dcg ------------------------------------------------------------------

struct DcgCommand {
  std::string matrix, distance, axis = "rows";
  bool normalize = false, sharing = false;
  DcgFlags flags;

  void add(CLI::App* app) {
    auto* src = app->add_option_group("input");
    src->add_option("--matrix", matrix, "data matrix CSV");
    src->add_option("--distance", distance, "distance matrix CSV");
    src->require_option(1);
    app->add_option("--axis", axis, "cluster rows or cols of --matrix");
    app->add_flag("--normalize", normalize, "rank-normalize each feature before distances");
    app->add_flag("--sharing", sharing, "also write the sharing matrix of every grid temperature");
    flags.add(app);
  }

  int operator()(Context& ctx) const {
    DistanceMatrix d = [&] {
      if (!distance.empty()) {
        ctx.inputs.push_back(distance);
        return io::read_distance(distance);
      }
      ctx.inputs.push_back(matrix);
      return matrix_distances(io::read_matrix(matrix), parse_axis(axis), normalize);
    }();
    const auto params = flags.params(ctx.seed);
    ctx.params = flags.to_json();
    ctx.params["axis"] = axis;
    ctx.params["normalize"] = normalize;
    ctx.params["sharing"] = sharing;

    const auto res = dcg::run(d, params);
    const auto& prof = res.profile;
    ctx.write("tree.nwk", newick::write(res.tree) + "\n");
    std::string tsv = "temperature\tcluster_count\n";
    for (std::size_t g = 0; g < prof.grid.size(); ++g)
      tsv += fmt::format("{}\t{}\n", io::format_number(prof.grid[g].value()), prof.counts[g]);
    ctx.write("profile.tsv", tsv);
    ctx.write("levels.tsv", levels_tsv(res.tree));
    ctx.write("assignments.tsv", assignments_tsv(res.tree));
    if (sharing) {
      for (std::size_t g = 0; g < prof.grid.size(); ++g)
        ctx.write(fmt::format("sharing/T{:03}.csv", g), io::square_to_csv(d.labels(), prof.sharing[g].v));
    }

    json report;
    report["seed"] = ctx.seed;
    report["parameters"] = ctx.params;
    report["leaves"] = d.size();
    report["grid"] = json::array();
    for (const auto& t : prof.grid) report["grid"].push_back(t.value());
    report["counts"] = prof.counts;
    json sel = json::array();
    for (std::size_t i = 0; i < prof.selected.size(); ++i) {
      const auto g = prof.selected[i];
      json entry = {{"index", g}, {"temperature", prof.grid[g].value()}, {"count", prof.counts[g]}};
      if (d.size() >= 3) {
        // How far 1 - q is from an ultrametric at this temperature.
        const auto check = is_ultrametric(dcg::sharing_distance(prof.sharing[g], d.labels()));
        entry["ultrametric_violations"] = check.violations;
        entry["triples"] = check.triples;
      }
      sel.push_back(std::move(entry));
    }
    report["selected"] = std::move(sel);
    report["branch_counts"] = res.tree.branch_counts();
    std::size_t failed = 0;
    for (const auto& q : prof.sharing) failed += q.failed;
    report["failed_trajectories"] = failed;
    report["empty_selection"] = res.empty_selection;
    ctx.write("report.json", report.dump(2) + "\n");

    if (ctx.verbose) {
      for (std::size_t g = 0; g < prof.grid.size(); ++g)
        std::cerr << fmt::format("T={:.6g}\tN={}\n", prof.grid[g].value(), prof.counts[g]);
    }
    if (res.empty_selection)
      throw Degenerate("no temperature plateau with more than one cluster; wrote the single-level tree");
    return ok;
  }
};

// ---- hc -------------------------------------------------------------------

struct HcCommand {
  std::string matrix, distance, axis = "rows", linkage = "average";
  bool normalize = false;

  void add(CLI::App* app) {
    auto* src = app->add_option_group("input");
    src->add_option("--matrix", matrix, "data matrix CSV");
    src->add_option("--distance", distance, "distance matrix CSV");
    src->require_option(1);
    app->add_option("--axis", axis, "cluster rows or cols of --matrix");
    app->add_flag("--normalize", normalize, "rank-normalize each feature before distances");
    app->add_option("--linkage", linkage, "single, complete or average");
  }

  int operator()(Context& ctx) const {
    const auto link = hc::parse_linkage(linkage);
    DistanceMatrix d = [&] {
      if (!distance.empty()) {
        ctx.inputs.push_back(distance);
        return io::read_distance(distance);
      }
      ctx.inputs.push_back(matrix);
      return matrix_distances(io::read_matrix(matrix), parse_axis(axis), normalize);
    }();
    ctx.params = {{"linkage", hc::to_string(link)}, {"axis", axis}, {"normalize", normalize}};
    const auto dg = hc::hc_build(d, link);
    ctx.write("dendrogram.nwk", hc::to_newick(dg) + "\n");
    const auto tree = hc::full_tree(dg);
    ctx.write("tree.nwk", newick::write(tree) + "\n");
    ctx.write("levels.tsv", levels_tsv(tree));
    std::string merges = "left\tright\theight\tsize\n";
    for (const auto& m : dg.merges)
      merges += fmt::format("{}\t{}\t{}\t{}\n", m.left, m.right, io::format_number(m.height), m.size);
    ctx.write("merges.tsv", merges);
    return ok;
  }
};

// ---- dm -------------------------------------------------------------------

struct DmCommand {
  std::string matrix, row_alg = "hc-average", col_alg = "hc-average";
  int iterations = 3;
  std::vector<std::size_t> levels;
  DcgFlags flags;

  void add(CLI::App* app) {
    app->add_option("--matrix", matrix, "data matrix CSV")->required();
    app->add_option("--row-alg", row_alg, "hc-average, hc-complete or dcg");
    app->add_option("--col-alg", col_alg, "hc-average, hc-complete or dcg");
    app->add_option("--iterations", iterations, "maximum coupling iterations");
    app->add_option("--level", levels, "cluster counts for successive level choices (0 = default)")->delimiter(',');
    flags.add(app);
  }

  int operator()(Context& ctx) const {
    ctx.inputs.push_back(matrix);
    const DataMatrix m = io::read_matrix(matrix);
    dm::CouplingConfig cfg;
    cfg.max_iterations = iterations;
    cfg.row_algorithm = dm::parse_algorithm(row_alg);
    cfg.col_algorithm = dm::parse_algorithm(col_alg);
    cfg.level_override = levels;
    cfg.dcg = flags.params(ctx.seed);
    ctx.params = flags.to_json();
    ctx.params["row_alg"] = dm::to_string(cfg.row_algorithm);
    ctx.params["col_alg"] = dm::to_string(cfg.col_algorithm);
    ctx.params["iterations"] = iterations;
    ctx.params["level"] = levels;

    const auto cr = dm::couple(m, cfg, ctx.seed);
    const DataMatrix cat = m.kind() == MatrixKind::real ? discretize(m) : m;
    const double energy = dm::energy_density(cat, dm::blocks(cat, cr.row_partition, cr.col_partition));
    const auto hm = dm::heatmap(m, cr, energy);
    ctx.write("heatmap.csv", hm.csv);
    ctx.write("blocks.json", hm.json);
    ctx.write("row_tree.nwk", newick::write(cr.row_tree) + "\n");
    ctx.write("col_tree.nwk", newick::write(cr.col_tree) + "\n");
    if (ctx.verbose) {
      for (const auto& s : cr.log)
        std::cerr << fmt::format("iteration {} {} level: target {} -> {} clusters\n", s.iteration,
                                 to_string(s.level_axis), s.target_k, s.partition.k());
      std::cerr << fmt::format("blocks {}x{}, energy {}\n", cr.row_partition.k(), cr.col_partition.k(), energy);
    }
    return ok;
  }
};

// ---- mimic ----------------------------------------------------------------

// Cluster ids in the order they first appear along `order` (or 0..n-1).
std::vector<std::size_t> cluster_order(const Partition& p, const std::vector<std::size_t>& order) {
  std::vector<std::size_t> out;
  std::vector<char> seen(p.k(), 0);
  for (std::size_t t = 0; t < p.size(); ++t) {
    const auto c = static_cast<std::size_t>(p[order.empty() ? t : order[t]]);
    if (!seen[c]) {
      seen[c] = 1;
      out.push_back(c);
    }
  }
  return out;
}

std::vector<std::size_t> order_from_labels(const json& j, const char* key, const std::vector<std::string>& labels) {
  if (!j.contains(key)) return {};
  std::map<std::string, std::size_t> where;
  for (std::size_t i = 0; i < labels.size(); ++i) where[labels[i]] = i;
  std::vector<std::size_t> out;
  for (const auto& l : j.at(key)) {
    auto it = where.find(l.get<std::string>());
    if (it == where.end()) throw InputError(fmt::format("blocks: label '{}' in {} is not in the matrix", l.get<std::string>(), key));
    out.push_back(it->second);
  }
  if (out.size() != labels.size()) throw InputError(fmt::format("blocks: {} does not list every label", key));
  return out;
}

struct MimicCommand {
  std::string matrix, blocks_path, mode = "fixed", merge;
  std::size_t reps = 100, keep = 0;
  double swap_factor = 10.0;

  void add(CLI::App* app) {
    app->add_option("--matrix", matrix, "coded or binary matrix CSV")->required();
    app->add_option("--blocks", blocks_path, "blocks JSON with row_assignment and col_assignment")->required();
    app->add_option("--reps", reps, "mimicked matrices per setup")->check(CLI::PositiveNumber);
    app->add_option("--mode", mode, "fixed or resampled");
    app->add_option("--merge", merge, "comma-separated setups such as 3x3,3x2,3x1");
    app->add_option("--keep", keep, "write this many mimicked matrices per setup");
    app->add_option("--swap-factor", swap_factor, "swap attempts per one");
  }

  int operator()(Context& ctx) const {
    ctx.inputs.push_back(matrix);
    ctx.inputs.push_back(blocks_path);
    const DataMatrix m = io::read_matrix(matrix);
    json bj;
    try {
      bj = json::parse(io::read_file(blocks_path));
    } catch (const json::exception& e) {
      throw InputError(fmt::format("blocks: {}", e.what()));
    }
    Partition rp, cp;
    std::vector<std::size_t> row_order, col_order;
    try {
      rp = Partition(bj.at("row_assignment").get<std::vector<int>>());
      cp = Partition(bj.at("col_assignment").get<std::vector<int>>());
    } catch (const json::exception& e) {
      throw InputError(fmt::format("blocks: {}", e.what()));
    }
    row_order = order_from_labels(bj, "row_order", m.row_labels());
    col_order = order_from_labels(bj, "col_order", m.col_labels());
    const auto base = dm::blocks(m, rp, cp);
    if (!(swap_factor >= 0.0)) throw InputError("--swap-factor must be >= 0");

    std::vector<std::pair<std::size_t, std::size_t>> setups;
    if (merge.empty()) {
      setups.emplace_back(rp.k(), cp.k());
    } else {
      std::stringstream ss(merge);
      for (std::string s; std::getline(ss, s, ',');) {
        const auto x = s.find('x');
        std::size_t r = 0, c = 0;
        try {
          if (x == std::string::npos) throw std::invalid_argument("");
          std::size_t used = 0;
          r = std::stoul(s.substr(0, x), &used);
          if (used != x) throw std::invalid_argument("");
          c = std::stoul(s.substr(x + 1), &used);
          if (used != s.size() - x - 1) throw std::invalid_argument("");
        } catch (const std::exception&) {
          throw InputError(fmt::format("--merge setup '{}' is not RxC", s));
        }
        setups.emplace_back(r, c);
      }
    }

    mimic::EnsembleOptions opts;
    opts.mode = mimic::parse_mode(mode);
    opts.swap_factor = swap_factor;
    opts.keep_matrices = keep;
    ctx.params = {{"reps", reps},         {"mode", mimic::to_string(opts.mode)}, {"merge", merge},
                  {"keep", keep},         {"swap_factor", swap_factor},
                  {"base_blocks", fmt::format("{}x{}", rp.k(), cp.k())}};

    if (m.kind() == MatrixKind::real) throw InputError("mimicking needs a binary or A/G/C/T coded matrix");
    json report;
    report["observed_energy"] = dm::energy_density(m, base);
    report["setups"] = json::array();
    bool all_zero = true;
    for (std::size_t s = 0; s < setups.size(); ++s) {
      const auto [r, c] = setups[s];
      const auto bd = dm::blocks(m, mimic::merge_clusters(rp, r, cluster_order(rp, row_order)),
                                 mimic::merge_clusters(cp, c, cluster_order(cp, col_order)));
      const auto ens = mimic::mimic_ensemble(m, bd, reps, derive_seed(ctx.seed, {s}), opts);
      std::string tsv = "energy\n";
      for (double v : ens.energies.values) tsv += io::format_number(v) + "\n";
      ctx.write(fmt::format("energy_{}.tsv", ens.energies.label), tsv);
      for (std::size_t k = 0; k < ens.examples.size(); ++k)
        ctx.write(fmt::format("mimic_{}_{}.csv", ens.energies.label, k), io::matrix_to_csv(ens.examples[k]));
      for (double v : ens.energies.values) all_zero = all_zero && v == 0.0;
      report["setups"].push_back(json{{"setup", ens.energies.label},
                                  {"mean", ens.energies.mean()},
                                  {"sd", ens.energies.stddev()},
                                  {"min", *std::min_element(ens.energies.values.begin(), ens.energies.values.end())},
                                  {"max", *std::max_element(ens.energies.values.begin(), ens.energies.values.end())}});
      if (ctx.verbose)
        std::cerr << fmt::format("{}: mean {:.6g} sd {:.6g}\n", ens.energies.label, ens.energies.mean(),
                                 ens.energies.stddev());
    }
    report["all_zero"] = all_zero;
    ctx.write("report.json", report.dump(2) + "\n");
    return ok;
  }
};

// ---- score ----------------------------------------------------------------

struct ScoreCommand {
  std::string alignment, format = "auto";
  double open = 15.0, extend = 0.2;

  void add(CLI::App* app) {
    app->add_option("--alignment", alignment, "aligned FASTA or CLUSTAL file")->required();
    app->add_option("--format", format, "fasta, clustal or auto");
    app->add_option("--open", open, "gap opening penalty A");
    app->add_option("--extend", extend, "gap extension penalty B");
  }

  int operator()(Context& ctx) const {
    ctx.inputs.push_back(alignment);
    const std::string text = io::read_file(alignment);
    seqscore::AlignmentFormat fmt_kind;
    if (format == "auto") {
      const auto first = text.find_first_not_of(" \t\r\n");
      fmt_kind = first != std::string::npos && text.compare(first, 7, "CLUSTAL") == 0
                     ? seqscore::AlignmentFormat::clustal
                     : seqscore::AlignmentFormat::fasta;
    } else {
      fmt_kind = seqscore::parse_format(format);
    }
    const seqscore::ScoringParams params{open, extend};
    params.validate();
    ctx.params = {{"format", fmt_kind == seqscore::AlignmentFormat::clustal ? "clustal" : "fasta"},
                  {"open", open},
                  {"extend", extend}};
    const auto aln = seqscore::parse_alignment(text, fmt_kind);
    const auto sim = seqscore::similarity_matrix(aln, params);
    ctx.write("similarity.csv", io::square_to_csv(sim.names, sim.similarity.v));
    ctx.write("distance.csv", io::distance_to_csv(seqscore::to_distance(sim)));
    std::string tsv = "seq1\tseq2\tmatches\tgap_runs\tgap_positions\traw\tcommon_length\tnormalized\n";
    std::size_t p = 0;
    for (std::size_t i = 0; i < aln.size(); ++i)
      for (std::size_t j = i + 1; j < aln.size(); ++j, ++p) {
        const auto& s = sim.pairs[p];
        tsv += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", aln.names[i], aln.names[j], s.matches, s.gap_runs,
                           s.gap_positions, io::format_number(s.raw), s.common_length,
                           io::format_number(s.normalized));
      }
    ctx.write("pairs.tsv", tsv);
    if (ctx.verbose) std::cerr << tsv;
    return ok;
  }
};

// ---- replay ---------------------------------------------------------------

int replay(const std::string& manifest_path, const std::string& out_dir) {
  json m;
  try {
    m = json::parse(io::read_file(manifest_path));
  } catch (const json::exception& e) {
    throw InputError(fmt::format("manifest: {}", e.what()));
  }
  auto args = m.at("args").get<std::vector<std::string>>();
  const fs::path target = fs::absolute(out_dir);
  bool replaced = false;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--out" && i + 1 < args.size()) {
      args[i + 1] = target.string();
      replaced = true;
    } else if (args[i].rfind("--out=", 0) == 0) {
      args[i] = "--out=" + target.string();
      replaced = true;
    }
  }
  if (!replaced) {
    args.insert(args.begin() + 1, target.string());
    args.insert(args.begin() + 1, "--out");
  }
  const fs::path here = fs::current_path();
  fs::current_path(m.at("cwd").get<std::string>());
  int code = failure;
  try {
    code = run(args);
  } catch (...) {
    fs::current_path(here);
    throw;
  }
  fs::current_path(here);
  if (code != m.at("exit_code").get<int>()) {
    std::cerr << fmt::format("replay: exit code {} differs from recorded {}\n", code, m.at("exit_code").get<int>());
    return failure;
  }
  bool same = true;
  for (const auto& o : m.at("outputs")) {
    const auto path = target / o.at("path").get<std::string>();
    const std::string got = fs::exists(path) ? sha256_file(path) : "missing";
    if (got != o.at("sha256").get<std::string>()) {
      std::cerr << fmt::format("replay: {} differs\n", o.at("path").get<std::string>());
      same = false;
    }
  }
  std::cout << (same ? "replay: all outputs identical\n" : "replay: outputs differ\n");
  return same ? ok : failure;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"dcgkit: ultrametric clustering trees, data mechanics, matrix mimicking, alignment scoring"};
  app.require_subcommand(1);
  Context ctx;
  std::string out = "out";
  auto common = [&](CLI::App* sub) {
    sub->option_defaults()->always_capture_default();
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", ctx.seed, "master seed");
    sub->add_flag("--verbose", ctx.verbose, "progress and diagnostics on stderr");
  };

  DcgCommand dcg_cmd;
  HcCommand hc_cmd;
  DmCommand dm_cmd;
  MimicCommand mimic_cmd;
  ScoreCommand score_cmd;
  std::string manifest, replay_out;

  auto* dcg_app = app.add_subcommand("dcg", "DCG tree from a matrix or distance matrix");
  common(dcg_app);
  dcg_cmd.add(dcg_app);
  auto* hc_app = app.add_subcommand("hc", "hierarchical clustering baseline");
  common(hc_app);
  hc_cmd.add(hc_app);
  auto* dm_app = app.add_subcommand("dm", "couple row and column trees and frame blocks");
  common(dm_app);
  dm_cmd.add(dm_app);
  auto* mimic_app = app.add_subcommand("mimic", "energy densities of mimicked matrices");
  common(mimic_app);
  mimic_cmd.add(mimic_app);
  auto* score_app = app.add_subcommand("score", "similarity matrix from aligned sequences");
  common(score_app);
  score_cmd.add(score_app);
  auto* replay_app = app.add_subcommand("replay", "re-run a manifest and compare output digests");
  replay_app->add_option("manifest", manifest, "manifest.json of an earlier run")->required();
  replay_app->add_option("--out", replay_out, "directory for the re-run outputs")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : input_error;
  }

  if (replay_app->parsed()) {
    try {
      return replay(manifest, replay_out);
    } catch (const InputError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return input_error;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return failure;
    }
  }

  ctx.command = app.get_subcommands().front()->get_name();
  ctx.args = args;
  ctx.out = out;
  const auto t0 = std::chrono::steady_clock::now();
  int code = ok;
  try {
    if (dcg_app->parsed()) code = dcg_cmd(ctx);
    else if (hc_app->parsed()) code = hc_cmd(ctx);
    else if (dm_app->parsed()) code = dm_cmd(ctx);
    else if (mimic_app->parsed()) code = mimic_cmd(ctx);
    else code = score_cmd(ctx);
  } catch (const Degenerate& e) {
    std::cerr << "warning: " << e.what() << "\n";
    code = degenerate;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return input_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return failure;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(ctx, seconds, code);
  return code;
}

}  // namespace dcgkit::cli
