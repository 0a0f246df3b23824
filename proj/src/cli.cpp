#include <CLI11.hpp>

#include <fstream>
#include <iterator>
#include <sstream>

#include "conlab/attacks.hpp"
#include "conlab/bloomfwd.hpp"
#include "conlab/covermix.hpp"
#include "conlab/harness.hpp"

namespace conlab {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw fs::filesystem_error("cannot open", path, std::make_error_code(std::errc::no_such_file_or_directory));
  return Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, std::span<const std::uint8_t> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

// "-" means the given stream.
template <typename F>
void with_output(const std::string& path, std::ostream& fallback, F&& f) {
  if (path == "-") {
    f(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot write " + path);
  f(file);
  if (!file) throw std::runtime_error("cannot write " + path);
}

std::optional<std::uint64_t> seed_choice(CLI::Option* opt, std::uint64_t value) {
  if (opt->count() > 0) return value;
  return env_seed();
}

std::string subset_label(const std::vector<std::size_t>& subset, std::size_t beta) {
  std::string out;
  for (auto i : subset) {
    if (!out.empty()) out += '+';
    out += i < beta ? "c" + std::to_string(i + 1) : "l" + std::to_string(i - beta + 1);
  }
  return out;
}

fs::path cover_path(const fs::path& dir, std::size_t i) { return dir / ("cover" + std::to_string(i + 1) + ".bin"); }

void timing_csv(std::ostream& out, const TimingReport& rep) {
  out << "trial,target,truth,truth_hops,verdict,hops,ratio,rtt_us,anomaly,used_prior\n";
  for (const auto& t : rep.trials) {
    out << t.index << ',' << csv_field(t.target.to_string()) << ',' << to_string(t.truth.kind) << ','
        << (t.truth.hops ? std::to_string(*t.truth.hops) : "") << ',' << to_string(t.verdict.kind) << ','
        << (t.verdict.hops ? std::to_string(*t.verdict.hops) : "") << ',' << format_metric(t.verdict.ratio) << ','
        << (t.rtt ? std::to_string(t.rtt->count()) : "timeout") << ',' << (t.verdict.anomaly ? 1 : 0) << ','
        << (t.used_prior ? 1 : 0) << '\n';
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Content-oriented networking privacy simulator"};
  app.name("conlab");
  app.require_subcommand(1);

  std::string scenario_path, trace_path, metrics_path, defenses_arg;
  std::uint64_t seed = 0;

  auto* simulate = app.add_subcommand("simulate", "Run a scenario and emit its trace CSV");
  simulate->add_option("scenario", scenario_path, "Scenario file")->required();
  auto* sim_seed = simulate->add_option("--seed", seed, "Override the scenario seed");
  simulate->add_option("--trace", trace_path, "Trace CSV path (default stdout)");
  simulate->add_option("--metrics", metrics_path, "Metrics CSV path ('-' for stdout)");

  auto* compare = app.add_subcommand("compare-defenses", "Metric matrix, one block of rows per defense");
  compare->add_option("scenario", scenario_path, "Scenario file")->required();
  auto* cmp_seed = compare->add_option("--seed", seed, "Override the scenario seed");
  compare->add_option("--defenses", defenses_arg, "Comma-separated defenses (default all)");

  auto* attack = app.add_subcommand("attack", "Run the scenario's adversary and emit its report CSV");
  std::string attack_kind;
  attack->add_option("kind", attack_kind, "timing, monitor or dump")
      ->required()
      ->check(CLI::IsMember({"timing", "monitor", "dump"}));
  attack->add_option("scenario", scenario_path, "Scenario file")->required();
  auto* att_seed = attack->add_option("--seed", seed, "Override the scenario seed");

  auto* covermix = app.add_subcommand("covermix", "Cover-file codec");
  covermix->require_subcommand(1);
  CoverParams cp;
  std::string cm_in, cm_out, cm_covers, cm_dir, cm_cover_dir, cm_result;
  auto* cm_encode = covermix->add_subcommand("encode", "Write codewords, covers and meta.txt");
  cm_encode->add_option("--alpha", cp.alpha, "Legitimate block count")->required();
  cm_encode->add_option("--beta", cp.beta, "Cover block count")->required();
  cm_encode->add_option("--k", cp.k, "Subset size")->required();
  cm_encode->add_option("--block-size", cp.block_size, "Block size in bytes")->required();
  auto* cm_seed = cm_encode->add_option("--seed", cp.seed, "Naming and cover seed");
  cm_encode->add_option("--covers", cm_covers, "Directory with cover1.bin .. cover<beta>.bin");
  cm_encode->add_option("input", cm_in, "Content file")->required();
  cm_encode->add_option("outdir", cm_out, "Output directory")->required();
  auto* cm_decode = covermix->add_subcommand("decode", "Reconstruct content from codewords");
  cm_decode->add_option("codewords", cm_dir, "Directory written by encode")->required();
  cm_decode->add_option("covers", cm_cover_dir, "Cover block directory")->required();
  cm_decode->add_option("output", cm_result, "Output file")->required();

  auto* workload = app.add_subcommand("workload", "Workload generators");
  workload->require_subcommand(1);
  auto* zipf = workload->add_subcommand("zipf", "Zipf rank sequence");
  std::size_t z_catalog = 0, z_requests = 0;
  double z_exponent = 1.0;
  std::uint64_t z_seed = 1;
  std::string z_template;
  zipf->add_option("--catalog", z_catalog, "Catalog size")->required()->check(CLI::PositiveNumber);
  zipf->add_option("--exponent", z_exponent, "Zipf exponent")->check(CLI::NonNegativeNumber);
  zipf->add_option("--requests", z_requests, "Request count")->required();
  zipf->add_option("--seed", z_seed, "Seed");
  zipf->add_option("--template", z_template, "Name template with % for the rank index");

  auto* bloom = app.add_subcommand("bloom-check", "Bloom false-positive rate and forwarding equivalence");
  BloomParams bp;
  std::size_t b_members = 100, b_queries = 100000, b_filters = 1, b_requests = 1000;
  bloom->add_option("--bits", bp.m, "Bits per filter (m)")->check(CLI::PositiveNumber);
  bloom->add_option("--hashes", bp.h, "Hash functions (h)")->check(CLI::PositiveNumber);
  bloom->add_option("--seed", bp.seed, "Hash seed");
  bloom->add_option("--members", b_members, "Elements inserted for the false-positive measurement");
  bloom->add_option("--queries", b_queries, "Non-member queries per filter");
  bloom->add_option("--filters", b_filters, "Independently seeded filters pooled into the measurement")
      ->check(CLI::PositiveNumber);
  bloom->add_option("--requests", b_requests, "Equivalence replay length");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (simulate->parsed()) {
      const Scenario s = load_scenario(scenario_path, seed_choice(sim_seed, seed));
      Trace trace;
      const ExperimentResult result = evaluate(s, &trace);
      with_output(trace_path.empty() ? "-" : trace_path, out, [&](std::ostream& o) { trace.write_csv(o); });
      if (!metrics_path.empty())
        with_output(metrics_path, out, [&](std::ostream& o) { write_metrics_csv(o, std::span(&result, 1)); });
    } else if (compare->parsed()) {
      const Scenario s = load_scenario(scenario_path, seed_choice(cmp_seed, seed));
      std::vector<DefenseKind> kinds;
      const std::string list = defenses_arg.empty() ? "none,wait_before_reply,delay_first_k,collaborative,probabilistic"
                                                    : defenses_arg;
      std::stringstream ss(list);
      for (std::string item; std::getline(ss, item, ',');) {
        auto k = parse_defense(item);
        if (!k) {
          std::string names;
          for (const auto& n : defense_names()) names += (names.empty() ? "" : ", ") + n;
          throw UsageError("unknown defense '" + item + "'; expected one of: " + names);
        }
        kinds.push_back(*k);
      }
      if (std::find(kinds.begin(), kinds.end(), DefenseKind::None) == kinds.end()) kinds.insert(kinds.begin(), DefenseKind::None);
      write_metrics_csv(out, compare_defenses(s, kinds));
    } else if (attack->parsed()) {
      Scenario s = load_scenario(scenario_path, seed_choice(att_seed, seed));
      if (attack_kind == "timing") {
        s.attack.kind = AttackKind::Timing;
        timing_csv(out, run_timing_attack(s));
      } else if (attack_kind == "monitor") {
        s.attack.kind = AttackKind::Monitor;
        const MonitorReport rep = run_monitor(s);
        out << "probe,target,probe_time_us,satisfied,first_fetch\n";
        for (std::size_t i = 0; i < rep.probes.size(); ++i)
          out << i << ',' << csv_field(rep.target.to_string()) << ',' << rep.probes[i].at.count() << ','
              << (rep.satisfied[i] ? 1 : 0) << ','
              << (rep.first_fetch_time && *rep.first_fetch_time == rep.probes[i].at ? 1 : 0) << '\n';
      } else {
        s.attack.kind = AttackKind::Dump;
        const DumpResult rep = run_dump(s);
        out << "order,name,in_snapshot\n";
        for (std::size_t i = 0; i < rep.order.size(); ++i)
          out << i << ',' << csv_field(rep.order[i].to_string()) << ',' << (rep.snapshot.contains(rep.order[i]) ? 1 : 0)
              << '\n';
        for (const auto& n : rep.snapshot)
          if (!rep.recovered.contains(n)) out << ',' << csv_field(n.to_string()) << ",1\n";
      }
    } else if (cm_encode->parsed()) {
      if (cm_seed->count() == 0)
        if (auto e = env_seed()) cp.seed = *e;
      try {
        cp.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const Bytes content = read_file(cm_in);
      std::vector<Block> legit;
      try {
        legit = split_blocks(content, cp.block_size, cp.alpha);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      std::vector<Block> covers;
      if (!cm_covers.empty()) {
        for (std::size_t i = 0; i < cp.beta; ++i) {
          covers.push_back(read_file(cover_path(cm_covers, i)));
          if (covers.back().size() != cp.block_size)
            throw UsageError(cover_path(cm_covers, i).string() + " is not block_size bytes");
        }
      } else {
        for (std::size_t i = 0; i < cp.beta; ++i) {
          Rng rng(derive_seed(cp.seed, 0x636f766572, i));
          Block b(cp.block_size);
          for (auto& byte : b) byte = static_cast<std::uint8_t>(rng.next());
          covers.push_back(std::move(b));
        }
      }
      const fs::path outdir(cm_out);
      fs::create_directories(outdir);
      if (cm_covers.empty()) {
        fs::create_directories(outdir / "covers");
        for (std::size_t i = 0; i < cp.beta; ++i) write_file(cover_path(outdir / "covers", i), covers[i]);
      }
      const CoverMeta meta = make_meta(content, covers, cp);
      const auto codewords = encode(legit, covers, cp.k, cp.seed);
      out << "index,subset,name\n";
      for (std::size_t i = 0; i < codewords.size(); ++i) {
        write_file(outdir / (codewords[i].name.components().back() + ".cw"), codewords[i].payload);
        out << i << ',' << subset_label(codewords[i].subset, cp.beta) << ',' << codewords[i].name.to_string() << '\n';
      }
      with_output((outdir / "meta.txt").string(), out, [&](std::ostream& o) { write_meta(o, meta); });
    } else if (cm_decode->parsed()) {
      const fs::path dir(cm_dir);
      const Bytes meta_bytes = read_file(dir / "meta.txt");
      std::istringstream meta_in(std::string(meta_bytes.begin(), meta_bytes.end()));
      const CoverMeta meta = read_meta(meta_in);
      std::vector<Block> covers;
      for (std::size_t i = 0; i < meta.beta; ++i) covers.push_back(read_file(cover_path(cm_cover_dir, i)));
      std::vector<std::vector<std::size_t>> available;
      for (auto& subset : k_subsets(meta.alpha + meta.beta, meta.k))
        if (fs::exists(dir / (name_codeword(meta, subset).components().back() + ".cw"))) available.push_back(subset);
      std::vector<Codeword> fetched;
      for (auto i : select_codewords(available, meta.alpha, meta.beta)) {
        Codeword cw;
        cw.subset = available[i];
        cw.name = name_codeword(meta, cw.subset);
        cw.payload = read_file(dir / (cw.name.components().back() + ".cw"));
        fetched.push_back(std::move(cw));
      }
      const Bytes content = decode(fetched, covers, meta);
      write_file(cm_result, content);
      out << "field,value\n"
          << "codewords_available," << available.size() << '\n'
          << "codewords_fetched," << fetched.size() << '\n'
          << "length," << content.size() << '\n'
          << "sha256," << to_hex(sha256(content)) << '\n';
    } else if (zipf->parsed()) {
      if (!z_template.empty() && z_template.find('%') == std::string::npos)
        throw UsageError("--template needs a % placeholder");
      const auto ranks = workload_zipf(z_catalog, z_exponent, z_requests, z_seed);
      out << (z_template.empty() ? "request,rank\n" : "request,rank,name\n");
      for (std::size_t i = 0; i < ranks.size(); ++i) {
        out << i << ',' << ranks[i] + 1;
        if (!z_template.empty()) {
          std::string n = z_template;
          n.replace(n.find('%'), 1, std::to_string(ranks[i]));
          out << ',' << csv_field(n);
        }
        out << '\n';
      }
    } else if (bloom->parsed()) {
      const double expected = expected_fp_rate(bp.m, bp.h, b_members);
      const double measured = measure_fp_rate(bp, b_members, b_queries, b_filters);
      EquivalenceConfig cfg;
      cfg.params = bp;
      const auto routes = reference_routes();
      const auto work = reference_workload(b_requests, derive_seed(bp.seed, 0x776f726b));
      const EquivalenceReport rep = equivalence_check(routes, work, cfg);
      out << "metric,value\n"
          << "m," << bp.m << "\nh," << bp.h << "\nseed," << bp.seed << "\nmembers," << b_members << "\nqueries,"
          << b_queries << "\nfilters," << b_filters << '\n'
          << "fp_expected," << format_metric(expected) << '\n'
          << "fp_measured," << format_metric(measured) << '\n'
          << "replay_interests," << rep.interests << '\n'
          << "replay_data," << rep.data << '\n'
          << "divergences," << rep.divergences.size() << '\n'
          << "confirmed_false_positives," << rep.confirmed_false_positives() << '\n'
          << "unexplained_divergences," << rep.bugs() << '\n';
    }
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const ScenarioError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace conlab
