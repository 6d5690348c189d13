#include "maco/harness.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace maco {
namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"experiment", {"name"}},
      {"task", {"map", "graphs", "agents", "goal_ids", "starts", "collision", "random_starts", "episode_cap", "discount"}},
      {"grouping", {"mode", "size", "seed"}},
      {"options",
       {"source", "tot_num", "max_targets_per_extremum", "tie_tol", "extremum_tol", "joint_cap", "max_iterations"}},
      {"learner", {"kind", "alpha", "eps_start", "eps_end", "eps_decay_fraction", "gamma", "episodes", "known"}},
      {"run", {"seeds", "out", "label"}},
  };
  return keys;
}

template <typename T>
std::vector<T> parse_list(const std::string& s, const std::string& key) {
  std::string norm = s;
  std::replace(norm.begin(), norm.end(), ',', ' ');
  std::istringstream is(norm);
  std::vector<T> out;
  std::string tok;
  while (is >> tok) {
    std::istringstream ts(tok);
    T x{};
    if (!(ts >> x) || !ts.eof()) throw Error(ErrorKind::Config, key + ": bad list entry '" + tok + "'");
    out.push_back(x);
  }
  return out;
}

template <typename T>
T get(const pt::ptree& tree, const std::string& key, T fallback) {
  const auto node = tree.get_optional<std::string>(key);
  if (!node) return fallback;
  if constexpr (std::is_same_v<T, bool>) {
    if (*node == "true" || *node == "1" || *node == "yes") return true;
    if (*node == "false" || *node == "0" || *node == "no") return false;
    throw Error(ErrorKind::Config, key + ": expected a boolean, got '" + *node + "'");
  } else if constexpr (std::is_same_v<T, std::string>) {
    return *node;
  } else {
    std::istringstream is(*node);
    T x{};
    if (!(is >> x) || !(is >> std::ws).eof()) throw Error(ErrorKind::Config, key + ": cannot parse '" + *node + "'");
    return x;
  }
}

std::string default_label(const ExperimentConfig& c) {
  return c.name + "-" + to_string(c.learner) + "-" + to_string(c.source);
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(std::istream& in, const fs::path& base_dir, const std::string& name) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::Config, name + ": " + e.message());
  }
  for (const auto& [section, body] : tree) {
    auto it = allowed_keys().find(section);
    if (it == allowed_keys().end()) throw Error(ErrorKind::Config, name + ": unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) throw Error(ErrorKind::Config, name + ": unknown key " + section + "." + key);
    }
  }

  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base_dir / p; };
  ExperimentConfig c;
  c.name = get<std::string>(tree, "experiment.name", fs::path(name).stem().string());
  if (auto m = tree.get_optional<std::string>("task.map")) c.map_path = resolve(*m);
  if (auto g = tree.get_optional<std::string>("task.graphs")) {
    for (const auto& p : parse_list<std::string>(*g, "task.graphs")) c.factor_graphs.push_back(resolve(p));
  }
  c.task.n_agents = get<int>(tree, "task.agents", 2);
  if (auto g = tree.get_optional<std::string>("task.goal_ids")) c.task.goal_id = parse_list<int>(*g, "task.goal_ids");
  if (auto s = tree.get_optional<std::string>("task.starts")) c.task.starts = parse_list<int>(*s, "task.starts");
  c.task.collision = get<bool>(tree, "task.collision", false);
  c.task.random_starts = get<bool>(tree, "task.random_starts", false);
  c.task.episode_cap = get<int>(tree, "task.episode_cap", 200);
  c.task.discount = get<double>(tree, "task.discount", 0.99);

  c.grouping = parse_grouping(get<std::string>(tree, "grouping.mode", "subtask"));
  c.group_size = get<int>(tree, "grouping.size", 0);
  c.grouping_seed = get<std::uint64_t>(tree, "grouping.seed", 0);

  c.source = parse_option_source(get<std::string>(tree, "options.source", "multi"));
  c.discovery.tot_num = get<std::size_t>(tree, "options.tot_num", 4);
  c.discovery.max_targets_per_extremum = get<std::size_t>(tree, "options.max_targets_per_extremum", 0);
  c.discovery.kron.tie_tol = get<double>(tree, "options.tie_tol", 1e-9);
  c.discovery.extremum_tol = get<double>(tree, "options.extremum_tol", 1e-9);
  c.discovery.kron.joint_cap = get<std::uint64_t>(tree, "options.joint_cap", 10'000'000);
  c.discovery.max_iterations = get<std::size_t>(tree, "options.max_iterations", 64);

  c.learner = parse_learner(get<std::string>(tree, "learner.kind", "centq_force"));
  c.learner_cfg.alpha = get<double>(tree, "learner.alpha", 0.1);
  c.learner_cfg.eps_start = get<double>(tree, "learner.eps_start", 1.0);
  c.learner_cfg.eps_end = get<double>(tree, "learner.eps_end", 0.05);
  c.learner_cfg.eps_decay_fraction = get<double>(tree, "learner.eps_decay_fraction", 0.5);
  c.learner_cfg.gamma = get<double>(tree, "learner.gamma", 0.99);
  c.learner_cfg.episodes = get<int>(tree, "learner.episodes", 1000);
  c.learner_cfg.known = parse_known_bootstrap(get<std::string>(tree, "learner.known", "reachable"));

  if (auto s = tree.get_optional<std::string>("run.seeds")) c.seeds = parse_list<std::uint64_t>(*s, "run.seeds");
  c.out_dir = get<std::string>(tree, "run.out", "results");
  c.label = get<std::string>(tree, "run.label", "");
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open config " + path.string());
  return parse(in, path.parent_path(), path.string());
}

void ExperimentConfig::validate() const {
  if (map_path.empty() && factor_graphs.empty()) throw Error(ErrorKind::Config, "config needs task.map or task.graphs");
  if (!map_path.empty() && !factor_graphs.empty()) throw Error(ErrorKind::Config, "task.map and task.graphs are exclusive");
  if (task.n_agents < 1) throw Error(ErrorKind::Config, "task.agents must be positive");
  if (task.episode_cap < 1) throw Error(ErrorKind::Config, "task.episode_cap must be positive");
  if (!(task.discount > 0.0 && task.discount <= 1.0)) throw Error(ErrorKind::Config, "task.discount must lie in (0, 1]");
  if (seeds.empty()) throw Error(ErrorKind::Config, "run.seeds is empty");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw Error(ErrorKind::Config, "run.seeds has duplicates");
  }
  if (grouping == GroupingMode::Random && (group_size < 1 || task.n_agents % group_size != 0)) {
    throw Error(ErrorKind::BadPartition, "grouping.size must divide task.agents");
  }
  if (discovery.kron.tie_tol < 0.0 || discovery.extremum_tol < 0.0) throw Error(ErrorKind::Config, "tolerances must be non-negative");
  learner_cfg.validate();
}

GridTask build_task(const ExperimentConfig& cfg) {
  if (cfg.map_path.empty()) throw Error(ErrorKind::Config, "training needs task.map");
  auto map = GridMap::load(cfg.map_path.string());
  auto task = make_task(map, cfg.task);
  task.groups = make_groups(task, cfg.grouping, cfg.group_size, cfg.grouping_seed);
  return task;
}

AggregateResult aggregate(std::span<const LearningRun> runs) {
  if (runs.empty()) throw Error(ErrorKind::Config, "nothing to aggregate");
  const std::size_t n_ep = runs.front().episodes.size();
  for (const auto& r : runs)
    if (r.episodes.size() != n_ep) throw Error(ErrorKind::SchemaMismatch, "runs have different episode counts");
  AggregateResult a;
  a.n_seeds = runs.size();
  a.mean.assign(n_ep, 0.0);
  a.std.assign(n_ep, 0.0);
  const double n = static_cast<double>(runs.size());
  double total_reward = 0.0, total_steps = 0.0;
  for (std::size_t e = 0; e < n_ep; ++e) {
    double s = 0.0;
    for (const auto& r : runs) {
      s += r.episodes[e].cumulative_reward;
      total_steps += r.episodes[e].steps;
    }
    a.mean[e] = s / n;
    double var = 0.0;
    for (const auto& r : runs) {
      const double d = r.episodes[e].cumulative_reward - a.mean[e];
      var += d * d;
    }
    a.std[e] = std::sqrt(var / n);
    total_reward += s;
  }
  if (n_ep > 0) {
    a.value = total_reward / (n * static_cast<double>(n_ep));
    a.steps = total_steps / (n * static_cast<double>(n_ep));
  }
  return a;
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_runs_csv(std::ostream& out, std::span<const LearningRun> runs) {
  out << "episode,seed,cumulative_reward,steps\n";
  for (const auto& r : runs) {
    for (std::size_t e = 0; e < r.episodes.size(); ++e) {
      out << e << ',' << r.seed << ',' << format_double(r.episodes[e].cumulative_reward) << ',' << r.episodes[e].steps
          << '\n';
    }
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) out.push_back(cur);
  return out;
}

double to_double(const std::string& s) {
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw Error(ErrorKind::SchemaMismatch, "bad number '" + s + "'");
  return x;
}

}  // namespace

std::vector<LearningRun> read_runs_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "episode,seed,cumulative_reward,steps") {
    throw Error(ErrorKind::SchemaMismatch, "expected header episode,seed,cumulative_reward,steps");
  }
  std::vector<LearningRun> runs;
  std::map<std::uint64_t, std::size_t> slot;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cols = split_csv(line);
    if (cols.size() != 4) throw Error(ErrorKind::SchemaMismatch, "run row needs 4 columns");
    const auto seed = static_cast<std::uint64_t>(to_double(cols[1]));
    auto [it, fresh] = slot.emplace(seed, runs.size());
    if (fresh) runs.push_back(LearningRun{LearnerKind::Random, OptionSource::None, seed, {}});
    auto& r = runs[it->second];
    if (static_cast<std::size_t>(to_double(cols[0])) != r.episodes.size()) {
      throw Error(ErrorKind::SchemaMismatch, "episodes out of order for seed " + cols[1]);
    }
    r.episodes.push_back({to_double(cols[2]), static_cast<int>(to_double(cols[3]))});
  }
  return runs;
}

void write_aggregate_csv(std::ostream& out, const AggregateResult& agg) {
  out << "episode,mean,std\n";
  for (std::size_t e = 0; e < agg.mean.size(); ++e)
    out << e << ',' << format_double(agg.mean[e]) << ',' << format_double(agg.std[e]) << '\n';
}

Series read_aggregate_csv(std::istream& in, const std::string& label) {
  std::string line;
  if (!std::getline(in, line) || line != "episode,mean,std") {
    throw Error(ErrorKind::SchemaMismatch, "expected header episode,mean,std");
  }
  Series s{label, {}, {}};
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cols = split_csv(line);
    if (cols.size() != 3) throw Error(ErrorKind::SchemaMismatch, "aggregate row needs 3 columns");
    if (static_cast<std::size_t>(to_double(cols[0])) != s.mean.size()) throw Error(ErrorKind::SchemaMismatch, "episodes out of order");
    s.mean.push_back(to_double(cols[1]));
    s.std.push_back(to_double(cols[2]));
  }
  if (s.mean.empty()) throw Error(ErrorKind::SchemaMismatch, "aggregate CSV has no rows");
  return s;
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_svg(std::ostream& out, std::span<const Series> series, const std::string& title) {
  if (series.empty()) throw Error(ErrorKind::SchemaMismatch, "no series to plot");
  const std::size_t n_ep = series.front().mean.size();
  for (const auto& s : series)
    if (s.mean.size() != n_ep || s.std.size() != n_ep) throw Error(ErrorKind::SchemaMismatch, "series disagree on episodes");

  double lo = 0.0, hi = 1.0;
  for (const auto& s : series) {
    for (std::size_t e = 0; e < n_ep; ++e) {
      lo = std::min(lo, s.mean[e] - s.std[e]);
      hi = std::max(hi, s.mean[e] + s.std[e]);
    }
  }
  const double w = 640, h = 400, left = 60, right = 160, top = 30, bottom = 40;
  const double pw = w - left - right, ph = h - top - bottom;
  auto px = [&](std::size_t e) { return left + (n_ep > 1 ? pw * static_cast<double>(e) / static_cast<double>(n_ep - 1) : 0.0); };
  auto py = [&](double v) { return top + ph * (1.0 - (v - lo) / (hi - lo)); };
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  out << std::fixed << std::setprecision(2);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) out << "<text x=\"" << left << "\" y=\"20\" font-size=\"14\">" << xml_escape(title) << "</text>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 8 << "\" font-size=\"12\">episode</text>\n";
  out << "<text x=\"8\" y=\"" << top + ph / 2 << "\" font-size=\"12\">reward</text>\n";
  out << "<text x=\"" << left - 40 << "\" y=\"" << py(hi) + 4 << "\" font-size=\"10\">" << hi << "</text>\n";
  out << "<text x=\"" << left - 40 << "\" y=\"" << py(lo) + 4 << "\" font-size=\"10\">" << lo << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = palette[k % std::size(palette)];
    out << "<polygon class=\"band\" fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
    for (std::size_t e = 0; e < n_ep; ++e) out << (e ? " " : "") << px(e) << ',' << py(s.mean[e] + s.std[e]);
    for (std::size_t e = n_ep; e-- > 0;) out << ' ' << px(e) << ',' << py(s.mean[e] - s.std[e]);
    out << "\"/>\n";
    out << "<path class=\"mean\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" d=\"";
    for (std::size_t e = 0; e < n_ep; ++e) out << (e ? " L" : "M") << px(e) << ',' << py(s.mean[e]);
    out << "\"/>\n";
    const double ly = top + 16.0 * static_cast<double>(k + 1);
    out << "<line x1=\"" << left + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 30 << "\" y2=\"" << ly
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << left + pw + 36 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">" << xml_escape(s.label) << "</text>\n";
  }
  out << "</svg>\n";
  out << std::defaultfloat;
}

std::vector<LearningRun> run_seeds(const GridTask& task, const ExperimentConfig& cfg, const OptionSet& options,
                                   unsigned threads) {
  std::vector<LearningRun> runs(cfg.seeds.size());
  std::vector<std::exception_ptr> errors(cfg.seeds.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(cfg.seeds.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.seeds.size(); i = next++) {
      try {
        LearnerConfig lc = cfg.learner_cfg;
        lc.seed = cfg.seeds[i];
        runs[i] = train(task, cfg.learner, cfg.source, options, lc);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i]) continue;
    spdlog::error("seed {} failed; refusing partial aggregation", cfg.seeds[i]);
    std::rethrow_exception(errors[i]);
  }
  return runs;
}

TrainOutputs train_experiment(const ExperimentConfig& cfg, unsigned threads) {
  const auto task = build_task(cfg);
  spdlog::info("{}: {} agents, {} groups, learner {}, options {}", cfg.name, task.n_agents, task.groups.size(),
               to_string(cfg.learner), to_string(cfg.source));
  const auto options = build_options(task, cfg.source, cfg.discovery);
  TrainOutputs out;
  out.runs = run_seeds(task, cfg, options, threads);
  out.aggregate = aggregate(out.runs);

  const std::string label = cfg.label.empty() ? default_label(cfg) : cfg.label;
  fs::create_directories(cfg.out_dir);
  auto open = [&](const std::string& file) {
    out.files.push_back(cfg.out_dir / file);
    std::ofstream f(out.files.back(), std::ios::binary);
    if (!f) throw Error(ErrorKind::Io, "cannot write " + out.files.back().string());
    return f;
  };
  for (const auto& r : out.runs) {
    auto f = open(label + "_seed" + std::to_string(r.seed) + ".csv");
    write_runs_csv(f, std::span<const LearningRun>(&r, 1));
  }
  {
    auto f = open(label + "_aggregate.csv");
    write_aggregate_csv(f, out.aggregate);
  }
  {
    auto f = open(label + "_summary.csv");
    f << "label,value,steps,seeds\n"
      << label << ',' << format_double(out.aggregate.value) << ',' << format_double(out.aggregate.steps) << ','
      << out.aggregate.n_seeds << '\n';
  }
  return out;
}

namespace {

std::string tuple_string(std::span<const int> t) {
  std::string s = "(";
  for (std::size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + std::to_string(t[i]);
  return s + ")";
}

void log_discovery(std::ostream& log, const DiscoveryResult& r, std::span<const int> dims) {
  for (std::size_t it = 0; it < r.iterations.size(); ++it) {
    const auto& iter = r.iterations[it];
    for (std::size_t c = 0; c < iter.candidates.size(); ++c) {
      const auto& cand = iter.candidates[c];
      std::vector<int> k1;
      for (int k : cand.multi_index) k1.push_back(k + 1);
      log << "iteration " << it << " candidate k=" << tuple_string(k1) << " mu=" << format_double(cand.mu) << " MIN {";
      for (std::size_t i = 0; i < iter.extrema[c].min.size(); ++i)
        log << (i ? " " : "") << tuple_string(decompose_index(iter.extrema[c].min[i], dims));
      log << "} MAX {";
      for (std::size_t i = 0; i < iter.extrema[c].max.size(); ++i)
        log << (i ? " " : "") << tuple_string(decompose_index(iter.extrema[c].max[i], dims));
      log << "}\n";
    }
    log << "iteration " << it << " new targets:";
    for (const auto& t : iter.new_targets) log << ' ' << tuple_string(t);
    log << '\n';
  }
}

}  // namespace

DiscoverOutputs discover_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  DiscoverOutputs out;
  std::vector<MultiAgentOption> multi;
  if (!cfg.factor_graphs.empty()) {
    std::vector<FactorGraph> graphs;
    std::vector<TransitionModel> models;
    std::vector<int> dims;
    for (const auto& p : cfg.factor_graphs) {
      graphs.push_back(read_edge_list_file(p.string()));
      models.push_back(TransitionModel::from_graph(graphs.back()));
      dims.push_back(graphs.back().n_nodes());
    }
    if (cfg.source == OptionSource::Single) {
      for (std::size_t i = 0; i < graphs.size(); ++i) {
        auto s = discover_single_agent_options(graphs[i], models[i], cfg.discovery.tot_num, static_cast<int>(i));
        out.single.insert(out.single.end(), s.begin(), s.end());
      }
    } else if (cfg.source == OptionSource::Multi) {
      out.multi.push_back(discover_multiagent_options(graphs, models, cfg.discovery));
      log_discovery(log, out.multi.back(), dims);
      multi = out.multi.back().options;
    }
  } else {
    const auto task = build_task(cfg);
    const auto graph = adjacency_from_map(task.map);
    const auto model = transition_model(task.map);
    if (cfg.source == OptionSource::Single) {
      for (int a = 0; a < task.n_agents; ++a) {
        auto s = discover_single_agent_options(graph, model, cfg.discovery.tot_num, a);
        out.single.insert(out.single.end(), s.begin(), s.end());
      }
    } else if (cfg.source == OptionSource::Multi) {
      for (std::size_t g = 0; g < task.groups.size(); ++g) {
        const auto& members = task.groups[g];
        DiscoveryConfig dc = cfg.discovery;
        if (dc.reference.empty())
          for (int a : members) dc.reference.push_back(task.starts[static_cast<std::size_t>(a)]);
        std::vector<TransitionModel> models(members.size(), model);
        log << "group " << g << " agents " << tuple_string(members) << '\n';
        out.multi.push_back(
            discover_multiagent_options(std::vector<FactorGraph>(members.size(), graph), models, dc, members));
        log_discovery(log, out.multi.back(), std::vector<int>(members.size(), task.map.n_free()));
        multi.insert(multi.end(), out.multi.back().options.begin(), out.multi.back().options.end());
      }
    }
  }
  fs::create_directories(cfg.out_dir);
  out.manifest = cfg.out_dir / "options.csv";
  std::ofstream f(out.manifest, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot write " + out.manifest.string());
  write_option_manifest(f, multi, out.single);
  return out;
}

std::vector<std::string> table_ids() { return {"fourroom-2agent", "fourroom-3x2"}; }

fs::path default_config_dir() { return fs::path(MACO_SOURCE_DIR) / "configs"; }

ReproducedTable reproduce_table(const std::string& id, const fs::path& config_dir,
                                std::optional<std::vector<std::uint64_t>> seeds, std::optional<int> episodes,
                                unsigned threads) {
  const auto ids = table_ids();
  if (std::find(ids.begin(), ids.end(), id) == ids.end()) throw Error(ErrorKind::UnknownTable, "unknown table '" + id + "'");
  auto base = ExperimentConfig::load(config_dir / (id + ".ini"));
  if (seeds) base.seeds = *seeds;
  if (episodes) base.learner_cfg.episodes = *episodes;
  base.validate();
  const auto task = build_task(base);

  ReproducedTable t{id, {}};
  const std::pair<const char*, OptionSource> rows[] = {
      {"Multiple", OptionSource::Multi}, {"Single", OptionSource::Single}, {"No options", OptionSource::None}};
  for (const auto& [label, source] : rows) {
    auto cfg = base;
    cfg.source = source;
    const auto options = build_options(task, source, cfg.discovery);
    const auto runs = run_seeds(task, cfg, options, threads);
    const auto agg = aggregate(runs);
    t.rows.push_back({label, agg.value, agg.steps});
  }
  return t;
}

void print_table(std::ostream& out, const ReproducedTable& t) {
  out << t.id << '\n';
  out << std::left << std::setw(12) << "Options" << std::right << std::setw(10) << "Value" << std::setw(10) << "Step" << '\n';
  for (const auto& r : t.rows) {
    out << std::left << std::setw(12) << r.label << std::right << std::fixed << std::setprecision(3) << std::setw(10)
        << r.value << std::setprecision(1) << std::setw(10) << r.steps << '\n';
  }
  out << std::defaultfloat;
}

}  // namespace maco
