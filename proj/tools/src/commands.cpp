#include "hnn_cli/commands.hpp"

#include <Eigen/Eigenvalues>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "hnn/data.hpp"
#include "hnn/errors.hpp"
#include "hnn/nn.hpp"
#include "hnn/train.hpp"
#include "hnn/verify.hpp"
#include "json.hpp"

namespace hnn::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shortest representation that reads back to the same double.
std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path ensure_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw DataError("cannot create " + dir + ": " + ec.message());
  return p;
}

Model flavor_from(const std::string& name) {
  try {
    return parse_model(name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

// Files without splits get a stratified 60/20/20 split from the seed.
Dataset load_with_splits(const std::string& path, std::uint64_t seed, bool keep_small) {
  Dataset ds = load_dataset(path);
  if (ds.splits.empty()) {
    ds = split(ds, {0.6, 0.2, 0.2}, seed,
               keep_small ? SmallClassPolicy::KeepInTrain : SmallClassPolicy::Reject);
  }
  return ds;
}

// Rows projected on the two leading principal components. Each component's
// sign is fixed so that its largest-magnitude entry is positive.
Mat principal_components_2d(const Mat& h) {
  Mat out = Mat::Zero(h.rows(), 2);
  if (h.rows() == 0) return out;
  const Mat centered = h.rowwise() - h.colwise().mean();
  const Mat cov = centered.transpose() * centered / std::max<double>(1.0, h.rows() - 1.0);
  Eigen::SelfAdjointEigenSolver<Mat> eig(cov);
  const Eigen::Index d = h.cols();
  for (Eigen::Index k = 0; k < std::min<Eigen::Index>(2, d); ++k) {
    Vec axis = eig.eigenvectors().col(d - 1 - k);
    Eigen::Index big = 0;
    axis.cwiseAbs().maxCoeff(&big);
    if (axis(big) < 0.0) axis = -axis;
    out.col(k) = centered * axis;
  }
  return out;
}

double split_accuracy(const HnnModel& model, const Dataset& ds, const std::vector<int>& rows) {
  if (rows.empty()) return 0.0;
  return accuracy(forward(model, ds.features), ds.labels, rows);
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string model = "klein";
  int hidden = 16;
  double lr = 0.01;
  int epochs = 5000;
  int patience = 100;
  std::uint64_t seed = 42;
  std::string data;
  std::string out = ".";
  bool keep_small = false;
};

constexpr const char* kKeepSmallHelp =
    "when splitting, put classes with fewer than 3 members in train instead of failing";

void add_train_options(CLI::App* cmd, TrainArgs& a) {
  cmd->add_option("--model", a.model, "klein | poincare | lorentz")->capture_default_str();
  cmd->add_option("--hidden", a.hidden, "hidden width")->capture_default_str();
  cmd->add_option("--lr", a.lr, "learning rate")->capture_default_str();
  cmd->add_option("--epochs", a.epochs, "maximum epochs")->capture_default_str();
  cmd->add_option("--patience", a.patience, "early-stopping patience (0 disables)")
      ->capture_default_str();
  cmd->add_option("--seed", a.seed, "random seed")->capture_default_str();
  cmd->add_option("--data", a.data, "dataset JSON")->required();
  cmd->add_option("--out", a.out, "output directory")->capture_default_str();
  cmd->add_flag("--keep-small-classes", a.keep_small, kKeepSmallHelp);
}

TrainConfig config_from(const TrainArgs& a) {
  if (!(a.lr > 0.0)) throw UsageError("--lr must be positive");
  if (a.epochs < 0) throw UsageError("--epochs must be non-negative");
  if (a.hidden < 1) throw UsageError("--hidden must be at least 1");
  TrainConfig cfg;
  cfg.flavor = flavor_from(a.model);
  cfg.hidden = a.hidden;
  cfg.lr = a.lr;
  cfg.epochs = a.epochs;
  cfg.patience = a.patience;
  cfg.seed = a.seed;
  return cfg;
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const TrainConfig cfg = config_from(a);
  const Dataset ds = load_with_splits(a.data, cfg.seed, a.keep_small);
  const TrainResult r = train(ds, cfg);
  const fs::path dir = ensure_dir(a.out);

  std::string csv = "epoch,train_loss,val_acc\n";
  for (const auto& m : r.metrics) {
    csv += std::to_string(m.epoch) + "," + num(m.train_loss) + "," + num(m.val_acc) + "\n";
  }
  write_file(dir / "loss.csv", csv);

  json metrics;
  metrics["flavor"] = std::string(to_string(cfg.flavor));
  metrics["seed"] = cfg.seed;
  metrics["best_val_acc"] = r.best_val_acc;
  metrics["test_acc"] = split_accuracy(r.model, ds, ds.splits.test);
  metrics["train_acc"] = split_accuracy(r.model, ds, ds.splits.train);
  metrics["epochs_run"] = r.epochs_run;
  metrics["best_epoch"] = r.best_epoch;
  metrics["mean_epoch_seconds"] = r.mean_epoch_seconds();
  write_file(dir / "metrics.json", metrics.dump(2) + "\n");

  save_checkpoint(r.model, cfg, (dir / "checkpoint.json").string());

  const Mat pcs = principal_components_2d(hidden_tangents(r.model, ds.features));
  std::string f2 = "pc1,pc2,label\n";
  for (Eigen::Index i = 0; i < pcs.rows(); ++i) {
    f2 += num(pcs(i, 0)) + "," + num(pcs(i, 1)) + "," +
          std::to_string(ds.labels[static_cast<std::size_t>(i)]) + "\n";
  }
  write_file(dir / "features2d.csv", f2);

  out << metrics.dump() << "\n";
  return kOk;
}

int cmd_eval(const std::string& data, const std::string& checkpoint, bool keep_small,
             std::ostream& out) {
  const Checkpoint ck = load_checkpoint(checkpoint);
  const Dataset ds = load_with_splits(data, ck.config.seed, keep_small);
  json j;
  j["flavor"] = std::string(to_string(ck.model.flavor));
  j["train_acc"] = split_accuracy(ck.model, ds, ds.splits.train);
  j["val_acc"] = split_accuracy(ck.model, ds, ds.splits.val);
  j["test_acc"] = split_accuracy(ck.model, ds, ds.splits.test);
  j["train_loss"] = mean_loss(ck.model, ds.features, ds.labels, ds.splits.train);
  out << j.dump() << "\n";
  return kOk;
}

Point point_from(Model m, Vec coords) {
  switch (m) {
    case Model::Klein:
      return KleinPoint{std::move(coords)};
    case Model::Poincare:
      return PoincarePoint{std::move(coords)};
    case Model::Lorentz:
      return LorentzPoint{std::move(coords)};
  }
  throw std::invalid_argument("unknown model");
}

struct BenchArgs {
  std::string data;
  int epochs = 50;
  int trials = 3;
  int hidden = 16;
  std::uint64_t seed = 42;
  std::string out = ".";
  bool keep_small = false;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  if (a.trials < 1) throw UsageError("--trials must be at least 1");
  if (a.epochs < 1) throw UsageError("--epochs must be at least 1");
  const Dataset ds = a.data.empty() ? gen_tree_dataset(6, 16, 0.1, a.seed)
                                    : load_with_splits(a.data, a.seed, a.keep_small);
  json results = json::array();
  double klein_mean = 0.0, poincare_mean = 0.0;
  out << "flavor      mean_epoch_s      std_epoch_s\n";
  for (Model flavor : {Model::Klein, Model::Poincare, Model::Lorentz}) {
    std::vector<double> trials;
    for (int t = 0; t < a.trials; ++t) {
      TrainConfig cfg;
      cfg.flavor = flavor;
      cfg.hidden = a.hidden;
      cfg.epochs = a.epochs;
      cfg.patience = 0;
      cfg.seed = a.seed + static_cast<std::uint64_t>(t);
      trials.push_back(train(ds, cfg).mean_epoch_seconds());
    }
    double mean = 0.0;
    for (double s : trials) mean += s;
    mean /= static_cast<double>(trials.size());
    double var = 0.0;
    for (double s : trials) var += (s - mean) * (s - mean);
    const double sd = trials.size() > 1 ? std::sqrt(var / static_cast<double>(trials.size() - 1)) : 0.0;
    if (flavor == Model::Klein) klein_mean = mean;
    if (flavor == Model::Poincare) poincare_mean = mean;
    char line[128];
    std::snprintf(line, sizeof line, "%-10s  %.6e  %.6e\n", std::string(to_string(flavor)).c_str(),
                  mean, sd);
    out << line;
    results.push_back({{"flavor", std::string(to_string(flavor))},
                       {"mean_epoch_seconds", mean},
                       {"std_epoch_seconds", sd},
                       {"trials", trials}});
  }
  const double ratio = poincare_mean > 0.0 ? klein_mean / poincare_mean : 0.0;
  out << "klein/poincare " << num(ratio) << "\n";
  json j;
  j["dataset"] = ds.name;
  j["epochs"] = a.epochs;
  j["trials"] = a.trials;
  j["results"] = std::move(results);
  j["klein_over_poincare"] = ratio;
  write_file(ensure_dir(a.out) / "bench.json", j.dump(2) + "\n");
  return kOk;
}

struct SelftestArgs {
  std::vector<std::string> suites;
  long samples = -1;
  std::uint64_t seed = 42;
  bool printed_transport = false;
};

int cmd_selftest(const SelftestArgs& a, std::ostream& out) {
  const std::vector<std::string>& names = a.suites.empty() ? verify::suite_names() : a.suites;
  verify::SuiteOptions opts;
  opts.printed_transport = a.printed_transport;
  std::vector<std::string> failed;
  for (const auto& name : names) {
    const long n = a.samples >= 0 ? a.samples : verify::default_samples(name);
    const verify::PropertyReport r = verify::run_suite(name, n, a.seed, opts);
    out << r.to_json() << "\n";
    if (!r.passed) failed.push_back(name);
  }
  if (failed.empty()) return kOk;
  out << "FAILED:";
  for (const auto& f : failed) out << " " << f;
  out << "\n";
  return kSelftestFailed;
}

}  // namespace

std::string convert_csv(const std::string& csv, const std::string& src, const std::string& dst) {
  const Model from = parse_model(src);
  const Model to = parse_model(dst);
  std::istringstream in(csv);
  std::string line;
  std::string result;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> vals;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t comma = std::min(line.find(',', pos), line.size());
      const char* first = line.data() + pos;
      const char* last = line.data() + comma;
      while (first < last && *first == ' ') ++first;
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
        throw DataError("row " + std::to_string(row) + ": not a list of finite numbers");
      }
      vals.push_back(v);
      pos = comma + 1;
    }
    const Vec coords = Eigen::Map<const Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
    if (from == Model::Lorentz && coords.size() < 2) {
      throw DataError("row " + std::to_string(row) + ": hyperboloid points need at least 2 coordinates");
    }
    const Point p = point_from(from, coords);
    const bool valid = std::visit([](const auto& q) { return is_valid(q); }, p);
    if (!valid) {
      throw DataError("row " + std::to_string(row) + ": not a valid " + std::string(to_string(from)) +
                      " point");
    }
    const Vec outv = std::visit([](const auto& q) { return q.coords; }, convert_point(p, to));
    for (Eigen::Index i = 0; i < outv.size(); ++i) result += (i ? "," : "") + num(outv(i));
    result += "\n";
  }
  return result;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hyperbolic neural networks in the Klein, Poincare and Lorentz models", "hnn"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train a two-layer network");
  add_train_options(train_cmd, train_args);

  std::string eval_data, eval_checkpoint;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  eval_cmd->add_option("--data", eval_data, "dataset JSON")->required();
  eval_cmd->add_option("--checkpoint", eval_checkpoint, "checkpoint JSON")->required();
  bool eval_keep_small = false;
  eval_cmd->add_flag("--keep-small-classes", eval_keep_small, kKeepSmallHelp);

  std::string conv_input, conv_from, conv_to, conv_output;
  auto* convert_cmd = app.add_subcommand("convert", "convert CSV points between models");
  convert_cmd->add_option("--input", conv_input, "CSV of points, one per line")->required();
  convert_cmd->add_option("--from", conv_from, "source model")->required();
  convert_cmd->add_option("--to", conv_to, "destination model")->required();
  convert_cmd->add_option("--output", conv_output, "output CSV (default: stdout)");

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "per-flavor epoch timing");
  bench_cmd->add_option("--data", bench_args.data, "dataset JSON (default: synthetic tree)");
  bench_cmd->add_option("--epochs", bench_args.epochs, "epochs per trial")->capture_default_str();
  bench_cmd->add_option("--trials", bench_args.trials, "trials per flavor")->capture_default_str();
  bench_cmd->add_option("--hidden", bench_args.hidden, "hidden width")->capture_default_str();
  bench_cmd->add_option("--seed", bench_args.seed, "random seed")->capture_default_str();
  bench_cmd->add_option("--out", bench_args.out, "output directory")->capture_default_str();
  bench_cmd->add_flag("--keep-small-classes", bench_args.keep_small, kKeepSmallHelp);

  SelftestArgs self_args;
  auto* self_cmd = app.add_subcommand("selftest", "run the property suites");
  self_cmd->add_option("--suite", self_args.suites, "suite to run (repeatable; default all)");
  self_cmd->add_option("--samples", self_args.samples, "samples per suite (default per suite)");
  self_cmd->add_option("--seed", self_args.seed, "random seed")->capture_default_str();
  self_cmd->add_flag("--inject-printed-transport", self_args.printed_transport,
                     "swap in a known-wrong Klein transport formula; transport suites must fail");

  int g_depth = 6, g_dim = 16;
  double g_noise = 0.1;
  std::uint64_t g_seed = 42;
  std::string g_out;
  auto* gen_cmd = app.add_subcommand("gendata", "write the synthetic tree dataset");
  gen_cmd->add_option("--depth", g_depth, "tree depth")->capture_default_str();
  gen_cmd->add_option("--dim", g_dim, "feature dimension")->capture_default_str();
  gen_cmd->add_option("--noise", g_noise, "Gaussian noise scale")->capture_default_str();
  gen_cmd->add_option("--seed", g_seed, "random seed")->capture_default_str();
  gen_cmd->add_option("--out", g_out, "output JSON")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train_args, out);
    if (*eval_cmd) return cmd_eval(eval_data, eval_checkpoint, eval_keep_small, out);
    if (*convert_cmd) {
      flavor_from(conv_from);
      flavor_from(conv_to);
      const std::string result = convert_csv(read_file(conv_input), conv_from, conv_to);
      if (conv_output.empty()) {
        out << result;
      } else {
        write_file(conv_output, result);
      }
      return kOk;
    }
    if (*bench_cmd) return cmd_bench(bench_args, out);
    if (*self_cmd) {
      for (const auto& s : self_args.suites) {
        const auto& all = verify::suite_names();
        if (std::find(all.begin(), all.end(), s) == all.end()) {
          throw UsageError("unknown suite '" + s + "'");
        }
      }
      return cmd_selftest(self_args, out);
    }
    if (*gen_cmd) {
      Dataset ds;
      try {
        ds = gen_tree_dataset(g_depth, g_dim, g_noise, g_seed);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      save_dataset(ds, g_out);
      return kOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return kNumericalError;
  } catch (const std::exception& e) {
    // DataError, contract violations triggered by the inputs, I/O failures.
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace hnn::cli
