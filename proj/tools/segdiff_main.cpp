// segdiff command line front end.
//
// Exit codes form the scripting contract:
//   0  success
//   1  usage error
//   2  I/O, format or dimension error
//   3  a declared class produced no seeds
//   4  the diffusion solver did not converge (output is still written)

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include "segdiff/metrics.hpp"
#include "segdiff/pipeline.hpp"
#include "segdiff/synth.hpp"

namespace fs = std::filesystem;
using namespace segdiff;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitNoSeeds = 3;
constexpr int kExitNonConvergence = 4;

int exit_code_for(const Error& e) {
  return e.code() == errc::no_seeds_for_class ? kExitNoSeeds : kExitIo;
}

struct ActArg {
  int cls = 0;
  fs::path path;
};

ActArg parse_act_arg(const std::string& raw) {
  const auto colon = raw.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == raw.size()) {
    raise(errc::bad_config, "--act expects <classid>:<path>, got '" + raw + "'");
  }
  ActArg arg;
  try {
    std::size_t used = 0;
    arg.cls = std::stoi(raw.substr(0, colon), &used);
    if (used != colon) throw std::invalid_argument("junk");
  } catch (const std::exception&) {
    raise(errc::bad_config, "--act class id must be an integer: '" + raw + "'");
  }
  arg.path = raw.substr(colon + 1);
  return arg;
}

// Write-temp-then-rename so batch workers never expose half-written maps.
void save_label_png_atomic(const LabelMap& map, const fs::path& out) {
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  fs::path tmp = out;
  tmp += ".tmp";
  save_label_png(map, tmp);
  fs::rename(tmp, out);
}

ActivationSet load_activations(const std::vector<ActArg>& args, const ClassTable& table) {
  ActivationSet acts;
  for (const auto& arg : args) {
    if (arg.cls < 1 || arg.cls >= table.size()) {
      raise(errc::index_out_of_table,
            "activation class " + std::to_string(arg.cls) + " not in class table");
    }
    acts.maps.emplace_back(arg.cls, load_fmap(arg.path));
  }
  std::sort(acts.maps.begin(), acts.maps.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return acts;
}

int run_one_diffuse(const fs::path& image_path, const fs::path& m_path,
                    const std::vector<ActArg>& act_args, const ClassTable& table,
                    const PipelineConfig& config, const fs::path& out) {
  const RawImage image = load_image_png(image_path);
  const FloatMap m = load_fmap(m_path);
  const ActivationSet acts = load_activations(act_args, table);
  const PipelineResult result = run_pipeline(image, m, acts, table, config);
  save_label_png_atomic(result.labels, out);
  if (!result.all_converged) {
    std::cerr << "warning: diffusion did not converge for " << image_path.string() << "\n";
    return kExitNonConvergence;
  }
  return kExitOk;
}

struct BatchLine {
  int number = 0;
  fs::path image, m, out;
  std::vector<ActArg> acts;
};

std::vector<BatchLine> parse_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) raise(errc::io_failure, "cannot open manifest " + path.string());
  std::vector<BatchLine> lines;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
      const auto tab = line.find('\t', pos);
      fields.push_back(line.substr(pos, tab - pos));
      if (tab == std::string::npos) break;
      pos = tab + 1;
    }
    if (fields.size() < 4) {
      raise(errc::bad_format, "manifest line " + std::to_string(number) +
                                  ": expected image<TAB>m<TAB>out<TAB>classid:act...");
    }
    BatchLine b;
    b.number = number;
    b.image = fields[0];
    b.m = fields[1];
    b.out = fields[2];
    for (std::size_t i = 3; i < fields.size(); ++i) b.acts.push_back(parse_act_arg(fields[i]));
    lines.push_back(std::move(b));
  }
  return lines;
}

int cmd_diffuse(const fs::path& image, const fs::path& m, const std::vector<std::string>& act_raw,
                const fs::path& classes, const fs::path& config_path, const fs::path& out,
                const fs::path& batch, const fs::path& dump_config_path, int jobs) {
  PipelineConfig config;
  if (!config_path.empty()) config = load_config(config_path);
  config.validate();
  if (!dump_config_path.empty()) {
    std::ofstream dump(dump_config_path, std::ios::trunc);
    dump << dump_config(config);
    if (!dump) raise(errc::io_failure, "cannot write " + dump_config_path.string());
  }
  const ClassTable table = load_class_table(classes);

  if (batch.empty()) {
    std::vector<ActArg> acts;
    for (const auto& raw : act_raw) acts.push_back(parse_act_arg(raw));
    if (acts.empty()) raise(errc::bad_config, "diffuse needs at least one --act");
    return run_one_diffuse(image, m, acts, table, config, out);
  }

  const std::vector<BatchLine> lines = parse_manifest(batch);
  if (lines.empty()) raise(errc::bad_format, "manifest is empty");
  if (jobs < 1) jobs = static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::clamp(jobs, 1, static_cast<int>(lines.size()));

  std::vector<int> codes(lines.size(), kExitOk);
  std::vector<std::string> messages(lines.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= lines.size()) return;
      const BatchLine& b = lines[i];
      try {
        codes[i] = run_one_diffuse(b.image, b.m, b.acts, table, config, b.out);
      } catch (const Error& e) {
        codes[i] = exit_code_for(e);
        messages[i] = e.what();
      } catch (const std::exception& e) {
        codes[i] = kExitIo;
        messages[i] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  int exit_code = kExitOk;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (codes[i] != kExitOk) {
      std::cerr << "line " << lines[i].number << ": exit " << codes[i];
      if (!messages[i].empty()) std::cerr << " (" << messages[i] << ")";
      std::cerr << "\n";
      if (exit_code == kExitOk) exit_code = codes[i];
    }
  }
  return exit_code;
}

int cmd_eval(const fs::path& gt_dir, const fs::path& pred_dir, const fs::path& classes,
             int ignore_index) {
  const ClassTable table = load_class_table(classes);
  if (!fs::is_directory(gt_dir) || !fs::is_directory(pred_dir)) {
    raise(errc::io_failure, "eval expects two directories");
  }
  std::vector<fs::path> names;
  for (const auto& entry : fs::directory_iterator(gt_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      names.push_back(entry.path().filename());
    }
  }
  std::sort(names.begin(), names.end());
  if (names.empty()) {
    raise(errc::io_failure, "no .png ground truth files in " + gt_dir.string());
  }
  for (const auto& name : names) {
    if (!fs::exists(pred_dir / name)) {
      raise(errc::io_failure, "missing prediction for " + name.string());
    }
  }

  std::vector<ConfusionMatrix> partial(names.size(), ConfusionMatrix::create(table.size()));
  std::atomic<std::size_t> cursor{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (!failed.load()) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= names.size()) return;
      try {
        const LabelMap gt = load_label_png(gt_dir / names[i], table, ignore_index);
        const LabelMap pred = load_label_png(pred_dir / names[i], table);
        accumulate(partial[i], gt, pred, ignore_index);
      } catch (const std::exception& e) {
        std::scoped_lock lock(failure_mutex);
        failed = true;
        failure = names[i].string() + ": " + e.what();
      }
    }
  };
  const int jobs = std::clamp<int>(std::thread::hardware_concurrency(), 1,
                                   static_cast<int>(names.size()));
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failed) raise(errc::io_failure, failure);

  ConfusionMatrix total = ConfusionMatrix::create(table.size());
  for (const auto& cm : partial) total += cm;
  std::cout << format_report(total);
  return kExitOk;
}

int cmd_synth(const fs::path& out_dir, std::uint64_t seed, const std::string& variant, int size) {
  synthesize_fixture(out_dir, seed, parse_fixture_variant(variant), size, size);
  return kExitOk;
}

int cmd_inspect(const fs::path& path) {
  const FloatMap map = load_fmap(path);
  float lo = map.data[0], hi = map.data[0];
  double sum = 0.0;
  for (float v : map.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  std::printf("%d %d %.6f %.6f %.6f\n", map.width, map.height, double(lo), double(hi),
              sum / double(map.pixel_count()));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Superpixel label diffusion: seeded random-walker label maps and mIoU evaluation"};
  app.require_subcommand(1);

  // diffuse
  auto* diffuse = app.add_subcommand("diffuse", "Propagate activations into a label map");
  fs::path image, m, classes, config_path, out, batch, dump_config_path;
  std::vector<std::string> act_raw;
  int jobs = 0;
  diffuse->add_option("--image", image, "input image PNG");
  diffuse->add_option("--m", m, "class-agnostic segmentation map FMAP");
  diffuse->add_option("--act", act_raw, "activation map as <classid>:<path>, repeatable");
  diffuse->add_option("--classes", classes, "class table file")->required();
  diffuse->add_option("--config", config_path, "pipeline config file");
  diffuse->add_option("--out", out, "output label PNG");
  diffuse->add_option("--batch", batch, "manifest: image<TAB>m<TAB>out<TAB>classid:act per line");
  diffuse->add_option("--jobs", jobs, "batch worker count (default: hardware)");
  diffuse->add_option("--dump-config", dump_config_path, "write the effective config and continue");

  // eval
  auto* eval = app.add_subcommand("eval", "Report per-class IoU and mIoU over two directories");
  fs::path gt_dir, pred_dir, eval_classes;
  int ignore_index = 255;
  eval->add_option("--gt", gt_dir, "ground truth directory")->required();
  eval->add_option("--pred", pred_dir, "prediction directory")->required();
  eval->add_option("--classes", eval_classes, "class table file")->required();
  eval->add_option("--ignore", ignore_index, "ground truth index to skip (default 255)");

  // synth
  auto* synth = app.add_subcommand("synth", "Write a deterministic synthetic fixture");
  fs::path synth_out;
  std::uint64_t synth_seed = 0;
  std::string variant = "two-blob";
  int synth_size = 128;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--seed", synth_seed, "PRNG seed")->required();
  synth->add_option("--variant", variant, "two-blob | checker | gradient");
  synth->add_option("--size", synth_size, "square fixture edge length (default 128)");

  // inspect
  auto* inspect = app.add_subcommand("inspect", "Print width height min max mean of an FMAP");
  fs::path inspect_path;
  inspect->add_option("path", inspect_path, "FMAP file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (diffuse->parsed()) {
      if (batch.empty() && (image.empty() || m.empty() || out.empty())) {
        std::cerr << "diffuse needs --image, --m and --out (or --batch)\n";
        return kExitUsage;
      }
      return cmd_diffuse(image, m, act_raw, classes, config_path, out, batch, dump_config_path,
                         jobs);
    }
    if (eval->parsed()) return cmd_eval(gt_dir, pred_dir, eval_classes, ignore_index);
    if (synth->parsed()) return cmd_synth(synth_out, synth_seed, variant, synth_size);
    if (inspect->parsed()) return cmd_inspect(inspect_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}
