// Acceptance suite: one line per criterion, nonzero exit if any fails.
//
// The numeric criteria pin the solver and metric guarantees; the end-to-end
// criteria drive the installed CLI binary exactly the way a user would.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "segdiff/metrics.hpp"
#include "segdiff/pipeline.hpp"
#include "segdiff/synth.hpp"
#include "test_helpers.hpp"

using namespace segdiff;
using Clock = std::chrono::steady_clock;

namespace {

const std::string kCli = SEGDIFF_CLI_PATH;
constexpr double kSolverTol = 1e-8;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Shared corpus for criteria 1, 2 and 4: 200 random connected graphs with
// both solver routes applied.
struct GraphStudy {
  struct Case {
    AffinityGraph graph;
    SeedAssignment seeds;
    DiffusionField cg;
    DiffusionField dense;
  };
  std::vector<Case> cases;
  double build_seconds = 0.0;
};

const GraphStudy& graph_study() {
  static const GraphStudy study = [] {
    GraphStudy s;
    const auto start = Clock::now();
    std::mt19937_64 rng(0xACCE57);
    s.cases.reserve(200);
    for (int trial = 0; trial < 200; ++trial) {
      GraphStudy::Case c;
      const int n = std::uniform_int_distribution<int>(3, 100)(rng);
      c.graph = testutil::random_connected_graph(rng, n);
      c.seeds = testutil::random_seeds(rng, n);
      c.cg = solve_diffusion(c.graph, c.seeds, kSolverTol);
      c.dense = solve_diffusion_oracle(c.graph, c.seeds);
      s.cases.push_back(std::move(c));
    }
    s.build_seconds = seconds_since(start);
    return s;
  }();
  return study;
}

bool criterion_oracle_equivalence(std::string& detail) {
  const GraphStudy& study = graph_study();
  double worst = 0.0;
  for (const auto& c : study.cases) {
    if (!c.cg.converged) {
      detail = "conjugate gradient failed to converge";
      return false;
    }
    for (std::size_t i = 0; i < c.cg.q.size(); ++i) {
      worst = std::max(worst, std::abs(c.cg.q[i] - c.dense.q[i]));
    }
  }
  std::ostringstream out;
  out << "200 graphs, max |dq| = " << worst << ", " << study.build_seconds << " s";
  detail = out.str();
  return worst <= 1e-6 && study.build_seconds < 30.0;
}

bool criterion_harmonicity_and_maximum(std::string& detail) {
  double worst_defect = 0.0, low = 1.0, high = 0.0;
  for (const auto& c : graph_study().cases) {
    std::vector<char> clamped(c.graph.n, 0);
    for (auto i : c.seeds.clamp_one) clamped[i] = 1;
    for (auto i : c.seeds.clamp_zero) clamped[i] = 1;
    for (std::int32_t i = 0; i < c.graph.n; ++i) {
      low = std::min(low, c.cg.q[i]);
      high = std::max(high, c.cg.q[i]);
      if (!clamped[i]) {
        worst_defect = std::max(worst_defect, testutil::harmonic_defect(c.graph, c.cg.q, i));
      }
    }
  }
  std::ostringstream out;
  out << "max harmonic defect = " << worst_defect << ", q range [" << low << ", " << high << "]";
  detail = out.str();
  return worst_defect <= 10 * kSolverTol && low >= -1e-9 && high <= 1.0 + 1e-9;
}

bool criterion_hand_solved_paths(std::string& detail) {
  auto path_graph = [](std::vector<double> w) {
    const int n = int(w.size()) + 1;
    std::vector<std::pair<std::int32_t, std::int32_t>> edges;
    for (std::size_t i = 0; i < w.size(); ++i) edges.emplace_back(i, i + 1);
    return make_affinity_graph(n, edges, std::move(w));
  };
  double worst = 0.0;
  {
    const auto f = solve_diffusion(path_graph({1.0, 1.0}), {{0}, {2}});
    worst = std::max(worst, std::abs(f.q[1] - 0.5));
  }
  {
    const auto f = solve_diffusion(path_graph({1.0, 3.0}), {{0}, {2}});
    worst = std::max(worst, std::abs(f.q[1] - 0.25));
  }
  {
    const auto fields =
        diffuse_all_classes(path_graph({1.0, 1.0, 1.0}), {{1, {{0}, {}}}, {2, {{3}, {}}}});
    const std::vector<double> expect_a = {1.0, 2.0 / 3.0, 1.0 / 3.0, 0.0};
    for (int i = 0; i < 4; ++i) {
      worst = std::max(worst, std::abs(fields.at(1).q[i] - expect_a[i]));
      worst = std::max(worst, std::abs(fields.at(2).q[i] - expect_a[3 - i]));
    }
  }
  std::ostringstream out;
  out << "max |error| = " << worst;
  detail = out.str();
  return worst <= 1e-9;
}

bool criterion_energy_optimality(std::string& detail) {
  double worst = 0.0;
  for (const auto& c : graph_study().cases) {
    const double gap =
        std::abs(diffusion_energy(c.graph, c.cg.q) - diffusion_energy(c.graph, c.dense.q));
    worst = std::max(worst, gap);
  }
  std::ostringstream out;
  out << "max |E_cg - E_dense| = " << worst;
  detail = out.str();
  return worst <= 1e-8;
}

bool criterion_seed_monotonicity(std::string& detail) {
  std::mt19937_64 rng(0x5EED);
  int checked = 0;
  double worst_drop = 0.0;
  while (checked < 100) {
    const int n = std::uniform_int_distribution<int>(4, 80)(rng);
    const AffinityGraph g = testutil::random_connected_graph(rng, n);
    SeedAssignment base = testutil::random_seeds(rng, n);
    std::vector<char> used(n, 0);
    for (auto i : base.clamp_one) used[i] = 1;
    for (auto i : base.clamp_zero) used[i] = 1;
    std::vector<std::int32_t> frontier;
    for (int i = 0; i < n; ++i) {
      if (!used[i]) frontier.push_back(i);
    }
    if (frontier.empty()) continue;
    SeedAssignment grown = base;
    grown.clamp_one.push_back(
        frontier[std::uniform_int_distribution<std::size_t>(0, frontier.size() - 1)(rng)]);
    const DiffusionField before = solve_diffusion_oracle(g, base);
    const DiffusionField after = solve_diffusion_oracle(g, grown);
    for (int i = 0; i < n; ++i) {
      worst_drop = std::max(worst_drop, before.q[i] - after.q[i]);
    }
    ++checked;
  }
  std::ostringstream out;
  out << "100 instances, worst decrease = " << worst_drop;
  detail = out.str();
  return worst_drop <= 1e-9;
}

bool criterion_synthetic_end_to_end(std::string& detail) {
  const auto start = Clock::now();
  testutil::TempDir dir("acceptance-e2e");
  testutil::write_file_bytes(dir / "cfg.txt", testutil::fixture_config_text());
  double worst_iou = 1.0, worst_miou = 1.0;
  for (int seed = 1; seed <= 10; ++seed) {
    const auto fixture = (dir / ("fx" + std::to_string(seed))).string();
    auto synth = testutil::run_command(kCli + " synth --out " + fixture + " --seed " +
                                       std::to_string(seed) + " --variant two-blob");
    if (synth.exit_code != 0) {
      detail = "synth failed for seed " + std::to_string(seed);
      return false;
    }
    const auto out = fixture + "/pred.png";
    auto diffuse = testutil::run_command(
        kCli + " diffuse --image " + fixture + "/image.png --m " + fixture +
        "/m.fmap --act 1:" + fixture + "/act_1.fmap --act 2:" + fixture +
        "/act_2.fmap --classes " + fixture + "/classes.txt --config " +
        (dir / "cfg.txt").string() + " --out " + out);
    if (diffuse.exit_code != 0) {
      detail = "diffuse exited " + std::to_string(diffuse.exit_code) + " for seed " +
               std::to_string(seed);
      return false;
    }
    const ClassTable table = load_class_table(fixture + "/classes.txt");
    const LabelMap gt = load_label_png(fixture + "/gt.png", table);
    const LabelMap pred = load_label_png(out, table);
    ConfusionMatrix cm = ConfusionMatrix::create(table.size());
    accumulate(cm, gt, pred);
    for (const auto& iou : iou_per_class(cm)) {
      if (iou) worst_iou = std::min(worst_iou, *iou);
    }
    worst_miou = std::min(worst_miou, mean_iou(cm));
  }
  const double elapsed = seconds_since(start);
  std::ostringstream out;
  out << "10 fixtures, min per-class IoU = " << worst_iou << ", min mIoU = " << worst_miou
      << ", " << elapsed << " s";
  detail = out.str();
  return worst_iou >= 0.95 && worst_miou >= 0.95 && elapsed < 60.0;
}

bool criterion_metric_identities(std::string& detail) {
  ClassTable table;
  table.names = {"background", "thing"};

  LabelMap gt = LabelMap::create(4, 2, table);
  gt.data = {1, 1, 0, 0, 1, 1, 0, 0};
  LabelMap shifted = LabelMap::create(4, 2, table);
  shifted.data = {0, 1, 1, 0, 0, 1, 1, 0};

  ConfusionMatrix perfect = ConfusionMatrix::create(2);
  accumulate(perfect, gt, gt);
  if (mean_iou(perfect) != 1.0) {
    detail = "perfect prediction did not score exactly 1.0";
    return false;
  }

  ConfusionMatrix third = ConfusionMatrix::create(2);
  accumulate(third, gt, shifted);
  const auto iou = iou_per_class(third);
  if (!iou[1] || *iou[1] != 2.0 / 6.0) {
    detail = "hand-counted 1/3 IoU not reproduced exactly";
    return false;
  }

  std::mt19937_64 rng(0xE7A1);
  std::vector<std::pair<LabelMap, LabelMap>> batch;
  for (int i = 0; i < 20; ++i) {
    LabelMap a = LabelMap::create(6, 4, table);
    LabelMap b = LabelMap::create(6, 4, table);
    std::uniform_int_distribution<int> bit(0, 1);
    for (auto& v : a.data) v = std::uint8_t(bit(rng));
    for (auto& v : b.data) v = std::uint8_t(bit(rng));
    batch.emplace_back(std::move(a), std::move(b));
  }
  ConfusionMatrix ordered = ConfusionMatrix::create(2);
  for (const auto& [a, b] : batch) accumulate(ordered, a, b);
  for (int shuffle = 0; shuffle < 5; ++shuffle) {
    std::shuffle(batch.begin(), batch.end(), rng);
    ConfusionMatrix shuffled = ConfusionMatrix::create(2);
    for (const auto& [a, b] : batch) accumulate(shuffled, a, b);
    if (shuffled.counts != ordered.counts) {
      detail = "accumulation depended on image order";
      return false;
    }
  }
  detail = "perfect = 1.0, shifted overlap = 1/3 exact, 5 shuffles stable";
  return true;
}

bool criterion_format_round_trips(std::string& detail) {
  testutil::TempDir dir("acceptance-io");
  std::mt19937_64 rng(0xF0F0);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  for (int trial = 0; trial < 100; ++trial) {
    FloatMap m = FloatMap::create(std::uniform_int_distribution<int>(1, 24)(rng),
                                  std::uniform_int_distribution<int>(1, 24)(rng));
    for (auto& v : m.data) v = unit(rng);
    const auto path = dir / "m.fmap";
    save_fmap(m, path);
    const FloatMap back = load_fmap(path);
    if (back.width != m.width || back.height != m.height ||
        std::memcmp(back.data.data(), m.data.data(), 4 * m.data.size()) != 0) {
      detail = "FMAP round-trip diverged at trial " + std::to_string(trial);
      return false;
    }
  }
  for (int trial = 0; trial < 100; ++trial) {
    const int k = std::uniform_int_distribution<int>(1, 256)(rng);
    ClassTable table;
    table.names.push_back("background");
    for (int c = 1; c < k; ++c) table.names.push_back("c" + std::to_string(c));
    LabelMap map = LabelMap::create(std::uniform_int_distribution<int>(1, 24)(rng),
                                    std::uniform_int_distribution<int>(1, 24)(rng), table);
    std::uniform_int_distribution<int> label(0, k - 1);
    for (auto& v : map.data) v = std::uint8_t(label(rng));
    const auto path = dir / "l.png";
    save_label_png(map, path);
    const LabelMap back = load_label_png(path, table);
    if (back.data != map.data) {
      detail = "label PNG round-trip diverged at trial " + std::to_string(trial);
      return false;
    }
    const auto again = dir / "l2.png";
    save_label_png(back, again);
    if (testutil::read_file_bytes(path) != testutil::read_file_bytes(again)) {
      detail = "label PNG re-encode was not byte-identical at trial " + std::to_string(trial);
      return false;
    }
  }
  detail = "100 FMAP and 100 indexed-PNG round-trips bit-exact";
  return true;
}

bool criterion_determinism(std::string& detail) {
  testutil::TempDir dir("acceptance-det");
  const auto fixture = (dir / "fx").string();
  testutil::run_command(kCli + " synth --out " + fixture + " --seed 21 --variant two-blob");
  testutil::write_file_bytes(dir / "cfg.txt", testutil::fixture_config_text());
  const std::string base = kCli + " diffuse --image " + fixture + "/image.png --m " + fixture +
                           "/m.fmap --act 1:" + fixture + "/act_1.fmap --act 2:" + fixture +
                           "/act_2.fmap --classes " + fixture + "/classes.txt --config " +
                           (dir / "cfg.txt").string();
  if (testutil::run_command(base + " --out " + fixture + "/p1.png").exit_code != 0 ||
      testutil::run_command(base + " --out " + fixture + "/p2.png").exit_code != 0) {
    detail = "diffuse did not exit 0";
    return false;
  }
  const std::string bytes = testutil::read_file_bytes(fixture + "/p1.png");
  if (bytes.empty() || bytes != testutil::read_file_bytes(fixture + "/p2.png")) {
    detail = "repeated diffuse runs differed";
    return false;
  }

  const RawImage image = load_image_png(fixture + "/image.png");
  const LabImage lab = normalize_lab(rgb_to_lab(image));
  const SuperpixelMap a = slic_segment(lab, 400, 0.25, 10);
  const SuperpixelMap b = slic_segment(lab, 400, 0.25, 10);
  if (a.assignment != b.assignment) {
    detail = "SLIC produced different assignments across runs";
    return false;
  }
  detail = "CLI outputs byte-identical, SLIC assignments identical";
  return true;
}

bool criterion_affinity_formula(std::string& detail) {
  Adjacency adj;
  adj.n = 2;
  adj.edges = {{0, 1}};
  FeatureTable far;
  far.features = {{0, 0, 0, 0}, {1, 1, 1, 1}};  // ||dF|| = 2, sigma = 1
  FeatureTable close;
  close.features = {{0.25, 0.5, 0.5, 0.5}, {0.27, 0.5, 0.5, 0.5}};  // ||dF|| = 0.02
  const double e1 = std::exp(-1.0);
  const double gap_far = std::abs(build_affinity(adj, far, 1.0).weights[0] - e1);
  const double gap_close = std::abs(build_affinity(adj, close, 0.1).weights[0] - e1);
  std::ostringstream out;
  out << "|z - e^-1| = " << std::max(gap_far, gap_close);
  detail = out.str();
  return gap_far <= 1e-12 && gap_close <= 1e-12;
}

struct Criterion {
  const char* name;
  std::function<bool(std::string&)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"diffusion oracle equivalence (200 graphs, 1e-6)", criterion_oracle_equivalence},
      {"harmonicity and maximum principle", criterion_harmonicity_and_maximum},
      {"hand-solvable path cases (1e-9)", criterion_hand_solved_paths},
      {"energy optimality vs oracle (1e-8)", criterion_energy_optimality},
      {"seed monotonicity (100 instances)", criterion_seed_monotonicity},
      {"synthetic end-to-end IoU >= 0.95 (10 fixtures)", criterion_synthetic_end_to_end},
      {"metric identities", criterion_metric_identities},
      {"format round-trips bit-exact (100 + 100)", criterion_format_round_trips},
      {"determinism of diffuse and SLIC", criterion_determinism},
      {"affinity formula e^-1 cases (1e-12)", criterion_affinity_formula},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::string detail;
    bool ok = false;
    try {
      ok = criteria[i].run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] %zu. %s%s%s\n", ok ? "PASS" : "FAIL", i + 1, criteria[i].name,
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!ok) ++failures;
  }
  if (failures) {
    std::printf("%d of %zu acceptance criteria FAILED\n", failures, criteria.size());
    return 1;
  }
  std::printf("all %zu acceptance criteria passed\n", criteria.size());
  return 0;
}
