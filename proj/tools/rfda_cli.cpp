#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "rfda/enhance.hpp"
#include "rfda/metrics.hpp"
#include "rfda/model.hpp"
#include "rfda/selfcheck.hpp"
#include "rfda/trainer.hpp"
#include "rfda/video.hpp"
#include "rfda/weights_io.hpp"

namespace fs = std::filesystem;
using namespace rfda;

namespace {

// Training data layout: DATA_DIR/dataset.json lists videos as
//   {"videos": [{"gt": ..., "compressed": ..., "width": W, "height": H,
//                "y_only": true}, ...]}
// with paths relative to DATA_DIR.  y_only defaults to true (the degrade
// subcommand emits luma-only files) and can be overridden per file with
// gt_y_only / compressed_y_only, e.g. a 4:2:0 master paired with its
// luma-only degraded copy.
Dataset<float> load_dataset(const std::string& dir) {
  const fs::path root(dir);
  const fs::path manifest = root / "dataset.json";
  std::ifstream in(manifest);
  if (!in) throw IoError("cannot open manifest: " + manifest.string());
  nlohmann::json j;
  in >> j;
  Dataset<float> out;
  for (const auto& v : j.at("videos")) {
    const int w = v.at("width").get<int>(), h = v.at("height").get<int>();
    const bool yo = v.value("y_only", true);
    DataVideo<float> dv;
    dv.gt = read_y_raw<float>((root / v.at("gt").get<std::string>()).string(), w, h,
                              v.value("gt_y_only", yo));
    dv.compressed = read_y_raw<float>((root / v.at("compressed").get<std::string>()).string(),
                                      w, h, v.value("compressed_y_only", yo));
    out.push_back(std::move(dv));
  }
  if (out.empty()) throw IoError("manifest lists no videos: " + manifest.string());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Video compression artifact reduction: multi-frame deformable fusion with a "
      "recurrent refinement stage and attention-guided reconstruction"};
  app.require_subcommand(1);

  struct {
    std::string in, out;
    int q = 24, width = 0, height = 0;
    bool y_only = false;
  } dg;
  CLI::App* sd = app.add_subcommand("degrade", "Compress raw video with a blockwise DCT quantizer");
  sd->add_option("--in", dg.in, "input raw video")->required();
  sd->add_option("--out", dg.out, "output raw video (luma only)")->required();
  sd->add_option("--q", dg.q, "quantization strength (>= 1)")->required()->check(CLI::PositiveNumber);
  sd->add_option("--width", dg.width)->required()->check(CLI::PositiveNumber);
  sd->add_option("--height", dg.height)->required()->check(CLI::PositiveNumber);
  sd->add_flag("--y-only", dg.y_only, "input is luma-only (default: planar 4:2:0)");
  sd->callback([&] {
    VideoClip<float> clip = read_y_raw<float>(dg.in, dg.width, dg.height, dg.y_only);
    write_y_raw(degrade_clip(clip, dg.q), dg.out);
  });

  struct {
    int stage = 1, iters = 1000, batch = 0, crop = 48, clip_len = 15, bptt = 0;
    int log_every = 50, val_every = 0;
    std::uint64_t seed = 1;
    double lr = 1e-4;
    std::string data_dir, preset = "tiny", out_weights, in_weights, log;
  } tr;
  CLI::App* st = app.add_subcommand("train", "Train the enhancement model");
  st->add_option("--stage", tr.stage, "1: fusion+head, 2: add the recurrent stage")
      ->required()
      ->check(CLI::Range(1, 2));
  st->add_option("--data-dir", tr.data_dir, "directory holding dataset.json")->required();
  st->add_option("--config-preset", tr.preset)->check(CLI::IsMember({"tiny", "standard"}));
  st->add_option("--iters", tr.iters)->required()->check(CLI::PositiveNumber);
  st->add_option("--seed", tr.seed);
  st->add_option("--out-weights", tr.out_weights)->required();
  st->add_option("--in-weights", tr.in_weights,
                 "checkpoint to start from (required for stage 2)");
  st->add_option("--batch", tr.batch, "batch size (default: 4 for stage 1, 1 for stage 2)");
  st->add_option("--crop", tr.crop, "square training crop (multiple of 4)");
  st->add_option("--clip-len", tr.clip_len, "frames per stage-2 clip");
  st->add_option("--bptt", tr.bptt, "detach the carried state every N frames (0 = never)");
  st->add_option("--lr", tr.lr, "stage-1 learning rate");
  st->add_option("--log", tr.log, "CSV training log path");
  st->add_option("--log-every", tr.log_every);
  st->add_option("--val-every", tr.val_every, "delta-PSNR probe interval for the log");
  st->callback([&] {
    if (tr.stage == 2 && tr.in_weights.empty())
      throw CLI::ValidationError("--in-weights", "stage 2 starts from a stage-1 checkpoint");
    const ModelConfig mc = *ModelConfig::by_name(tr.preset);
    Dataset<float> data = load_dataset(tr.data_dir);
    TrainConfig tc;
    tc.stage = tr.stage;
    tc.total_iters = tr.iters;
    tc.seed = tr.seed;
    tc.base_lr = tr.lr;
    tc.batch_size = tr.batch > 0 ? tr.batch : (tr.stage == 1 ? 4 : 1);
    tc.crop = tr.crop;
    tc.clip_len = tr.clip_len;
    tc.bptt = tr.bptt;
    tc.log_every = tr.log_every;
    tc.val_every = tr.val_every;
    std::ofstream log_file;
    std::ostream* log = nullptr;
    if (!tr.log.empty()) {
      log_file.open(tr.log);
      if (!log_file) throw IoError("cannot open log file: " + tr.log);
      log = &log_file;
    }
    ModelParams<float> out;
    if (tr.stage == 1) {
      if (tr.in_weights.empty()) {
        out = train_stage1<float>(data, mc, tc, log);
      } else {
        out = load_weights<float>(tr.in_weights, mc, true, tr.seed);
        out.rf.reset();
        Trainer<float> t(out, data, tc);
        t.run(log);
      }
    } else {
      ModelParams<float> s1 = load_weights<float>(tr.in_weights, mc, true, tr.seed);
      out = train_stage2<float>(data, s1, tc, log);
    }
    save_weights(out, tr.out_weights);
  });

  struct {
    std::string in, weights, out, dump;
    int width = 0, height = 0;
    bool y_only = false;
  } en;
  CLI::App* se = app.add_subcommand("enhance", "Run the model over a raw video");
  se->add_option("--in", en.in)->required();
  se->add_option("--weights", en.weights)->required();
  se->add_option("--out", en.out, "output raw video (luma only)")->required();
  se->add_option("--dump-attention", en.dump, "write per-frame attention masks as PGM here");
  se->add_option("--width", en.width)->required()->check(CLI::PositiveNumber);
  se->add_option("--height", en.height)->required()->check(CLI::PositiveNumber);
  se->add_flag("--y-only", en.y_only, "input is luma-only (default: planar 4:2:0)");
  se->callback([&] {
    const ModelConfig cfg = read_weights_config(en.weights);
    const ModelParams<float> params = load_weights<float>(en.weights, cfg, false, 1);
    VideoClip<float> clip = read_y_raw<float>(en.in, en.width, en.height, en.y_only);
    VideoClip<float> out;
    if (en.dump.empty()) {
      out = enhance_video(clip, params);
    } else {
      fs::create_directories(en.dump);
      AttentionSink<float> sink = [&](int frame, int block, const Tensor<float>& mask) {
        char name[48];
        std::snprintf(name, sizeof name, "frame%03d_block%d.pgm", frame, block);
        write_pgm(mask, (fs::path(en.dump) / name).string());
      };
      out = enhance_video(clip, params, &sink);
    }
    write_y_raw(out, en.out);
  });

  struct {
    std::string enhanced, compressed, gt, report, csv;
    int width = 0, height = 0;
    bool y_only = false;
  } ev;
  CLI::App* sv = app.add_subcommand("evaluate", "Score an enhanced video against ground truth");
  sv->add_option("--enhanced", ev.enhanced, "luma-only raw video (enhance output)")->required();
  sv->add_option("--compressed", ev.compressed)->required();
  sv->add_option("--gt", ev.gt)->required();
  sv->add_option("--report", ev.report, "JSON report path")->required();
  sv->add_option("--csv", ev.csv, "optional per-frame CSV path");
  sv->add_option("--width", ev.width)->required()->check(CLI::PositiveNumber);
  sv->add_option("--height", ev.height)->required()->check(CLI::PositiveNumber);
  sv->add_flag("--y-only", ev.y_only,
               "compressed/gt inputs are luma-only (default: planar 4:2:0)");
  sv->callback([&] {
    VideoClip<float> enh = read_y_raw<float>(ev.enhanced, ev.width, ev.height, true);
    VideoClip<float> comp = read_y_raw<float>(ev.compressed, ev.width, ev.height, ev.y_only);
    VideoClip<float> gt = read_y_raw<float>(ev.gt, ev.width, ev.height, ev.y_only);
    MetricsReport rep = evaluate_clips(enh.frames, comp.frames, gt.frames);
    write_text_file(ev.report, rep.to_json() + "\n");
    if (!ev.csv.empty()) write_text_file(ev.csv, rep.to_csv());
  });

  struct {
    std::uint64_t seed = 1;
  } ck;
  CLI::App* sc = app.add_subcommand("check", "Run the built-in invariant and gradient suites");
  sc->add_option("--seed", ck.seed);
  sc->callback([&] {
    bool all_ok = true;
    for (const SuiteResult& s : run_all_checks(ck.seed)) {
      std::printf("%-24s passed %3d  failed %3d\n", s.name.c_str(), s.passed, s.failed);
      for (const std::string& f : s.failures) std::printf("  - %s\n", f.c_str());
      all_ok = all_ok && s.ok();
    }
    if (!all_ok) throw std::runtime_error("self-check failed");
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
