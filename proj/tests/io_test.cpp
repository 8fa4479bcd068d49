#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "rfda/model.hpp"
#include "rfda/tensor.hpp"
#include "rfda/video.hpp"
#include "rfda/weights_io.hpp"

using namespace rfda;
namespace fs = std::filesystem;

namespace {
struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("rfda_io_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::vector<char> slurp(const std::string& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}
}  // namespace

TEST_CASE("y-raw round trip restores quantized samples exactly") {
  TempDir td;
  VideoClip<float> clip;
  clip.width = 6;
  clip.height = 4;
  std::mt19937_64 rng(3);
  for (int t = 0; t < 3; ++t) {
    Tensor<float> f({1, 4, 6});
    for (auto& v : f.values())
      v = static_cast<float>(static_cast<int>(rng() % 256)) / 255.0f;  // already on the 8-bit grid
    clip.frames.push_back(f);
  }
  const std::string p = td.file("clip.yuv");
  write_y_raw(clip, p);
  VideoClip<float> back = read_y_raw<float>(p, 6, 4, true);
  REQUIRE(back.frame_count() == 3);
  for (int t = 0; t < 3; ++t)
    for (int i = 0; i < 24; ++i) CHECK(back.frames[size_t(t)].at(i) == clip.frames[size_t(t)].at(i));
}

TEST_CASE("4:2:0 reader skips chroma and keeps luma") {
  TempDir td;
  const std::string p = td.file("c.yuv");
  {
    std::ofstream os(p, std::ios::binary);
    // two 2x2 frames: luma 4 bytes + chroma 2 bytes each
    const unsigned char bytes[] = {10, 20, 30, 40, 7, 7, 50, 60, 70, 80, 9, 9};
    os.write(reinterpret_cast<const char*>(bytes), sizeof bytes);
  }
  VideoClip<double> clip = read_y_raw<double>(p, 2, 2, false);
  REQUIRE(clip.frame_count() == 2);
  CHECK(clip.frames[0].at(0) == 10.0 / 255.0);
  CHECK(clip.frames[1].at(3) == 80.0 / 255.0);
}

TEST_CASE("y-raw reader validates sizes") {
  TempDir td;
  const std::string p = td.file("bad.yuv");
  {
    std::ofstream os(p, std::ios::binary);
    os.write("\0\0\0\0\0", 5);  // not a multiple of the 4-byte frame
  }
  CHECK_THROWS_AS(read_y_raw<float>(p, 2, 2, true), IoError);
  CHECK_THROWS_AS(read_y_raw<float>(td.file("absent.yuv"), 2, 2, true), IoError);
  CHECK_THROWS_AS(read_y_raw<float>(p, 0, 2, true), IoError);
  CHECK_THROWS_AS(read_y_raw<float>(p, 3, 3, false), IoError);  // 4:2:0 needs even dims
}

TEST_CASE("pgm writer emits a valid header and payload") {
  TempDir td;
  Tensor<float> plane({2, 3}, {0.0f, 0.5f, 1.0f, 0.25f, 0.75f, 1.5f});
  const std::string p = td.file("m.pgm");
  write_pgm(plane, p);
  std::vector<char> bytes = slurp(p);
  const std::string head(bytes.begin(), bytes.begin() + 9);
  CHECK(head == "P5\n3 2\n25");  // "P5\n3 2\n255\n"
  CHECK(static_cast<unsigned char>(bytes.back()) == 255);  // 1.5 clamps to white
  CHECK(bytes.size() == 11 + 6);
}

TEST_CASE("writers leave no file behind on failure") {
  Tensor<float> plane({2, 2});
  CHECK_THROWS_AS(write_pgm(plane, "/nonexistent_dir_rfda/x.pgm"), IoError);
  CHECK_FALSE(fs::exists("/nonexistent_dir_rfda"));
}

TEST_CASE("weight files identify their architecture") {
  TempDir td;
  ModelConfig cfg = ModelConfig::tiny();
  ModelParams<float> p = init_params<float>(cfg, 11, true);
  const std::string wf = td.file("w.bin");
  save_weights(p, wf);
  CHECK(read_weights_config(wf) == cfg);
  ModelParams<float> q = load_weights<float>(wf, cfg);
  bool all_equal = true;
  visit_params(p, [&](const std::string& n, Tensor<float>& t, ParamGroup) {
    // visit the same tensor in q by name through a second pass
    visit_params(q, [&](const std::string& m, Tensor<float>& u, ParamGroup) {
      if (n == m && t.values() != u.values()) all_equal = false;
    });
  });
  CHECK(all_equal);
}

TEST_CASE("weight loader rejects the wrong architecture") {
  TempDir td;
  ModelParams<float> p = init_params<float>(ModelConfig::tiny(), 1, true);
  const std::string wf = td.file("w.bin");
  save_weights(p, wf);
  CHECK_THROWS_AS(load_weights<float>(wf, ModelConfig::standard()), WeightsError);
}

TEST_CASE("weight loader names malformed input") {
  TempDir td;
  const std::string wf = td.file("junk.bin");
  {
    std::ofstream os(wf, std::ios::binary);
    os.write("JUNKJUNKJUNK", 12);
  }
  CHECK_THROWS_AS(read_weights_config(wf), WeightsError);
  CHECK_THROWS_AS(load_weights<float>(wf, ModelConfig::tiny()), WeightsError);
  CHECK_THROWS_AS(read_weights_config(td.file("missing.bin")), WeightsError);
}

TEST_CASE("stage-1 checkpoint loads with fresh recurrent tensors on request") {
  TempDir td;
  ModelConfig cfg = ModelConfig::tiny();
  ModelParams<float> p = init_params<float>(cfg, 5, false);
  CHECK_FALSE(p.has_rf());
  const std::string wf = td.file("s1.bin");
  save_weights(p, wf);
  CHECK_THROWS_AS(load_weights<float>(wf, cfg, false), WeightsError);
  ModelParams<float> q = load_weights<float>(wf, cfg, true, 9);
  CHECK(q.has_rf());
  // deterministic fill: loading twice with the same seed gives identical tensors
  ModelParams<float> r = load_weights<float>(wf, cfg, true, 9);
  CHECK(q.rf->off1.w.values() == r.rf->off1.w.values());
}
