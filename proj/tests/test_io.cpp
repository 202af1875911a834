#include "egovo/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "egovo/errors.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;

namespace egovo {
namespace {

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("egovo_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write_text(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
  }
  static std::vector<std::string> lines(const std::string& p) {
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
  }

  fs::path dir_;
};

GrayImage ramp(int w, int h) {
  GrayImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(x, y) = static_cast<float>((x * 7 + y * 13) % 256) / 255.0f;
  return img;
}

TEST_F(IoTest, PgmAndPngRoundTripAt8Bits) {
  const GrayImage img = ramp(37, 21);
  write_pgm(path("a.pgm"), img);
  write_png(path("a.png"), img);
  for (const auto* name : {"a.pgm", "a.png"}) {
    const GrayImage back = read_image(path(name));
    ASSERT_EQ(back.width(), 37);
    ASSERT_EQ(back.height(), 21);
    for (size_t i = 0; i < img.data().size(); ++i) {
      EXPECT_NEAR(back.data()[i], img.data()[i], 0.5 / 255.0) << name;
    }
  }
}

TEST_F(IoTest, AsciiPgmWithComment) {
  write_text("b.pgm", "P2\n# comment\n3 2\n255\n0 51 102\n153 204 255\n");
  const GrayImage img = read_image(path("b.pgm"));
  ASSERT_EQ(img.width(), 3);
  EXPECT_NEAR(img.at(1, 0), 0.2f, 1e-6);
  EXPECT_NEAR(img.at(2, 1), 1.0f, 1e-6);
}

TEST_F(IoTest, BadImagesThrow) {
  EXPECT_THROW(read_image(path("missing.pgm")), IoError);
  write_text("junk.pgm", "not an image");
  EXPECT_THROW(read_image(path("junk.pgm")), IoError);
}

TEST_F(IoTest, ListFramesSortsNumerically) {
  const GrayImage img(4, 4, 0.5f);
  for (const auto* n : {"frame_10.pgm", "frame_2.pgm", "frame_1.png"}) write_pgm(path(n), img);
  write_text("notes.txt", "x");
  const auto frames = list_frames(dir_.string());
  ASSERT_EQ(frames.size(), 3u);
  EXPECT_EQ(fs::path(frames[0]).filename(), "frame_1.png");
  EXPECT_EQ(fs::path(frames[1]).filename(), "frame_2.pgm");
  EXPECT_EQ(fs::path(frames[2]).filename(), "frame_10.pgm");
  EXPECT_THROW(list_frames(path("nope")), IoError);
}

TEST_F(IoTest, Calibration) {
  write_text("ok.txt", "# header\n\n100 101 79.5 59.5 160 120  # trailing\n");
  const Intrinsics k = read_calibration(path("ok.txt"));
  EXPECT_DOUBLE_EQ(k.fx, 100.0);
  EXPECT_DOUBLE_EQ(k.fy, 101.0);
  EXPECT_DOUBLE_EQ(k.cx, 79.5);
  EXPECT_EQ(k.width, 160);
  EXPECT_EQ(k.height, 120);

  write_calibration(path("out.txt"), k);
  const Intrinsics back = read_calibration(path("out.txt"));
  EXPECT_DOUBLE_EQ(back.fy, k.fy);
  EXPECT_DOUBLE_EQ(back.cy, k.cy);

  EXPECT_THROW(read_calibration(path("missing.txt")), IoError);
  write_text("short.txt", "100 100 80 60\n");
  EXPECT_THROW(read_calibration(path("short.txt")), ConfigError);
  write_text("nan.txt", "abc 100 80 60 160 120\n");
  EXPECT_THROW(read_calibration(path("nan.txt")), ConfigError);
  write_text("outside.txt", "100 100 500 60 160 120\n");
  EXPECT_THROW(read_calibration(path("outside.txt")), ConfigError);
  write_text("empty.txt", "# nothing\n");
  EXPECT_THROW(read_calibration(path("empty.txt")), ConfigError);
}

TEST_F(IoTest, GoproPresetFieldOfView) {
  const Intrinsics k = gopro_preset(640, 480);
  EXPECT_DOUBLE_EQ(k.fx, k.fy);
  EXPECT_NEAR(2.0 * std::atan(0.5 * 640 / k.fx), 94.0 * test::kDeg, 1e-12);
  EXPECT_DOUBLE_EQ(k.cx, 319.5);
  EXPECT_DOUBLE_EQ(k.cy, 239.5);
}

TEST_F(IoTest, ConfigFile) {
  write_text("c.cfg", "# tuning\nkeyframe_every = 7\nkl_threshold=0.3 # c\n\nkeyframe_every=9\n");
  const auto kv = read_key_values(path("c.cfg"));
  ASSERT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv.at("keyframe_every"), "9");

  PipelineConfig cfg;
  for (const auto& [key, value] : kv) apply_config_value(cfg, key, value);
  EXPECT_EQ(cfg.policy.keyframe_every, 9);
  EXPECT_DOUBLE_EQ(cfg.closure.kl_threshold, 0.3);
  apply_config_value(cfg, "view_angle_deg", "30");
  EXPECT_NEAR(cfg.closure.view_angle_max, 30.0 * test::kDeg, 1e-15);

  EXPECT_THROW(apply_config_value(cfg, "no_such_key", "1"), ConfigError);
  EXPECT_THROW(apply_config_value(cfg, "keyframe_every", "seven"), ConfigError);
  write_text("bad.cfg", "keyframe_every 7\n");
  EXPECT_THROW(read_key_values(path("bad.cfg")), ConfigError);
  EXPECT_THROW(read_key_values(path("missing.cfg")), IoError);

  const auto keys = config_keys();
  EXPECT_NE(std::find(keys.begin(), keys.end(), "tracker_max_error"), keys.end());
}

TEST_F(IoTest, TrajectoryRoundTrip) {
  std::mt19937_64 rng(3);
  Trajectory traj;
  for (int i = 0; i < 20; ++i) {
    TrajectoryEntry e;
    e.frame_index = 2 * i;
    e.pose = test::random_pose(rng, 2.0, 3.0);
    e.segment = i < 10 ? 0 : 1;
    traj.entries.push_back(e);
  }
  write_trajectory(path("t.txt"), traj);
  const auto text = lines(path("t.txt"));
  ASSERT_EQ(text.size(), traj.size());
  for (const auto& l : text) {
    std::istringstream ss(l);
    double v[8];
    for (double& x : v) ss >> x;
    EXPECT_GE(v[7], 0.0);
    EXPECT_NEAR(std::sqrt(v[4] * v[4] + v[5] * v[5] + v[6] * v[6] + v[7] * v[7]), 1.0, 1e-8);
  }

  const Trajectory back = read_trajectory(path("t.txt"));
  ASSERT_EQ(back.size(), traj.size());
  for (size_t i = 0; i < traj.size(); ++i) {
    EXPECT_EQ(back.entries[i].frame_index, traj.entries[i].frame_index);
    EXPECT_EQ(back.entries[i].segment, 0);
    EXPECT_LT((back.entries[i].pose.t - traj.entries[i].pose.t).norm(), 1e-8);
    EXPECT_LT(rot_distance(back.entries[i].pose.r, traj.entries[i].pose.r), 1e-8);
  }
}

TEST_F(IoTest, SegmentsFromCommentsAndStats) {
  write_text("s.txt",
             "0 0 0 0 0 0 0 1\n1 0 0 0 0 0 0 1\n# segment 3\n2 0 0 0 0 0 0 1\n");
  const Trajectory t = read_trajectory(path("s.txt"));
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t.entries[1].segment, 0);
  EXPECT_EQ(t.entries[2].segment, 3);
  EXPECT_EQ(t.num_segments(), 2);

  write_text("back.txt", "0 0 0 0 0 0 0 1\n# segment 1\n1 0 0 0 0 0 0 1\n# segment 0\n2 0 0 0 0 0 0 1\n");
  EXPECT_THROW(read_trajectory(path("back.txt")), ConfigError);
  write_text("order.txt", "1 0 0 0 0 0 0 1\n1 0 0 0 0 0 0 1\n");
  EXPECT_THROW(read_trajectory(path("order.txt")), ConfigError);
  write_text("cols.txt", "0 0 0 0 0 0 1\n");
  EXPECT_THROW(read_trajectory(path("cols.txt")), ConfigError);

  std::vector<FrameRecord> records(4);
  for (int i = 0; i < 4; ++i) {
    records[i].frame_index = i;
    records[i].segment = i < 2 ? 0 : 1;
  }
  write_stats_csv(path("stats.csv"), records);
  Trajectory u;
  for (int i = 0; i < 4; ++i) u.entries.push_back({i, Pose(), 0, kTracked});
  assign_segments(u, path("stats.csv"));
  EXPECT_EQ(u.entries[1].segment, 0);
  EXPECT_EQ(u.entries[2].segment, 1);
  EXPECT_EQ(u.num_segments(), 2);

  u.entries.push_back({9, Pose(), 0, kTracked});
  EXPECT_THROW(assign_segments(u, path("stats.csv")), ConfigError);
  EXPECT_THROW(assign_segments(u, path("s.txt")), ConfigError);
}

TEST_F(IoTest, ClosuresCsvHasNoHeader) {
  write_closures_csv(path("empty.csv"), {});
  EXPECT_EQ(fs::file_size(path("empty.csv")), 0u);

  ClosureRecord ok{12, 3, 0.125, 10.0 * test::kDeg, true, 0.5 * test::kDeg, Rotation()};
  ClosureRecord failed{13, 4, 0.2, 0.0, false, std::nan(""), Rotation()};
  write_closures_csv(path("c.csv"), {ok, failed});
  const auto text = lines(path("c.csv"));
  ASSERT_EQ(text.size(), 2u);
  EXPECT_EQ(text[0], "12,3,0.125000,10.000000,1,0.500000");
  EXPECT_EQ(text[1], "13,4,0.200000,0.000000,0,nan");
}

TEST_F(IoTest, PlotdataColumns) {
  Trajectory t;
  t.entries.push_back({0, Pose(), 0, kTracked});
  t.entries.push_back({1, {Rotation::about_y(30.0 * test::kDeg), Vec3(1, 2, 3)}, 0, kTracked});
  write_plotdata_csv(path("p.csv"), t);
  const auto text = lines(path("p.csv"));
  ASSERT_EQ(text.size(), 3u);
  EXPECT_EQ(text[0], "frame,tx,ty,tz,rx,ry,rz");
  EXPECT_EQ(std::count(text[2].begin(), text[2].end(), ','), 6);
  EXPECT_EQ(text[2], "1,1.000000000,2.000000000,3.000000000,0.000000,30.000000,0.000000");
}

TEST_F(IoTest, DepthDumpRoundTrip) {
  InverseDepthMap map(5, 3);
  map.set(map.index(1, 1), 0.5, 0.01, 1.0);
  map.set(map.index(4, 2), 0.25, 0.02, 0.5);
  write_depth_dump(path("kf"), map);

  EXPECT_EQ(fs::file_size(path("kf.bin")), 5u * 3u * 3u * 4u);
  const GrayImage preview = read_image(path("kf.pgm"));
  EXPECT_FLOAT_EQ(preview.at(1, 1), 1.0f);
  EXPECT_NEAR(preview.at(4, 2), 0.5f, 1.0 / 255.0);
  EXPECT_FLOAT_EQ(preview.at(0, 0), 0.0f);

  const InverseDepthMap back = read_depth_dump(path("kf"), 5, 3);
  EXPECT_EQ(back.valid_count(), 2);
  EXPECT_FLOAT_EQ(static_cast<float>(back.rho[map.index(4, 2)]), 0.25f);
  EXPECT_FLOAT_EQ(static_cast<float>(back.sigma2[map.index(4, 2)]), 0.02f);
  EXPECT_FLOAT_EQ(static_cast<float>(back.weight[map.index(4, 2)]), 0.5f);
  EXPECT_THROW(read_depth_dump(path("kf"), 4, 3), IoError);
  EXPECT_THROW(read_depth_dump(path("kf"), 6, 3), IoError);
}

}  // namespace
}  // namespace egovo
