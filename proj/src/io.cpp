#include "egovo/io.hpp"

#include <png.h>

#include <Eigen/Geometry>
#include <algorithm>
#include <bit>
#include <cstring>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>

#include "egovo/errors.hpp"

namespace egovo {

namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDeg = kPi / 180.0;

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string strip_comment(const std::string& line) {
  const auto hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

double parse_double(const std::string& key, const std::string& text) {
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || trim(text.substr(used)).size() > 0 || !std::isfinite(v)) {
    throw ConfigError(key + ": not a number: '" + text + "'");
  }
  return v;
}

long long parse_int(const std::string& key, const std::string& text) {
  size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || trim(text.substr(used)).size() > 0) {
    throw ConfigError(key + ": not an integer: '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = lower(trim(text));
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw ConfigError(key + ": not a boolean: '" + text + "'");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("error while writing " + path);
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

// PGM header tokens, skipping whitespace and comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  const std::string magic = pgm_token(in);
  if (magic != "P5" && magic != "P2") throw IoError(path + ": not a PGM file");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(pgm_token(in));
    h = std::stoi(pgm_token(in));
    maxval = std::stoi(pgm_token(in));
  } catch (const std::exception&) {
    throw IoError(path + ": malformed PGM header");
  }
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) throw IoError(path + ": malformed PGM header");
  const size_t n = static_cast<size_t>(w) * h;
  std::vector<float> data(n);
  const float scale = 1.0f / static_cast<float>(maxval);
  if (magic == "P5") {
    const size_t bytes = maxval < 256 ? 1 : 2;
    std::vector<unsigned char> raw(n * bytes);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<size_t>(in.gcount()) != raw.size()) throw IoError(path + ": truncated PGM data");
    for (size_t i = 0; i < n; ++i) {
      const unsigned v = bytes == 1 ? raw[i] : (raw[2 * i] << 8) | raw[2 * i + 1];
      data[i] = std::min(1.0f, static_cast<float>(v) * scale);
    }
  } else {
    for (size_t i = 0; i < n; ++i) {
      const std::string tok = pgm_token(in);
      if (tok.empty()) throw IoError(path + ": truncated PGM data");
      data[i] = std::min(1.0f, static_cast<float>(std::stoi(tok)) * scale);
    }
  }
  return GrayImage(w, h, std::move(data));
}

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

GrayImage read_png(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw IoError("cannot open " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng initialisation failed");
  }
  std::vector<png_byte> pixels;
  png_uint_32 w = 0, h = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path + ": malformed PNG");
  }
  png_init_io(png, f.get());
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (depth == 16) png_set_strip_16(png);
  if ((color & PNG_COLOR_MASK_ALPHA) || png_get_valid(png, info, PNG_INFO_tRNS)) {
    png_set_strip_alpha(png);
  }
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
      color == PNG_COLOR_TYPE_PALETTE) {
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  }
  png_read_update_info(png, info);
  w = png_get_image_width(png, info);
  h = png_get_image_height(png, info);
  const size_t stride = png_get_rowbytes(png, info);
  if (stride != w) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path + ": unsupported PNG layout");
  }
  pixels.resize(stride * h);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = pixels.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  std::vector<float> data(pixels.size());
  for (size_t i = 0; i < pixels.size(); ++i) data[i] = pixels[i] / 255.0f;
  return GrayImage(static_cast<int>(w), static_cast<int>(h), std::move(data));
}

std::vector<unsigned char> to_bytes(const GrayImage& img) {
  std::vector<unsigned char> out(img.data().size());
  for (size_t i = 0; i < out.size(); ++i) {
    const double v = std::clamp(static_cast<double>(img.data()[i]), 0.0, 1.0);
    out[i] = static_cast<unsigned char>(std::lround(v * 255.0));
  }
  return out;
}

// Last run of digits in the file stem, or -1.
long long frame_number(const std::string& stem) {
  size_t end = stem.size();
  while (end > 0 && !std::isdigit(static_cast<unsigned char>(stem[end - 1]))) --end;
  size_t begin = end;
  while (begin > 0 && std::isdigit(static_cast<unsigned char>(stem[begin - 1]))) --begin;
  if (begin == end || end - begin > 18) return -1;
  return std::stoll(stem.substr(begin, end - begin));
}

}  // namespace

GrayImage read_image(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open " + path);
  unsigned char sig[8] = {};
  probe.read(reinterpret_cast<char*>(sig), 8);
  const auto got = probe.gcount();
  probe.close();
  if (got == 8 && png_sig_cmp(sig, 0, 8) == 0) return read_png(path);
  if (got >= 2 && sig[0] == 'P' && (sig[1] == '5' || sig[1] == '2')) return read_pgm(path);
  throw IoError(path + ": unsupported image format (expected PGM or PNG)");
}

void write_pgm(const std::string& path, const GrayImage& img) {
  auto out = open_out(path);
  out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  const auto bytes = to_bytes(img);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  finish(out, path);
}

void write_png(const std::string& path, const GrayImage& img) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw IoError("cannot write " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng initialisation failed");
  }
  auto bytes = to_bytes(img);
  std::vector<png_bytep> rows(img.height());
  for (int y = 0; y < img.height(); ++y) rows[y] = bytes.data() + static_cast<size_t>(y) * img.width();
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("error while writing " + path);
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, img.width(), img.height(), 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

std::vector<std::string> list_frames(const std::string& dir) {
  std::error_code ec;
  fs::directory_iterator it(dir, ec);
  if (ec) throw IoError("cannot read directory " + dir + ": " + ec.message());
  struct Entry {
    long long number;
    std::string name;
    std::string path;
  };
  std::vector<Entry> entries;
  for (const auto& e : it) {
    if (!e.is_regular_file()) continue;
    const std::string ext = lower(e.path().extension().string());
    if (ext != ".pgm" && ext != ".png") continue;
    entries.push_back({frame_number(e.path().stem().string()), e.path().filename().string(),
                       e.path().string()});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.number != b.number ? a.number < b.number : a.name < b.name;
  });
  std::vector<std::string> out;
  for (auto& e : entries) out.push_back(std::move(e.path));
  return out;
}

Intrinsics read_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("calibration file not found: " + path);
  std::string line;
  while (std::getline(in, line)) {
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    std::istringstream ss(body);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.size() != 6) throw ConfigError(path + ": expected 'fx fy cx cy width height'");
    Intrinsics k;
    k.fx = parse_double("fx", tok[0]);
    k.fy = parse_double("fy", tok[1]);
    k.cx = parse_double("cx", tok[2]);
    k.cy = parse_double("cy", tok[3]);
    k.width = static_cast<int>(parse_int("width", tok[4]));
    k.height = static_cast<int>(parse_int("height", tok[5]));
    k.validate();
    return k;
  }
  throw ConfigError(path + ": no calibration line");
}

void write_calibration(const std::string& path, const Intrinsics& k) {
  auto out = open_out(path);
  out << "# fx fy cx cy width height\n";
  out << fmt("%.9g", k.fx) << ' ' << fmt("%.9g", k.fy) << ' ' << fmt("%.9g", k.cx) << ' '
      << fmt("%.9g", k.cy) << ' ' << k.width << ' ' << k.height << '\n';
  finish(out, path);
}

Intrinsics gopro_preset(int width, int height) {
  Intrinsics k;
  k.width = width;
  k.height = height;
  k.fx = k.fy = 0.5 * width / std::tan(0.5 * 94.0 * kDeg);
  k.cx = 0.5 * (width - 1);
  k.cy = 0.5 * (height - 1);
  k.validate();
  return k;
}

std::map<std::string, std::string> read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config file not found: " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(n) + ": expected key=value");
    }
    const std::string key = trim(body.substr(0, eq));
    if (key.empty()) throw ConfigError(path + ":" + std::to_string(n) + ": empty key");
    out[key] = trim(body.substr(eq + 1));
  }
  return out;
}

namespace {

using Setter = std::function<void(PipelineConfig&, const std::string&, const std::string&)>;

template <typename T>
Setter real(T PipelineConfig::*group, double T::*field, double factor = 1.0) {
  return [=](PipelineConfig& c, const std::string& k, const std::string& v) {
    (c.*group).*field = parse_double(k, v) * factor;
  };
}

template <typename T>
Setter integer(T PipelineConfig::*group, int T::*field) {
  return [=](PipelineConfig& c, const std::string& k, const std::string& v) {
    (c.*group).*field = static_cast<int>(parse_int(k, v));
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"keyframe_every", integer(&PipelineConfig::policy, &KeyframePolicy::keyframe_every)},
      {"window_frames", integer(&PipelineConfig::policy, &KeyframePolicy::window_frames)},
      {"min_overlap", real(&PipelineConfig::policy, &KeyframePolicy::min_overlap)},
      {"kl_threshold", real(&PipelineConfig::closure, &ClosureConfig::kl_threshold)},
      {"view_angle_deg", real(&PipelineConfig::closure, &ClosureConfig::view_angle_max, kDeg)},
      {"max_candidates", integer(&PipelineConfig::closure, &ClosureConfig::max_candidates)},
      {"exclude_recent", integer(&PipelineConfig::closure, &ClosureConfig::exclude_recent)},
      {"max_discrepancy_deg",
       real(&PipelineConfig::closure, &ClosureConfig::max_discrepancy, kDeg)},
      {"rotavg_huber_deg", real(&PipelineConfig::rotavg, &RotAvgConfig::huber_delta, kDeg)},
      {"rotavg_max_iterations", integer(&PipelineConfig::rotavg, &RotAvgConfig::max_iterations)},
      {"tracker_huber", real(&PipelineConfig::tracker, &TrackerConfig::huber_delta)},
      {"tracker_max_iterations", integer(&PipelineConfig::tracker, &TrackerConfig::max_iterations)},
      {"tracker_max_error", real(&PipelineConfig::tracker, &TrackerConfig::max_error)},
      {"min_valid_fraction", real(&PipelineConfig::tracker, &TrackerConfig::min_valid_fraction)},
      {"grad_min", real(&PipelineConfig::depth, &DepthConfig::grad_min)},
      {"sigma_init", real(&PipelineConfig::depth, &DepthConfig::sigma_init)},
      {"kappa_prop", real(&PipelineConfig::depth, &DepthConfig::kappa_prop)},
      {"ambiguity_ratio", real(&PipelineConfig::depth, &DepthConfig::ambiguity_ratio)},
      {"pixel_noise", real(&PipelineConfig::depth, &DepthConfig::pixel_noise)},
      {"loop_closure",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.enable_loop_closure = parse_bool(k, v);
       }},
      {"rotavg",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.enable_rotavg = parse_bool(k, v);
       }},
      {"seed",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         const long long s = parse_int(k, v);
         if (s < 0) throw ConfigError("seed must be non-negative");
         c.seed = static_cast<uint64_t>(s);
       }},
      {"pyramid_levels",
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.pyramid_levels = static_cast<int>(parse_int(k, v));
       }},
  };
  return table;
}

}  // namespace

void apply_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second(cfg, key, value);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& [k, v] : setters()) out.push_back(k);
  return out;
}

namespace {

void write_pose_line(std::ostream& out, int frame, const Pose& p) {
  Eigen::Quaterniond q(p.r.matrix());
  q.normalize();
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d %.9f %.9f %.9f %.9f %.9f %.9f %.9f\n", frame, p.t.x(), p.t.y(),
                p.t.z(), q.x(), q.y(), q.z(), q.w());
  out << buf;
}

}  // namespace

void write_trajectory(const std::string& path, const Trajectory& traj) {
  auto out = open_out(path);
  for (const auto& e : traj.entries) write_pose_line(out, e.frame_index, e.pose);
  finish(out, path);
}

void write_poses(const std::string& path, const std::vector<Pose>& poses) {
  auto out = open_out(path);
  for (size_t i = 0; i < poses.size(); ++i) write_pose_line(out, static_cast<int>(i), poses[i]);
  finish(out, path);
}

Trajectory read_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  Trajectory traj;
  int segment = 0;
  bool seen_pose = false;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      std::istringstream ss(t.substr(1));
      std::string word;
      int id = 0;
      if (ss >> word >> id && word == "segment") {
        if (seen_pose && id <= segment) {
          throw ConfigError(path + ":" + std::to_string(n) + ": segment ids must increase");
        }
        segment = id;
      }
      continue;
    }
    std::istringstream ss(t);
    std::vector<std::string> tok;
    for (std::string s; ss >> s;) tok.push_back(s);
    if (tok.size() != 8) {
      throw ConfigError(path + ":" + std::to_string(n) + ": expected 8 columns");
    }
    double v[8];
    for (int i = 0; i < 8; ++i) v[i] = parse_double(path + ":" + std::to_string(n), tok[i]);
    const double frame = std::round(v[0]);
    if (std::abs(frame - v[0]) > 1e-6) {
      throw ConfigError(path + ":" + std::to_string(n) + ": timestamp is not a frame index");
    }
    Eigen::Quaterniond q(v[7], v[4], v[5], v[6]);
    if (!(q.norm() > 1e-6)) throw ConfigError(path + ":" + std::to_string(n) + ": zero quaternion");
    q.normalize();
    TrajectoryEntry e;
    e.frame_index = static_cast<int>(frame);
    e.pose = {Rotation::from_matrix(q.toRotationMatrix()), Vec3(v[1], v[2], v[3])};
    e.segment = segment;
    e.flags = kTracked;
    if (!traj.entries.empty() && e.frame_index <= traj.entries.back().frame_index) {
      throw ConfigError(path + ":" + std::to_string(n) + ": frame indices must increase");
    }
    traj.entries.push_back(e);
    seen_pose = true;
  }
  return traj;
}

void assign_segments(Trajectory& traj, const std::string& stats_path) {
  std::ifstream in(stats_path);
  if (!in) throw IoError("cannot open " + stats_path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("frame,segment,", 0) != 0) {
    throw ConfigError(stats_path + ": not a stats file");
  }
  std::map<int, int> segment_of;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::istringstream ss(line);
    std::string frame, segment;
    std::getline(ss, frame, ',');
    std::getline(ss, segment, ',');
    segment_of[static_cast<int>(parse_int(stats_path, frame))] =
        static_cast<int>(parse_int(stats_path, segment));
  }
  for (auto& e : traj.entries) {
    const auto it = segment_of.find(e.frame_index);
    if (it == segment_of.end()) {
      throw ConfigError(stats_path + ": no entry for frame " + std::to_string(e.frame_index));
    }
    e.segment = it->second;
  }
}

void write_closures_csv(const std::string& path, const std::vector<ClosureRecord>& closures) {
  auto out = open_out(path);
  for (const auto& c : closures) {
    out << c.frame_index << ',' << c.kf_id << ',' << fmt("%.6f", c.kl) << ','
        << fmt("%.6f", c.view_angle / kDeg) << ',' << (c.converged ? 1 : 0) << ','
        << (std::isfinite(c.rot_discrepancy) ? fmt("%.6f", c.rot_discrepancy / kDeg) : "nan") << '\n';
  }
  finish(out, path);
}

void write_stats_csv(const std::string& path, const std::vector<FrameRecord>& records) {
  auto out = open_out(path);
  out << "frame,segment,keyframe,kf_id,lost,error,valid_fraction,iterations,depth_points,closures,"
         "averaged,avg_cost_before,avg_cost_after,window_nodes\n";
  for (const auto& r : records) {
    out << r.frame_index << ',' << r.segment << ',' << (r.keyframe ? 1 : 0) << ',' << r.kf_id << ','
        << (r.lost ? 1 : 0) << ',' << fmt("%.9g", r.error) << ',' << fmt("%.6f", r.valid_fraction)
        << ',' << r.iterations << ',' << r.depth_points << ',' << r.closures << ','
        << (r.averaged ? 1 : 0) << ',' << fmt("%.9g", r.avg_cost_before) << ','
        << fmt("%.9g", r.avg_cost_after) << ',' << r.window_nodes << '\n';
  }
  finish(out, path);
}

void write_plotdata_csv(const std::string& path, const Trajectory& traj) {
  auto out = open_out(path);
  out << "frame,tx,ty,tz,rx,ry,rz\n";
  for (const auto& e : traj.entries) {
    const RotVec w = log_so3(e.pose.r) / kDeg;
    out << e.frame_index << ',' << fmt("%.9f", e.pose.t.x()) << ',' << fmt("%.9f", e.pose.t.y())
        << ',' << fmt("%.9f", e.pose.t.z()) << ',' << fmt("%.6f", w.x()) << ','
        << fmt("%.6f", w.y()) << ',' << fmt("%.6f", w.z()) << '\n';
  }
  finish(out, path);
}

namespace {

uint32_t to_little_endian(uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  }
  return v;
}

}  // namespace

void write_depth_dump(const std::string& base, const InverseDepthMap& map) {
  double rho_max = 0.0;
  for (size_t i = 0; i < map.rho.size(); ++i) {
    if (map.valid(i)) rho_max = std::max(rho_max, map.rho[i]);
  }
  GrayImage preview(map.width, map.height);
  for (size_t i = 0; i < map.rho.size(); ++i) {
    if (map.valid(i) && rho_max > 0.0) preview.data()[i] = static_cast<float>(map.rho[i] / rho_max);
  }
  write_pgm(base + ".pgm", preview);

  const std::string path = base + ".bin";
  auto out = open_out(path);
  std::vector<uint32_t> words;
  words.reserve(map.rho.size() * 3);
  for (size_t i = 0; i < map.rho.size(); ++i) {
    for (const double v : {map.rho[i], map.sigma2[i], map.weight[i]}) {
      words.push_back(to_little_endian(std::bit_cast<uint32_t>(static_cast<float>(v))));
    }
  }
  out.write(reinterpret_cast<const char*>(words.data()),
            static_cast<std::streamsize>(words.size() * sizeof(uint32_t)));
  finish(out, path);
}

InverseDepthMap read_depth_dump(const std::string& base, int width, int height) {
  const std::string path = base + ".bin";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  InverseDepthMap map(width, height);
  std::vector<uint32_t> words(static_cast<size_t>(width) * height * 3);
  in.read(reinterpret_cast<char*>(words.data()),
          static_cast<std::streamsize>(words.size() * sizeof(uint32_t)));
  if (in.gcount() != static_cast<std::streamsize>(words.size() * sizeof(uint32_t)) ||
      in.peek() != std::char_traits<char>::eof()) {
    throw IoError(path + ": size does not match " + std::to_string(width) + "x" +
                  std::to_string(height));
  }
  auto value = [&](size_t k) { return static_cast<double>(std::bit_cast<float>(to_little_endian(words[k]))); };
  for (size_t i = 0; i < map.rho.size(); ++i) {
    const double w = value(3 * i + 2);
    if (w > 0.0) {
      map.set(i, value(3 * i), value(3 * i + 1), w);
    }
  }
  return map;
}

}  // namespace egovo
