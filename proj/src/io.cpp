#include "meshplace/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "meshplace/error.hpp"

namespace meshplace::io {

namespace {

[[noreturn]] void io_error(const fs::path& path, const std::string& what) {
  throw Error(ErrorCode::kIo, path.string() + ": " + what);
}

[[noreturn]] void format_error(const fs::path& path, const std::string& what) {
  throw Error(ErrorCode::kFormat, path.string() + ": " + what);
}

void ensure_parent(const fs::path& path) {
  const auto parent = path.parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) io_error(parent, "cannot create directory: " + ec.message());
}

void require_file(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw Error(ErrorCode::kInput, path.string() + ": file not found");
}

struct PngReader {
  png_image image;
  explicit PngReader(const fs::path& path) {
    require_file(path);
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) format_error(path, image.message);
  }
  ~PngReader() { png_image_free(&image); }
  PngReader(const PngReader&) = delete;
  PngReader& operator=(const PngReader&) = delete;

  bool is_color() const { return (image.format & PNG_FORMAT_FLAG_COLOR) != 0; }
  bool is_16bit() const { return (image.format & PNG_FORMAT_FLAG_LINEAR) != 0; }

  template <typename T>
  std::vector<T> finish(const fs::path& path, png_uint_32 format) {
    image.format = format;
    std::vector<T> buffer(PNG_IMAGE_SIZE(image) / sizeof(T));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) format_error(path, image.message);
    return buffer;
  }
};

template <typename T>
void write_png(const fs::path& path, int width, int height, png_uint_32 format, const std::vector<T>& buffer) {
  ensure_parent(path);
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  if (!png_image_write_to_file(&image, path.c_str(), 0, buffer.data(), 0, nullptr)) {
    const std::string message = image.message;
    png_image_free(&image);
    io_error(path, "cannot write PNG: " + message);
  }
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(std::string_view token, const std::string& context) {
  if (token == "nan") return std::nan("");
  double value = 0;
  const char* first = token.data();
  if (!token.empty() && token.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw Error(ErrorCode::kFormat, context + ": bad number '" + std::string(token) + "'");
  }
  return value;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

template <int R, int C>
std::vector<double> row_major(const Eigen::Matrix<double, R, C>& m) {
  std::vector<double> out;
  for (int r = 0; r < R; ++r) {
    for (int c = 0; c < C; ++c) out.push_back(m(r, c));
  }
  return out;
}

template <int R, int C>
Eigen::Matrix<double, R, C> from_row_major(const std::vector<double>& v) {
  Eigen::Matrix<double, R, C> m;
  for (int r = 0; r < R; ++r) {
    for (int c = 0; c < C; ++c) m(r, c) = v[static_cast<std::size_t>(r * C + c)];
  }
  return m;
}

}  // namespace

// ---- PNG ----

void write_gray_png(const fs::path& path, const GrayImage& image) {
  std::vector<std::uint8_t> buf(image.size());
  std::transform(image.pixels().begin(), image.pixels().end(), buf.begin(), [](float g) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(static_cast<double>(g), 0.0, 1.0) * 255.0));
  });
  write_png(path, image.width(), image.height(), PNG_FORMAT_GRAY, buf);
}

GrayImage read_gray_png(const fs::path& path) {
  PngReader reader(path);
  const int w = static_cast<int>(reader.image.width), h = static_cast<int>(reader.image.height);
  GrayImage out(w, h);
  auto px = out.pixels();
  if (reader.is_color()) {
    const auto buf = reader.finish<std::uint8_t>(path, PNG_FORMAT_RGB);
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = luminance(buf[3 * i], buf[3 * i + 1], buf[3 * i + 2]);
  } else if (reader.is_16bit()) {
    const auto buf = reader.finish<std::uint16_t>(path, PNG_FORMAT_LINEAR_Y);
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<float>(buf[i] / 65535.0);
  } else {
    const auto buf = reader.finish<std::uint8_t>(path, PNG_FORMAT_GRAY);
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<float>(buf[i] / 255.0);
  }
  return out;
}

void write_mask_png(const fs::path& path, const MaskImage& mask) {
  std::vector<std::uint8_t> buf(mask.size());
  std::transform(mask.pixels().begin(), mask.pixels().end(), buf.begin(),
                 [](std::uint8_t m) { return m ? std::uint8_t{255} : std::uint8_t{0}; });
  write_png(path, mask.width(), mask.height(), PNG_FORMAT_GRAY, buf);
}

MaskImage read_mask_png(const fs::path& path) {
  PngReader reader(path);
  const int w = static_cast<int>(reader.image.width), h = static_cast<int>(reader.image.height);
  MaskImage out(w, h);
  auto px = out.pixels();
  if (reader.is_16bit() && !reader.is_color()) {
    const auto buf = reader.finish<std::uint16_t>(path, PNG_FORMAT_LINEAR_Y);
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = buf[i] != 0;
  } else {
    const auto buf = reader.finish<std::uint8_t>(path, PNG_FORMAT_GRAY);
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = buf[i] != 0;
  }
  return out;
}

std::size_t write_depth_png(const fs::path& path, const DepthImage& depth) {
  std::vector<std::uint16_t> buf(depth.size());
  std::size_t saturated = 0;
  for (std::size_t i = 0; i < buf.size(); ++i) {
    const double mm = std::round(static_cast<double>(depth.pixels()[i]) * 1000.0);
    if (!(mm > 0)) {
      buf[i] = 0;
    } else if (mm > 65535.0) {
      buf[i] = 65535;
      ++saturated;
    } else {
      buf[i] = static_cast<std::uint16_t>(mm);
    }
  }
  write_png(path, depth.width(), depth.height(), PNG_FORMAT_LINEAR_Y, buf);
  return saturated;
}

DepthImage read_depth_png(const fs::path& path) {
  PngReader reader(path);
  if (reader.is_color() || !reader.is_16bit()) format_error(path, "depth PNG must be 16-bit grayscale");
  const int w = static_cast<int>(reader.image.width), h = static_cast<int>(reader.image.height);
  const auto buf = reader.finish<std::uint16_t>(path, PNG_FORMAT_LINEAR_Y);
  DepthImage out(w, h);
  for (std::size_t i = 0; i < buf.size(); ++i) out.pixels()[i] = static_cast<float>(buf[i] / 1000.0);
  return out;
}

void write_provenance_png(const fs::path& path, const Image<Provenance>& provenance) {
  std::vector<std::uint8_t> buf(provenance.size());
  std::transform(provenance.pixels().begin(), provenance.pixels().end(), buf.begin(),
                 [](Provenance p) { return static_cast<std::uint8_t>(p); });
  write_png(path, provenance.width(), provenance.height(), PNG_FORMAT_GRAY, buf);
}

// ---- raw float depth ----

namespace {

constexpr char kDepthMagic[4] = {'D', 'P', 'F', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::string& in, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  return v;
}

}  // namespace

void write_depth_f32(const fs::path& path, const DepthImage& depth) {
  std::string out(kDepthMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(depth.width()));
  put_u32(out, static_cast<std::uint32_t>(depth.height()));
  put_u32(out, 0);
  for (float d : depth.pixels()) put_u32(out, std::bit_cast<std::uint32_t>(d));
  write_text(path, out);
}

DepthImage read_depth_f32(const fs::path& path) {
  const std::string data = read_text(path);
  if (data.size() < 16 || std::memcmp(data.data(), kDepthMagic, 4) != 0) {
    format_error(path, "missing DPF1 header");
  }
  const std::uint32_t w = get_u32(data, 4), h = get_u32(data, 8);
  if (w > 1u << 16 || h > 1u << 16) format_error(path, "implausible depth size");
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (data.size() != 16 + 4 * n) {
    format_error(path, "expected " + std::to_string(16 + 4 * n) + " bytes, found " + std::to_string(data.size()));
  }
  DepthImage out(static_cast<int>(w), static_cast<int>(h));
  for (std::size_t i = 0; i < n; ++i) out.pixels()[i] = std::bit_cast<float>(get_u32(data, 16 + 4 * i));
  return out;
}

DepthImage read_depth(const fs::path& path) {
  if (path.extension() == ".f32") return read_depth_f32(path);
  return read_depth_png(path);
}

// ---- key-value text ----

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

void KeyValues::set(const std::string& key, const std::string& value) {
  if (auto it = index_.find(key); it != index_.end()) {
    entries_[it->second].second = value;
    return;
  }
  index_[key] = entries_.size();
  entries_.emplace_back(key, value);
}

void KeyValues::set(const std::string& key, double value) { set(key, format_double(value)); }

void KeyValues::set(const std::string& key, std::span<const double> values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ' ';
    s += format_double(values[i]);
  }
  set(key, s);
}

void KeyValues::set_int(const std::string& key, long long value) { set(key, std::to_string(value)); }

std::vector<std::string> KeyValues::keys() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.first);
  return out;
}

bool KeyValues::has(const std::string& key) const { return index_.count(key) != 0; }

const std::string& KeyValues::text(const std::string& key) const {
  const auto it = index_.find(key);
  if (it == index_.end()) throw Error(ErrorCode::kFormat, origin_ + ": missing key '" + key + "'");
  return entries_[it->second].second;
}

double KeyValues::number(const std::string& key) const {
  return parse_double(trim(text(key)), origin_ + ": key '" + key + "'");
}

long long KeyValues::integer(const std::string& key) const {
  const std::string t = trim(text(key));
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw Error(ErrorCode::kFormat, origin_ + ": key '" + key + "' is not an integer");
  }
  return v;
}

std::vector<double> KeyValues::numbers(const std::string& key, std::size_t expected) const {
  const auto tokens = split_ws(text(key));
  if (tokens.size() != expected) {
    throw Error(ErrorCode::kFormat, origin_ + ": key '" + key + "' needs " + std::to_string(expected) +
                                        " values, found " + std::to_string(tokens.size()));
  }
  std::vector<double> out;
  for (const auto& t : tokens) out.push_back(parse_double(t, origin_ + ": key '" + key + "'"));
  return out;
}

std::string KeyValues::serialize() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

KeyValues KeyValues::parse(const std::string& content, const std::string& origin) {
  KeyValues kv;
  kv.origin_ = origin;
  std::istringstream in(content);
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kFormat, origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) throw Error(ErrorCode::kFormat, origin + ":" + std::to_string(line_no) + ": empty key");
    kv.set(key, trim(std::string_view(t).substr(eq + 1)));
  }
  return kv;
}

KeyValues KeyValues::read(const fs::path& path) { return parse(read_text(path), path.string()); }

void KeyValues::write(const fs::path& path) const { write_text(path, serialize()); }

KeyValues camera_to_kv(const CameraModel& camera) {
  KeyValues kv;
  kv.set("fx_px", camera.fx());
  kv.set("fy_px", camera.fy());
  kv.set("cx_px", camera.cx());
  kv.set("cy_px", camera.cy());
  kv.set_int("width_px", camera.width());
  kv.set_int("height_px", camera.height());
  kv.set("extrinsic_camera_from_world_4x4", row_major(camera.extrinsic().matrix()));
  return kv;
}

CameraModel camera_from_kv(const KeyValues& kv) {
  const auto extrinsic = RigidTransform::from_matrix(from_row_major<4, 4>(kv.numbers("extrinsic_camera_from_world_4x4", 16)));
  return CameraModel(kv.number("fx_px"), kv.number("fy_px"), kv.number("cx_px"), kv.number("cy_px"),
                     static_cast<int>(kv.integer("width_px")), static_cast<int>(kv.integer("height_px")),
                     extrinsic);
}

void write_camera(const fs::path& path, const CameraModel& camera) { camera_to_kv(camera).write(path); }

CameraModel read_camera(const fs::path& path) {
  require_file(path);
  try {
    return camera_from_kv(KeyValues::read(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kFormat || e.code() == ErrorCode::kIo) throw;
    throw Error(ErrorCode::kFormat, path.string() + ": " + e.what());
  }
}

void write_ground_truth(const fs::path& path, const GroundTruth& gt) {
  KeyValues kv;
  kv.set("R_gt_rowmajor", row_major(gt.rotation));
  kv.set("t_gt_m", row_major<3, 1>(gt.translation));
  kv.set("s_gt", gt.scale);
  kv.set("symmetry", gt.symmetry.to_string());
  kv.write(path);
}

GroundTruth read_ground_truth(const fs::path& path) {
  require_file(path);
  const auto kv = KeyValues::read(path);
  GroundTruth gt;
  gt.rotation = from_row_major<3, 3>(kv.numbers("R_gt_rowmajor", 9));
  gt.translation = from_row_major<3, 1>(kv.numbers("t_gt_m", 3));
  gt.scale = kv.number("s_gt");
  gt.symmetry = kv.has("symmetry") ? SymmetryGroup::parse(kv.text("symmetry")) : SymmetryGroup::none();
  return gt;
}

void write_solution(const fs::path& path, const PlacementSolution& s) {
  KeyValues kv;
  kv.set("R_v_rowmajor", row_major(s.rotation));
  kv.set("t_v_m", row_major<3, 1>(s.translation));
  kv.set("S_v", s.scale);
  kv.set("T_v_rowmajor_4x4", row_major(s.transform));
  kv.set("residual_m", s.residual_m);
  kv.set_int("degraded", s.degraded ? 1 : 0);
  kv.set_int("candidate", s.view_score.candidate);
  kv.set_int("view_index", s.view_score.view_index);
  kv.set_int("roll_index", s.view_score.roll_index);
  kv.set("s_ssim", s.view_score.s_ssim);
  kv.set("s_edge", s.view_score.s_edge);
  kv.set("s_ratio", s.view_score.s_ratio);
  kv.set("s_total", s.view_score.total);
  std::vector<double> pixels;
  for (const auto& p : s.keypoints.representatives) {
    pixels.push_back(p.x());
    pixels.push_back(p.y());
  }
  kv.set("contact_keypoints_px", pixels);
  std::vector<double> scene;
  for (const auto& p : s.keypoints.scene) scene.insert(scene.end(), {p.x(), p.y(), p.z()});
  kv.set("contact_scene_m", scene);
  kv.write(path);
}

PlacementSolution read_solution(const fs::path& path) {
  require_file(path);
  const auto kv = KeyValues::read(path);
  PlacementSolution s;
  s.rotation = from_row_major<3, 3>(kv.numbers("R_v_rowmajor", 9));
  s.translation = from_row_major<3, 1>(kv.numbers("t_v_m", 3));
  s.scale = kv.number("S_v");
  s.transform = from_row_major<4, 4>(kv.numbers("T_v_rowmajor_4x4", 16));
  s.residual_m = kv.number("residual_m");
  s.degraded = kv.integer("degraded") != 0;
  s.view_score.candidate = static_cast<int>(kv.integer("candidate"));
  s.view_score.view_index = static_cast<int>(kv.integer("view_index"));
  s.view_score.roll_index = static_cast<int>(kv.integer("roll_index"));
  s.view_score.s_ssim = kv.number("s_ssim");
  s.view_score.s_edge = kv.number("s_edge");
  s.view_score.s_ratio = kv.number("s_ratio");
  s.view_score.total = kv.number("s_total");
  s.view_score.rendered = true;
  s.view_score.fully_scored = true;
  if (kv.has("contact_keypoints_px")) {
    const auto px = kv.numbers("contact_keypoints_px", 6);
    for (int i = 0; i < 3; ++i) {
      s.keypoints.representatives[i] = Pixel(static_cast<int>(px[2 * i]), static_cast<int>(px[2 * i + 1]));
    }
  }
  if (kv.has("contact_scene_m")) {
    const auto p = kv.numbers("contact_scene_m", 9);
    for (int i = 0; i < 3; ++i) s.keypoints.scene[i] = Vec3(p[3 * i], p[3 * i + 1], p[3 * i + 2]);
  }
  return s;
}

// ---- scene packages ----

void write_scene(const fs::path& dir, const ScenePackage& scene) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) io_error(dir, "cannot create directory: " + ec.message());
  write_gray_png(dir / "rgb.png", scene.rgb);
  write_depth_png(dir / "depth_observed.png", scene.depth_observed);
  write_depth_f32(dir / "depth_observed.f32", scene.depth_observed);
  write_depth_png(dir / "depth_clean.png", scene.depth_clean);
  write_depth_f32(dir / "depth_clean.f32", scene.depth_clean);
  write_mask_png(dir / "mask.png", scene.mask);
  write_camera(dir / "camera.txt", scene.camera);
  {
    std::ostringstream mesh;
    write_ply(scene.mesh, mesh);
    write_text(dir / "mesh.ply", mesh.str());
  }
  if (scene.has_ground_truth) {
    write_ground_truth(dir / "gt.txt", {scene.gt_rotation, scene.gt_translation, scene.gt_scale, scene.symmetry});
  }
  KeyValues seed;
  seed.set("scene_id", scene.scene_id);
  seed.set("seed", std::to_string(scene.seed));
  seed.write(dir / "seed.txt");
}

ScenePackage read_scene(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(ErrorCode::kInput, dir.string() + ": scene directory not found");
  ScenePackage scene;
  scene.rgb = read_gray_png(dir / "rgb.png");
  const auto depth = [&](const char* stem) {
    const fs::path f32 = dir / (std::string(stem) + ".f32");
    return fs::exists(f32) ? read_depth_f32(f32) : read_depth_png(dir / (std::string(stem) + ".png"));
  };
  scene.depth_observed = depth("depth_observed");
  scene.mask = read_mask_png(dir / "mask.png");
  scene.camera = read_camera(dir / "camera.txt");
  require_file(dir / "mesh.ply");
  try {
    scene.mesh = parse_mesh(read_text(dir / "mesh.ply"), MeshFormat::kPly);
  } catch (const Error& e) {
    throw Error(e.code(), (dir / "mesh.ply").string() + ": " + e.what());
  }
  scene.has_ground_truth = fs::exists(dir / "gt.txt");
  if (scene.has_ground_truth) {
    const auto gt = read_ground_truth(dir / "gt.txt");
    scene.gt_rotation = gt.rotation;
    scene.gt_translation = gt.translation;
    scene.gt_scale = gt.scale;
    scene.symmetry = gt.symmetry;
    scene.depth_clean = depth("depth_clean");
  }
  if (fs::exists(dir / "seed.txt")) {
    const auto kv = KeyValues::read(dir / "seed.txt");
    if (kv.has("scene_id")) scene.scene_id = kv.text("scene_id");
    if (kv.has("seed")) {
      const std::string& text = kv.text("seed");
      const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), scene.seed);
      if (ec != std::errc{} || end != text.data() + text.size()) {
        throw Error(ErrorCode::kFormat, (dir / "seed.txt").string() + ": seed is not an unsigned integer");
      }
    }
  }
  if (scene.scene_id.empty()) scene.scene_id = dir.filename().string();
  return scene;
}

// ---- reconstruction artifacts ----

void write_point_cloud(const fs::path& path, const std::vector<CloudPoint>& cloud) {
  std::string out = "ply\nformat ascii 1.0\nelement vertex " + std::to_string(cloud.size()) +
                    "\nproperty double x\nproperty double y\nproperty double z\n"
                    "property uchar provenance\nend_header\n";
  for (const auto& p : cloud) {
    out += format_double(p.position.x()) + ' ' + format_double(p.position.y()) + ' ' +
           format_double(p.position.z()) + ' ' + std::to_string(static_cast<int>(p.provenance)) + '\n';
  }
  write_text(path, out);
}

void write_score_csv(const fs::path& path, const ViewMatchResult& match) {
  std::string out = "candidate,view_index,roll_index,yaw_deg,pitch_deg,roll_deg,s_ssim,s_edge,s_ratio,total\n";
  const double nan = std::nan("");
  for (std::size_t i = 0; i < match.scores.size(); ++i) {
    const auto& s = match.scores[i];
    const auto& c = match.candidates[i];
    out += std::to_string(c.index) + ',' + std::to_string(c.view_index) + ',' + std::to_string(c.roll_index) + ',' +
           format_double(c.yaw_deg) + ',' + format_double(c.pitch_deg) + ',' + format_double(c.roll_deg) + ',' +
           format_double(s.fully_scored ? s.s_ssim : nan) + ',' + format_double(s.rendered ? s.s_edge : nan) +
           ',' + format_double(s.rendered ? s.s_ratio : nan) + ',' + format_double(s.fully_scored ? s.total : nan) +
           '\n';
  }
  write_text(path, out);
}

void write_text(const fs::path& path, const std::string& content) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) io_error(path, "cannot open for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) io_error(path, "write failed");
}

std::string read_text(const fs::path& path) {
  require_file(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) io_error(path, "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace meshplace::io
