#include "salfuse/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "salfuse/error.hpp"

namespace salfuse {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

void require_same_shape(const SaliencyMap& a, const SaliencyMap& b, const char* what) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw Error(Errc::shape_mismatch, std::string(what) + ": dimension mismatch");
  }
}

}  // namespace

DatasetManifest load_manifest(const fs::path& path, bool check_paths) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::file_not_found, "cannot open manifest " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::corrupt_data, "manifest " + path.string() + ": " + e.what());
  }
  const fs::path base = path.parent_path();
  DatasetManifest m;
  m.name = doc.value("name", path.stem().string());
  if (!doc.contains("entries") || !doc["entries"].is_array()) {
    throw Error(Errc::corrupt_data, "manifest " + path.string() + " has no entries array");
  }
  std::set<std::string> ids;
  for (const auto& e : doc["entries"]) {
    if (!e.contains("image") || !e.contains("gt")) {
      throw Error(Errc::corrupt_data, "manifest entry needs image and gt");
    }
    ManifestEntry entry;
    entry.image = resolve(base, e["image"].get<std::string>());
    entry.gt = resolve(base, e["gt"].get<std::string>());
    if (e.contains("deep") && !e["deep"].is_null()) {
      entry.deep = resolve(base, e["deep"].get<std::string>());
    }
    entry.id = e.contains("id") ? e["id"].get<std::string>() : entry.image.stem().string();
    if (!ids.insert(entry.id).second) {
      throw Error(Errc::invalid_argument, "duplicate manifest id " + entry.id);
    }
    if (check_paths) {
      for (const fs::path* p : {&entry.image, &entry.gt}) {
        if (!fs::exists(*p)) throw Error(Errc::file_not_found, "missing " + p->string());
      }
      if (entry.deep && !fs::exists(*entry.deep)) {
        throw Error(Errc::file_not_found, "missing " + entry.deep->string());
      }
    }
    m.entries.push_back(std::move(entry));
  }
  return m;
}

void save_manifest(const DatasetManifest& manifest, const fs::path& path) {
  const fs::path base = fs::absolute(path).parent_path();
  auto rel = [&](const fs::path& p) {
    return fs::absolute(p).lexically_relative(base).generic_string();
  };
  json doc;
  doc["name"] = manifest.name;
  doc["entries"] = json::array();
  for (const auto& e : manifest.entries) {
    json j{{"id", e.id}, {"image", rel(e.image)}, {"gt", rel(e.gt)}};
    if (e.deep) j["deep"] = rel(*e.deep);
    doc["entries"].push_back(std::move(j));
  }
  std::ofstream out(path);
  out << doc.dump(2) << '\n';
  if (!out) throw Error(Errc::io_write_failure, "cannot write " + path.string());
}

SaliencyMap load_ground_truth(const fs::path& path) {
  SaliencyMap gt = load_map(path, Provenance::ground_truth);
  for (double& v : gt.values()) v = quantize_u8(v) >= 128 ? 1.0 : 0.0;
  return gt;
}

double mae(const SaliencyMap& s, const SaliencyMap& gt) {
  require_same_shape(s, gt, "mae");
  double acc = 0.0;
  for (std::size_t p = 0; p < s.size(); ++p) acc += std::abs(s[p] - gt[p]);
  return acc / static_cast<double>(s.size());
}

std::optional<PrCurve> pr_points(const SaliencyMap& s, const SaliencyMap& gt) {
  require_same_shape(s, gt, "pr_points");
  std::array<std::size_t, 256> all{}, pos{};
  std::size_t positives = 0;
  for (std::size_t p = 0; p < s.size(); ++p) {
    if (gt[p] != 0.0 && gt[p] != 1.0) {
      throw Error(Errc::invalid_argument, "pr_points needs a binary ground truth");
    }
    const int q = quantize_u8(s[p]);
    ++all[q];
    if (gt[p] == 1.0) {
      ++pos[q];
      ++positives;
    }
  }
  if (positives == 0) return std::nullopt;

  PrCurve curve{};
  std::size_t detected = 0, tp = 0;
  for (int t = 255; t >= 0; --t) {
    detected += all[t];
    tp += pos[t];
    curve[t].threshold = t;
    curve[t].precision =
        detected == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(detected);
    curve[t].recall = static_cast<double>(tp) / static_cast<double>(positives);
  }
  return curve;
}

EvalReport evaluate_maps(const std::string& dataset, const std::string& method,
                         std::span<const std::string> ids,
                         std::span<const SaliencyMap> predictions,
                         std::span<const SaliencyMap> gts, int skipped) {
  if (ids.size() != predictions.size() || ids.size() != gts.size()) {
    throw Error(Errc::invalid_argument, "evaluate_maps: input lengths differ");
  }
  EvalReport rep;
  rep.dataset = dataset;
  rep.method = method;
  rep.images_skipped = skipped;
  for (int t = 0; t < 256; ++t) rep.pr_curve[t].threshold = t;

  std::array<double, 256> psum{}, rsum{};
  int pr_images = 0;
  double mae_sum = 0.0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const SaliencyMap& gt = gts[i];
    const SaliencyMap pred =
        (predictions[i].height() == gt.height() && predictions[i].width() == gt.width())
            ? predictions[i]
            : resize_map(predictions[i], gt.height(), gt.width());
    ImageScore score{ids[i], mae(pred, gt), false};
    if (const auto curve = pr_points(pred, gt)) {
      score.has_pr = true;
      ++pr_images;
      for (int t = 0; t < 256; ++t) {
        psum[t] += (*curve)[t].precision;
        rsum[t] += (*curve)[t].recall;
      }
    } else {
      ++rep.pr_skipped_empty_gt;
    }
    mae_sum += score.mae;
    rep.per_image.push_back(std::move(score));
  }
  rep.images_evaluated = static_cast<int>(rep.per_image.size());
  if (rep.images_evaluated > 0) rep.mean_mae = mae_sum / rep.images_evaluated;
  if (pr_images > 0) {
    for (int t = 0; t < 256; ++t) {
      rep.pr_curve[t].precision = psum[t] / pr_images;
      rep.pr_curve[t].recall = rsum[t] / pr_images;
    }
  }
  return rep;
}

EvalReport evaluate_dataset(const DatasetManifest& manifest, const fs::path& pred_dir,
                            const std::string& method) {
  std::vector<std::string> ids;
  std::vector<SaliencyMap> preds, gts;
  int skipped = 0;
  for (const auto& e : manifest.entries) {
    const fs::path pred_path = pred_dir / (e.id + ".png");
    if (!fs::exists(pred_path)) {
      ++skipped;
      continue;
    }
    try {
      SaliencyMap pred = load_map(pred_path, Provenance::fused);
      SaliencyMap gt = load_ground_truth(e.gt);
      ids.push_back(e.id);
      preds.push_back(std::move(pred));
      gts.push_back(std::move(gt));
    } catch (const Error&) {
      ++skipped;
    }
  }
  if (ids.empty()) {
    throw Error(Errc::all_skipped, "no predictions could be evaluated in " + pred_dir.string());
  }
  return evaluate_maps(manifest.name, method, ids, preds, gts, skipped);
}

json to_json(const EvalReport& r) {
  json j;
  j["dataset"] = r.dataset;
  j["method"] = r.method;
  j["mean_mae"] = r.mean_mae;
  j["images_evaluated"] = r.images_evaluated;
  j["images_skipped"] = r.images_skipped;
  j["pr_skipped_empty_gt"] = r.pr_skipped_empty_gt;
  j["resolution"] = r.resolution;
  j["per_image"] = json::array();
  for (const auto& s : r.per_image) {
    j["per_image"].push_back({{"id", s.id}, {"mae", s.mae}, {"has_pr", s.has_pr}});
  }
  j["pr_curve"] = json::array();
  for (const auto& p : r.pr_curve) {
    j["pr_curve"].push_back(
        {{"threshold", p.threshold}, {"precision", p.precision}, {"recall", p.recall}});
  }
  return j;
}

void write_report_json(const EvalReport& report, const fs::path& path) {
  std::ofstream out(path);
  out << to_json(report).dump(2) << '\n';
  if (!out) throw Error(Errc::io_write_failure, "cannot write " + path.string());
}

void write_pr_csv(const EvalReport& report, const fs::path& path) {
  std::ofstream out(path);
  out << "threshold,precision,recall\n";
  for (const auto& p : report.pr_curve) {
    out << p.threshold << ',' << format_double(p.precision) << ','
        << format_double(p.recall) << '\n';
  }
  if (!out) throw Error(Errc::io_write_failure, "cannot write " + path.string());
}

PrSeries read_pr_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::file_not_found, "cannot open " + path.string());
  PrSeries s;
  s.label = path.stem().string();
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string t, p, r;
    if (!std::getline(row, t, ',') || !std::getline(row, p, ',') || !std::getline(row, r)) {
      throw Error(Errc::corrupt_data, "malformed PR row in " + path.string());
    }
    try {
      s.precision.push_back(std::stod(p));
      s.recall.push_back(std::stod(r));
    } catch (const std::exception&) {
      throw Error(Errc::corrupt_data, "malformed PR value in " + path.string());
    }
  }
  return s;
}

std::string render_pr_svg(std::span<const PrSeries> series, const std::string& title) {
  constexpr int W = 640, H = 480, L = 70, R = 20, T = 40, B = 60;
  constexpr const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  const double pw = W - L - R, ph = H - T - B;
  auto px = [&](double recall) { return L + recall * pw; };
  auto py = [&](double precision) { return T + (1.0 - precision) * ph; };

  std::ostringstream svg;
  svg.setf(std::ios::fixed);
  svg.precision(2);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
      << xml_escape(title) << "</text>\n";
  for (int i = 0; i <= 10; ++i) {
    const double v = i / 10.0;
    svg << "<line x1=\"" << px(v) << "\" y1=\"" << T << "\" x2=\"" << px(v) << "\" y2=\""
        << T + ph << "\" stroke=\"#ddd\"/>\n"
        << "<line x1=\"" << L << "\" y1=\"" << py(v) << "\" x2=\"" << L + pw << "\" y2=\""
        << py(v) << "\" stroke=\"#ddd\"/>\n"
        << "<text x=\"" << px(v) << "\" y=\"" << T + ph + 18
        << "\" text-anchor=\"middle\" font-size=\"11\">" << v << "</text>\n"
        << "<text x=\"" << L - 8 << "\" y=\"" << py(v) + 4
        << "\" text-anchor=\"end\" font-size=\"11\">" << v << "</text>\n";
  }
  svg << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n"
      << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 18
      << "\" text-anchor=\"middle\" font-size=\"13\">Recall</text>\n"
      << "<text transform=\"translate(18 " << T + ph / 2
      << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"13\">Precision</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = colors[i % std::size(colors)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < s.precision.size(); ++k) {
      svg << px(std::clamp(s.recall[k], 0.0, 1.0)) << ','
          << py(std::clamp(s.precision[k], 0.0, 1.0)) << ' ';
    }
    svg << "\"/>\n";
    const double ly = T + 16 + 18.0 * static_cast<double>(i);
    svg << "<line x1=\"" << L + 12 << "\" y1=\"" << ly << "\" x2=\"" << L + 36 << "\" y2=\""
        << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << L + 42 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">" << xml_escape(s.label)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace salfuse
