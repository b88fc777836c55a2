#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "cli.hpp"
#include "commands.hpp"
#include "ivspline/errors.hpp"

namespace ivspline::cli {

namespace {

struct Curve {
  std::string label;
  std::vector<double> z, g;
};

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

Curve read_curve(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(ErrorKind::schema, "cannot open \"" + path + "\"");
  std::string line;
  if (!std::getline(in, line)) throw InputError(ErrorKind::size, "\"" + path + "\" is empty");
  if (trim(line) != "z,ghat,ghat_prime") {
    throw InputError(ErrorKind::schema, "\"" + path + "\" lacks the header z,ghat,ghat_prime");
  }
  Curve c;
  c.label = std::filesystem::path(path).stem().string();
  int row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    std::stringstream ss(line);
    std::string cell;
    double vals[3];
    int k = 0;
    while (std::getline(ss, cell, ',')) {
      if (k >= 3) break;
      char* end = nullptr;
      const std::string t = trim(cell);
      vals[k] = std::strtod(t.c_str(), &end);
      if (t.empty() || *end != '\0' || !std::isfinite(vals[k])) {
        throw InputError(ErrorKind::parse, "\"" + path + "\" row " + std::to_string(row) + ": bad number");
      }
      ++k;
    }
    if (k != 3) throw InputError(ErrorKind::parse, "\"" + path + "\" row " + std::to_string(row) + ": expected 3 cells");
    c.z.push_back(vals[0]);
    c.g.push_back(vals[1]);
  }
  if (c.z.empty()) throw InputError(ErrorKind::size, "\"" + path + "\" has no data rows");
  return c;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
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

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

}  // namespace

void add_plot_options(CLI::App& cmd, PlotOptions& opts) {
  cmd.add_option("inputs", opts.inputs, "curve CSV files")->required();
  cmd.add_option("--out", opts.out, "SVG file")->required();
  cmd.add_option("--title", opts.title, "plot title");
}

int run_plot(const PlotOptions& opts, std::ostream& out) {
  std::vector<Curve> curves;
  for (const std::string& path : opts.inputs) curves.push_back(read_curve(path));

  double zmin = INFINITY, zmax = -INFINITY, gmin = INFINITY, gmax = -INFINITY;
  for (const Curve& c : curves) {
    zmin = std::min(zmin, *std::min_element(c.z.begin(), c.z.end()));
    zmax = std::max(zmax, *std::max_element(c.z.begin(), c.z.end()));
    gmin = std::min(gmin, *std::min_element(c.g.begin(), c.g.end()));
    gmax = std::max(gmax, *std::max_element(c.g.begin(), c.g.end()));
  }
  if (zmax == zmin) zmax = zmin + 1.0;
  if (gmax == gmin) gmax = gmin + 1.0;

  const double width = 720, height = 480, left = 70, right = 180, top = 40, bottom = 50;
  const double pw = width - left - right, ph = height - top - bottom;
  auto sx = [&](double z) { return left + (z - zmin) / (zmax - zmin) * pw; };
  auto sy = [&](double g) { return top + (gmax - g) / (gmax - gmin) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!opts.title.empty()) {
    svg << "<text x=\"" << num(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
        << xml_escape(opts.title) << "</text>\n";
  }
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double z = zmin + (zmax - zmin) * k / 4.0;
    const double g = gmin + (gmax - gmin) * k / 4.0;
    svg << "<text x=\"" << num(sx(z)) << "\" y=\"" << num(top + ph + 18) << "\" text-anchor=\"middle\">" << tick(z)
        << "</text>\n";
    svg << "<text x=\"" << num(left - 6) << "\" y=\"" << num(sy(g) + 4) << "\" text-anchor=\"end\">" << tick(g)
        << "</text>\n";
  }
  svg << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(height - 10) << "\" text-anchor=\"middle\">z</text>\n";

  svg << "<g class=\"legend\">\n";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const double y = top + 16 + 20.0 * static_cast<double>(i);
    const char* color = kPalette[i % std::size(kPalette)];
    svg << "<line x1=\"" << num(left + pw + 12) << "\" y1=\"" << num(y) << "\" x2=\"" << num(left + pw + 36)
        << "\" y2=\"" << num(y) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>"
        << "<text x=\"" << num(left + pw + 42) << "\" y=\"" << num(y + 4) << "\">" << xml_escape(curves[i].label)
        << "</text>\n";
  }
  svg << "</g>\n";

  for (std::size_t i = 0; i < curves.size(); ++i) {
    const Curve& c = curves[i];
    std::vector<std::size_t> order(c.z.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return c.z[a] < c.z[b]; });
    svg << "<polyline fill=\"none\" stroke=\"" << kPalette[i % std::size(kPalette)] << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < order.size(); ++k) {
      svg << (k ? " " : "") << num(sx(c.z[order[k]])) << ',' << num(sy(c.g[order[k]]));
    }
    svg << "\"/>\n";
  }
  svg << "</svg>\n";

  std::ofstream f(opts.out, std::ios::binary);
  if (!f) throw InputError(ErrorKind::schema, "cannot write \"" + opts.out + "\"");
  f << svg.str();
  out << "wrote " << curves.size() << " curve(s) to " << opts.out << '\n';
  return kExitOk;
}

}  // namespace ivspline::cli
