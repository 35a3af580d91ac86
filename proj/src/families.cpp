#include "mimpact/families.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "mimpact/errors.hpp"
#include "mimpact/latent_book.hpp"

namespace mimpact {

namespace {

const std::array<FamilyInfo, 8>& registry() {
  static const std::array<FamilyInfo, 8> infos = {{
      {Family::constant, "constant", {"c"}, 1},
      {Family::power, "power", {"Y", "delta"}, 1},
      {Family::log, "log", {"a", "b"}, 1},
      {Family::double_power, "double_power", {"Y", "delta", "gamma1"}, 2},
      {Family::double_log, "double_log", {"a", "b", "c"}, 2},
      {Family::book_n0, "book_n0", {"Y", "b"}, 1},
      {Family::book_n1, "book_n1", {"Y", "b"}, 1},
      {Family::book_n, "book_n", {"Y", "b", "n"}, 1},
  }};
  return infos;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

const FamilyInfo& family_info(Family f) { return registry()[static_cast<std::size_t>(f)]; }

Family parse_family(std::string_view name) {
  for (const auto& info : registry()) {
    if (info.name == name) return info.family;
  }
  throw DomainError("unknown model family '" + std::string(name) + "'");
}

std::vector<Family> all_families() {
  std::vector<Family> out;
  for (const auto& info : registry()) out.push_back(info.family);
  return out;
}

bool family_params_valid(Family f, std::span<const double> p) {
  if (p.size() != family_info(f).param_names.size()) return false;
  for (double v : p) {
    if (!std::isfinite(v)) return false;
  }
  switch (f) {
    case Family::constant:
    case Family::power:
    case Family::double_power:
      return true;
    case Family::log:
      return p[1] > 0;
    case Family::double_log:
      return p[1] > 0 && p[2] > 0;
    case Family::book_n0:
      return p[1] > 0 && p[1] <= 600;
    case Family::book_n1:
      return p[0] > 0 && p[1] > 0 && p[1] <= 600;
    case Family::book_n:
      return p[0] > 0 && p[1] > 0 && p[1] <= 600 && p[2] >= 0 && p[2] <= 50;
  }
  return false;
}

std::vector<double> family_predict(Family f, std::span<const double> p, std::span<const double> x1,
                                   std::span<const double> x2) {
  if (p.size() != family_info(f).param_names.size()) {
    throw DomainError("wrong parameter count for family " + std::string(family_info(f).name));
  }
  if (family_info(f).n_inputs == 2 && x2.size() != x1.size()) {
    throw DomainError("family " + std::string(family_info(f).name) + " needs (eta, F) inputs");
  }
  std::vector<double> out(x1.size(), kNaN);
  if (!family_params_valid(f, p)) return out;
  switch (f) {
    case Family::constant:
      for (std::size_t i = 0; i < x1.size(); ++i) out[i] = p[0];
      break;
    case Family::power:
      for (std::size_t i = 0; i < x1.size(); ++i) out[i] = p[0] * std::pow(x1[i], p[1]);
      break;
    case Family::log:
      for (std::size_t i = 0; i < x1.size(); ++i) out[i] = p[0] * std::log10(1 + p[1] * x1[i]);
      break;
    case Family::double_power:
      for (std::size_t i = 0; i < x1.size(); ++i) {
        out[i] = p[0] * std::pow(x1[i], p[1]) * std::pow(x2[i], p[2]);
      }
      break;
    case Family::double_log:
      for (std::size_t i = 0; i < x1.size(); ++i) {
        out[i] = p[0] * std::log10(1 + p[1] * x1[i]) * std::log10(1 + p[2] * x2[i]);
      }
      break;
    case Family::book_n0:
      for (std::size_t i = 0; i < x1.size(); ++i) out[i] = impact_log_closed(p[0], p[1], x1[i]);
      break;
    case Family::book_n1:
    case Family::book_n: {
      const double n = f == Family::book_n1 ? 1.0 : p[2];
      const LatentBook book(BookParams{p[0], p[1], n});
      for (std::size_t i = 0; i < x1.size(); ++i) {
        if (x1[i] >= 0 && x1[i] <= book.capacity()) out[i] = book.invert(x1[i]);
      }
      break;
    }
  }
  return out;
}

double family_eval(Family f, std::span<const double> params, double x1, double x2) {
  const double a[1] = {x1};
  const double b[1] = {x2};
  return family_predict(f, params, a, b)[0];
}

}  // namespace mimpact
