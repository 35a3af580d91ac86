#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mimpact {

/// Parametric impact functions fitted by the estimation pipeline.
enum class Family {
  constant,      // c
  power,         // Y pi^delta
  log,           // a log10(1 + b pi)
  double_power,  // Y eta^delta F^gamma1
  double_log,    // a log10(1 + b eta) log10(1 + c F)
  book_n0,       // Y log(1 + c pi) / log(1 + c), c = e^b - 1
  book_n1,       // latent-book inversion with n = 1
  book_n,        // latent-book inversion, n fitted
};

struct FamilyInfo {
  Family family;
  std::string_view name;
  std::vector<std::string> param_names;
  int n_inputs;  // 1: pi, 2: (eta, F)
};

const FamilyInfo& family_info(Family f);
Family parse_family(std::string_view name);
std::vector<Family> all_families();

bool family_params_valid(Family f, std::span<const double> params);

/// Model values at (x1[i], x2[i]); x2 is ignored by single-input families.
/// Returns NaN entries where the model is undefined (for example a saturated book).
std::vector<double> family_predict(Family f, std::span<const double> params,
                                   std::span<const double> x1, std::span<const double> x2 = {});

double family_eval(Family f, std::span<const double> params, double x1, double x2 = 0);

}  // namespace mimpact
