#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lcert/certify.hpp"

namespace lcert::report {

/// Certificates arranged the way the result tables lay them out: one row per
/// eta, one column per method.
struct CertTable {
  std::vector<double> etas;           // sorted ascending
  std::vector<std::string> methods;   // column order = first-seen order
  // cells[method][eta index]; absent entry means no certificate supplied
  std::map<std::string, std::vector<std::optional<cert::Certificate>>> cells;
  std::map<std::string, double> offsets;  // per-method reporting offsets

  const std::optional<cert::Certificate>& cell(const std::string& method, int eta_idx) const;
};

/// Groups labeled certificates by eta and method. Unless allow_mixed is set,
/// all certificates must share (q, sigma, n, alpha) so the table compares
/// like with like.
CertTable build_table(const std::vector<std::pair<std::string, cert::Certificate>>& labeled,
                      bool allow_mixed = false);

/// rows = eta, columns = methods, cells = bound*100 with two decimals or
/// "-" for abstentions. Methods with an offset get an extra column holding
/// raw + offset; raw cells are never mutated.
std::string table_to_csv(const CertTable& table);

/// Line plot of bound vs eta per method; a pure function of the table.
std::string table_to_svg(const CertTable& table);

}  // namespace lcert::report
