// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT

#ifndef STAGGER_CSV_HPP
#define STAGGER_CSV_HPP

#include <iosfwd>
#include <string>

#include "stagger/panel.hpp"

namespace stagger {

// Panel CSV format (header required):
//   unit,time,outcome,cohort[,x1..xd][,exposure][,observed]
// cohort is an adoption time or the literal "inf" for never-treated units;
// observed is 0/1 (attrition mask). Every (unit, time) combination must be a
// row; attrition is expressed through the observed column only.
PanelInput read_panel_csv(std::istream& is);
PanelInput read_panel_csv_file(const std::string& path);

void write_panel_csv(const Panel& p, std::ostream& os);
void write_panel_csv_file(const Panel& p, const std::string& path);

}  // namespace stagger

#endif  // STAGGER_CSV_HPP
