#pragma once

#include <string>
#include <vector>

namespace monoflow {

struct PlotCurve {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

/// Minimal log-log polyline plot; nonpositive samples are dropped.
void write_loglog_svg(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<PlotCurve>& curves);

}  // namespace monoflow
