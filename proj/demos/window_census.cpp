// Window count and central feature for every built-in DirectG preset.

#include <cstdio>
#include <string>

#include "omit/omit.hpp"

int main() {
  std::printf("%-12s %3s %6s %-15s %s\n", "preset", "N", "count", "central", "width");
  for (const auto& name : omit::presets::names()) {
    const omit::PhysicalConfig c = *omit::presets::find(name);
    if (!std::holds_alternative<omit::DirectG>(c.drive_mode)) continue;
    const omit::NormalizedSystem s = omit::normalize(c);
    const omit::ResponseSpectrum sp = omit::spectrum(s, -3.0, 3.0, 20001, omit::Method::cf);
    const omit::WindowReport rep = omit::detect_windows(sp);
    std::string width = "-";
    if (rep.central_feature != omit::CentralFeature::SplitPeak) {
      width = std::to_string(omit::central_feature_width(sp));
    }
    std::printf("%-12s %3d %6zu %-15s %s\n", name.c_str(), c.n_cavities, rep.count,
                std::string(omit::to_string(*rep.central_feature)).c_str(), width.c_str());
  }
}
